fn main() {
    std::process::exit(qwot_cli::run_cli(std::env::args_os()));
}
