fn main() {
    std::process::exit(graphnls_cli::run(std::env::args_os()));
}
