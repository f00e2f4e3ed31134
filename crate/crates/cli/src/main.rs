fn main() {
    std::process::exit(verblunsky_cli::run(std::env::args_os()));
}
