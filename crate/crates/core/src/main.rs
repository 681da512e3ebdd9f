fn main() {
    std::process::exit(hkan::cli::run_cli(std::env::args_os()));
}
