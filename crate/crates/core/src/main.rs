fn main() {
    std::process::exit(sggd::cli::run_cli(std::env::args_os()));
}
