fn main() {
    std::process::exit(dfdr::cli::run_from_args(std::env::args_os()));
}
