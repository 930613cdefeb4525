fn main() {
    std::process::exit(rankfair::cli::run_from(std::env::args_os()));
}
