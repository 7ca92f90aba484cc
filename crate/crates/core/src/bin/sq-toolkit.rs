fn main() {
    std::process::exit(sq_toolkit::cli::run(std::env::args_os()));
}
