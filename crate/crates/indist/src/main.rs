fn main() {
    std::process::exit(indist::cli::run(std::env::args_os()));
}
