fn main() {
    std::process::exit(scma_forge::cli::run(std::env::args_os()));
}
