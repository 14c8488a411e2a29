fn main() {
    std::process::exit(indist_core::cli::run(std::env::args_os()));
}
