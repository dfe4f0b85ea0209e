fn main() {
    std::process::exit(pacebench::cli::run(std::env::args_os()));
}
