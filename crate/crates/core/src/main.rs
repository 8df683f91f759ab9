fn main() {
    std::process::exit(confmetric::cli::run(std::env::args_os()));
}
