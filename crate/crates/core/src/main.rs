fn main() {
    std::process::exit(sigma_evolve::cli::run(std::env::args_os()));
}
