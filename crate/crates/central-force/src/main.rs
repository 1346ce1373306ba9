fn main() {
    std::process::exit(central_force::cli::run(std::env::args_os()));
}
