fn main() {
    std::process::exit(pointderiv::cli::run(std::env::args_os()));
}
