fn main() {
    std::process::exit(andwp::cli::run(std::env::args_os()));
}
