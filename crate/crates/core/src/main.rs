fn main() {
    std::process::exit(pushtasep::cli::run(std::env::args_os()));
}
