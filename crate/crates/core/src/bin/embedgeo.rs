fn main() {
    std::process::exit(embedgeo::cli::run(std::env::args_os()));
}
