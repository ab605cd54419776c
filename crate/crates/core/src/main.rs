fn main() {
    std::process::exit(bmtk::cli::run(std::env::args_os()));
}
