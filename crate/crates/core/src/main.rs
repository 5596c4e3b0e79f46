fn main() {
    std::process::exit(wsum::cli::run(std::env::args_os()));
}
