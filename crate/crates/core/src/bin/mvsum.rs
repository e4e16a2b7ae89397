fn main() {
    std::process::exit(mvsum::cli::run(std::env::args_os()));
}
