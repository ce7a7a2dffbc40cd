fn main() {
    std::process::exit(hardylab::cli::run(std::env::args_os()));
}
