fn main() {
    std::process::exit(haargp::cli::run(std::env::args_os()));
}
