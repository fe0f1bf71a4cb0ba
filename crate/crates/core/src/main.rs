fn main() {
    std::process::exit(deep_ibp::cli::run(std::env::args_os()));
}
