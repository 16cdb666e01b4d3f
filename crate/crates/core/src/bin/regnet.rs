fn main() {
    std::process::exit(regnet::cli::run(std::env::args_os()));
}
