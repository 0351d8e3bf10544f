fn main() {
    std::process::exit(minmaxnet::cli::run(std::env::args_os()));
}
