fn main() {
    std::process::exit(zeroweight::cli::run(std::env::args_os()));
}
