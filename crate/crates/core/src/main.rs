fn main() {
    std::process::exit(blendplan::cli::run(std::env::args_os()));
}
