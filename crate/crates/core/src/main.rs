fn main() {
    std::process::exit(featbounds::cli::main_with_args(std::env::args_os()));
}
