fn main() {
    std::process::exit(mlridge::cli::main_with_args(std::env::args_os()));
}
