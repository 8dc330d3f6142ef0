fn main() {
    std::process::exit(dirquant::cli::main_with_args(std::env::args_os()));
}
