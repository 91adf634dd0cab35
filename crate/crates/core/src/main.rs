fn main() {
    std::process::exit(deltanls::cli::main_with_args(std::env::args_os()));
}
