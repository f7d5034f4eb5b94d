fn main() {
    std::process::exit(sepnet::cli::main_with_args(std::env::args_os()));
}
