fn main() {
    std::process::exit(rlab::cli::main_with_args(std::env::args_os()));
}
