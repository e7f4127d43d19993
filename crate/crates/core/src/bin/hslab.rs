fn main() {
    std::process::exit(hslab::cli::main_with_args(std::env::args_os()));
}
