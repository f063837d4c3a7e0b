fn main() {
    std::process::exit(critwave::cli::main_with_args(std::env::args_os()));
}
