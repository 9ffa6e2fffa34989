fn main() {
    std::process::exit(bia_core::cli::main_with_args(std::env::args_os()));
}
