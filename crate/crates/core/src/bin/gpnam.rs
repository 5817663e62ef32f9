fn main() {
    std::process::exit(gpnam_core::cli::main_with_args(std::env::args_os()));
}
