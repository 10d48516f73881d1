fn main() {
    std::process::exit(svir_core::cli::main_with_args(std::env::args_os()));
}
