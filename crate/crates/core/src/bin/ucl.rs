fn main() {
    std::process::exit(unitary_landscape::harness::cli::main_with_args(std::env::args_os()));
}
