fn main() {
    std::process::exit(sphere_jacobi::cli::main_with_args(std::env::args_os()));
}
