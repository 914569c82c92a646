fn main() {
    std::process::exit(qrouter_sweep::cli::main_with_args(std::env::args_os()));
}
