fn main() {
    std::process::exit(fivevertex::cli::main_with_args(std::env::args_os()));
}
