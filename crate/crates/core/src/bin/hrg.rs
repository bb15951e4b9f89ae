fn main() {
    std::process::exit(hrg::cli::main_with_args(std::env::args_os()));
}
