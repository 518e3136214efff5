fn main() {
    std::process::exit(duality_lab::cli::main_with(std::env::args_os()));
}
