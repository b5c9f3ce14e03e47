fn main() {
    std::process::exit(sml_cli::main_with_args(std::env::args()));
}
