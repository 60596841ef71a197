fn main() {
    std::process::exit(modricci::cli::main_with(std::env::args_os()));
}
