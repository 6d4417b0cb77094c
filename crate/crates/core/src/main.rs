fn main() {
    std::process::exit(ensemblectl::cli::main_with_args(std::env::args_os()));
}
