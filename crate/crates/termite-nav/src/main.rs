fn main() {
    std::process::exit(termite_nav::cli::main());
}
