fn main() {
    std::process::exit(pmllab::cli::main());
}
