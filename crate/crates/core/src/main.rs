fn main() {
    std::process::exit(mseg::cli::main());
}
