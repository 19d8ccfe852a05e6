fn main() {
    std::process::exit(kansa::cli::run());
}
