fn main() {
    std::process::exit(censormorph::cli::run());
}
