fn main() {
    std::process::exit(xdof::cli::run());
}
