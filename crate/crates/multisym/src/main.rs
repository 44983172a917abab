fn main() {
    std::process::exit(multisym::cli::run());
}
