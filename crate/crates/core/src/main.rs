fn main() {
    // CLI wiring lands with the cli module.
    std::process::exit(0);
}
