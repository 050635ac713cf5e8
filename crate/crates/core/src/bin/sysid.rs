fn main() {
    std::process::exit(noisy_sysid::cli::main());
}
