fn main() {
    std::process::exit(stablecluster_cli::run());
}
