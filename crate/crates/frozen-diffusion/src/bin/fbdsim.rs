fn main() {
    std::process::exit(frozen_diffusion::cli::run());
}
