fn main() {
    std::process::exit(frame_recon::cli::run(std::env::args_os()));
}
