fn main() {
    std::process::exit(bilinear_gp::cli::run(std::env::args_os()));
}
