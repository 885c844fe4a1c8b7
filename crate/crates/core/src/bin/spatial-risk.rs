fn main() {
    std::process::exit(spatial_risk::run::run(std::env::args_os()));
}
