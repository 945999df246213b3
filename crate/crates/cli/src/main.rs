fn main() {
    std::process::exit(gelfond_tau_cli::run(std::env::args_os()));
}
