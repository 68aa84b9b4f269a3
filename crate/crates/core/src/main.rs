fn main() {
    std::process::exit(tcpred::cli::run(std::env::args_os()));
}
