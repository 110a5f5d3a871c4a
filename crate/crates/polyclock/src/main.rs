fn main() {
    eprintln!("polyclock CLI not wired up yet");
    std::process::exit(2);
}
