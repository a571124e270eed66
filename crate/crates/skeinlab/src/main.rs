fn main() {
    eprintln!("skeinlab: no subcommands wired up yet");
    std::process::exit(2);
}
