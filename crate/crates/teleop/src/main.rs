use clap::Parser;

#[derive(Parser)]
#[command(name = "gsc-teleop", version, about = "Live shared-control teleoperation server")]
struct Args {
    #[arg(long, default_value_t = gsc_teleop::DEFAULT_PORT)]
    port: u16,
}

fn main() {
    let args = Args::parse();
    if let Err(e) = gsc_teleop::serve_blocking(args.port) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
