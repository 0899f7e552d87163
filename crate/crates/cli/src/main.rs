use clap::Parser;
use orthoscalar_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let out = run(&cli);
    print!("{}", out.stdout);
    std::process::exit(out.exit_code());
}
