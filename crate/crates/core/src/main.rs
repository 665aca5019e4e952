use clap::Parser;

fn main() {
    let cli = jsmix::cli::Cli::parse();
    match jsmix::cli::run(cli) {
        Ok(manifest) => {
            eprintln!(
                "{}: wrote {} files (config {})",
                manifest.command,
                manifest.outputs.len() + 1,
                &manifest.config_sha256[..12]
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
