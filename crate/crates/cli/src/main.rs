use clap::Parser;

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    evopart_cli::run_cli(evopart_cli::Cli::parse())
}
