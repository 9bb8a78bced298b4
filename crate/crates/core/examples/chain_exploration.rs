//! Optimistic exploration on the chain, with and without the bonus.
//!
//! `cargo run --release --example chain_exploration -- [episodes] [seed]`

use lvrep::agent::{run_online, AgentConfig};
use lvrep::env::build_chain_mdp;
use lvrep::util::seeded;

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map_or(1000, |a| a.parse().expect("episodes is an integer"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed is an integer"));
    let mdp = build_chain_mdp(10, 0.1, 0.95).expect("valid chain");

    for (label, scale) in [("bonus", AgentConfig::default().bonus.scale), ("no bonus", 0.0)] {
        let mut cfg = AgentConfig {
            n_episodes: episodes,
            n_latent: 10,
            seed,
            ..AgentConfig::default()
        };
        cfg.bonus.scale = scale;
        let run = run_online(&mdp, &cfg, &mut seeded(seed)).expect("run succeeds");
        let last = run.log.last().expect("at least one episode");
        println!(
            "{label:>8}: value {:.3} of {:.3}, cumulative regret {:.1}",
            last.value, last.v_star, last.regret
        );
    }
}
