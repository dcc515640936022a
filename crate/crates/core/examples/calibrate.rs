//! Prints the calibration targets for a configuration: detector step
//! responses, ramp firing rates, and small SNN / Lévy / noisy batches.
//!
//! cargo run --release --example calibrate -- [config.toml] [trials]

use std::path::Path;

use chemotaxis::ase::Side;
use chemotaxis::environment::NoiseModel;
use chemotaxis::harness::{
    freq_curve, peak_deviation, run_batch, step_response, RampProtocol, Schedule, TrialKind,
};
use chemotaxis::Config;

fn main() -> chemotaxis::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let cfg = match args.get(1).filter(|a| a.as_str() != "-") {
        Some(p) => Config::load(Path::new(p))?,
        None => Config::default(),
    };
    let trials: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let (pl, pr) = (&cfg.network.n3, &cfg.network.n4);

    for dc in [2.0, 5.0, 10.0, 15.0] {
        let up = step_response(
            pl,
            pr,
            &Schedule::step(40.0, 5.0, 40.0 + dc, 100.0),
            1e-3,
            10,
        )?;
        let down = step_response(
            pl,
            pr,
            &Schedule::step(40.0, 5.0, 40.0 - dc, 100.0),
            1e-3,
            10,
        )?;
        println!(
            "step {dc:>4}: up L {:.3} R {:.3} | down L {:.3} R {:.3}",
            peak_deviation(&up, Side::Left, pl.v0),
            peak_deviation(&up, Side::Right, pr.v0),
            peak_deviation(&down, Side::Left, pl.v0),
            peak_deviation(&down, Side::Right, pr.v0),
        );
    }

    let grads = [0.0, 0.01, 0.02, 0.03, 0.05, 0.08, 0.1, 0.2, 0.3, 0.5];
    let v_ts = [pl.v_t + 2.0, pl.v_t, pl.v_t - 2.0];
    let pts = freq_curve(pl, pr, &grads, &v_ts, &RampProtocol::default())?;
    for p in &pts {
        println!(
            "{:?} V_T {:>6.2} g {:>5.3} -> {:.2} Hz",
            p.side, p.v_t, p.gradient, p.rate_hz
        );
    }

    let snn = run_batch(TrialKind::Snn, trials, 0, &cfg)?;
    println!(
        "snn   {:?}  under530 {:.2}",
        snn.stats,
        snn.fraction_under(530.0)
    );
    let levy = run_batch(TrialKind::Levy, trials, 0, &cfg)?;
    println!("levy  {:?}", levy.stats);
    let mut noisy = cfg.clone();
    noisy.noise = NoiseModel::uniform(12.0);
    let n = run_batch(TrialKind::Snn, trials, 0, &noisy)?;
    println!("noisy {:?}", n.stats);
    Ok(())
}
