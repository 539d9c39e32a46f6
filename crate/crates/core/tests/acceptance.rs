//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pourgoal_core::belief::LIKELIHOOD_FLOOR;
use pourgoal_core::harness::{run_batch, EpisodeConfig, Policy, TRACE_HEADER};
use pourgoal_core::sim::{self, EnvState, RobotState, TaskVelocity};
use pourgoal_core::{
    init_belief, run_episode, update_belief, Belief, Episode, EpisodeTrace, GoalGrid,
    LikelihoodVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASELINE_TILT_RATE: f64 = 0.3;

struct Report {
    failures: usize,
}

impl Report {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

/// Posterior from a trace, computed from scratch: Gaussian log densities
/// relative to the best goal of each tick, floored, summed, normalized once.
fn independent_posterior(trace: &EpisodeTrace, cfg: &EpisodeConfig) -> Vec<f64> {
    let o = &cfg.obs;
    let goals: Vec<f64> = (0..cfg.grid.count)
        .map(|i| {
            cfg.grid.min_g
                + (cfg.grid.max_g - cfg.grid.min_g) * i as f64 / (cfg.grid.count - 1) as f64
        })
        .collect();
    let mut log_post = vec![0.0; goals.len()];
    for row in trace.rows() {
        if row.u_h_tilt.abs() <= o.deadband {
            continue;
        }
        let log_density: Vec<f64> = goals
            .iter()
            .map(|&g| {
                let gap = g - row.poured_sensed;
                // 2 sigmoid(z) - 1 == tanh(z / 2)
                let want = if gap > 0.0 {
                    o.r_max * (o.k * gap / 2.0).tanh()
                } else {
                    0.0
                };
                let z = (row.u_h_tilt - (want - row.u_r_tilt)) / o.sigma_h;
                -0.5 * z * z
            })
            .collect();
        let best = log_density
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        for (acc, ld) in log_post.iter_mut().zip(&log_density) {
            *acc += (ld - best).max(LIKELIHOOD_FLOOR.ln());
        }
    }
    let peak = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_post.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn oracle_equivalence(report: &mut Report) {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut max_ticks = 0;
    for seed in 0..50 {
        let cfg = EpisodeConfig::default().with_seed(seed);
        let out = run_episode(&cfg).expect("episode runs");
        // go through the file format the CLI uses
        let mut csv = Vec::new();
        out.trace.write_csv(&mut csv).unwrap();
        let trace = EpisodeTrace::read_csv(csv.as_slice()).unwrap();
        let oracle = independent_posterior(&trace, &cfg);
        for (a, b) in out.belief.weights().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        max_ticks = max_ticks.max(trace.len());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(5);
    report.record(
        "oracle equivalence",
        pass,
        format!("50 episodes, max |w - w_oracle| = {worst:.3e} (tol 1e-9), longest {max_ticks} ticks, {elapsed:.2?} (budget 5 s)"),
    );
}

fn zero_interaction(report: &mut Report) {
    let mut cfg = EpisodeConfig::default().with_seed(3);
    cfg.human.p_intervene = 0.0;
    let prior = init_belief(&cfg.grid.build().unwrap());
    let bits = |b: &Belief| b.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
    let prior_bits = bits(&prior);
    let mut human = Episode::simulated_human(&cfg);
    let mut ep = Episode::new(cfg, Policy::Adaptive).unwrap();
    let mut ticks = 0;
    let mut exact = true;
    while !ep.out_of_time() {
        ep.step(&mut human).unwrap();
        exact &= bits(ep.belief()) == prior_bits;
        ticks += 1;
    }
    report.record(
        "zero-interaction invariance",
        exact,
        format!("{ticks} ticks, belief bit-identical to the uniform prior at every tick: {exact}"),
    );
}

fn noiseless_convergence(report: &mut Report) {
    let mut cfg = EpisodeConfig::default();
    cfg.obs.sigma_h = 0.01;
    cfg.human.p_intervene = 1.0;
    cfg.human.true_goal_g = 150.0;
    let tol = cfg.thresholds.stop_tol + cfg.env.max_tick_flow();
    let start = Instant::now();
    let batch = run_batch(&cfg, 100, 0, Policy::Adaptive).unwrap();
    let elapsed = start.elapsed();
    let good = batch
        .outcomes
        .iter()
        .filter(|o| o.metrics.final_map_g == 150.0 && o.metrics.final_error_g <= tol)
        .count();
    let pass = good >= 95 && elapsed < Duration::from_secs(30);
    report.record(
        "noiseless convergence",
        pass,
        format!(
            "{good}/100 episodes with MAP = 150 g and error <= {tol:.3} g (need 95), median error {:.3} g, {elapsed:.2?} (budget 30 s)",
            batch.summary.final_error_g.median
        ),
    );
}

fn conservation_and_normalization(report: &mut Report) {
    let cfg = EpisodeConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut mass_err = 0.0_f64;
    let mut monotone = true;
    let mut robot = RobotState::default();
    let mut env = EnvState::full(cfg.env.capacity_g);
    for _ in 0..1000 {
        let u_r = TaskVelocity::new(rng.random_range(-0.6..0.6), rng.random_range(-0.2..0.2));
        let u_h = TaskVelocity::new(rng.random_range(-0.6..0.6), rng.random_range(-0.2..0.2));
        let (r, e) = sim::step(&robot, &env, u_r, u_h, &cfg.env).unwrap();
        mass_err = mass_err.max((e.source_g + e.poured_g - cfg.env.capacity_g).abs());
        monotone &= e.poured_g >= env.poured_g;
        robot = r;
        env = e;
    }

    let grid = GoalGrid::uniform(0.0, 500.0, 101).unwrap();
    let mut belief = init_belief(&grid);
    let mut norm_err = 0.0_f64;
    let mut scale_exact = true;
    let mut scale_err = 0.0_f64;
    for _ in 0..1000 {
        let lik: Vec<f64> = (0..grid.len())
            .map(|_| rng.random_range(1e-6..1.0))
            .collect();
        let next = update_belief(&belief, &LikelihoodVector::new(lik.clone()).unwrap()).unwrap();
        norm_err = norm_err.max((next.weights().iter().sum::<f64>() - 1.0).abs());

        let pow2 = 2f64.powi(rng.random_range(-40..40));
        let scaled = LikelihoodVector::new(lik.iter().map(|l| l * pow2).collect()).unwrap();
        scale_exact &= update_belief(&belief, &scaled).unwrap() == next;

        let c = rng.random_range(1e-3..1e3);
        let scaled = LikelihoodVector::new(lik.iter().map(|l| l * c).collect()).unwrap();
        let other = update_belief(&belief, &scaled).unwrap();
        for (a, b) in other.weights().iter().zip(next.weights()) {
            scale_err = scale_err.max((a - b).abs());
        }
        belief = next;
    }

    let pass =
        mass_err <= 1e-9 && monotone && norm_err <= 1e-9 && scale_exact && scale_err <= 1e-12;
    report.record(
        "conservation and normalization",
        pass,
        format!(
            "1000 sim steps: mass error {mass_err:.3e}, poured monotone {monotone}; 1000 updates: normalization error {norm_err:.3e}, power-of-two scaling bit-exact {scale_exact}, arbitrary scaling error {scale_err:.3e}"
        ),
    );
}

fn adaptive_advantage(report: &mut Report) {
    let cfg = EpisodeConfig::default();
    let adaptive = run_batch(&cfg, 100, 0, Policy::Adaptive).unwrap().summary;
    let baseline = run_batch(
        &cfg,
        100,
        0,
        Policy::FixedRate {
            tilt_rate: BASELINE_TILT_RATE,
        },
    )
    .unwrap()
    .summary;
    let (a, b) = (adaptive.human_effort.median, baseline.human_effort.median);
    report.record(
        "adaptive advantage",
        a < b,
        format!(
            "median effort {a:.4} rad vs fixed-rate {BASELINE_TILT_RATE} rad/s baseline {b:.4} rad, ratio {:.3}; interaction time {:.2} s vs {:.2} s",
            a / b,
            adaptive.interaction_time_s.median,
            baseline.interaction_time_s.median
        ),
    );
}

fn determinism(report: &mut Report) {
    let render = |seed: u64| {
        let out = run_episode(&EpisodeConfig::default().with_seed(seed)).unwrap();
        let mut bytes = Vec::new();
        out.trace.write_csv(&mut bytes).unwrap();
        bytes
    };
    let mut identical = true;
    for seed in [0, 1, 17, 12345, u64::MAX] {
        let first = render(seed);
        identical &= first.starts_with(TRACE_HEADER.as_bytes()) && first == render(seed);
    }
    report.record(
        "determinism",
        identical,
        format!("5 seeds re-run, trace CSV byte-identical: {identical}"),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    oracle_equivalence(&mut report);
    zero_interaction(&mut report);
    noiseless_convergence(&mut report);
    conservation_and_normalization(&mut report);
    adaptive_advantage(&mut report);
    determinism(&mut report);
    if report.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", report.failures);
        ExitCode::FAILURE
    }
}
