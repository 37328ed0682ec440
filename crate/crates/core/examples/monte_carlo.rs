// A small Monte Carlo experiment from an inline TOML config: bias,
// coverage and rejection rates of three estimators against the simulated
// truth.
//
// `cargo run --release --example monte_carlo`

use carelab::harness::{run_montecarlo, ExperimentConfig};

// 20 replications keep the example quick; expect Monte Carlo noise of a
// few points in coverage and bias. configs/montecarlo.toml runs 200.
const CONFIG: &str = r#"
seed = 42
replications = 20

[dgp]
n_individuals = 1000
effect = { kind = "dynamic", tau = [-0.02, -0.06, -0.10] }

[[estimator]]
name = "twfe"
regression = { outcome = "employment", treatment = { kind = "static" } }

[[estimator]]
name = "event_study"
regression = { outcome = "employment", treatment = { kind = "event_time" } }

[[estimator]]
name = "group_time"
group_time = { outcome = "employment", inference = { kind = "influence_function" } }
"#;

pub fn run() -> carelab::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG, "monte_carlo example")?;
    let report = run_montecarlo(&cfg)?;
    println!(
        "{:<12} {:<16} {:>8} {:>8} {:>8} {:>8}",
        "estimator", "term", "truth", "mean", "bias", "cover"
    );
    let f = |v: Option<f64>| v.map(|x| format!("{x:+.4}")).unwrap_or_else(|| "-".into());
    for r in &report.rows {
        println!(
            "{:<12} {:<16} {:>8} {:>8} {:>8} {:>8}",
            r.estimator,
            r.term,
            f(r.truth),
            f(r.mean_estimate),
            f(r.bias),
            r.coverage
                .map(|c| format!("{c:.2}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
