//! Small benchmark over several dimensions, printed as a table.
//!
//! `cargo run --release --example benchmark_table -- 10` sets the number of
//! replications.

use dirquant::io::format_table;
use dirquant::simbench::{run_benchmark, ClassifierSpec, Scenario, ScenarioConfig};
use dirquant::DqcConfig;

fn main() -> dirquant::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let dqc = DqcConfig {
        seed: 1,
        ..Default::default()
    };
    let specs = [
        ClassifierSpec::Dqc(dqc.clone()),
        ClassifierSpec::Centroid,
        ClassifierSpec::Median,
        ClassifierSpec::Cqc(dqc.theta_grid.clone()),
    ];
    let reports = [10, 50, 100]
        .into_iter()
        .map(|p| {
            let config = ScenarioConfig {
                scenario: Scenario::Symmetric,
                n: 100,
                p,
                replications: reps,
                seed: 1,
                ..Default::default()
            };
            run_benchmark(&config, &specs)
        })
        .collect::<dirquant::Result<Vec<_>>>()?;
    print!("{}", format_table(&reports));
    Ok(())
}
