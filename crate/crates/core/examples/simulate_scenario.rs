//! Draw one replication of each simulation scenario and summarize it.

use dirquant::simbench::{generate_scenario, Scenario, ScenarioConfig};
use dirquant::quantile::quantile_of;
use dirquant::QuantileLevel;

fn main() -> dirquant::Result<()> {
    for scenario in [Scenario::Symmetric, Scenario::SameSkew, Scenario::OppositeSkew] {
        let config = ScenarioConfig {
            scenario,
            n: 2000,
            p: 5,
            correlated: true,
            seed: 42,
            ..Default::default()
        };
        let (train, _test) = generate_scenario(&config, 0)?;
        let x = train.observations();
        let classes = train.class_indices();
        print!("scenario {}: first-coordinate medians by class", scenario.number());
        for rows in &classes {
            let col: Vec<f64> = rows.iter().map(|&i| x[(i, 0)]).collect();
            print!("  {:+.3}", quantile_of(&col, QuantileLevel::MEDIAN)?);
        }
        println!();
    }
    Ok(())
}
