//! Correct-classification probability of the two-population quantile rule
//! as a function of the quantile level, and its maximizer.

use std::sync::Arc;

use dirquant::quantile::QuantileLevel;
use dirquant::theory::{optimal_theta, psi_curve, Gaussian, PopulationPair, ShiftedLogNormal};

fn main() -> dirquant::Result<()> {
    let gauss = PopulationPair::equal_priors(
        Arc::new(Gaussian::new(0.0, 1.0)?),
        Arc::new(Gaussian::new(1.0, 1.0)?),
    );
    let skewed = PopulationPair::equal_priors(
        Arc::new(ShiftedLogNormal::new(0.0, 1.0, 0.0)?),
        Arc::new(ShiftedLogNormal::new(0.0, 1.0, 0.5)?),
    );
    let grid = QuantileLevel::uniform_grid(9);
    println!("theta   normal  lognormal");
    for ((t, a), (_, b)) in psi_curve(&gauss, &grid).into_iter().zip(psi_curve(&skewed, &grid)) {
        println!("{t:<6.2} {a:.4}  {b:.4}");
    }
    for (name, pair) in [("normal", &gauss), ("lognormal", &skewed)] {
        let (theta, psi) = optimal_theta(pair, 1e-10)?;
        println!("{name}: best theta = {:.4}, psi = {psi:.6}", theta.value());
    }
    Ok(())
}
