//! Leave-one-out error before and after appending 45 pure-noise columns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use dirquant::simbench::{augment_noise, loo_validate, ClassifierSpec};
use dirquant::{DqcConfig, LabeledDataset, QuantileLevel};

fn main() -> dirquant::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (label, size, shift) in [(1usize, 9, 1.2), (2, 26, 0.0)] {
        for _ in 0..size {
            rows.push((0..5).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect());
            labels.push(label);
        }
    }
    let data = LabeledDataset::from_rows(&rows, labels)?;
    let noisy = augment_noise(&data, 45, 11)?;
    let dqc = DqcConfig {
        theta_grid: QuantileLevel::uniform_grid(9),
        seed: 3,
        ..Default::default()
    };
    let specs = [
        ClassifierSpec::Dqc(dqc.clone()),
        ClassifierSpec::Centroid,
        ClassifierSpec::Median,
        ClassifierSpec::Cqc(dqc.theta_grid.clone()),
    ];
    println!("classifier   p=5    p=50");
    for spec in &specs {
        println!(
            "{:<10} {:.3}  {:.3}",
            spec.name(),
            loo_validate(&data, spec)?,
            loo_validate(&noisy, spec)?
        );
    }
    Ok(())
}
