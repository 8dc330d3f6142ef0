//! Fit a directional quantile classifier on skewed three-class data and
//! compare it with the componentwise baselines. With more than two classes
//! the unclipped weights can turn against uninformative directions, so the
//! clipped variant is shown as well.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use dirquant::baselines::{fit_centroid, fit_cqc, fit_median};
use dirquant::{fit, misclassification_rate, DqcConfig, LabeledDataset, QuantileLevel};

fn skewed(n_per_class: usize, p: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for k in 1..=3usize {
        for _ in 0..n_per_class {
            rows.push(
                (0..p)
                    .map(|j| rng.sample::<f64, _>(Exp1) + if j % 3 == k - 1 { 0.8 } else { 0.0 })
                    .collect(),
            );
            labels.push(k);
        }
    }
    LabeledDataset::from_rows(&rows, labels).unwrap()
}

fn main() -> dirquant::Result<()> {
    let train = skewed(60, 9, 1);
    let test = skewed(500, 9, 2);
    let config = DqcConfig {
        seed: 7,
        ..Default::default()
    };
    let model = fit(&train, &config)?;
    let selection = model.selection().expect("fit records the level selection");
    println!(
        "selected theta = {} ({} directions)",
        selection.grid[selection.selected].value(),
        model.directions().len()
    );
    let x = test.observations();
    let rate = |pred: Vec<usize>| misclassification_rate(&pred, test.labels());
    println!("dqc       {:.3}", rate(model.predict_rows(x)?));
    let clipped = fit(
        &train,
        &DqcConfig {
            clip_nonnegative_weights: true,
            ..config
        },
    )?;
    println!("dqc-clip  {:.3}", rate(clipped.predict_rows(x)?));
    println!("centroid  {:.3}", rate(fit_centroid(&train)?.predict_rows(x)?));
    println!("median    {:.3}", rate(fit_median(&train)?.predict_rows(x)?));
    println!(
        "cqc       {:.3}",
        rate(fit_cqc(&train, &QuantileLevel::default_grid())?.predict_rows(x)?)
    );
    Ok(())
}
