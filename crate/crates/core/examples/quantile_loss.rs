//! Empirical quantiles and the asymmetric quantile loss.

use dirquant::quantile::{loss_gap, quantile_loss, QuantileLevel, SortedSample};

fn main() -> dirquant::Result<()> {
    let sample = SortedSample::from_unsorted(vec![3.1, -0.4, 2.2, 0.9, 5.6, 1.7, 0.2])?;
    println!("theta  quantile");
    for theta in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let t = QuantileLevel::new(theta)?;
        println!("{theta:<6} {:.4}", sample.quantile(t));
    }

    let t = QuantileLevel::new(0.3)?;
    println!("\nloss at theta = 0.3 around q = 1");
    for z in [-1.0, 0.0, 1.0, 2.0, 3.0] {
        println!("z = {z:>4}: {:.2}", quantile_loss(z, 1.0, t));
    }
    println!("\ngap between q = 1 and q = 2 never exceeds 1:");
    for z in [0.0, 1.5, 3.0] {
        println!("z = {z}: {:.2}", loss_gap(z, 1.0, 2.0, t));
    }
    Ok(())
}
