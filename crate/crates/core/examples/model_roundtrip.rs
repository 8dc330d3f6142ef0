//! Save a trained model to JSON, load it back and check the predictions.

use dirquant::io::{load_model, save_model};
use dirquant::simbench::{generate_scenario, ClassifierSpec, Scenario, ScenarioConfig};
use dirquant::DqcConfig;

fn main() -> dirquant::Result<()> {
    let config = ScenarioConfig {
        scenario: Scenario::Symmetric,
        n: 100,
        p: 8,
        seed: 9,
        ..Default::default()
    };
    let (train, test) = generate_scenario(&config, 0)?;
    let model = ClassifierSpec::Dqc(DqcConfig::default()).fit(&train)?;
    let path = std::env::temp_dir().join("dirquant-example-model.json");
    save_model(&path, &model)?;
    let loaded = load_model(&path)?;
    let a = model.predict_rows(test.observations())?;
    let b = loaded.predict_rows(test.observations())?;
    println!("model written to {}", path.display());
    println!("{} test predictions, identical after reload: {}", a.len(), a == b);
    Ok(())
}
