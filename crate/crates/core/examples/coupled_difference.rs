// Original and intervened processes on shared Brownian increments, and the
// difference `Y - X`.
//
// `cargo run --example coupled_difference`

use ou_intervene::simulate::coupled_paths;
use ou_intervene::{Intervention, Matrix, OuModel, Record, TimeGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // rate drives spread, spread drives volume.
    let model = OuModel::new(
        vec![0.5, -0.5, 1.0],
        vec![0.0, 1.0, 2.0],
        Matrix::from_rows(&[[-1.0, 0.0, 0.0], [0.8, -1.2, 0.0], [0.0, 0.6, -0.9]])?,
        Matrix::from_rows(&[[0.5, 0.0], [0.2, 0.4], [0.0, 0.3]])?,
    )?
    .with_labels(["rate", "spread", "volume"])?;

    let grid = TimeGrid::uniform(3.0, 6)?;
    let coupled = coupled_paths(&model, &[Intervention::new(1, 0.25)], &grid, 1, 11, Record::All)?;
    let diff = coupled.difference();
    println!("pinned {:?}", coupled.record.fixed());
    for (k, t) in grid.times().iter().enumerate() {
        println!(
            "t = {t:.1}: X {:?}  Y - X {:?}",
            coupled.original.value(0, k),
            diff.value(0, k)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
