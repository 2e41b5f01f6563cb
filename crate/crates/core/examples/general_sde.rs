// Interventions on a general SDE `dX = a(X) dZ` with `Z = (t, W)`.
//
// `cargo run --example general_sde`

use ou_intervene::{intervene_general, path_stats, simulate_general, GeneralSde, Intervention, Matrix, Record, TimeGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Column 0 is the drift, column 1 the diffusion against one Brownian motion.
    let sde = GeneralSde::new(2, vec![1.0, 0.0], |x: &[f64]| {
        Matrix::from_rows(&[[-x[0] + 0.5 * x[1].sin(), 0.3], [x[0] - x[1], 0.2 * (1.0 + x[0] * x[0]).sqrt()]])
            .expect("finite coefficient")
    })?;
    let pinned = intervene_general(&sde, Intervention::new(1, 2.0))?;
    println!("coefficient at X2 = 0.5 after pinning X1 := 2: {:?}", pinned.coefficient(&[0.5]).to_rows());

    let grid = TimeGrid::uniform(5.0, 500)?;
    for (name, s) in [("original", &sde), ("pinned", &pinned)] {
        let bundle = simulate_general(s, &grid, 2000, 3, Record::Endpoints)?;
        let stats = path_stats(&bundle, 1)?;
        println!("{name}: mean at t = 5 {:?}", stats.mean);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
