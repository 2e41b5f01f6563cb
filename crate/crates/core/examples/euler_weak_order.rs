// Weak order one of the Euler scheme on a scalar OU process.
//
// `cargo run --release --example euler_weak_order`

use ou_intervene::{path_stats, simulate_paths_recorded, Matrix, Method, OuModel, Record, TimeGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x0 = 10.0;
    let model = OuModel::new(
        vec![x0],
        vec![0.0],
        Matrix::from_rows(&[[-1.0]])?,
        Matrix::from_rows(&[[1.0]])?,
    )?;
    let exact = x0 * (-1.0f64).exp();
    let mut previous: Option<f64> = None;
    for steps in [10, 20, 40] {
        let grid = TimeGrid::uniform(1.0, steps)?;
        let bundle = simulate_paths_recorded(&model, &grid, 200_000, 1, Method::Euler, Record::Endpoints)?;
        let stats = path_stats(&bundle, 1)?;
        let err = (stats.mean[0] - exact).abs();
        // The Euler mean is x0 (1 - h)^(1/h) exactly.
        let h = 1.0 / steps as f64;
        let predicted = exact - x0 * (1.0 - h).powi(steps as i32);
        print!("h = {h}: error {err:.4e} (predicted {predicted:.4e}, se {:.1e})", stats.mean_se[0]);
        if let Some(p) = previous {
            print!(", ratio {:.3}", p / err);
        }
        println!();
        previous = Some(err);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
