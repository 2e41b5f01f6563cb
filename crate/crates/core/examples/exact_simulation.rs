// Exact-in-law path simulation and a Monte Carlo check of the stationary law.
//
// `cargo run --release --example exact_simulation`

use ou_intervene::simulate::exact_transition;
use ou_intervene::{
    path_stats, simulate_paths, simulate_paths_recorded, stationary_distribution, Matrix, Method, OuModel,
    Record, TimeGrid,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = OuModel::new(
        vec![0.0; 3],
        vec![1.0, 2.0, 3.0],
        Matrix::from_rows(&[[-1.0, 0.5, 0.3], [0.0, -2.0, 0.7], [0.0, 0.0, -1.5]])?,
        Matrix::identity(3),
    )?;

    let tr = exact_transition(&model, 0.5)?;
    println!("F(0.5) {:?}", tr.f.to_rows());
    println!("Q(0.5) {:?}", tr.q.to_rows());

    let grid = TimeGrid::uniform(2.0, 4)?;
    let paths = simulate_paths(&model, &grid, 2, 42, Method::Exact)?;
    for (k, t) in grid.times().iter().enumerate() {
        println!("t = {t}: {:?}", paths.value(0, k));
    }

    let grid = TimeGrid::uniform(50.0, 10)?;
    let bundle = simulate_paths_recorded(&model, &grid, 20_000, 7, Method::Exact, Record::Endpoints)?;
    let stats = path_stats(&bundle, 1)?;
    let law = stationary_distribution(&model)?;
    for i in 0..3 {
        println!(
            "X{}: mean {:.4} ± {:.4} (level {}), var {:.4} (Lyapunov {:.4})",
            i + 1,
            stats.mean[i],
            stats.mean_se[i],
            law.mean[i],
            stats.cov[(i, i)],
            law.cov[(i, i)]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
