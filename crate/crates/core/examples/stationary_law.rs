// Stationary laws before and after an intervention, three ways: the
// Lyapunov solve, Simpson quadrature and the closed forms for an
// upper-triangular model.
//
// `cargo run --example stationary_law`

use ou_intervene::stationary::{default_horizon, lyapunov_residual};
use ou_intervene::{
    gamma_by_quadrature, intervene_ou, section4_closed_forms, stationary_distribution, stationary_exists,
    Intervention, Matrix, OuModel, PinnedCoordinate,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let b = Matrix::from_rows(&[[-1.0, 0.5, 0.3], [0.0, -2.0, 0.7], [0.0, 0.0, -1.5]])?;
    let a = vec![1.0, 2.0, 3.0];
    let model = OuModel::new(vec![0.0; 3], a.clone(), b.clone(), Matrix::identity(3))?;

    let verdict = stationary_exists(&model);
    println!("verdict {} (controllability rank {})", verdict.verdict.as_str(), verdict.controllability_rank);
    let law = stationary_distribution(&model)?;
    println!("mean {:?}", law.mean);
    println!("cov {:?}", law.cov.to_rows());
    println!("Lyapunov residual {:.2e}", lyapunov_residual(&model, &law.cov));

    let quad = gamma_by_quadrature(&model, default_horizon(&b), 2000)?;
    println!("quadrature gap {:.2e}", (&quad - &law.cov).norm_inf());

    for (m, which) in [(2, PinnedCoordinate::X2), (3, PinnedCoordinate::X3)] {
        for c in [0.0, 5.0] {
            let (reduced, _) = intervene_ou(&model, Intervention::new(m, c))?;
            let law = stationary_distribution(&reduced)?;
            let closed = section4_closed_forms(&b, &a, c, which)?;
            println!(
                "X{m} := {c}: mean {:?}, cov {:?}, closed-form gap {:.1e}",
                law.mean,
                law.cov.to_rows(),
                (&law.cov - &closed.cov).max_abs()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
