// Stability without eigenvalues: a stable matrix with an unstable principal
// submatrix, a full submatrix screen, and a diagonal certificate search.
//
// `cargo run --example stability_screen`

use ou_intervene::matkit::principal_submatrix;
use ou_intervene::stability::{
    diagonal_lyapunov_certificate, screen_principal_submatrices, DEFAULT_SUBSET_BUDGET, DEFAULT_TOL,
};
use ou_intervene::{classify, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let b = Matrix::from_rows(&[[1.0, 7.0], [-1.0, -3.0]])?;
    let report = classify(&b, DEFAULT_TOL);
    println!("B: {} with abscissa {:.9}", report.classification, report.spectral_abscissa);
    let top = principal_submatrix(&b, &[1])?;
    println!("[[1]]: {}", classify(&top, DEFAULT_TOL).classification);

    let screen = screen_principal_submatrices(&b, 1, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET)?;
    for e in &screen.entries {
        println!("  removed {:?}: {} ({:.6})", e.removed, e.report.classification, e.report.spectral_abscissa);
    }
    println!("all proper submatrices stable: {}", screen.all_proper_principal_submatrices_stable);

    // b11 > 0 puts a positive entry on the diagonal of B D + D Bᵀ.
    let search = diagonal_lyapunov_certificate(&b, 2000, 1);
    println!("diagonal certificate for B: {:?}", search.certificate);

    let c = Matrix::from_rows(&[[-1.0, 3.0, 0.0], [0.0, -1.0, 2.0], [0.0, 0.0, -1.0]])?;
    let search = diagonal_lyapunov_certificate(&c, 2000, 1);
    println!("diagonal certificate for C: {:?} after {} evaluations", search.certificate, search.evaluations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
