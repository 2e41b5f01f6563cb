//! Stationary distributions of OU models.
//!
//! When the columns of `σ` span `R^p`, a stationary law exists iff `B` is
//! stable, and it is Gaussian with mean `A` and covariance `Γ` solving
//! `σσᵀ + BΓ + ΓBᵀ = 0`, equivalently `Γ = ∫₀^∞ e^{sB} σσᵀ e^{sBᵀ} ds`.

use crate::error::{Error, Result};
use crate::matkit::{cholesky, default_rank_tol, expm, rank, solve_lyapunov, Matrix};
use crate::model::OuModel;
use crate::stability::{is_stable, spectral_abscissa, DEFAULT_TOL};

/// Gaussian law given by mean and covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLaw {
    pub mean: Vec<f64>,
    pub cov: Matrix,
}

impl GaussianLaw {
    /// Checks the covariance is symmetric and positive semidefinite, allowing
    /// a `1e-12 · tr/p` ridge.
    pub fn validate(&self) -> Result<()> {
        let p = self.mean.len();
        if self.cov.rows() != p || !self.cov.is_square() {
            return Err(Error::DimensionMismatch {
                key: "cov",
                expected: format!("{p}x{p}"),
                found: format!("{}x{}", self.cov.rows(), self.cov.cols()),
            });
        }
        self.cov.check_symmetric(1e-9)?;
        let ridge = 1e-12 * self.cov.trace().abs() / p as f64;
        let mut c = self.cov.clone();
        for i in 0..p {
            c[(i, i)] += ridge;
        }
        cholesky(&c)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    NotExists,
    /// `σ` does not span `R^p`; the simple criterion does not apply.
    IndeterminateColumnSpan,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Exists => "Exists",
            Verdict::NotExists => "NotExists",
            Verdict::IndeterminateColumnSpan => "IndeterminateColumnSpan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StationarityVerdict {
    pub verdict: Verdict,
    pub controllability_rank: usize,
    pub sigma_full_column_span: bool,
    pub b_stable: bool,
}

/// Rank of `[σ | Bσ | … | B^{p-1}σ]`.
pub fn controllability_rank(b: &Matrix, sigma: &Matrix) -> usize {
    let (p, d) = (b.rows(), sigma.cols());
    assert!(b.is_square() && sigma.rows() == p);
    let mut ctrb = Matrix::zeros(p, p * d);
    let mut block = sigma.clone();
    for k in 0..p {
        ctrb.set_block(0, k * d, &block);
        if k + 1 < p {
            block = b * &block;
        }
    }
    rank(&ctrb, default_rank_tol(&ctrb))
}

pub fn stationary_exists(model: &OuModel) -> StationarityVerdict {
    let sigma = model.sigma();
    let full_span = rank(sigma, default_rank_tol(sigma)) == model.p();
    let b_stable = is_stable(model.speed());
    let verdict = match (full_span, b_stable) {
        (false, _) => Verdict::IndeterminateColumnSpan,
        (true, true) => Verdict::Exists,
        (true, false) => Verdict::NotExists,
    };
    StationarityVerdict {
        verdict,
        controllability_rank: controllability_rank(model.speed(), sigma),
        sigma_full_column_span: full_span,
        b_stable,
    }
}

fn require_exists(model: &OuModel) -> Result<()> {
    let v = stationary_exists(model);
    match v.verdict {
        Verdict::Exists => Ok(()),
        Verdict::NotExists => Err(Error::NoStationaryDistribution(
            "mean reversion speed is not stable".into(),
        )),
        Verdict::IndeterminateColumnSpan => Err(Error::NoStationaryDistribution(format!(
            "diffusion matrix does not span R^{} (controllability rank {})",
            model.p(),
            v.controllability_rank
        ))),
    }
}

/// Stationary mean `A` and covariance from the Lyapunov equation, solved by
/// Kronecker vectorisation and symmetrised.
pub fn stationary_distribution(model: &OuModel) -> Result<GaussianLaw> {
    require_exists(model)?;
    let cov = solve_lyapunov(model.speed(), &model.noise_covariance())?;
    Ok(GaussianLaw {
        mean: model.level().to_vec(),
        cov,
    })
}

/// `‖σσᵀ + BΓ + ΓBᵀ‖_∞`.
pub fn lyapunov_residual(model: &OuModel, gamma: &Matrix) -> f64 {
    let bg = model.speed() * gamma;
    (&(&bg + &bg.transpose()) + &model.noise_covariance()).norm_inf()
}

/// Default truncation horizon `40 / |abscissa(B)|`.
pub fn default_horizon(b: &Matrix) -> f64 {
    40.0 / spectral_abscissa(b, DEFAULT_TOL).abs()
}

/// Composite Simpson approximation of `∫₀^T e^{sB} σσᵀ e^{sBᵀ} ds` over
/// `n` equal panels, each using its two end points and midpoint.
pub fn gamma_by_quadrature(model: &OuModel, horizon: f64, panels: usize) -> Result<Matrix> {
    if !is_stable(model.speed()) {
        return Err(Error::NoStationaryDistribution(
            "mean reversion speed is not stable".into(),
        ));
    }
    if !(horizon > 0.0) || panels < 2 {
        return Err(Error::PreconditionViolated(format!(
            "quadrature needs T > 0 and n >= 2, got T = {horizon}, n = {panels}"
        )));
    }
    simpson_covariance(model.speed(), &model.noise_covariance(), horizon, panels)
}

/// Simpson rule for `∫₀^t e^{sB} Q e^{sBᵀ} ds`; no stability requirement.
pub fn simpson_covariance(b: &Matrix, q: &Matrix, t: f64, panels: usize) -> Result<Matrix> {
    let p = b.rows();
    let h = t / panels as f64;
    let integrand = |s: f64| -> Result<Matrix> {
        let e = expm(&b.scale(s))?;
        Ok(&(&e * q) * &e.transpose())
    };
    let mut acc = Matrix::zeros(p, p);
    for k in 0..=2 * panels {
        let w = if k == 0 || k == 2 * panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = integrand(0.5 * h * k as f64)?;
        acc = &acc + &f.scale(w);
    }
    Ok(acc.scale(h / 6.0).symmetrize())
}

/// Which coordinate of the three-dimensional upper-triangular model is pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinnedCoordinate {
    X2,
    X3,
}

/// Closed-form stationary law of the two surviving coordinates after
/// pinning `X^2` or `X^3` in a three-dimensional model with upper-triangular
/// `B` (negative diagonal) and `σ = I₃`.
pub fn section4_closed_forms(b: &Matrix, a: &[f64], c: f64, which: PinnedCoordinate) -> Result<GaussianLaw> {
    if b.rows() != 3 || b.cols() != 3 || a.len() != 3 {
        return Err(Error::PreconditionViolated(
            "closed forms need a 3x3 speed matrix and a 3-vector level".into(),
        ));
    }
    if !b.is_upper_triangular() {
        return Err(Error::PreconditionViolated(
            "speed matrix must be upper triangular".into(),
        ));
    }
    if b.diagonal().iter().any(|&v| !(v < 0.0)) {
        return Err(Error::PreconditionViolated(
            "speed matrix must have a strictly negative diagonal".into(),
        ));
    }
    let (b11, b12, b13) = (b[(0, 0)], b[(0, 1)], b[(0, 2)]);
    let (b22, b23, b33) = (b[(1, 1)], b[(1, 2)], b[(2, 2)]);
    let (a1, a2, a3) = (a[0], a[1], a[2]);

    // Both cases share the covariance of a 2x2 upper-triangular speed
    // [[u, v], [0, w]] with identity noise.
    let tri_cov = |u: f64, v: f64, w: f64| -> Matrix {
        let off = v / (2.0 * w * (u + w));
        Matrix::from_rows(&[
            [-1.0 / (2.0 * u) - v * v / (2.0 * u * w * (u + w)), off],
            [off, -1.0 / (2.0 * w)],
        ])
        .expect("finite entries")
    };

    let law = match which {
        PinnedCoordinate::X2 => GaussianLaw {
            mean: vec![a1 - b12 / b11 * (c - a2), a3],
            cov: tri_cov(b11, b13, b33),
        },
        PinnedCoordinate::X3 => GaussianLaw {
            mean: vec![
                a1 - (b13 / b11 - b12 * b23 / (b11 * b22)) * (c - a3),
                a2 - b23 / b22 * (c - a3),
            ],
            cov: tri_cov(b11, b12, b22),
        },
    };
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(b: Matrix, sigma: Matrix) -> OuModel {
        let p = b.rows();
        OuModel::new(vec![0.0; p], (0..p).map(|i| i as f64).collect(), b, sigma).unwrap()
    }

    #[test]
    fn controllability_examples() {
        let any = Matrix::from_rows(&[[1.0, 7.0], [-1.0, -3.0]]).unwrap();
        assert_eq!(controllability_rank(&any, &Matrix::identity(2)), 2);
        assert_eq!(
            controllability_rank(&Matrix::identity(2), &Matrix::column(&[1.0, 0.0])),
            1
        );
        let nil = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(controllability_rank(&nil, &Matrix::column(&[0.0, 1.0])), 2);
    }

    #[test]
    fn verdicts() {
        let b = Matrix::from_rows(&[[1.0, 7.0], [-1.0, -3.0]]).unwrap();
        assert_eq!(stationary_exists(&model(b.clone(), Matrix::identity(2))).verdict, Verdict::Exists);
        let reduced = model(Matrix::from_rows(&[[1.0]]).unwrap(), Matrix::from_rows(&[[0.0, 1.0]]).unwrap());
        assert_eq!(stationary_exists(&reduced).verdict, Verdict::NotExists);
        let v = stationary_exists(&model(b, Matrix::column(&[1.0, 0.0])));
        assert_eq!(v.verdict, Verdict::IndeterminateColumnSpan);
        assert!(!v.sigma_full_column_span);
        assert_eq!(v.controllability_rank, 2);
    }

    #[test]
    fn simple_stationary_laws() {
        let m = model(Matrix::identity(3).scale(-1.0), Matrix::identity(3));
        let law = stationary_distribution(&m).unwrap();
        assert_eq!(law.mean, m.level());
        assert!((&law.cov - &Matrix::identity(3).scale(0.5)).max_abs() < 1e-15);
        law.validate().unwrap();

        let (b, s) = (-0.8, 1.7);
        let m = model(Matrix::from_rows(&[[b]]).unwrap(), Matrix::from_rows(&[[s]]).unwrap());
        let law = stationary_distribution(&m).unwrap();
        assert!((law.cov[(0, 0)] + s * s / (2.0 * b)).abs() < 1e-14);
    }

    #[test]
    fn unstable_model_has_no_law() {
        let m = model(Matrix::from_rows(&[[0.5]]).unwrap(), Matrix::identity(1));
        assert!(matches!(stationary_distribution(&m), Err(Error::NoStationaryDistribution(_))));
        assert!(matches!(gamma_by_quadrature(&m, 10.0, 10), Err(Error::NoStationaryDistribution(_))));
    }

    #[test]
    fn quadrature_known_target() {
        let m = model(Matrix::identity(2).scale(-1.0), Matrix::identity(2));
        // Simpson error for ∫ e^{-2s} with half-step h/2 = 0.05 is about
        // 8 (h/2)^4 / 180 ≈ 2.8e-7.
        let err = (&gamma_by_quadrature(&m, 40.0, 400).unwrap() - &Matrix::identity(2).scale(0.5)).max_abs();
        assert!(err > 1e-7 && err < 1e-6, "err = {err:e}");
        let err = (&gamma_by_quadrature(&m, 40.0, 2000).unwrap() - &Matrix::identity(2).scale(0.5)).max_abs();
        assert!(err <= 1e-8, "err = {err:e}");
    }

    #[test]
    fn two_by_two_triangular_matches_closed_form() {
        let (b11, b13, b33) = (-1.2, 0.9, -0.35);
        let m = model(Matrix::from_rows(&[[b11, b13], [0.0, b33]]).unwrap(), Matrix::identity(2));
        let g = stationary_distribution(&m).unwrap().cov;
        let g11 = -1.0 / (2.0 * b11) - b13 * b13 / (2.0 * b11 * b33 * (b11 + b33));
        let g12 = b13 / (2.0 * b33 * (b11 + b33));
        let g22 = -1.0 / (2.0 * b33);
        assert!((g[(0, 0)] - g11).abs() < 1e-13);
        assert!((g[(0, 1)] - g12).abs() < 1e-13);
        assert!((g[(1, 1)] - g22).abs() < 1e-13);
    }

    #[test]
    fn closed_form_special_cases() {
        let b = Matrix::from_rows(&[[-1.0, 0.0, 0.4], [0.0, -2.0, 0.7], [0.0, 0.0, -0.5]]).unwrap();
        let a = [1.0, 2.0, 3.0];
        let law = section4_closed_forms(&b, &a, 10.0, PinnedCoordinate::X2).unwrap();
        assert_eq!(law.mean, vec![1.0, 3.0]);

        // Coincident diagonal b11 = b33 = bb, b13 = f.
        let (bb, f) = (-0.7, 1.3);
        let b = Matrix::from_rows(&[[bb, 0.2, f], [0.0, -1.0, 0.1], [0.0, 0.0, bb]]).unwrap();
        let cov = section4_closed_forms(&b, &a, 0.0, PinnedCoordinate::X2).unwrap().cov;
        let want = Matrix::from_rows(&[
            [-1.0 / (2.0 * bb) - f * f / (4.0 * bb.powi(3)), f / (4.0 * bb * bb)],
            [f / (4.0 * bb * bb), -1.0 / (2.0 * bb)],
        ])
        .unwrap();
        assert!((&cov - &want).max_abs() < 1e-13);

        let lower = Matrix::from_rows(&[[-1.0, 0.0, 0.0], [0.5, -1.0, 0.0], [0.0, 0.0, -1.0]]).unwrap();
        assert!(section4_closed_forms(&lower, &a, 0.0, PinnedCoordinate::X3).is_err());
        let zero_diag = Matrix::from_rows(&[[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]).unwrap();
        assert!(section4_closed_forms(&zero_diag, &a, 0.0, PinnedCoordinate::X3).is_err());
    }
}
