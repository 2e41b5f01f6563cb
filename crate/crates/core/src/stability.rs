//! Stability of mean reversion speed matrices, decided without eigenvalues.
//!
//! `B` is stable (all eigenvalues in the open left half-plane) exactly when
//! the Lyapunov equation `B X + X Bᵀ = -I` has a positive definite solution.
//! That test is run through a Kronecker solve and a Cholesky factorisation.
//! The spectral abscissa is then located by bisection on the shift `s`,
//! using that `B - sI` is stable iff `s` exceeds the abscissa.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matkit::{cholesky, principal_submatrix, solve_lyapunov, Matrix};

/// Default half-width used to separate stable, semistable and unstable.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default number of submatrices a full screen may classify.
pub const DEFAULT_SUBSET_BUDGET: u128 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    SemistableNotStable,
    Unstable,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Stable => "Stable",
            Classification::SemistableNotStable => "SemistableNotStable",
            Classification::Unstable => "Unstable",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub classification: Classification,
    /// Bisection estimate of the largest real part of an eigenvalue, ± tol.
    pub spectral_abscissa: f64,
    /// Positive definite `X` with `B X + X Bᵀ = -I`; present iff stable.
    pub certificate: Option<Matrix>,
}

/// Positive definite solution of `B X + X Bᵀ = -I`, if one exists.
pub fn lyapunov_certificate(b: &Matrix) -> Option<Matrix> {
    let x = solve_lyapunov(b, &Matrix::identity(b.rows())).ok()?;
    cholesky(&x).ok()?;
    Some(x)
}

pub fn is_stable(b: &Matrix) -> bool {
    lyapunov_certificate(b).is_some()
}

/// `max ‖B X + X Bᵀ + I‖` over entries.
pub fn certificate_residual(b: &Matrix, x: &Matrix) -> f64 {
    let bx = b * x;
    let r = &(&bx + &bx.transpose()) + &Matrix::identity(b.rows());
    r.max_abs()
}

fn shifted(b: &Matrix, s: f64) -> Matrix {
    let mut m = b.clone();
    for i in 0..m.rows() {
        m[(i, i)] -= s;
    }
    m
}

/// Gershgorin bounds on the real parts of the eigenvalues.
fn gershgorin_bracket(b: &Matrix) -> (f64, f64) {
    let n = b.rows();
    (0..n)
        .map(|i| {
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)].abs()).sum();
            (b[(i, i)] - r, b[(i, i)] + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, h)| {
            (lo.min(l), hi.max(h))
        })
}

/// Largest real part of an eigenvalue of `B`, found by bisection to width
/// `tol` starting from the Gershgorin bracket.
pub fn spectral_abscissa(b: &Matrix, tol: f64) -> f64 {
    assert!(b.is_square(), "spectral abscissa needs a square matrix");
    assert!(tol > 0.0, "tolerance must be positive");
    let (lo, hi) = gershgorin_bracket(b);
    let (mut lo, mut hi) = (lo - tol, hi + tol);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if is_stable(&shifted(b, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Three-way classification of `B` with abscissa half-width `tol`.
pub fn classify(b: &Matrix, tol: f64) -> StabilityReport {
    let abscissa = spectral_abscissa(b, tol);
    let (classification, certificate) = if abscissa < -tol {
        match lyapunov_certificate(b) {
            Some(x) => (Classification::Stable, Some(x)),
            // The Lyapunov test at zero shift is authoritative for stability.
            None => (Classification::SemistableNotStable, None),
        }
    } else if abscissa <= tol {
        (Classification::SemistableNotStable, None)
    } else {
        (Classification::Unstable, None)
    };
    StabilityReport {
        classification,
        spectral_abscissa: abscissa,
        certificate,
    }
}

/// How a screen entry was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Classified directly.
    Computed,
    /// Implied by the inclusion principle for a symmetric stable matrix; the
    /// reported abscissa is the whole matrix's, an upper bound for the block.
    InclusionPrinciple,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenEntry {
    /// 1-based indices removed from `B`; empty for `B` itself.
    pub removed: Vec<usize>,
    pub report: StabilityReport,
    pub basis: Basis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmatrixScreen {
    pub entries: Vec<ScreenEntry>,
    /// Every proper principal submatrix in the screen is stable.
    pub all_proper_principal_submatrices_stable: bool,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in (i + 1)..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Classifies `B` and each principal submatrix obtained by removing between
/// 1 and `max_size_removed` indices (capped at `p - 1`). Entries come ordered
/// by removal-set size, then lexicographically.
///
/// A symmetric stable `B` short-circuits: every principal submatrix of it is
/// stable by the inclusion principle.
pub fn screen_principal_submatrices(
    b: &Matrix,
    max_size_removed: usize,
    tol: f64,
    budget: u128,
) -> Result<SubmatrixScreen> {
    if !b.is_square() {
        return Err(crate::matkit::LinalgError::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        }
        .into());
    }
    let p = b.rows();
    let kmax = max_size_removed.min(p - 1);
    let requested: u128 = (1..=kmax).map(|k| binomial(p as u128, k as u128)).sum();
    if requested > budget {
        return Err(Error::TooLarge { requested, budget });
    }

    let full = classify(b, tol);
    let sets: Vec<Vec<usize>> = (1..=kmax).flat_map(|k| subsets_of_size(p, k)).collect();
    let symmetric_stable =
        full.classification == Classification::Stable && b.check_symmetric(1e-12).is_ok();

    let mut entries = vec![ScreenEntry {
        removed: Vec::new(),
        report: full.clone(),
        basis: Basis::Computed,
    }];
    let rest: Vec<ScreenEntry> = if symmetric_stable {
        sets.into_iter()
            .map(|s| ScreenEntry {
                removed: s.iter().map(|i| i + 1).collect(),
                report: StabilityReport {
                    classification: Classification::Stable,
                    spectral_abscissa: full.spectral_abscissa,
                    certificate: None,
                },
                basis: Basis::InclusionPrinciple,
            })
            .collect()
    } else {
        sets.into_par_iter()
            .map(|s| {
                let sub = principal_submatrix(b, &s).expect("proper subset");
                ScreenEntry {
                    removed: s.iter().map(|i| i + 1).collect(),
                    report: classify(&sub, tol),
                    basis: Basis::Computed,
                }
            })
            .collect()
    };
    entries.extend(rest);
    let all_stable = entries[1..]
        .iter()
        .all(|e| e.report.classification == Classification::Stable);
    Ok(SubmatrixScreen {
        entries,
        all_proper_principal_submatrices_stable: all_stable,
    })
}

/// `true` iff every `d_i > 0` and `B D + D Bᵀ` is negative definite.
pub fn verify_diagonal_certificate(b: &Matrix, d: &[f64]) -> bool {
    if d.len() != b.rows() || d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return false;
    }
    let bd = b * &Matrix::from_diagonal(d);
    let m = &bd + &bd.transpose();
    cholesky(&m.scale(-1.0)).is_ok()
}

/// Outcome of [`diagonal_lyapunov_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateSearch {
    /// A verified positive diagonal `D`, normalised to `max d_i = 1`.
    pub certificate: Option<Vec<f64>>,
    /// Best diagonal seen, whether or not it verifies.
    pub best_candidate: Vec<f64>,
    /// Largest eigenvalue of `B D + D Bᵀ` at the best candidate.
    pub best_score: f64,
    pub evaluations: usize,
}

fn diag_from_log(l: &[f64]) -> Vec<f64> {
    let top = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    l.iter().map(|v| (v - top).exp()).collect()
}

/// Largest eigenvalue of the symmetric `B D + D Bᵀ`, by bisection on the
/// Cholesky test of `tI - M`.
fn certificate_score(b: &Matrix, d: &[f64]) -> f64 {
    let bd = b * &Matrix::from_diagonal(d);
    let m = &bd + &bd.transpose();
    let (_, mut hi) = gershgorin_bracket(&m);
    let (mut lo, _) = gershgorin_bracket(&m);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    hi += 1e-12 * scale;
    lo -= 1e-12 * scale;
    while hi - lo > 1e-12 * scale {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cholesky(&shifted(&m, mid).scale(-1.0)).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Randomised search for a positive diagonal `D` with `B D + D Bᵀ` negative
/// definite.
///
/// Random restarts over log-diagonal entries (the first restart is `D = I`),
/// each refined coordinate-wise with multiplicative steps that halve on
/// stagnation. At most `budget` candidate evaluations are made. Failing to
/// find a certificate proves nothing.
pub fn diagonal_lyapunov_certificate(b: &Matrix, budget: usize, seed: u64) -> CertificateSearch {
    assert!(b.is_square() && budget >= 1);
    let p = b.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evals = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut first = true;

    let score = |l: &[f64], evals: &mut usize| {
        *evals += 1;
        certificate_score(b, &diag_from_log(l))
    };

    while evals < budget {
        let mut l: Vec<f64> = if first {
            vec![0.0; p]
        } else {
            (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        first = false;
        let mut s = score(&l, &mut evals);
        let mut step = 1.0;
        loop {
            if s < 0.0 && verify_diagonal_certificate(b, &diag_from_log(&l)) {
                let d = diag_from_log(&l);
                return CertificateSearch {
                    certificate: Some(d.clone()),
                    best_candidate: d,
                    best_score: s,
                    evaluations: evals,
                };
            }
            if evals >= budget || step < 1e-6 {
                break;
            }
            let mut improved = false;
            'coords: for i in 0..p {
                for dir in [1.0, -1.0] {
                    if evals >= budget {
                        break 'coords;
                    }
                    let mut trial = l.clone();
                    trial[i] += dir * step;
                    let t = score(&trial, &mut evals);
                    if t < s {
                        l = trial;
                        s = t;
                        improved = true;
                        continue 'coords;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|(bs, _)| s < *bs) {
            best = Some((s, l));
        }
    }
    let (best_score, l) = best.expect("at least one evaluation");
    CertificateSearch {
        certificate: None,
        best_candidate: diag_from_log(&l),
        best_score,
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample() -> Matrix {
        Matrix::from_rows(&[[1.0, 7.0], [-1.0, -3.0]]).unwrap()
    }

    #[test]
    fn counterexample_is_stable_with_unstable_block() {
        let b = counterexample();
        assert!(is_stable(&b));
        assert!(!is_stable(&Matrix::from_rows(&[[1.0]]).unwrap()));
        let r = classify(&b, DEFAULT_TOL);
        assert_eq!(r.classification, Classification::Stable);
        assert!((r.spectral_abscissa + 1.0).abs() <= 1e-6);
        let x = r.certificate.unwrap();
        assert!(certificate_residual(&b, &x) <= 1e-8);

        let neg = classify(&b.scale(-1.0), DEFAULT_TOL);
        assert_eq!(neg.classification, Classification::Unstable);
        assert!((neg.spectral_abscissa - 1.0).abs() <= 1e-6);
        assert!(neg.certificate.is_none());
    }

    #[test]
    fn negative_identity_certificate_is_half_identity() {
        let x = lyapunov_certificate(&Matrix::identity(3).scale(-1.0)).unwrap();
        assert!((&x - &Matrix::identity(3).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_semistable() {
        let r = classify(&Matrix::zeros(1, 1), DEFAULT_TOL);
        assert_eq!(r.classification, Classification::SemistableNotStable);
        assert!(r.spectral_abscissa.abs() <= DEFAULT_TOL);
        // Rotation generator: eigenvalues ±i.
        let j = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert_eq!(classify(&j, DEFAULT_TOL).classification, Classification::SemistableNotStable);
    }

    #[test]
    fn screen_counterexample_and_its_negation() {
        let s = screen_principal_submatrices(&counterexample(), 1, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET).unwrap();
        let got: Vec<_> = s.entries.iter().map(|e| (e.removed.clone(), e.report.classification)).collect();
        assert_eq!(
            got,
            vec![
                (vec![], Classification::Stable),
                (vec![1], Classification::Stable),
                (vec![2], Classification::Unstable),
            ]
        );
        assert!(!s.all_proper_principal_submatrices_stable);

        let s = screen_principal_submatrices(&counterexample().scale(-1.0), 1, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET)
            .unwrap();
        assert_eq!(s.entries[0].report.classification, Classification::Unstable);
        assert_eq!(s.entries[2].removed, vec![2]);
        assert_eq!(s.entries[2].report.classification, Classification::Stable);
    }

    #[test]
    fn symmetric_fast_path() {
        let b = Matrix::from_rows(&[[-2.0, 1.0], [1.0, -2.0]]).unwrap();
        let s = screen_principal_submatrices(&b, 1, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET).unwrap();
        assert!(s.all_proper_principal_submatrices_stable);
        assert!(s.entries[1..].iter().all(|e| e.basis == Basis::InclusionPrinciple));
        assert!((s.entries[0].report.spectral_abscissa + 1.0).abs() < 1e-6);
    }

    #[test]
    fn screen_budget() {
        let b = Matrix::identity(15).scale(-1.0);
        assert!(matches!(
            screen_principal_submatrices(&b, 14, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET),
            Err(Error::TooLarge { .. })
        ));
        let s = screen_principal_submatrices(&b, 1, DEFAULT_TOL, DEFAULT_SUBSET_BUDGET).unwrap();
        assert_eq!(s.entries.len(), 16);
    }

    #[test]
    fn subsets_enumerate_in_order() {
        assert_eq!(subsets_of_size(4, 2), vec![
            vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]
        ]);
        assert_eq!(subsets_of_size(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(binomial(14, 7), 3432);
    }

    #[test]
    fn diagonal_certificates() {
        let id = Matrix::identity(3).scale(-1.0);
        assert!(verify_diagonal_certificate(&id, &[1.0, 1.0, 1.0]));
        let found = diagonal_lyapunov_certificate(&id, 100, 7);
        assert_eq!(found.certificate, Some(vec![1.0; 3]));

        let sym = Matrix::from_rows(&[[-2.0, 1.0], [1.0, -2.0]]).unwrap();
        assert!(verify_diagonal_certificate(&sym, &[1.0, 1.0]));

        // Needs a non-trivial scaling: D = I fails, D = diag(1, 0.01) works.
        let b = Matrix::from_rows(&[[-1.0, 10.0], [0.0, -1.0]]).unwrap();
        assert!(!verify_diagonal_certificate(&b, &[1.0, 1.0]));
        let found = diagonal_lyapunov_certificate(&b, 2000, 3);
        let d = found.certificate.expect("scaling exists");
        assert!(verify_diagonal_certificate(&b, &d));
        assert!(is_stable(&b));
    }

    #[test]
    fn counterexample_has_no_diagonal_certificate() {
        let b = counterexample();
        let search = diagonal_lyapunov_certificate(&b, 10_000, 42);
        assert!(search.certificate.is_none());
        assert_eq!(search.evaluations, 10_000);
        assert!(!verify_diagonal_certificate(&b, &search.best_candidate));
        assert!(search.best_score > 0.0);
        assert!(!verify_diagonal_certificate(&b, &[1.0, -1.0]));
    }
}
