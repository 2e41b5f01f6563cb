//! Ornstein-Uhlenbeck models and the intervention calculus.
//!
//! A model is `dX = B (X - A) dt + σ dW` with initial value `x0`. Intervening
//! with `X^m := c` pins coordinate `m` to `c` in every coefficient and drops
//! its equation. For an OU model the surviving coordinates again form an OU
//! model with speed `B̃` (row and column `m` removed), diffusion `σ̃` (row `m`
//! removed) and level `Ã = α - B̃⁻¹β`, where `α` is `A` without coordinate `m`
//! and `β_i = b_im (c - a_m)`.
//!
//! Coordinates are 1-based at every public surface, matching `X^1 … X^p`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matkit::{principal_submatrix, solve_vec, Matrix};

/// `dX = B (X - A) dt + σ dW`, `X_0 = x0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OuModel {
    x0: Vec<f64>,
    level: Vec<f64>,
    speed: Matrix,
    sigma: Matrix,
    labels: Vec<String>,
}

fn check_finite(key: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntry { key })
    }
}

fn mismatch(key: &'static str, expected: impl fmt::Display, found: impl fmt::Display) -> Error {
    Error::DimensionMismatch {
        key,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Default labels `X1 … Xp`.
pub fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

impl OuModel {
    /// Validates dimensions: `x0` and `level` of length `p`, `speed` `p×p`,
    /// `sigma` `p×d`. Labels default to `X1 … Xp`.
    pub fn new(x0: Vec<f64>, level: Vec<f64>, speed: Matrix, sigma: Matrix) -> Result<Self> {
        let p = x0.len();
        if p == 0 {
            return Err(mismatch("x0", "at least one coordinate", 0));
        }
        check_finite("x0", &x0)?;
        check_finite("A", &level)?;
        if level.len() != p {
            return Err(mismatch("A", p, level.len()));
        }
        if speed.rows() != p || speed.cols() != p {
            return Err(mismatch(
                "B",
                format!("{p}x{p}"),
                format!("{}x{}", speed.rows(), speed.cols()),
            ));
        }
        if sigma.rows() != p {
            return Err(mismatch(
                "sigma",
                format!("{p} rows"),
                format!("{} rows", sigma.rows()),
            ));
        }
        if !speed.is_finite() {
            return Err(Error::NonFiniteEntry { key: "B" });
        }
        if !sigma.is_finite() {
            return Err(Error::NonFiniteEntry { key: "sigma" });
        }
        Ok(Self {
            x0,
            level,
            speed,
            sigma,
            labels: default_labels(p),
        })
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.p() {
            return Err(mismatch("labels", self.p(), labels.len()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// State dimension.
    pub fn p(&self) -> usize {
        self.x0.len()
    }

    /// Noise dimension.
    pub fn d(&self) -> usize {
        self.sigma.cols()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    /// Mean reversion level `A`.
    pub fn level(&self) -> &[f64] {
        &self.level
    }

    /// Mean reversion speed `B`.
    pub fn speed(&self) -> &Matrix {
        &self.speed
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// 1-based coordinate carrying `label`.
    pub fn coordinate_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| i + 1)
    }

    /// Drift `B (x - A)`.
    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        let dev: Vec<f64> = x.iter().zip(&self.level).map(|(a, b)| a - b).collect();
        self.speed.mul_vec(&dev)
    }

    /// `σ σᵀ`.
    pub fn noise_covariance(&self) -> Matrix {
        &self.sigma * &self.sigma.transpose()
    }
}

/// The intervention `X^m := c`, with `m` 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intervention {
    pub m: usize,
    pub c: f64,
}

impl Intervention {
    pub fn new(m: usize, c: f64) -> Self {
        Self { m, c }
    }
}

/// Tracks which original coordinates have been pinned and how the surviving
/// coordinates map back onto the original ones.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionRecord {
    original_labels: Vec<String>,
    /// (0-based original index, value), in the order the interventions were applied.
    fixed: Vec<(usize, f64)>,
    /// Reduced position -> 0-based original index.
    surviving: Vec<usize>,
}

impl InterventionRecord {
    /// Record for a model on which nothing has been fixed yet.
    pub fn identity(labels: &[String]) -> Self {
        Self {
            original_labels: labels.to_vec(),
            fixed: Vec::new(),
            surviving: (0..labels.len()).collect(),
        }
    }

    /// Rebuilds a record from its serialised parts. `fixed` pairs are
    /// `(label, value)`; surviving coordinates are the remaining labels in
    /// original order.
    pub fn from_parts(original_labels: Vec<String>, fixed: &[(String, f64)]) -> Result<Self> {
        let mut rec = Self::identity(&original_labels);
        for (label, value) in fixed {
            let orig = rec
                .original_index(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            if rec.is_fixed(orig) {
                return Err(Error::DuplicateIntervention {
                    label: label.clone(),
                });
            }
            rec.pin(orig, *value);
        }
        Ok(rec)
    }

    pub fn original_labels(&self) -> &[String] {
        &self.original_labels
    }

    pub fn original_dim(&self) -> usize {
        self.original_labels.len()
    }

    /// Fixed coordinates as `(label, value)` pairs in application order.
    pub fn fixed(&self) -> Vec<(String, f64)> {
        self.fixed
            .iter()
            .map(|&(i, v)| (self.original_labels[i].clone(), v))
            .collect()
    }

    /// 0-based original indices of the surviving coordinates, in reduced order.
    pub fn surviving(&self) -> &[usize] {
        &self.surviving
    }

    pub fn original_index(&self, label: &str) -> Option<usize> {
        self.original_labels.iter().position(|l| l == label)
    }

    pub fn is_fixed(&self, original: usize) -> bool {
        self.fixed.iter().any(|&(i, _)| i == original)
    }

    /// Reduced position of a 0-based original index, if it survives.
    pub fn reduced_index(&self, original: usize) -> Option<usize> {
        self.surviving.iter().position(|&i| i == original)
    }

    fn pin(&mut self, original: usize, value: f64) {
        self.fixed.push((original, value));
        self.surviving.retain(|&i| i != original);
    }

    /// Embeds a reduced state back into the original coordinates, placing
    /// each fixed value at its coordinate.
    pub fn lift(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.surviving.len(), "lift dimension mismatch");
        let mut full = vec![0.0; self.original_dim()];
        for (&i, &v) in self.surviving.iter().zip(reduced) {
            full[i] = v;
        }
        for &(i, v) in &self.fixed {
            full[i] = v;
        }
        full
    }

    /// Drops the fixed coordinates from an original-dimension vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.surviving.iter().map(|&i| full[i]).collect()
    }
}

/// Applies a pinning at 0-based reduced position `m` with value `c`.
fn reduce(model: &OuModel, m: usize, c: f64) -> std::result::Result<OuModel, ()> {
    let p = model.p();
    let b = &model.speed;
    let a = &model.level;
    let reduced_speed = principal_submatrix(b, &[m]).map_err(|_| ())?;
    let keep = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .map(|(_, &x)| x)
            .collect()
    };
    let alpha = keep(a);
    let beta: Vec<f64> = (0..p)
        .filter(|&i| i != m)
        .map(|i| b[(i, m)] * (c - a[m]))
        .collect();
    let shift = solve_vec(&reduced_speed, &beta).map_err(|_| ())?;
    let level: Vec<f64> = alpha.iter().zip(&shift).map(|(x, s)| x - s).collect();

    let d = model.d();
    let mut sigma = Matrix::zeros(p - 1, d);
    for (r, i) in (0..p).filter(|&i| i != m).enumerate() {
        for j in 0..d {
            sigma[(r, j)] = model.sigma[(i, j)];
        }
    }
    Ok(OuModel {
        x0: keep(&model.x0),
        level,
        speed: reduced_speed,
        sigma,
        labels: model
            .labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .map(|(_, l)| l.clone())
            .collect(),
    })
}

/// Applies a single intervention to an OU model, returning the
/// `(p-1)`-dimensional model of the surviving coordinates.
pub fn intervene_ou(model: &OuModel, iv: Intervention) -> Result<(OuModel, InterventionRecord)> {
    intervene_seq(model, &[iv])
}

/// Left-to-right fold of [`intervene_ou`]. Each `Intervention::m` refers to
/// a coordinate of `model` (the original, unreduced model), not to positions
/// in intermediate reduced models.
pub fn intervene_seq(model: &OuModel, ivs: &[Intervention]) -> Result<(OuModel, InterventionRecord)> {
    let record = InterventionRecord::identity(model.labels());
    intervene_seq_with_record(model, record, ivs)
}

/// Continues a sequence of interventions on an already reduced model.
/// Indices in `ivs` are 1-based positions among `record.original_labels()`.
pub fn intervene_seq_with_record(
    model: &OuModel,
    mut record: InterventionRecord,
    ivs: &[Intervention],
) -> Result<(OuModel, InterventionRecord)> {
    if record.surviving.len() != model.p() {
        return Err(mismatch(
            "intervention_record",
            format!("{} surviving coordinates", model.p()),
            record.surviving.len(),
        ));
    }
    let mut current = model.clone();
    for (stage, iv) in ivs.iter().enumerate() {
        let p0 = record.original_dim();
        if iv.m == 0 || iv.m > p0 {
            return Err(Error::BadCoordinate { m: iv.m, p: p0 });
        }
        let orig = iv.m - 1;
        let label = record.original_labels[orig].clone();
        if record.is_fixed(orig) {
            return Err(Error::DuplicateIntervention { label });
        }
        if !iv.c.is_finite() {
            return Err(Error::NonFiniteEntry { key: "value" });
        }
        if current.p() < 2 {
            return Err(Error::PreconditionViolated(format!(
                "cannot intervene on {label}: model has a single coordinate"
            )));
        }
        let pos = record
            .reduced_index(orig)
            .expect("unfixed coordinates survive");
        current = reduce(&current, pos, iv.c).map_err(|_| Error::SingularReducedMatrix {
            stage: stage + 1,
            label: label.clone(),
        })?;
        record.pin(orig, iv.c);
    }
    Ok((current, record))
}

/// Coefficient function `x ↦ a(x) ∈ M(p, d)` of a general SDE
/// `dX^i = Σ_j a_ij(X) dZ^j`.
pub type Coefficient = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// SDE driven by `Z = (t, W^1, …, W^{d-1})`: column 0 of the coefficient is
/// the drift, the remaining `d - 1` columns the diffusion.
///
/// The coefficient must be total and Lipschitz on `R^p`; neither is checked.
#[derive(Clone)]
pub struct GeneralSde {
    p: usize,
    d: usize,
    x0: Vec<f64>,
    coefficient: Coefficient,
    labels: Vec<String>,
}

impl fmt::Debug for GeneralSde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralSde")
            .field("p", &self.p)
            .field("d", &self.d)
            .field("x0", &self.x0)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

impl GeneralSde {
    /// `d` counts every driver including time, so a model with `k` Brownian
    /// motions has `d = k + 1`.
    pub fn new(
        d: usize,
        x0: Vec<f64>,
        coefficient: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Result<Self> {
        let p = x0.len();
        if p == 0 {
            return Err(mismatch("x0", "at least one coordinate", 0));
        }
        if d < 1 {
            return Err(mismatch("d", "at least 1", d));
        }
        check_finite("x0", &x0)?;
        Ok(Self {
            p,
            d,
            x0,
            coefficient: Arc::new(coefficient),
            labels: default_labels(p),
        })
    }

    /// Affine SDE equivalent to an OU model: `a(x) = [B (x - A) | σ]`.
    pub fn from_ou(model: &OuModel) -> Self {
        let m = model.clone();
        let (p, dw) = (m.p(), m.d());
        Self {
            p,
            d: dw + 1,
            x0: m.x0.clone(),
            labels: m.labels.clone(),
            coefficient: Arc::new(move |x: &[f64]| {
                let drift = m.drift(x);
                let mut a = Matrix::zeros(p, dw + 1);
                for i in 0..p {
                    a[(i, 0)] = drift[i];
                    for j in 0..dw {
                        a[(i, j + 1)] = m.sigma[(i, j)];
                    }
                }
                a
            }),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Evaluates `a(x)`.
    pub fn coefficient(&self, x: &[f64]) -> Matrix {
        let a = (self.coefficient)(x);
        assert!(
            a.rows() == self.p && a.cols() == self.d,
            "coefficient returned {}x{}, expected {}x{}",
            a.rows(),
            a.cols(),
            self.p,
            self.d
        );
        a
    }
}

/// Pins coordinate `iv.m` of a general SDE: the reduced coefficient evaluates
/// the original one with `c` inserted at position `m` and drops row `m`.
pub fn intervene_general(sde: &GeneralSde, iv: Intervention) -> Result<GeneralSde> {
    let p = sde.p;
    if iv.m == 0 || iv.m > p {
        return Err(Error::BadCoordinate { m: iv.m, p });
    }
    if p < 2 {
        return Err(Error::PreconditionViolated(
            "cannot intervene on a one-dimensional SDE".into(),
        ));
    }
    let m = iv.m - 1;
    let c = iv.c;
    let inner = Arc::clone(&sde.coefficient);
    let d = sde.d;
    let coefficient = move |y: &[f64]| {
        let mut x = Vec::with_capacity(p);
        x.extend_from_slice(&y[..m]);
        x.push(c);
        x.extend_from_slice(&y[m..]);
        let a = inner(&x);
        let mut out = Matrix::zeros(p - 1, d);
        for (r, i) in (0..p).filter(|&i| i != m).enumerate() {
            for j in 0..d {
                out[(r, j)] = a[(i, j)];
            }
        }
        out
    };
    let drop_m = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .map(|(_, &x)| x)
            .collect()
    };
    Ok(GeneralSde {
        p: p - 1,
        d,
        x0: drop_m(&sde.x0),
        coefficient: Arc::new(coefficient),
        labels: sde
            .labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .map(|(_, l)| l.clone())
            .collect(),
    })
}
