//! Path simulation for OU models and general SDEs.
//!
//! Each path `i` draws its Gaussian increments from its own stream
//! `RngStream::new(seed, i)`, so output does not depend on how paths are
//! scheduled across threads.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matkit::{cholesky_semidefinite, expm, Matrix};
use crate::model::{intervene_seq, GeneralSde, Intervention, InterventionRecord, OuModel};

/// Standard normal stream keyed by `(seed, stream id)`.
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Self { rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Fills `out` with independent `N(0, var)` draws.
    pub fn fill_normal(&mut self, out: &mut [f64], var: f64) {
        let sd = var.sqrt();
        for v in out {
            *v = sd * self.normal();
        }
    }
}

/// Strictly increasing simulation times starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if t[0] != 0.0 {
            return Err(Error::NonPositiveSteps { index: 0 });
        }
        for k in 1..t.len() {
            if !(t[k] > t[k - 1]) || !t[k].is_finite() {
                return Err(Error::NonPositiveSteps { index: k });
            }
        }
        Ok(Self { t })
    }

    /// `steps` equal steps from 0 to `end`.
    pub fn uniform(end: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::EmptyGrid);
        }
        let h = end / steps as f64;
        Self::new(
            (0..=steps)
                .map(|k| if k == steps { end } else { k as f64 * h })
                .collect(),
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.t.last().expect("grid is non-empty")
    }

    fn endpoints(&self) -> Self {
        if self.t.len() <= 2 {
            self.clone()
        } else {
            Self {
                t: vec![0.0, self.end()],
            }
        }
    }
}

/// `n_paths × times × p` array of simulated states.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBundle {
    grid: TimeGrid,
    n_paths: usize,
    p: usize,
    values: Vec<f64>,
    labels: Vec<String>,
}

impl PathBundle {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// State of `path` at grid index `k`.
    pub fn value(&self, path: usize, k: usize) -> &[f64] {
        let off = (path * self.grid.len() + k) * self.p;
        &self.values[off..off + self.p]
    }

    /// All states of one path, flattened time-major.
    pub fn path(&self, path: usize) -> &[f64] {
        let stride = self.grid.len() * self.p;
        &self.values[path * stride..(path + 1) * stride]
    }

    fn zip_with(&self, other: &PathBundle, f: impl Fn(f64, f64) -> f64) -> PathBundle {
        assert_eq!((self.n_paths, self.p, self.grid.len()), (other.n_paths, other.p, other.grid.len()));
        PathBundle {
            grid: self.grid.clone(),
            n_paths: self.n_paths,
            p: self.p,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            labels: self.labels.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Gaussian transitions, exact in law at the grid times.
    Exact,
    /// Euler-Maruyama.
    Euler,
}

/// Which grid times are kept in the returned bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    All,
    /// Only the start and the final time; the simulation still steps
    /// through every grid point.
    Endpoints,
}

/// Law of `X_t` given `X_0 = x`: Gaussian with mean `F x + g` and
/// covariance `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub f: Matrix,
    pub g: Vec<f64>,
    pub q: Matrix,
}

impl Transition {
    pub fn mean(&self, x: &[f64]) -> Vec<f64> {
        self.f.mul_vec(x).iter().zip(&self.g).map(|(a, b)| a + b).collect()
    }
}

/// `F = e^{tB}`, `g = (I - F) A` and `Q = ∫₀^t e^{sB}σσᵀe^{sBᵀ} ds`.
///
/// `Q` comes from the block matrix `C = [[B, σσᵀ], [0, -Bᵀ]]`: with
/// `E = e^{sC}`, `Q(s) = E₁₂ E₁₁ᵀ`. The block exponential is taken on a step
/// `s = t / 2^k` short enough that `e^{-sBᵀ}` stays moderate, then doubled
/// `k` times with `Q(2s) = Q(s) + F(s) Q(s) F(s)ᵀ`, `F(2s) = F(s)²`.
pub fn exact_transition(model: &OuModel, t: f64) -> Result<Transition> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::PreconditionViolated(format!(
            "transition time must be positive, got {t}"
        )));
    }
    let p = model.p();
    let b = model.speed();
    let reach = t * b.norm_1();
    let doublings = if reach > 1.0 { reach.log2().ceil() as i32 } else { 0 };
    let s = t / 2f64.powi(doublings);
    let mut c = Matrix::zeros(2 * p, 2 * p);
    c.set_block(0, 0, b);
    c.set_block(0, p, &model.noise_covariance());
    c.set_block(p, p, &b.transpose().scale(-1.0));
    let e = expm(&c.scale(s))?;
    let mut f = e.block(0, 0, p, p);
    let e12 = e.block(0, p, p, p);
    let mut q = (&e12 * &f.transpose()).symmetrize();
    for _ in 0..doublings {
        q = (&q + &(&(&f * &q) * &f.transpose())).symmetrize();
        f = &f * &f;
    }
    let fa = f.mul_vec(model.level());
    let g = model.level().iter().zip(&fa).map(|(a, b)| a - b).collect();
    Ok(Transition { f, g, q })
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::PreconditionViolated("need at least one path".into()));
    }
    Ok(())
}

/// One Euler step of an OU model with Brownian increment `dw`.
fn euler_ou_step(model: &OuModel, x: &[f64], dt: f64, dw: &[f64]) -> Vec<f64> {
    let drift = model.drift(x);
    let noise = model.sigma().mul_vec(dw);
    x.iter()
        .zip(&drift)
        .zip(&noise)
        .map(|((x, a), n)| x + a * dt + n)
        .collect()
}

/// Runs `step` along the grid for every path and stores the recorded states.
/// `step(rng, k, x)` advances `x` from grid index `k` to `k + 1`.
#[allow(clippy::too_many_arguments)]
fn drive<F>(
    labels: &[String],
    x0: &[f64],
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    record: Record,
    step: F,
) -> PathBundle
where
    F: Fn(&mut RngStream, usize, &[f64]) -> Vec<f64> + Sync,
{
    let p = x0.len();
    let out_grid = match record {
        Record::All => grid.clone(),
        Record::Endpoints => grid.endpoints(),
    };
    let stride = out_grid.len() * p;
    let steps = grid.len() - 1;
    let mut values = vec![0.0; n_paths * stride];
    values.par_chunks_mut(stride).enumerate().for_each(|(i, out)| {
        let mut rng = RngStream::new(seed, i as u64);
        let mut x = x0.to_vec();
        out[..p].copy_from_slice(&x);
        for k in 0..steps {
            x = step(&mut rng, k, &x);
            match record {
                Record::All => out[(k + 1) * p..(k + 2) * p].copy_from_slice(&x),
                Record::Endpoints if k + 1 == steps => out[p..2 * p].copy_from_slice(&x),
                Record::Endpoints => {}
            }
        }
    });
    PathBundle {
        grid: out_grid,
        n_paths,
        p,
        values,
        labels: labels.to_vec(),
    }
}

/// Transition for every step of the grid, computing each distinct step
/// length once.
fn grid_transitions(model: &OuModel, grid: &TimeGrid) -> Result<Vec<(Transition, Matrix)>> {
    let mut cache: HashMap<u64, usize> = HashMap::new();
    let mut distinct: Vec<(Transition, Matrix)> = Vec::new();
    let mut index = Vec::with_capacity(grid.len().saturating_sub(1));
    for w in grid.times().windows(2) {
        let dt = w[1] - w[0];
        let slot = match cache.get(&dt.to_bits()) {
            Some(&s) => s,
            None => {
                let tr = exact_transition(model, dt)?;
                let l = cholesky_semidefinite(&tr.q)?;
                distinct.push((tr, l));
                cache.insert(dt.to_bits(), distinct.len() - 1);
                distinct.len() - 1
            }
        };
        index.push(slot);
    }
    Ok(index.into_iter().map(|s| distinct[s].clone()).collect())
}

/// Simulates `n_paths` paths of an OU model over `grid`, recording every
/// grid time.
pub fn simulate_paths(
    model: &OuModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    method: Method,
) -> Result<PathBundle> {
    simulate_paths_recorded(model, grid, n_paths, seed, method, Record::All)
}

/// [`simulate_paths`] with control over which times are kept.
pub fn simulate_paths_recorded(
    model: &OuModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    method: Method,
    record: Record,
) -> Result<PathBundle> {
    check_paths(n_paths)?;
    let p = model.p();
    let bundle = match method {
        Method::Exact => {
            let steps = grid_transitions(model, grid)?;
            drive(model.labels(), model.x0(), grid, n_paths, seed, record, |rng, k, x| {
                let (tr, l) = &steps[k];
                let mut z = vec![0.0; p];
                rng.fill_normal(&mut z, 1.0);
                let shock = l.mul_vec(&z);
                tr.mean(x).iter().zip(&shock).map(|(m, s)| m + s).collect()
            })
        }
        Method::Euler => {
            let t = grid.times();
            let d = model.d();
            drive(model.labels(), model.x0(), grid, n_paths, seed, record, |rng, k, x| {
                let dt = t[k + 1] - t[k];
                let mut dw = vec![0.0; d];
                rng.fill_normal(&mut dw, dt);
                euler_ou_step(model, x, dt, &dw)
            })
        }
    };
    Ok(bundle)
}

/// Euler scheme for a general SDE driven by `Z = (t, W)`:
/// `X_{k+1} = X_k + a(X_k) (Δt, ΔW_k)`.
pub fn simulate_general(
    sde: &GeneralSde,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    record: Record,
) -> Result<PathBundle> {
    check_paths(n_paths)?;
    let t = grid.times();
    let d = sde.d();
    Ok(drive(sde.labels(), sde.x0(), grid, n_paths, seed, record, |rng, k, x| {
        let dt = t[k + 1] - t[k];
        let mut dz = vec![dt; d];
        rng.fill_normal(&mut dz[1..], dt);
        let inc = sde.coefficient(x).mul_vec(&dz);
        x.iter().zip(&inc).map(|(a, b)| a + b).collect()
    }))
}

/// Original and intervened processes driven by the same Brownian increments.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledBundle {
    /// `X`, identical to `simulate_paths(.., Method::Euler)` with the same seed.
    pub original: PathBundle,
    /// `Y`, lifted to `p` coordinates with every pinned coordinate constant.
    pub intervened: PathBundle,
    pub record: InterventionRecord,
}

impl CoupledBundle {
    /// `Y - X`.
    pub fn difference(&self) -> PathBundle {
        self.intervened.zip_with(&self.original, |y, x| y - x)
    }
}

/// Euler simulation of `X` and of `Y = (X | interventions)` on shared noise.
pub fn coupled_paths(
    model: &OuModel,
    ivs: &[Intervention],
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    record: Record,
) -> Result<CoupledBundle> {
    check_paths(n_paths)?;
    let (reduced, rec) = intervene_seq(model, ivs)?;
    let original = simulate_paths_recorded(model, grid, n_paths, seed, Method::Euler, record)?;

    let t = grid.times();
    let d = model.d();
    let p = model.p();
    // Simulate the reduced system in lifted coordinates so that the stored
    // state is Y itself; the noise draws match those of `original`.
    let y0 = rec.lift(reduced.x0());
    let intervened = drive(model.labels(), &y0, grid, n_paths, seed, record, |rng, k, y| {
        let dt = t[k + 1] - t[k];
        let mut dw = vec![0.0; d];
        rng.fill_normal(&mut dw, dt);
        let next = euler_ou_step(&reduced, &rec.restrict(y), dt, &dw);
        let lifted = rec.lift(&next);
        debug_assert_eq!(lifted.len(), p);
        lifted
    });
    Ok(CoupledBundle {
        original,
        intervened,
        record: rec,
    })
}

/// Per-path `Y - X` for a single intervention, recorded at every grid time.
pub fn coupled_intervention_diff(
    model: &OuModel,
    iv: Intervention,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathBundle> {
    Ok(coupled_paths(model, &[iv], grid, n_paths, seed, Record::All)?.difference())
}

/// Cross-sectional moments at one grid index.
#[derive(Clone, Debug, PartialEq)]
pub struct PathStats {
    pub mean: Vec<f64>,
    /// Unbiased sample covariance.
    pub cov: Matrix,
    /// `sqrt(cov_ii / n)`.
    pub mean_se: Vec<f64>,
    /// Gaussian asymptotic standard error of each covariance entry,
    /// `sqrt((c_ii c_jj + c_ij²) / (n - 1))`.
    pub cov_se: Matrix,
}

/// Sample mean and covariance across paths at grid index `at`, accumulated
/// in path order.
pub fn path_stats(bundle: &PathBundle, at: usize) -> Result<PathStats> {
    if at >= bundle.grid.len() {
        return Err(Error::IndexOutOfRange {
            index: at,
            len: bundle.grid.len(),
        });
    }
    let n = bundle.n_paths;
    if n < 2 {
        return Err(Error::PreconditionViolated(
            "path statistics need at least two paths".into(),
        ));
    }
    let p = bundle.p;
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(bundle.value(i, at)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(p, p);
    for i in 0..n {
        let v = bundle.value(i, at);
        for a in 0..p {
            let da = v[a] - mean[a];
            for b in a..p {
                cov[(a, b)] += da * (v[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let c = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    let mean_se = (0..p).map(|a| (cov[(a, a)] / n as f64).sqrt()).collect();
    let mut cov_se = Matrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            cov_se[(a, b)] =
                ((cov[(a, a)] * cov[(b, b)] + cov[(a, b)] * cov[(a, b)]) / (n - 1) as f64).sqrt();
        }
    }
    Ok(PathStats {
        mean,
        cov,
        mean_se,
        cov_se,
    })
}
