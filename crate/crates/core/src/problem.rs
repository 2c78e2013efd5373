//! Composite convex problems `min f(x) + g(x)` with a smooth strongly convex
//! part, a proximable nonsmooth part, a block partition of the coordinates,
//! and a fixed gradient step size.
//!
//! The smooth part carries certified curvature bounds `mu <= spectrum <= L`;
//! the step size must lie in `(0, 2/(mu + L)]`. A high-accuracy reference
//! fixed point of the prox-then-gradient operator is computed by
//! [`Problem::reference_fixed_point`] and anchors every verifier downstream.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the construction-time spectrum check of quadratic instances.
const SPECTRUM_TOL: f64 = 1e-8;
/// Power-iteration steps used by the construction-time spectrum check.
const POWER_STEPS: usize = 200;

// ---------------------------------------------------------------------------
// Block partition
// ---------------------------------------------------------------------------

/// Ordered partition of the coordinates `0..dim` into blocks.
///
/// Block indices are zero-based everywhere (code, files, reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlocksRepr", into = "BlocksRepr")]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct BlocksRepr(Vec<Vec<usize>>);

impl TryFrom<BlocksRepr> for BlockPartition {
    type Error = Error;
    fn try_from(r: BlocksRepr) -> Result<Self> {
        let dim = r.0.iter().map(|b| b.len()).sum();
        BlockPartition::new(r.0, dim)
    }
}

impl From<BlockPartition> for BlocksRepr {
    fn from(p: BlockPartition) -> Self {
        BlocksRepr(p.blocks)
    }
}

impl BlockPartition {
    /// Builds a partition and checks that the blocks cover `0..dim` exactly once.
    pub fn new(blocks: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::input("block partition must have at least one block"));
        }
        let mut seen = vec![false; dim];
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::input(format!("block {i} is empty")));
            }
            for &c in block {
                if c >= dim {
                    return Err(Error::input(format!(
                        "block {i} references coordinate {c} outside 0..{dim}"
                    )));
                }
                if seen[c] {
                    return Err(Error::input(format!("coordinate {c} appears in two blocks")));
                }
                seen[c] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            let missing = seen.iter().position(|&s| !s).unwrap();
            return Err(Error::input(format!("coordinate {missing} not covered by any block")));
        }
        Ok(Self { blocks, dim })
    }

    /// Splits `0..dim` into `n_blocks` contiguous blocks of near-equal size.
    pub fn contiguous(dim: usize, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 || n_blocks > dim {
            return Err(Error::input(format!(
                "cannot split {dim} coordinates into {n_blocks} blocks"
            )));
        }
        let base = dim / n_blocks;
        let extra = dim % n_blocks;
        let mut blocks = Vec::with_capacity(n_blocks);
        let mut start = 0;
        for i in 0..n_blocks {
            let len = base + usize::from(i < extra);
            blocks.push((start..start + len).collect());
            start += len;
        }
        Self::new(blocks, dim)
    }

    /// One block per coordinate.
    pub fn singletons(dim: usize) -> Result<Self> {
        Self::contiguous(dim, dim)
    }

    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, block: usize) -> &[usize] {
        &self.blocks[block]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.blocks.iter().map(|b| b.as_slice())
    }

    /// Euclidean norm of the coordinates of `v` belonging to `block`.
    pub fn block_norm(&self, v: &Array1<f64>, block: usize) -> f64 {
        self.blocks[block]
            .iter()
            .map(|&c| v[c] * v[c])
            .sum::<f64>()
            .sqrt()
    }
}

// ---------------------------------------------------------------------------
// Dataset (ridge least squares)
// ---------------------------------------------------------------------------

/// Training samples `(y_h, z_h)` for the least-squares loss, stored as an
/// `m x n` feature matrix plus targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array1<f64>,
}

impl Dataset {
    pub fn new(samples: &[(Vec<f64>, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("dataset must contain at least one sample"));
        }
        let dim = samples[0].0.len();
        if dim == 0 {
            return Err(Error::input("feature vectors must be non-empty"));
        }
        if samples.iter().any(|(y, _)| y.len() != dim) {
            return Err(Error::input("all feature vectors must share one dimension"));
        }
        let mut features = Array2::zeros((samples.len(), dim));
        let mut targets = Array1::zeros(samples.len());
        for (h, (y, z)) in samples.iter().enumerate() {
            for (c, &v) in y.iter().enumerate() {
                features[(h, c)] = v;
            }
            targets[h] = *z;
        }
        Ok(Self { features, targets })
    }

    pub fn from_parts(features: Array2<f64>, targets: Array1<f64>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::input("dataset must be non-empty"));
        }
        if features.nrows() != targets.len() {
            return Err(Error::input("one target per sample required"));
        }
        Ok(Self { features, targets })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.targets
    }
}

// ---------------------------------------------------------------------------
// Smooth part
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothKind {
    /// `f(x) = x'Ax/2 - b'x` with symmetric `A`.
    Quadratic { a: Array2<f64>, b: Array1<f64> },
    /// `f(x) = ||Yx - z||^2 / (2m) + ridge ||x||^2 / 2`.
    RidgeLeastSquares { dataset: Dataset, ridge: f64 },
}

/// Smooth part of the objective with certified curvature bounds.
///
/// `mu` is a lower bound on the Hessian spectrum and `lipschitz` an upper
/// bound; for quadratics both are checked at construction by power iteration,
/// for ridge least squares they are conservative bounds derived from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothPart {
    kind: SmoothKind,
    mu: f64,
    lipschitz: f64,
    dim: usize,
}

impl SmoothPart {
    pub fn quadratic(a: Array2<f64>, b: Array1<f64>, mu: f64, lipschitz: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || n == 0 {
            return Err(Error::input("quadratic part needs square A and matching b"));
        }
        if !(mu > 0.0) || !(mu <= lipschitz) {
            return Err(Error::input("need 0 < mu <= lipschitz"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                    return Err(Error::input(format!("A not symmetric at ({i},{j})")));
                }
            }
        }
        let lam_max = rayleigh_estimate(&a, POWER_STEPS);
        if lam_max > lipschitz + SPECTRUM_TOL {
            return Err(Error::input(format!(
                "spectrum check failed: estimated lambda_max {lam_max} > lipschitz {lipschitz}"
            )));
        }
        // Shifted power iteration: lambda_min(A) = c - lambda_max(cI - A).
        let c = lam_max.max(lipschitz) + 1.0;
        let mut shifted = -&a;
        for i in 0..n {
            shifted[(i, i)] += c;
        }
        let lam_min = c - rayleigh_estimate(&shifted, POWER_STEPS);
        if lam_min < mu - SPECTRUM_TOL {
            return Err(Error::input(format!(
                "spectrum check failed: estimated lambda_min {lam_min} < mu {mu}"
            )));
        }
        Ok(Self { kind: SmoothKind::Quadratic { a, b }, mu, lipschitz, dim: n })
    }

    /// Curvature bounds are recorded, not exact eigenvalues: `mu = ridge`
    /// (the data Gram matrix is positive semidefinite) and `lipschitz = ridge`
    /// plus an upper bound on `lambda_max(Y'Y)/m`.
    pub fn ridge_least_squares(dataset: Dataset, ridge: f64) -> Result<Self> {
        if ridge < 0.0 {
            return Err(Error::input("ridge coefficient must be nonnegative"));
        }
        if ridge == 0.0 {
            return Err(Error::input(
                "ridge = 0 leaves no certified strong convexity (mu must be positive)",
            ));
        }
        let n = dataset.dim();
        let m = dataset.len() as f64;
        let gram = dataset.features.t().dot(&dataset.features) / m;
        let frobenius = gram.iter().map(|v| v * v).sum::<f64>().sqrt();
        let row_sum = (0..n)
            .map(|i| (0..n).map(|j| gram[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let lipschitz = ridge + frobenius.min(row_sum);
        Ok(Self {
            kind: SmoothKind::RidgeLeastSquares { dataset, ridge },
            mu: ridge,
            lipschitz,
            dim: n,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub(crate) fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        match &self.kind {
            SmoothKind::Quadratic { a, b } => a.dot(x) - b,
            SmoothKind::RidgeLeastSquares { dataset, ridge } => {
                let m = dataset.len() as f64;
                let resid = dataset.features.dot(x) - &dataset.targets;
                dataset.features.t().dot(&resid) / m + *ridge * x
            }
        }
    }

    pub(crate) fn value(&self, x: &Array1<f64>) -> f64 {
        match &self.kind {
            SmoothKind::Quadratic { a, b } => 0.5 * x.dot(&a.dot(x)) - b.dot(x),
            SmoothKind::RidgeLeastSquares { dataset, ridge } => {
                let m = dataset.len() as f64;
                let resid = dataset.features.dot(x) - &dataset.targets;
                resid.dot(&resid) / (2.0 * m) + 0.5 * ridge * x.dot(x)
            }
        }
    }
}

/// Rayleigh quotient after `steps` power iterations from a seeded random
/// start; never exceeds the true largest eigenvalue of a symmetric matrix.
fn rayleigh_estimate(a: &Array2<f64>, steps: usize) -> f64 {
    let n = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    let mut v: Array1<f64> = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        v /= norm;
    }
    for _ in 0..steps {
        let w = a.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    v.dot(&a.dot(&v))
}

// ---------------------------------------------------------------------------
// Nonsmooth part
// ---------------------------------------------------------------------------

/// Nonsmooth part of the objective. Each kind has a closed-form prox.
#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothPart {
    Zero,
    L1 { lambda: f64 },
    Box { lo: Array1<f64>, hi: Array1<f64> },
}

impl NonsmoothPart {
    pub fn l1(lambda: f64) -> Result<Self> {
        if lambda < 0.0 {
            return Err(Error::input("l1 weight must be nonnegative"));
        }
        Ok(NonsmoothPart::L1 { lambda })
    }

    pub fn box_constraint(lo: Array1<f64>, hi: Array1<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::input("box bounds must share a dimension"));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::input("box requires lo_i <= hi_i for all i"));
        }
        Ok(NonsmoothPart::Box { lo, hi })
    }

    fn value(&self, x: &Array1<f64>) -> f64 {
        match self {
            NonsmoothPart::Zero => 0.0,
            NonsmoothPart::L1 { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            NonsmoothPart::Box { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(v, (l, h))| *v >= *l && *v <= *h);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn prox(&self, x: &Array1<f64>, gamma: f64) -> Array1<f64> {
        match self {
            NonsmoothPart::Zero => x.clone(),
            NonsmoothPart::L1 { lambda } => {
                let t = gamma * lambda;
                x.mapv(|v| {
                    if v > t {
                        v - t
                    } else if v < -t {
                        v + t
                    } else {
                        0.0
                    }
                })
            }
            NonsmoothPart::Box { lo, hi } => Array1::from_shape_fn(x.len(), |i| {
                x[i].clamp(lo[i], hi[i])
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// A composite problem instance: smooth part, nonsmooth part, block
/// partition, and fixed step size `gamma in (0, 2/(mu + L)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpec", into = "ProblemSpec")]
pub struct Problem {
    f: SmoothPart,
    g: NonsmoothPart,
    blocks: BlockPartition,
    gamma: f64,
}

/// Reference fixed point of the prox-then-gradient operator, together with
/// the prox of it (the candidate minimizer) and the certificates reached.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    /// Fixed point `z*` of the operator; the iterates converge to this.
    pub z: Array1<f64>,
    /// `prox(z*)`, the minimizer candidate of the composite problem.
    pub y: Array1<f64>,
    /// `||G(z*) - z*||_2` at the returned point.
    pub residual: f64,
    /// Subgradient optimality residual of `y`.
    pub optimality: f64,
    pub iterations: usize,
}

impl Problem {
    /// `gamma = None` picks the right endpoint `2/(mu + L)` of the admissible
    /// step-size interval.
    pub fn new(
        f: SmoothPart,
        g: NonsmoothPart,
        blocks: BlockPartition,
        gamma: Option<f64>,
    ) -> Result<Self> {
        let dim = f.dim();
        if blocks.dim() != dim {
            return Err(Error::input(format!(
                "block partition covers {} coordinates but the problem has {dim}",
                blocks.dim()
            )));
        }
        match &g {
            NonsmoothPart::Box { lo, .. } if lo.len() != dim => {
                return Err(Error::input("box bounds dimension mismatch"));
            }
            _ => {}
        }
        let max_gamma = 2.0 / (f.mu() + f.lipschitz());
        let gamma = gamma.unwrap_or(max_gamma);
        if !(gamma > 0.0) || gamma > max_gamma {
            return Err(Error::input(format!(
                "gamma must lie in (0, {max_gamma}], got {gamma}"
            )));
        }
        Ok(Self { f, g, blocks, gamma })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.count()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.f.mu()
    }

    pub fn lipschitz(&self) -> f64 {
        self.f.lipschitz()
    }

    /// Contraction rate `rho = gamma * mu` of the base operator.
    pub fn rho(&self) -> f64 {
        self.gamma * self.f.mu()
    }

    pub fn blocks(&self) -> &BlockPartition {
        &self.blocks
    }

    /// Same problem with a different step size (`None` restores the default
    /// right endpoint `2/(mu + L)`).
    pub fn with_gamma(&self, gamma: Option<f64>) -> Result<Self> {
        Problem::new(self.f.clone(), self.g.clone(), self.blocks.clone(), gamma)
    }

    pub fn smooth(&self) -> &SmoothPart {
        &self.f
    }

    pub fn nonsmooth(&self) -> &NonsmoothPart {
        &self.g
    }

    fn check_dim(&self, x: &Array1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::input(format!(
                "vector has dimension {}, problem has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Gradient of the smooth part.
    pub fn gradient(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_dim(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("gradient input must be finite"));
        }
        Ok(self.f.gradient(x))
    }

    /// Proximal operator of the nonsmooth part at step `gamma`.
    pub fn prox(&self, x: &Array1<f64>, gamma: f64) -> Result<Array1<f64>> {
        self.check_dim(x)?;
        if !(gamma > 0.0) {
            return Err(Error::input("prox step must be positive"));
        }
        Ok(self.g.prox(x, gamma))
    }

    /// `f(x) + g(x)`, `+inf` outside the box when `g` is an indicator.
    pub fn objective(&self, x: &Array1<f64>) -> Result<f64> {
        self.check_dim(x)?;
        let gv = self.g.value(x);
        if gv.is_infinite() {
            return Ok(f64::INFINITY);
        }
        Ok(self.f.value(x) + gv)
    }

    /// One application of the base operator: `y = prox(x); y - gamma * grad(y)`.
    /// Returns `(y, gradient at y, result)`.
    pub(crate) fn base_step_parts(&self, x: &Array1<f64>) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
        let y = self.g.prox(x, self.gamma);
        let grad = self.f.gradient(&y);
        let next = &y - &(self.gamma * &grad);
        (y, grad, next)
    }

    pub(crate) fn base_step(&self, x: &Array1<f64>) -> Array1<f64> {
        self.base_step_parts(x).2
    }

    /// Distance of `-grad f(y)` from the subdifferential of `g` at `y`,
    /// measured in the max norm; zero at an exact minimizer.
    pub fn optimality_residual(&self, y: &Array1<f64>) -> Result<f64> {
        self.check_dim(y)?;
        let grad = self.f.gradient(y);
        Ok(self.optimality_from_grad(y, &grad))
    }

    fn optimality_from_grad(&self, y: &Array1<f64>, grad: &Array1<f64>) -> f64 {
        let mut worst = 0.0_f64;
        match &self.g {
            NonsmoothPart::Zero => {
                for &gi in grad.iter() {
                    worst = worst.max(gi.abs());
                }
            }
            NonsmoothPart::L1 { lambda } => {
                for (yi, gi) in y.iter().zip(grad.iter()) {
                    let r = if *yi == 0.0 {
                        (gi.abs() - lambda).max(0.0)
                    } else {
                        (gi + lambda * yi.signum()).abs()
                    };
                    worst = worst.max(r);
                }
            }
            NonsmoothPart::Box { lo, hi } => {
                for i in 0..y.len() {
                    if lo[i] == hi[i] {
                        continue;
                    }
                    let r = if y[i] <= lo[i] {
                        (-grad[i]).max(0.0)
                    } else if y[i] >= hi[i] {
                        grad[i].max(0.0)
                    } else {
                        grad[i].abs()
                    };
                    worst = worst.max(r);
                }
            }
        }
        worst
    }

    /// Iterates the base operator from the origin until both the fixed-point
    /// residual is at most `tol` and the prox of the iterate passes the
    /// subgradient optimality test within `10 * tol`.
    ///
    /// The iteration cap is derived from the contraction factor `1 - gamma*mu`;
    /// hitting it signals misconfigured constants and returns
    /// [`Error::Divergence`].
    pub fn reference_fixed_point(&self, tol: f64) -> Result<FixedPoint> {
        if !(tol > 0.0) {
            return Err(Error::input("reference tolerance must be positive"));
        }
        let contraction = 1.0 - self.rho();
        let mut z = Array1::zeros(self.dim());
        let (y0, grad0, next0) = self.base_step_parts(&z);
        let r0 = (&next0 - &z).dot(&(&next0 - &z)).sqrt();
        let opt0 = self.optimality_from_grad(&y0, &grad0);
        if r0 <= tol && opt0 <= 10.0 * tol {
            return Ok(FixedPoint { z, y: y0, residual: r0, optimality: opt0, iterations: 0 });
        }
        // Both certificates shrink like contraction^k; the optimality residual
        // carries an extra 1/gamma.
        let target = tol.min(10.0 * tol * self.gamma);
        let cap = if contraction <= 0.0 {
            64
        } else {
            ((target / r0.max(target)).ln() / contraction.ln()).ceil() as usize + 1000
        };
        let mut prev = z.clone();
        let mut next = next0;
        for it in 1..=cap {
            prev.assign(&next);
            z = next;
            let (y, grad, stepped) = self.base_step_parts(&z);
            next = stepped;
            let diff = &next - &z;
            let residual = diff.dot(&diff).sqrt();
            let optimality = self.optimality_from_grad(&y, &grad);
            if residual <= tol && optimality <= 10.0 * tol {
                return Ok(FixedPoint { z, y, residual, optimality, iterations: it });
            }
        }
        let diff = &next - &z;
        Err(Error::Divergence { iterations: cap, residual: diff.dot(&diff).sqrt() })
    }
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

/// Diagonal quadratic `f(x) = sum_i d_i x_i^2 / 2 - b'x` with
/// `mu = min d_i`, `lipschitz = max d_i`.
pub fn diag_quadratic(diag: &[f64], b: &[f64]) -> Result<SmoothPart> {
    if diag.is_empty() || diag.len() != b.len() {
        return Err(Error::input("diagonal and linear term must share a dimension"));
    }
    let mu = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let lipschitz = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = diag.len();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        a[(i, i)] = diag[i];
    }
    SmoothPart::quadratic(a, Array1::from_vec(b.to_vec()), mu, lipschitz)
}

/// Random symmetric positive definite quadratic with certified spectrum in
/// `[mu, lipschitz]`.
///
/// The matrix is `diag(d) + S` with `d_i` drawn from `[mu + s, lipschitz - s]`
/// and the symmetric perturbation `S` scaled so each off-diagonal row sums to
/// at most `s = coupling` in absolute value; Gershgorin then places every
/// eigenvalue inside `[mu, lipschitz]`, and `||I - gamma*A||_inf <= 1 - gamma*mu`
/// for any `gamma <= 2/(mu + lipschitz)`, so the instance stays contractive in
/// the block-max norm asynchronous runs are measured in.
pub fn random_spd_quadratic(
    dim: usize,
    mu: f64,
    lipschitz: f64,
    coupling: f64,
    seed: u64,
) -> Result<SmoothPart> {
    if dim == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    if !(mu > 0.0) || mu > lipschitz {
        return Err(Error::input("need 0 < mu <= lipschitz"));
    }
    let s = coupling;
    if s < 0.0 || 2.0 * s > lipschitz - mu {
        return Err(Error::input(format!(
            "coupling must lie in [0, (lipschitz - mu)/2 = {}]",
            (lipschitz - mu) / 2.0
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = mu + s;
    let hi = lipschitz - s;
    let mut diag = vec![0.0; dim];
    for d in diag.iter_mut() {
        *d = if lo == hi { lo } else { rng.gen_range(lo..hi) };
    }
    // Pin the extremes so the declared bounds are nearly tight.
    diag[0] = lo;
    if dim > 1 {
        diag[dim - 1] = hi;
    }
    let mut a = Array2::zeros((dim, dim));
    for i in 0..dim {
        a[(i, i)] = diag[i];
    }
    if s > 0.0 && dim > 1 {
        let mut raw = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v: f64 = rng.gen_range(-1.0..1.0);
                raw[(i, j)] = v;
                raw[(j, i)] = v;
            }
        }
        let row_sums: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| raw[(i, j)].abs()).sum::<f64>())
            .collect();
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    let denom = row_sums[i].max(row_sums[j]).max(1e-12);
                    a[(i, j)] = raw[(i, j)] * s / denom;
                }
            }
        }
    }
    let b = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0));
    SmoothPart::quadratic(a, b, mu, lipschitz)
}

/// Seeded dataset with standard-normal-ish features and linear-plus-noise
/// targets, for ridge least-squares instances.
pub fn random_dataset(samples: usize, dim: usize, seed: u64) -> Result<Dataset> {
    if samples == 0 || dim == 0 {
        return Err(Error::input("dataset shape must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = y.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.1..0.1);
        rows.push((y, z));
    }
    Dataset::new(&rows)
}

// ---------------------------------------------------------------------------
// JSON representation
// ---------------------------------------------------------------------------

/// Serializable mirror of [`Problem`]: kind-tagged parts, matrices row-major,
/// vectors as plain arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub f: SmoothSpec,
    pub g: NonsmoothSpec,
    pub dim: usize,
    pub blocks: Vec<Vec<usize>>,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothSpec {
    Quadratic { a: Vec<Vec<f64>>, b: Vec<f64>, mu: f64, lipschitz: f64 },
    RidgeLeastSquares { samples: Vec<SampleSpec>, ridge: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSpec {
    pub y: Vec<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonsmoothSpec {
    Zero,
    L1 { lambda: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl TryFrom<NonsmoothSpec> for NonsmoothPart {
    type Error = Error;
    fn try_from(spec: NonsmoothSpec) -> Result<Self> {
        match spec {
            NonsmoothSpec::Zero => Ok(NonsmoothPart::Zero),
            NonsmoothSpec::L1 { lambda } => NonsmoothPart::l1(lambda),
            NonsmoothSpec::Box { lo, hi } => {
                NonsmoothPart::box_constraint(Array1::from_vec(lo), Array1::from_vec(hi))
            }
        }
    }
}

impl TryFrom<ProblemSpec> for Problem {
    type Error = Error;

    fn try_from(spec: ProblemSpec) -> Result<Self> {
        let f = match spec.f {
            SmoothSpec::Quadratic { a, b, mu, lipschitz } => {
                let n = a.len();
                if a.iter().any(|row| row.len() != n) {
                    return Err(Error::input("matrix rows must all have length n"));
                }
                let flat: Vec<f64> = a.into_iter().flatten().collect();
                let a = Array2::from_shape_vec((n, n), flat)
                    .map_err(|e| Error::input(format!("bad matrix shape: {e}")))?;
                SmoothPart::quadratic(a, Array1::from_vec(b), mu, lipschitz)?
            }
            SmoothSpec::RidgeLeastSquares { samples, ridge } => {
                let rows: Vec<(Vec<f64>, f64)> =
                    samples.into_iter().map(|s| (s.y, s.z)).collect();
                SmoothPart::ridge_least_squares(Dataset::new(&rows)?, ridge)?
            }
        };
        if f.dim() != spec.dim {
            return Err(Error::input(format!(
                "declared dim {} does not match smooth part dim {}",
                spec.dim,
                f.dim()
            )));
        }
        let g = NonsmoothPart::try_from(spec.g)?;
        let blocks = BlockPartition::new(spec.blocks, spec.dim)?;
        Problem::new(f, g, blocks, Some(spec.gamma))
    }
}

impl From<Problem> for ProblemSpec {
    fn from(p: Problem) -> Self {
        let f = match &p.f.kind {
            SmoothKind::Quadratic { a, b } => SmoothSpec::Quadratic {
                a: a.rows().into_iter().map(|r| r.to_vec()).collect(),
                b: b.to_vec(),
                mu: p.f.mu,
                lipschitz: p.f.lipschitz,
            },
            SmoothKind::RidgeLeastSquares { dataset, ridge } => SmoothSpec::RidgeLeastSquares {
                samples: dataset
                    .features
                    .rows()
                    .into_iter()
                    .zip(dataset.targets.iter())
                    .map(|(row, &z)| SampleSpec { y: row.to_vec(), z })
                    .collect(),
                ridge: *ridge,
            },
        };
        let g = match &p.g {
            NonsmoothPart::Zero => NonsmoothSpec::Zero,
            NonsmoothPart::L1 { lambda } => NonsmoothSpec::L1 { lambda: *lambda },
            NonsmoothPart::Box { lo, hi } => {
                NonsmoothSpec::Box { lo: lo.to_vec(), hi: hi.to_vec() }
            }
        };
        ProblemSpec {
            dim: p.dim(),
            blocks: p.blocks.blocks.clone(),
            gamma: p.gamma,
            f,
            g,
        }
    }
}
