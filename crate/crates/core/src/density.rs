//! Reference densities as weighted sample ensembles.
//!
//! A Gaussian mixture is sampled once into `N` points with uniform weight
//! `1/N`. For time-varying references the sample positions (and any moving
//! targets) follow an uncorrelated random walk with per-axis uniform steps.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::Point2;
use crate::sim::Target;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("mixture has no components")]
    Empty,
    #[error("mixture weights must be nonnegative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("component {index}: {reason}")]
    InvalidCovariance { index: usize, reason: &'static str },
    #[error("component {0}: mean is not finite")]
    BadMean(usize),
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Domain {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Option<Self> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        (ok(x) && ok(y)).then_some(Self { x, y })
    }

    pub fn width(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn height(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn diagonal(&self) -> f64 {
        libm::hypot(self.width(), self.height())
    }

    pub fn contains(&self, p: Point2) -> bool {
        (self.x[0]..=self.x[1]).contains(&p.x) && (self.y[0]..=self.y[1]).contains(&p.y)
    }

    /// Uniform random point inside the rectangle.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        Point2::new(
            rng.random_range(self.x[0]..=self.x[1]),
            rng.random_range(self.y[0]..=self.y[1]),
        )
    }
}

/// One bivariate normal component. The covariance is stored row-major along
/// with its lower Cholesky factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Point2,
    pub covariance: [f64; 4],
    chol: [f64; 3],
}

impl Component {
    /// Lower factor `[l00, l10, l11]`.
    pub fn cholesky(&self) -> [f64; 3] {
        self.chol
    }
}

/// `ρ = Σ α_i N(μ_i, Σ_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

const COV_TOLERANCE: f64 = 1e-9;

impl GaussianMixture {
    /// Validates and factors each `(weight, mean, row-major covariance)`.
    pub fn new(parts: impl IntoIterator<Item = (f64, Point2, [f64; 4])>) -> Result<Self, DensityError> {
        let mut components = Vec::new();
        for (index, (weight, mean, cov)) in parts.into_iter().enumerate() {
            if !mean.is_finite() {
                return Err(DensityError::BadMean(index));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(DensityError::BadWeights(weight));
            }
            let chol = factor_psd(cov).map_err(|reason| DensityError::InvalidCovariance { index, reason })?;
            components.push(Component { weight, mean, covariance: cov, chol });
        }
        if components.is_empty() {
            return Err(DensityError::Empty);
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(DensityError::BadWeights(total));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(|c| c.weight)
    }

    /// Draws the component index, then the point.
    pub fn sample_one<R: Rng + ?Sized>(&self, picker: &WeightedIndex<f64>, rng: &mut R) -> (usize, Point2) {
        let k = picker.sample(rng);
        let c = &self.components[k];
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let [l00, l10, l11] = c.chol;
        (k, Point2::new(c.mean.x + l00 * z0, c.mean.y + l10 * z0 + l11 * z1))
    }

    /// `count` i.i.d. draws with their component labels.
    pub fn sample_labelled<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<(usize, Point2)> {
        let picker = WeightedIndex::new(self.weights()).expect("weights validated at construction");
        (0..count).map(|_| self.sample_one(&picker, rng)).collect()
    }

    /// `count` i.i.d. draws.
    pub fn sample_points<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Point2> {
        self.sample_labelled(count, rng).into_iter().map(|(_, p)| p).collect()
    }
}

/// Lower Cholesky factor of a symmetric PSD 2×2 matrix. Eigenvalues down to
/// `-1e-9` are accepted and treated as zero.
fn factor_psd(c: [f64; 4]) -> Result<[f64; 3], &'static str> {
    let [a, b, b2, d] = c;
    if !c.iter().all(|v| v.is_finite()) {
        return Err("covariance is not finite");
    }
    let scale = 1.0f64.max(libm::fabs(a)).max(libm::fabs(d));
    if libm::fabs(b - b2) > COV_TOLERANCE * scale {
        return Err("covariance is not symmetric");
    }
    let half_trace = 0.5 * (a + d);
    let radius = libm::hypot(0.5 * (a - d), b);
    if half_trace - radius < -COV_TOLERANCE * scale {
        return Err("covariance is not positive semi-definite");
    }
    let l00 = libm::sqrt(a.max(0.0));
    let l10 = if l00 > 0.0 { b / l00 } else { 0.0 };
    let l11 = libm::sqrt((d - l10 * l10).max(0.0));
    Ok([l00, l10, l11])
}

/// Sample points `y_j` with their current weights `n_t(y_j)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleEnsemble {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub epoch: u64,
}

impl SampleEnsemble {
    /// Uniform weights `1/N`.
    pub fn uniform(points: Vec<Point2>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self { points, weights, epoch: 0 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Draws `count` points from `mix` and weights them uniformly.
pub fn sample_mixture<R: Rng + ?Sized>(
    mix: &GaussianMixture,
    count: usize,
    rng: &mut R,
) -> Result<SampleEnsemble, DensityError> {
    if count == 0 {
        return Err(DensityError::NoSamples);
    }
    Ok(SampleEnsemble::uniform(mix.sample_points(count, rng)))
}

/// `p ← p + v·w`, `w ~ U[−1, 1]²`.
#[inline]
pub fn walk_point<R: Rng + ?Sized>(p: Point2, v: f64, rng: &mut R) -> Point2 {
    let wx: f64 = rng.random_range(-1.0..=1.0);
    let wy: f64 = rng.random_range(-1.0..=1.0);
    Point2::new(p.x + v * wx, p.y + v * wy)
}

/// Moves every sample point one random-walk step. Weights are untouched.
pub fn random_walk_step_samples<R: Rng + ?Sized>(ens: &mut SampleEnsemble, v: f64, rng: &mut R) {
    if v > 0.0 {
        for p in ens.points.iter_mut() {
            *p = walk_point(*p, v, rng);
        }
    }
    ens.epoch += 1;
}

/// Moves every undetected target one random-walk step; detected targets stay
/// where they were found and consume no draws.
pub fn random_walk_step_targets<R: Rng + ?Sized>(targets: &mut [Target], v: f64, rng: &mut R) {
    if v <= 0.0 {
        return;
    }
    for t in targets.iter_mut().filter(|t| !t.detected()) {
        t.position = walk_point(t.position, v, rng);
    }
}
