//! Randomized property probes for declared operator classes.
//!
//! A probe samples Gaussian pairs and checks the defining inequality of a
//! declared property (monotonicity, Lipschitz continuity, cocoercivity, firm
//! nonexpansiveness) up to a tolerance. A failed probe is a report outcome,
//! not an error.

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::OperatorError;
use crate::operators::ForwardOp;
use crate::point::Point;

/// Probe configuration. Defaults: tolerance `1e-9`, standard Gaussian samples.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub tolerance: f64,
    /// Standard deviation of the Gaussian sampler.
    pub sample_scale: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            sample_scale: 1.0,
        }
    }
}

/// Outcome of one property probe: whether every sampled pair satisfied the
/// inequality within tolerance, and the worst margin observed (negative
/// margins are violations).
#[derive(Debug, Clone, Copy)]
pub struct ProbeOutcome {
    pub passed: bool,
    pub worst_margin: f64,
}

impl ProbeOutcome {
    fn from_margin(worst_margin: f64, tolerance: f64) -> Self {
        Self {
            passed: worst_margin >= -tolerance,
            worst_margin,
        }
    }
}

/// Report produced by [`certify`]: monotonicity is always probed; Lipschitz
/// and cocoercivity checks run only when the operator declares them.
#[derive(Debug, Clone)]
pub struct CertReport {
    pub monotone: ProbeOutcome,
    pub lipschitz: Option<ProbeOutcome>,
    pub cocoercive: Option<ProbeOutcome>,
    pub samples: usize,
}

impl CertReport {
    pub fn all_passed(&self) -> bool {
        self.monotone.passed
            && self.lipschitz.is_none_or(|p| p.passed)
            && self.cocoercive.is_none_or(|p| p.passed)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| {
        let s: f64 = StandardNormal.sample(rng);
        s * scale
    })
}

/// Cocoercivity margin `⟨dx, dT⟩ − β‖dT‖²`, with the `β = +∞` convention that
/// constant maps (dT = 0) pass and anything else fails outright.
fn cocoercive_margin(inner: f64, dt_sq: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        if dt_sq > 0.0 {
            f64::NEG_INFINITY
        } else {
            inner
        }
    } else {
        inner - beta * dt_sq
    }
}

/// Probes monotonicity, declared Lipschitz continuity, and declared
/// cocoercivity of a forward map on `n_samples` Gaussian pairs.
pub fn certify_forward<F>(
    f: F,
    dim: usize,
    lipschitz: Option<f64>,
    cocoercivity: Option<f64>,
    n_samples: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<CertReport, OperatorError>
where
    F: Fn(&Point) -> Result<Point, OperatorError>,
{
    if n_samples == 0 {
        return Err(OperatorError::InvalidParameter(
            "probe needs at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_monotone = f64::INFINITY;
    let mut worst_lipschitz = f64::INFINITY;
    let mut worst_cocoercive = f64::INFINITY;

    for _ in 0..n_samples {
        let x = Point::from_array(gaussian(&mut rng, dim, config.sample_scale))?;
        let y = Point::from_array(gaussian(&mut rng, dim, config.sample_scale))?;
        let tx = f(&x)?;
        let ty = f(&y)?;
        let dx = x.coords() - y.coords();
        let dt = tx.coords() - ty.coords();
        let inner = dx.dot(&dt);
        let dt_sq = dt.dot(&dt);

        worst_monotone = worst_monotone.min(inner);
        if let Some(l) = lipschitz {
            worst_lipschitz = worst_lipschitz.min(l * dx.dot(&dx).sqrt() - dt_sq.sqrt());
        }
        if let Some(beta) = cocoercivity {
            worst_cocoercive = worst_cocoercive.min(cocoercive_margin(inner, dt_sq, beta));
        }
    }

    Ok(CertReport {
        monotone: ProbeOutcome::from_margin(worst_monotone, config.tolerance),
        lipschitz: lipschitz
            .map(|_| ProbeOutcome::from_margin(worst_lipschitz, config.tolerance)),
        cocoercive: cocoercivity
            .map(|_| ProbeOutcome::from_margin(worst_cocoercive, config.tolerance)),
        samples: n_samples,
    })
}

/// Certifies a single-valued operator against its own declared constants.
pub fn certify(
    op: &dyn ForwardOp,
    n_samples: usize,
    seed: u64,
) -> Result<CertReport, OperatorError> {
    certify_with(op, n_samples, seed, &ProbeConfig::default())
}

pub fn certify_with(
    op: &dyn ForwardOp,
    n_samples: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<CertReport, OperatorError> {
    certify_forward(
        |x| op.apply(x),
        op.dim(),
        op.lipschitz(),
        op.cocoercivity(),
        n_samples,
        seed,
        config,
    )
}

/// Probes firm nonexpansiveness `‖Jx − Jy‖² ≤ ⟨x − y, Jx − Jy⟩` of a map on
/// Gaussian pairs.
pub fn probe_firmly_nonexpansive<F>(
    j: F,
    dim: usize,
    n_samples: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<ProbeOutcome, OperatorError>
where
    F: Fn(&Point) -> Result<Point, OperatorError>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..n_samples {
        let x = Point::from_array(gaussian(&mut rng, dim, config.sample_scale))?;
        let y = Point::from_array(gaussian(&mut rng, dim, config.sample_scale))?;
        let jx = j(&x)?;
        let jy = j(&y)?;
        let dj = jx.coords() - jy.coords();
        let dx = x.coords() - y.coords();
        worst = worst.min(dx.dot(&dj) - dj.dot(&dj));
    }
    Ok(ProbeOutcome::from_margin(worst, config.tolerance))
}
