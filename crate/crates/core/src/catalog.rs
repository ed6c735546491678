//! Closed-form operator constructors and synthesized test problems.
//!
//! Test problems are built with a *planted* solution: the operators are drawn
//! first, then a constant term of the cocoercive part is shifted so that the
//! chosen point satisfies the inclusion exactly. Box/ball constraints place
//! the planted point strictly in the interior so the normal cone there is
//! `{0}` and the residual check is exact.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::OperatorError;
use crate::linalg;
use crate::operators::{ForwardOp, ResolventOp, SetValuedOp, SingleValuedOp};
use crate::point::Point;

/// Residual tolerance for the planted-solution invariant.
pub const PLANTED_RESIDUAL_TOL: f64 = 1e-8;

/// Normal cone of the box `[lo, hi]`; resolvent is the componentwise clamp.
pub fn make_box_normal_cone(lo: &Point, hi: &Point) -> Result<SetValuedOp, OperatorError> {
    SetValuedOp::normal_cone_box(lo, hi)
}

/// `weight·∂‖·‖₁`; resolvent with parameter λ soft-thresholds at `λ·weight`.
pub fn make_l1_subdifferential(weight: f64, dim: usize) -> Result<SetValuedOp, OperatorError> {
    SetValuedOp::l1(weight, dim)
}

/// `x ↦ M x` for skew `M`, with the spectral norm attached as Lipschitz
/// constant and no cocoercivity.
pub fn make_skew(m: Array2<f64>) -> Result<SingleValuedOp, OperatorError> {
    SingleValuedOp::skew_linear(m)
}

/// Gradient of `½xᵀQx + bᵀx`; cocoercivity `1/λ_max(Q)` (or the `+∞` sentinel
/// for `Q = 0`).
pub fn make_quadratic_gradient(q: Array2<f64>, b: &Point) -> Result<SingleValuedOp, OperatorError> {
    SingleValuedOp::quadratic_gradient(q, b.coords().clone())
}

/// A three-operator inclusion `0 ∈ Ax + Bx + Cx` with an optional planted
/// solution.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: SetValuedOp,
    pub b: SingleValuedOp,
    pub c: SingleValuedOp,
    dim: usize,
    known_solution: Option<Point>,
}

/// Borrowed view of the three operators, the form the solvers consume. Using
/// trait objects here lets tests wrap operators with counters and lets the
/// product-space lift reuse the same iteration code.
#[derive(Clone, Copy)]
pub struct Inclusion<'a> {
    pub a: &'a dyn ResolventOp,
    pub b: &'a dyn ForwardOp,
    pub c: &'a dyn ForwardOp,
}

impl<'a> Inclusion<'a> {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

impl ProblemInstance {
    /// Validates dimensions, required constants, and — when a solution is
    /// planted — the inclusion residual `‖x* − J_A(x* − Bx* − Cx*)‖ ≤ 1e-8`.
    pub fn new(
        a: SetValuedOp,
        b: SingleValuedOp,
        c: SingleValuedOp,
        known_solution: Option<Point>,
    ) -> Result<Self, OperatorError> {
        let dim = a.dim();
        if b.dim() != dim || c.dim() != dim {
            return Err(OperatorError::DimensionMismatch {
                expected: dim,
                got: if b.dim() != dim { b.dim() } else { c.dim() },
            });
        }
        if b.effective_lipschitz().is_none() {
            return Err(OperatorError::InvalidParameter(
                "B must declare a Lipschitz constant".into(),
            ));
        }
        if !c.is_zero() && c.cocoercivity().is_none() {
            return Err(OperatorError::InvalidParameter(
                "C must declare a cocoercivity modulus unless it is zero".into(),
            ));
        }
        if let Some(x) = &known_solution {
            if x.dim() != dim {
                return Err(OperatorError::DimensionMismatch {
                    expected: dim,
                    got: x.dim(),
                });
            }
            let instance = Self {
                a,
                b,
                c,
                dim,
                known_solution: None,
            };
            let res = instance.residual_at(x, 1.0)?;
            if res > PLANTED_RESIDUAL_TOL {
                return Err(OperatorError::InvalidParameter(format!(
                    "claimed solution has inclusion residual {res:.3e}"
                )));
            }
            return Ok(Self {
                known_solution: Some(x.clone()),
                ..instance
            });
        }
        Ok(Self {
            a,
            b,
            c,
            dim,
            known_solution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_solution(&self) -> Option<&Point> {
        self.known_solution.as_ref()
    }

    pub fn ops(&self) -> Inclusion<'_> {
        Inclusion {
            a: &self.a,
            b: &self.b,
            c: &self.c,
        }
    }

    /// `(L, β)` for step-size planning: the Lipschitz constant of `B` and the
    /// cocoercivity modulus of `C` (`+∞` when `C` is zero or constant).
    pub fn constants(&self) -> (f64, f64) {
        let l = self.b.effective_lipschitz().unwrap_or(0.0);
        let beta = if self.c.is_zero() {
            f64::INFINITY
        } else {
            self.c.cocoercivity().unwrap_or(f64::INFINITY)
        };
        (l, beta)
    }

    /// Fixed-point residual `‖x − J_{λA}(x − λBx − λCx)‖`, zero exactly at
    /// solutions.
    pub fn residual_at(&self, x: &Point, lambda: f64) -> Result<f64, OperatorError> {
        let bx = self.b.apply(x)?;
        let cx = self.c.apply(x)?;
        let arg = Point::from_array(
            x.coords() - &(bx.coords() * lambda) - &(cx.coords() * lambda),
        )?;
        let j = self.a.resolvent(lambda, &arg)?;
        Ok(x.dist(&j))
    }
}

/// Synthesis recipes for planted instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Box normal cone `A` with the solution in the interior, skew `B`,
    /// strongly monotone quadratic-gradient `C`.
    AffineInterior,
    /// Affine monotone `A`, skew `B`, quadratic-gradient `C`.
    AffineFull,
    /// Ball normal cone `A` with interior solution, skew `B`, quadratic `C`.
    BallInterior,
    /// `ℓ1` subdifferential `A`, zero `B`, strongly convex quadratic `C`.
    L1LassoLike,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::AffineInterior => "affine-interior",
            InstanceKind::AffineFull => "affine-full",
            InstanceKind::BallInterior => "ball-interior",
            InstanceKind::L1LassoLike => "l1-lasso-like",
        }
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "affine-interior" => Ok(InstanceKind::AffineInterior),
            "affine-full" => Ok(InstanceKind::AffineFull),
            "ball-interior" => Ok(InstanceKind::BallInterior),
            "l1-lasso-like" => Ok(InstanceKind::L1LassoLike),
            other => Err(OperatorError::InvalidParameter(format!(
                "unknown instance kind `{other}`"
            ))),
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| StandardNormal.sample(rng))
}

fn gaussian_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| StandardNormal.sample(rng))
}

/// Random skew matrix scaled to the given spectral norm (zero in dimension 1).
pub fn random_skew(rng: &mut ChaCha8Rng, dim: usize, norm: f64) -> Array2<f64> {
    let g = gaussian_mat(rng, dim, dim);
    let k = (&g - &g.t()) * 0.5;
    let s = linalg::spectral_norm(&k.view());
    if s <= 0.0 {
        Array2::zeros((dim, dim))
    } else {
        k * (norm / s)
    }
}

/// Random symmetric matrix with eigenvalues in `[min_eig, max_eig]` (the top
/// eigenvalue lands on `max_eig` up to power-iteration tolerance).
pub fn random_psd(rng: &mut ChaCha8Rng, dim: usize, min_eig: f64, max_eig: f64) -> Array2<f64> {
    let g = gaussian_mat(rng, dim, dim);
    let w = g.t().dot(&g);
    let s = linalg::spectral_norm(&w.view());
    let mut q = if s <= 0.0 {
        Array2::zeros((dim, dim))
    } else {
        // symmetrize to scrub accumulation asymmetry from the product
        let scaled = w * ((max_eig - min_eig) / s);
        (&scaled + &scaled.t()) * 0.5
    };
    for i in 0..dim {
        q[[i, i]] += min_eig;
    }
    q
}

/// Builds a planted instance: deterministic in `(seed, dim, kind)`.
pub fn synthesize_instance(
    seed: u64,
    dim: usize,
    kind: InstanceKind,
) -> Result<ProblemInstance, OperatorError> {
    if dim == 0 {
        return Err(OperatorError::InvalidParameter(
            "instance dimension must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_star = gaussian_vec(&mut rng, dim);

    match kind {
        InstanceKind::AffineInterior | InstanceKind::BallInterior => {
            let a = match kind {
                InstanceKind::AffineInterior => {
                    let margin = gaussian_vec(&mut rng, dim).mapv(|g| 1.0 + g.abs());
                    SetValuedOp::normal_cone_box(
                        &Point::from_array(&x_star - &margin)?,
                        &Point::from_array(&x_star + &margin)?,
                    )?
                }
                _ => {
                    let center = &x_star + &(gaussian_vec(&mut rng, dim) * 0.3);
                    let slack: f64 = StandardNormal.sample(&mut rng);
                    let radius = (&x_star - &center).dot(&(&x_star - &center)).sqrt()
                        + 1.0
                        + slack.abs();
                    SetValuedOp::normal_cone_ball(&Point::from_array(center)?, radius)?
                }
            };
            let b = make_skew(random_skew(&mut rng, dim, 1.0))?;
            let q = random_psd(&mut rng, dim, 0.5, 2.0);
            // interior solution: the normal cone contributes {0}, so shift C
            // to cancel B + Q at x*
            let shift = -(b.apply(&Point::raw(x_star.clone()))?.into_array()
                + q.dot(&x_star));
            let c = SingleValuedOp::quadratic_gradient(q, shift)?;
            ProblemInstance::new(a, b, c, Some(Point::from_array(x_star)?))
        }
        InstanceKind::AffineFull => {
            let s = random_psd(&mut rng, dim, 0.0, 1.0);
            let k = random_skew(&mut rng, dim, 0.5);
            let m_a = &s + &k;
            let b_a = gaussian_vec(&mut rng, dim);
            let a_at_star = m_a.dot(&x_star) + &b_a;
            let a = SetValuedOp::affine(m_a, b_a)?;
            let b = make_skew(random_skew(&mut rng, dim, 1.0))?;
            let q = random_psd(&mut rng, dim, 0.5, 2.0);
            let shift = -(&a_at_star
                + &b.apply(&Point::raw(x_star.clone()))?.into_array()
                + q.dot(&x_star));
            let c = SingleValuedOp::quadratic_gradient(q, shift)?;
            ProblemInstance::new(a, b, c, Some(Point::from_array(x_star)?))
        }
        InstanceKind::L1LassoLike => {
            // sparsify the solution so both branches of the subdifferential
            // are exercised
            let x_star = x_star.mapv(|v| if v.abs() < 0.6 { 0.0 } else { v });
            let slack: f64 = StandardNormal.sample(&mut rng);
            let weight = 0.5 + slack.abs();
            let sub = x_star.mapv(|v| {
                if v != 0.0 {
                    v.signum()
                } else {
                    0.0 // filled below with an interior subgradient
                }
            });
            let sub = {
                let mut s = sub;
                for (i, v) in x_star.iter().enumerate() {
                    if *v == 0.0 {
                        s[i] = rng.gen_range(-0.9..0.9);
                    }
                }
                s
            };
            let q = random_psd(&mut rng, dim, 0.5, 2.0);
            let shift = -(sub * weight) - q.dot(&x_star);
            let a = make_l1_subdifferential(weight, dim)?;
            let b = SingleValuedOp::zero(dim);
            let c = SingleValuedOp::quadratic_gradient(q, shift)?;
            ProblemInstance::new(a, b, c, Some(Point::from_array(x_star)?))
        }
    }
}
