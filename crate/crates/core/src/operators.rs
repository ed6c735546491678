//! Operator abstractions for monotone inclusions.
//!
//! Set-valued maximally monotone operators are exposed exclusively through
//! resolvent evaluation `J_{λA} = (I + λA)⁻¹`; single-valued operators are
//! evaluable and carry declared Lipschitz / cocoercivity certificates that can
//! be probe-checked (see [`crate::probes`]).
//!
//! Operators are immutable after construction and safe to share across
//! concurrent solver runs; the affine family's per-λ factorization caches are
//! synchronized internally.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use ndarray::{Array1, Array2};

use crate::error::OperatorError;
use crate::linalg::{self, LuFactors};
use crate::point::Point;

/// Tolerance for structural matrix checks (symmetry, skewness).
pub const STRUCT_TOL: f64 = 1e-12;
/// Tolerance on the minimum eigenvalue of symmetric parts when validating
/// monotonicity at construction.
pub const MONOTONE_EIG_TOL: f64 = 1e-10;

/// A maximally monotone operator evaluated through its resolvent.
pub trait ResolventOp: Send + Sync {
    fn dim(&self) -> usize;

    /// `J_{λA}(x)`, the unique `x̂` with `x − x̂ ∈ λ·A(x̂)`. Defined for every
    /// finite input and every `λ > 0`.
    fn resolvent(&self, lambda: f64, x: &Point) -> Result<Point, OperatorError>;
}

/// A single-valued operator with declared regularity constants.
pub trait ForwardOp: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &Point) -> Result<Point, OperatorError>;

    /// Declared Lipschitz constant, if any.
    fn lipschitz(&self) -> Option<f64>;

    /// Declared cocoercivity modulus. `f64::INFINITY` marks constant maps,
    /// which are cocoercive with any modulus.
    fn cocoercivity(&self) -> Option<f64>;
}

fn check_dim(expected: usize, got: usize) -> Result<(), OperatorError> {
    if expected == got {
        Ok(())
    } else {
        Err(OperatorError::DimensionMismatch { expected, got })
    }
}

fn check_lambda(lambda: f64) -> Result<(), OperatorError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(OperatorError::InvalidParameter(format!(
            "resolvent parameter must be positive, got {lambda}"
        )))
    }
}

// ---------------------------------------------------------------------------
// Set-valued operators
// ---------------------------------------------------------------------------

/// Affine operator `A(y) = M y + b` with positive semidefinite symmetric part,
/// plus per-λ LU caches for resolvent and inverse-resolvent solves.
#[derive(Debug, Clone)]
pub(crate) struct AffineData {
    pub(crate) m: Array2<f64>,
    pub(crate) b: Array1<f64>,
    // keyed by λ bit pattern; shared across clones
    resolvent_cache: Arc<RwLock<HashMap<u64, Arc<LuFactors>>>>,
    inverse_cache: Arc<RwLock<HashMap<u64, Arc<LuFactors>>>>,
}

impl AffineData {
    fn new(m: Array2<f64>, b: Array1<f64>) -> Self {
        Self {
            m,
            b,
            resolvent_cache: Arc::new(RwLock::new(HashMap::new())),
            inverse_cache: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    /// Factors of `I + λM`, cached per λ.
    fn resolvent_factors(&self, lambda: f64) -> Result<Arc<LuFactors>, OperatorError> {
        cached_factors(&self.resolvent_cache, lambda, || {
            let n = self.m.nrows();
            let mut a = &self.m * lambda;
            for i in 0..n {
                a[[i, i]] += 1.0;
            }
            LuFactors::factor(&a.view())
        })
    }

    /// Factors of `M + λI`, cached per λ.
    fn inverse_factors(&self, lambda: f64) -> Result<Arc<LuFactors>, OperatorError> {
        cached_factors(&self.inverse_cache, lambda, || {
            let n = self.m.nrows();
            let mut a = self.m.clone();
            for i in 0..n {
                a[[i, i]] += lambda;
            }
            LuFactors::factor(&a.view())
        })
    }
}

fn cached_factors(
    cache: &RwLock<HashMap<u64, Arc<LuFactors>>>,
    lambda: f64,
    build: impl FnOnce() -> Result<LuFactors, OperatorError>,
) -> Result<Arc<LuFactors>, OperatorError> {
    let key = lambda.to_bits();
    if let Some(f) = cache.read().unwrap().get(&key) {
        return Ok(Arc::clone(f));
    }
    let factors = Arc::new(build()?);
    let mut guard = cache.write().unwrap();
    Ok(Arc::clone(guard.entry(key).or_insert(factors)))
}

#[derive(Debug, Clone)]
pub(crate) enum SetValuedKind {
    /// `A = 0`; the resolvent is the identity.
    Zero { dim: usize },
    /// `A(y) = M y + b`.
    Affine(AffineData),
    /// Normal cone of the box `[lo, hi]`; resolvent clamps componentwise.
    NormalConeBox { lo: Array1<f64>, hi: Array1<f64> },
    /// Normal cone of the closed ball `B(center, radius)`; resolvent projects.
    NormalConeBall { center: Array1<f64>, radius: f64 },
    /// `w·∂‖·‖₁`; resolvent is componentwise soft-thresholding.
    L1 { weight: f64, dim: usize },
    /// `x ↦ scale·A(x − shift) + offset` around an inner operator.
    ScaledShifted {
        inner: Box<SetValuedOp>,
        scale: f64,
        shift: Array1<f64>,
        offset: Array1<f64>,
    },
}

/// A maximally monotone operator from the artifact's family catalog.
#[derive(Debug, Clone)]
pub struct SetValuedOp {
    pub(crate) kind: SetValuedKind,
}

impl SetValuedOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: SetValuedKind::Zero { dim },
        }
    }

    /// Affine monotone operator `A(y) = M y + b`. Rejects matrices whose
    /// symmetric part has an eigenvalue below `-1e-10`.
    pub fn affine(m: Array2<f64>, b: Array1<f64>) -> Result<Self, OperatorError> {
        if m.nrows() != m.ncols() {
            return Err(OperatorError::InvalidParameter(
                "affine operator needs a square matrix".into(),
            ));
        }
        check_dim(m.nrows(), b.len())?;
        let min_eig = linalg::min_eig_symmetric_part(&m.view());
        if min_eig < -MONOTONE_EIG_TOL {
            return Err(OperatorError::InvalidParameter(format!(
                "affine operator is not monotone: min symmetric eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            kind: SetValuedKind::Affine(AffineData::new(m, b)),
        })
    }

    pub fn normal_cone_box(lo: &Point, hi: &Point) -> Result<Self, OperatorError> {
        check_dim(lo.dim(), hi.dim())?;
        for (l, h) in lo.coords().iter().zip(hi.coords().iter()) {
            if l > h {
                return Err(OperatorError::InvalidParameter(format!(
                    "box bounds must satisfy lo <= hi, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self {
            kind: SetValuedKind::NormalConeBox {
                lo: lo.coords().clone(),
                hi: hi.coords().clone(),
            },
        })
    }

    pub fn normal_cone_ball(center: &Point, radius: f64) -> Result<Self, OperatorError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            kind: SetValuedKind::NormalConeBall {
                center: center.coords().clone(),
                radius,
            },
        })
    }

    pub fn l1(weight: f64, dim: usize) -> Result<Self, OperatorError> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!(
                "l1 weight must be positive, got {weight}"
            )));
        }
        Ok(Self {
            kind: SetValuedKind::L1 { weight, dim },
        })
    }

    /// Wraps `inner` as `x ↦ scale·inner(x − shift) + offset`, which is
    /// maximally monotone for `scale > 0`.
    pub fn scaled_shifted(
        inner: SetValuedOp,
        scale: f64,
        shift: &Point,
        offset: &Point,
    ) -> Result<Self, OperatorError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!(
                "wrapper scale must be positive, got {scale}"
            )));
        }
        check_dim(inner.dim(), shift.dim())?;
        check_dim(inner.dim(), offset.dim())?;
        Ok(Self {
            kind: SetValuedKind::ScaledShifted {
                inner: Box::new(inner),
                scale,
                shift: shift.coords().clone(),
                offset: offset.coords().clone(),
            },
        })
    }

    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            SetValuedKind::Zero { .. } => "zero",
            SetValuedKind::Affine(_) => "affine",
            SetValuedKind::NormalConeBox { .. } => "box",
            SetValuedKind::NormalConeBall { .. } => "ball",
            SetValuedKind::L1 { .. } => "l1",
            SetValuedKind::ScaledShifted { .. } => "scaled_shifted",
        }
    }

    /// Whether `J_{λA⁻¹}` is implementable for this family. The zero family
    /// (and wrappers around it) is rejected rather than guessed at.
    pub fn supports_inverse_resolvent(&self) -> bool {
        match &self.kind {
            SetValuedKind::Zero { .. } => false,
            SetValuedKind::ScaledShifted { inner, .. } => inner.supports_inverse_resolvent(),
            _ => true,
        }
    }

    /// `J_{λA⁻¹}(x)`: the resolvent of the inverse operator.
    ///
    /// The affine family solves `(M + λI)v = x − b` directly and returns
    /// `x − λv`; the remaining families go through the identity
    /// `J_{λA⁻¹}(x) = x − λ·J_{λ⁻¹A}(x/λ)`.
    pub fn inverse_resolvent(&self, lambda: f64, x: &Point) -> Result<Point, OperatorError> {
        check_lambda(lambda)?;
        check_dim(self.dim(), x.dim())?;
        match &self.kind {
            SetValuedKind::Zero { .. } => {
                Err(OperatorError::UnsupportedInverseResolvent("zero"))
            }
            SetValuedKind::ScaledShifted { inner, .. } if !inner.supports_inverse_resolvent() => {
                Err(OperatorError::UnsupportedInverseResolvent("scaled_shifted(zero)"))
            }
            SetValuedKind::Affine(data) => {
                let factors = data.inverse_factors(lambda)?;
                let v = factors.solve(&(x.coords() - &data.b));
                Point::from_array(x.coords() - &(v * lambda))
            }
            _ => {
                let scaled = Point::from_array(x.coords() / lambda)?;
                let j = self.resolvent(1.0 / lambda, &scaled)?;
                Point::from_array(x.coords() - &(j.into_array() * lambda))
            }
        }
    }
}

impl ResolventOp for SetValuedOp {
    fn dim(&self) -> usize {
        match &self.kind {
            SetValuedKind::Zero { dim } => *dim,
            SetValuedKind::Affine(data) => data.m.nrows(),
            SetValuedKind::NormalConeBox { lo, .. } => lo.len(),
            SetValuedKind::NormalConeBall { center, .. } => center.len(),
            SetValuedKind::L1 { dim, .. } => *dim,
            SetValuedKind::ScaledShifted { inner, .. } => inner.dim(),
        }
    }

    fn resolvent(&self, lambda: f64, x: &Point) -> Result<Point, OperatorError> {
        check_lambda(lambda)?;
        check_dim(self.dim(), x.dim())?;
        match &self.kind {
            SetValuedKind::Zero { .. } => Ok(x.clone()),
            SetValuedKind::Affine(data) => {
                // (I + λM) x̂ = x − λb
                let factors = data.resolvent_factors(lambda)?;
                let rhs = x.coords() - &(&data.b * lambda);
                Point::from_array(factors.solve(&rhs))
            }
            SetValuedKind::NormalConeBox { lo, hi } => {
                let out = ndarray::Zip::from(x.coords())
                    .and(lo)
                    .and(hi)
                    .map_collect(|&v, &l, &h| v.clamp(l, h));
                Point::from_array(out)
            }
            SetValuedKind::NormalConeBall { center, radius } => {
                let d = x.coords() - center;
                let norm = d.dot(&d).sqrt();
                if norm <= *radius {
                    Ok(x.clone())
                } else {
                    Point::from_array(center + &(d * (*radius / norm)))
                }
            }
            SetValuedKind::L1 { weight, .. } => {
                let t = lambda * *weight;
                let out = x.coords().mapv(|v| v.signum() * (v.abs() - t).max(0.0));
                Point::from_array(out)
            }
            SetValuedKind::ScaledShifted {
                inner,
                scale,
                shift,
                offset,
            } => {
                // x − x̂ ∈ λ(s·A(x̂ − t) + c)  ⇔  x̂ = t + J_{λs A}(x − t − λc)
                let arg = Point::from_array(x.coords() - shift - &(offset * lambda))?;
                let u = inner.resolvent(lambda * scale, &arg)?;
                Point::from_array(u.into_array() + shift)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Single-valued operators
// ---------------------------------------------------------------------------

/// Componentwise scalar maps used by the `componentwise` family. Both are
/// gradients of convex functions with 1-Lipschitz derivative, hence monotone,
/// 1-Lipschitz and 1-cocoercive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarMap {
    Tanh,
    /// Gradient of the Huber function: clamp to `[-delta, delta]`.
    HuberGradient { delta: f64 },
}

impl ScalarMap {
    fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarMap::Tanh => t.tanh(),
            ScalarMap::HuberGradient { delta } => t.clamp(-*delta, *delta),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SingleValuedKind {
    Zero,
    Linear { m: Array2<f64> },
    Affine { m: Array2<f64>, b: Array1<f64> },
    SkewLinear { m: Array2<f64> },
    QuadraticGradient { q: Array2<f64>, b: Array1<f64> },
    ScaledIdentity { factor: f64 },
    Componentwise { f: ScalarMap },
}

/// An evaluable operator with declared Lipschitz constant and/or cocoercivity
/// modulus. Declared constants are certificates, checked by randomized probes
/// rather than trusted; see [`crate::probes::certify`].
#[derive(Debug, Clone)]
pub struct SingleValuedOp {
    pub(crate) kind: SingleValuedKind,
    dim: usize,
    lipschitz: Option<f64>,
    cocoercivity: Option<f64>,
}

impl SingleValuedOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: SingleValuedKind::Zero,
            dim,
            lipschitz: Some(0.0),
            cocoercivity: Some(f64::INFINITY),
        }
    }

    /// `x ↦ M x` with the spectral norm as Lipschitz constant. Monotonicity is
    /// not enforced here; the probes report on it.
    pub fn linear(m: Array2<f64>) -> Result<Self, OperatorError> {
        if m.nrows() != m.ncols() {
            return Err(OperatorError::InvalidParameter(
                "linear operator needs a square matrix".into(),
            ));
        }
        let dim = m.nrows();
        let lip = linalg::spectral_norm(&m.view());
        Ok(Self {
            kind: SingleValuedKind::Linear { m },
            dim,
            lipschitz: Some(lip),
            cocoercivity: None,
        })
    }

    /// `x ↦ M x + b`.
    pub fn affine(m: Array2<f64>, b: Array1<f64>) -> Result<Self, OperatorError> {
        if m.nrows() != m.ncols() {
            return Err(OperatorError::InvalidParameter(
                "affine operator needs a square matrix".into(),
            ));
        }
        check_dim(m.nrows(), b.len())?;
        let dim = m.nrows();
        let lip = linalg::spectral_norm(&m.view());
        Ok(Self {
            kind: SingleValuedKind::Affine { m, b },
            dim,
            lipschitz: Some(lip),
            cocoercivity: None,
        })
    }

    /// `x ↦ M x` for skew `M` (monotone, never cocoercive unless zero).
    /// Rejects matrices with `‖M + Mᵀ‖_max > 1e-12`.
    pub fn skew_linear(m: Array2<f64>) -> Result<Self, OperatorError> {
        if m.nrows() != m.ncols() {
            return Err(OperatorError::InvalidParameter(
                "skew operator needs a square matrix".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[[i, j]] + m[[j, i]]).abs());
            }
        }
        if worst > STRUCT_TOL {
            return Err(OperatorError::InvalidParameter(format!(
                "matrix is not skew-symmetric: max |M + Mᵀ| entry {worst:.3e}"
            )));
        }
        let dim = m.nrows();
        let lip = linalg::spectral_norm(&m.view());
        Ok(Self {
            kind: SingleValuedKind::SkewLinear { m },
            dim,
            lipschitz: Some(lip),
            cocoercivity: None,
        })
    }

    /// Gradient `x ↦ Q x + b` of the quadratic `½xᵀQx + bᵀx` for symmetric
    /// positive semidefinite `Q`. Cocoercivity modulus is `1/λ_max(Q)`; a zero
    /// `Q` yields the constant map `b`, cocoercive with any modulus
    /// (`+∞` sentinel).
    pub fn quadratic_gradient(q: Array2<f64>, b: Array1<f64>) -> Result<Self, OperatorError> {
        if q.nrows() != q.ncols() {
            return Err(OperatorError::InvalidParameter(
                "quadratic gradient needs a square matrix".into(),
            ));
        }
        check_dim(q.nrows(), b.len())?;
        let mut asym: f64 = 0.0;
        for i in 0..q.nrows() {
            for j in 0..q.ncols() {
                asym = asym.max((q[[i, j]] - q[[j, i]]).abs());
            }
        }
        if asym > STRUCT_TOL {
            return Err(OperatorError::InvalidParameter(format!(
                "quadratic matrix is not symmetric: max |Q − Qᵀ| entry {asym:.3e}"
            )));
        }
        let (min_eig, max_eig) = linalg::sym_eig_range(&q.view());
        if min_eig < -MONOTONE_EIG_TOL {
            return Err(OperatorError::InvalidParameter(format!(
                "quadratic matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        let dim = q.nrows();
        let (lip, coco) = if max_eig <= 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (max_eig, 1.0 / max_eig)
        };
        Ok(Self {
            kind: SingleValuedKind::QuadraticGradient { q, b },
            dim,
            lipschitz: Some(lip),
            cocoercivity: Some(coco),
        })
    }

    /// `x ↦ factor·x`. Negative factors are representable (useful to exercise
    /// failing probes) but carry no cocoercivity certificate.
    pub fn scaled_identity(factor: f64, dim: usize) -> Result<Self, OperatorError> {
        if !factor.is_finite() {
            return Err(OperatorError::InvalidParameter(format!(
                "scaling factor must be finite, got {factor}"
            )));
        }
        let cocoercivity = if factor > 0.0 {
            Some(1.0 / factor)
        } else if factor == 0.0 {
            Some(f64::INFINITY)
        } else {
            None
        };
        Ok(Self {
            kind: SingleValuedKind::ScaledIdentity { factor },
            dim,
            lipschitz: Some(factor.abs()),
            cocoercivity,
        })
    }

    /// Applies a smooth monotone scalar map to each coordinate.
    pub fn componentwise(f: ScalarMap, dim: usize) -> Result<Self, OperatorError> {
        if let ScalarMap::HuberGradient { delta } = f {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(OperatorError::InvalidParameter(format!(
                    "Huber threshold must be positive, got {delta}"
                )));
            }
        }
        Ok(Self {
            kind: SingleValuedKind::Componentwise { f },
            dim,
            lipschitz: Some(1.0),
            cocoercivity: Some(1.0),
        })
    }

    /// Replaces the declared constants; probes check the declaration, so this
    /// is how deliberately wrong certificates are expressed in tests.
    pub fn with_declared(mut self, lipschitz: Option<f64>, cocoercivity: Option<f64>) -> Self {
        self.lipschitz = lipschitz;
        self.cocoercivity = cocoercivity;
        self
    }

    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            SingleValuedKind::Zero => "zero",
            SingleValuedKind::Linear { .. } => "linear",
            SingleValuedKind::Affine { .. } => "affine",
            SingleValuedKind::SkewLinear { .. } => "skew",
            SingleValuedKind::QuadraticGradient { .. } => "quad_grad",
            SingleValuedKind::ScaledIdentity { .. } => "scaled_identity",
            SingleValuedKind::Componentwise { .. } => "componentwise",
        }
    }

    /// Structurally the zero map.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SingleValuedKind::Zero)
            || matches!(self.kind, SingleValuedKind::ScaledIdentity { factor } if factor == 0.0)
    }

    /// Declared Lipschitz constant, falling back on `1/β` when only a
    /// cocoercivity modulus is declared.
    pub fn effective_lipschitz(&self) -> Option<f64> {
        self.lipschitz.or_else(|| {
            self.cocoercivity
                .map(|b| if b.is_infinite() { 0.0 } else { 1.0 / b })
        })
    }
}

impl ForwardOp for SingleValuedOp {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point) -> Result<Point, OperatorError> {
        check_dim(self.dim, x.dim())?;
        let out = match &self.kind {
            SingleValuedKind::Zero => Array1::zeros(self.dim),
            SingleValuedKind::Linear { m } => m.dot(x.coords()),
            SingleValuedKind::Affine { m, b } => m.dot(x.coords()) + b,
            SingleValuedKind::SkewLinear { m } => m.dot(x.coords()),
            SingleValuedKind::QuadraticGradient { q, b } => q.dot(x.coords()) + b,
            SingleValuedKind::ScaledIdentity { factor } => x.coords() * *factor,
            SingleValuedKind::Componentwise { f } => x.coords().mapv(|t| f.eval(t)),
        };
        Point::from_array(out).map_err(|_| OperatorError::NonFiniteOutput)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    fn cocoercivity(&self) -> Option<f64> {
        self.cocoercivity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn apply_zero_and_identity() {
        let z = SingleValuedOp::zero(2);
        assert_eq!(z.apply(&pt(&[3.0, -1.0])).unwrap(), pt(&[0.0, 0.0]));

        let id = SingleValuedOp::scaled_identity(1.0, 1).unwrap();
        assert_eq!(id.apply(&pt(&[2.0])).unwrap(), pt(&[2.0]));
    }

    #[test]
    fn apply_skew_by_hand() {
        // matrix-vector product by hand: [[0,1],[-1,0]]·(1,0) = (0,-1)
        let op = SingleValuedOp::skew_linear(array![[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let y = op.apply(&pt(&[1.0, 0.0])).unwrap();
        assert_eq!(y, pt(&[0.0, -1.0]));
        assert!((op.lipschitz().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let op = SingleValuedOp::zero(2);
        assert!(matches!(
            op.apply(&pt(&[1.0])),
            Err(OperatorError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn skew_constructor_rejects_non_skew() {
        assert!(SingleValuedOp::skew_linear(array![[0.0, 1.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn quadratic_gradient_constants() {
        let q = array![[2.0, 0.0], [0.0, 0.5]];
        let op = SingleValuedOp::quadratic_gradient(q, Array1::zeros(2)).unwrap();
        assert!((op.cocoercivity().unwrap() - 0.5).abs() < 1e-9);
        assert!((op.lipschitz().unwrap() - 2.0).abs() < 1e-9);

        // zero Q: constant map with +∞ sentinel
        let c = SingleValuedOp::quadratic_gradient(Array2::zeros((2, 2)), array![1.0, 1.0])
            .unwrap();
        assert!(c.cocoercivity().unwrap().is_infinite());
        assert_eq!(c.apply(&pt(&[5.0, -2.0])).unwrap(), pt(&[1.0, 1.0]));
    }

    #[test]
    fn quadratic_gradient_rejects_indefinite() {
        assert!(
            SingleValuedOp::quadratic_gradient(array![[-1.0, 0.0], [0.0, 1.0]], Array1::zeros(2))
                .is_err()
        );
        assert!(
            SingleValuedOp::quadratic_gradient(array![[1.0, 0.5], [0.0, 1.0]], Array1::zeros(2))
                .is_err()
        );
    }

    #[test]
    fn resolvent_of_zero_is_identity() {
        let a = SetValuedOp::zero(2);
        let x = pt(&[5.0, 5.0]);
        assert_eq!(a.resolvent(0.3, &x).unwrap(), x);
        assert_eq!(a.resolvent(7.0, &x).unwrap(), x);
    }

    #[test]
    fn resolvent_rejects_bad_lambda() {
        let a = SetValuedOp::zero(1);
        assert!(a.resolvent(0.0, &pt(&[1.0])).is_err());
        assert!(a.resolvent(-1.0, &pt(&[1.0])).is_err());
    }

    #[test]
    fn resolvent_box_clamps() {
        let a = SetValuedOp::normal_cone_box(&pt(&[0.0, 0.0]), &pt(&[1.0, 1.0])).unwrap();
        assert_eq!(a.resolvent(0.7, &pt(&[2.0, -3.0])).unwrap(), pt(&[1.0, 0.0]));

        // singleton projection
        let s = SetValuedOp::normal_cone_box(&pt(&[0.0, 0.0]), &pt(&[0.0, 0.0])).unwrap();
        assert_eq!(s.resolvent(1.0, &pt(&[9.0, -4.0])).unwrap(), pt(&[0.0, 0.0]));
    }

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(SetValuedOp::normal_cone_box(&pt(&[1.0]), &pt(&[0.0])).is_err());
    }

    #[test]
    fn resolvent_affine_skew_linear_solve() {
        // 2×2 linear solve of (I+M)x̂ = x with skew M
        let a = SetValuedOp::affine(array![[0.0, 1.0], [-1.0, 0.0]], Array1::zeros(2)).unwrap();
        let y = a.resolvent(1.0, &pt(&[1.0, 0.0])).unwrap();
        assert!((y.coords()[0] - 0.5).abs() < 1e-14);
        assert!((y.coords()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn affine_rejects_non_monotone() {
        assert!(SetValuedOp::affine(array![[-1.0]], Array1::zeros(1)).is_err());
    }

    #[test]
    fn resolvent_ball_projects() {
        let a = SetValuedOp::normal_cone_ball(&pt(&[0.0, 0.0]), 1.0).unwrap();
        let inside = pt(&[0.3, 0.4]);
        assert_eq!(a.resolvent(1.0, &inside).unwrap(), inside);
        let out = a.resolvent(1.0, &pt(&[3.0, 4.0])).unwrap();
        assert!((out.coords()[0] - 0.6).abs() < 1e-14);
        assert!((out.coords()[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn resolvent_l1_soft_thresholds() {
        let a = SetValuedOp::l1(1.0, 1).unwrap();
        assert!((a.resolvent(0.5, &pt(&[2.0])).unwrap().coords()[0] - 1.5).abs() < 1e-15);
        assert_eq!(a.resolvent(0.5, &pt(&[0.3])).unwrap(), pt(&[0.0]));

        let a2 = SetValuedOp::l1(2.0, 2).unwrap();
        let y = a2.resolvent(1.0, &pt(&[-5.0, 1.0])).unwrap();
        assert_eq!(y, pt(&[-3.0, 0.0]));
    }

    #[test]
    fn scaled_shifted_resolvent_matches_derivation() {
        // A = 2·Z(x − t) + c around the zero operator Z has resolvent
        // x̂ = t + (x − t − λc), i.e. x − λc.
        let inner = SetValuedOp::zero(1);
        let op =
            SetValuedOp::scaled_shifted(inner, 2.0, &pt(&[3.0]), &pt(&[4.0])).unwrap();
        let y = op.resolvent(0.5, &pt(&[10.0])).unwrap();
        assert!((y.coords()[0] - 8.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_resolvent_of_identity_as_affine() {
        // A = I: A⁻¹ = I so J_{1·A⁻¹}(2) = 1
        let a = SetValuedOp::affine(array![[1.0]], Array1::zeros(1)).unwrap();
        let y = a.inverse_resolvent(1.0, &pt(&[2.0])).unwrap();
        assert!((y.coords()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_resolvent_rejects_zero_family() {
        let a = SetValuedOp::zero(1);
        assert!(matches!(
            a.inverse_resolvent(1.0, &pt(&[1.0])),
            Err(OperatorError::UnsupportedInverseResolvent("zero"))
        ));
        let wrapped = SetValuedOp::scaled_shifted(
            SetValuedOp::zero(1),
            1.0,
            &Point::zeros(1),
            &Point::zeros(1),
        )
        .unwrap();
        assert!(wrapped.inverse_resolvent(1.0, &pt(&[1.0])).is_err());
    }

    // Brute-force oracle for the 1-D affine inverse resolvent: solves
    // x − x̂ ∈ λ·A⁻¹(x̂) for A(y) = a·y, i.e. x̂·(1 + λ/a) = x.
    fn inverse_resolvent_oracle_1d(a: f64, lambda: f64, x: f64) -> f64 {
        x / (1.0 + lambda / a)
    }

    #[test]
    fn inverse_resolvent_matches_brute_force_oracle() {
        // A(y) = 2y, λ = 0.5, x = 3: oracle gives 3/(1 + 0.25) = 2.4
        let expected = inverse_resolvent_oracle_1d(2.0, 0.5, 3.0);
        assert!((expected - 2.4).abs() < 1e-15);

        let a = SetValuedOp::affine(array![[2.0]], Array1::zeros(1)).unwrap();
        let y = a.inverse_resolvent(0.5, &pt(&[3.0])).unwrap();
        assert!((y.coords()[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn resolvent_cache_is_consistent_across_threads() {
        let a = std::sync::Arc::new(
            SetValuedOp::affine(array![[1.0, 0.5], [-0.5, 2.0]], array![0.1, -0.3]).unwrap(),
        );
        let x = pt(&[1.0, 2.0]);
        let sequential = a.resolvent(0.25, &x).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let a = std::sync::Arc::clone(&a);
                let x = x.clone();
                std::thread::spawn(move || a.resolvent(0.25, &x).unwrap())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), sequential);
        }
    }
}
