//! Product-space lift for composite inclusions with parallel sums.
//!
//! A composite problem couples a base inclusion on `R^n` with `m` dual blocks
//! through nonzero linear maps `L_i`. Lifting to `R^n × R^{g_1} × … × R^{g_m}`
//! turns it into a single three-operator inclusion: a blockwise resolvent
//! part, a monotone Lipschitz part (the skew coupling plus the `D_i⁻¹`), and a
//! cocoercive part (`C` and the `C_i⁻¹`). The lifted problem is then solved by
//! the outer reflected scheme with the aggregate constants.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algorithms::{
    plan_step_size, solve_inclusion, IterationTrace, Method, SolveOutcome, StoppingRule,
};
use crate::catalog::{self, Inclusion};
use crate::error::{OperatorError, SolveError};
use crate::linalg;
use crate::operators::{ForwardOp, ResolventOp, SetValuedOp, SingleValuedOp};
use crate::point::Point;
use crate::probes::{certify_with, CertReport, ProbeConfig};

/// One dual block: `B_i` (through its inverse resolvent), the evaluable
/// inverses `D_i⁻¹` and `C_i⁻¹`, the coupling matrix, and the shift `r_i`.
#[derive(Debug, Clone)]
pub struct CompositeBlock {
    pub b_i: SetValuedOp,
    pub d_inv: SingleValuedOp,
    pub c_inv: SingleValuedOp,
    /// `g_i × n` coupling matrix.
    pub coupling: Array2<f64>,
    pub r_i: Point,
}

impl CompositeBlock {
    pub fn block_dim(&self) -> usize {
        self.b_i.dim()
    }
}

/// A composite primal-dual inclusion with an optional planted solution pair.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub a: SetValuedOp,
    pub b: SingleValuedOp,
    pub c: SingleValuedOp,
    pub z: Point,
    blocks: Vec<CompositeBlock>,
    dim: usize,
    coupling_norms: Vec<f64>,
    known_primal: Option<Point>,
    known_duals: Option<Vec<Point>>,
}

/// A point of the lifted space: primal `x` plus one dual vector per block.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub x: Point,
    pub v: Vec<Point>,
}

impl LiftedPoint {
    pub fn flatten(&self) -> Point {
        let total = self.x.dim() + self.v.iter().map(Point::dim).sum::<usize>();
        let mut out = Array1::zeros(total);
        let mut offset = 0;
        for part in std::iter::once(&self.x).chain(self.v.iter()) {
            out.slice_mut(ndarray::s![offset..offset + part.dim()])
                .assign(part.coords());
            offset += part.dim();
        }
        Point::raw(out)
    }

    /// `√(‖x‖² + Σ‖v_i‖²)` distance between lifted points.
    pub fn dist(&self, other: &LiftedPoint) -> f64 {
        let mut sq = {
            let d = self.x.dist(&other.x);
            d * d
        };
        for (a, b) in self.v.iter().zip(other.v.iter()) {
            let d = a.dist(b);
            sq += d * d;
        }
        sq.sqrt()
    }
}

impl CompositeProblem {
    pub fn new(
        a: SetValuedOp,
        b: SingleValuedOp,
        c: SingleValuedOp,
        z: Point,
        blocks: Vec<CompositeBlock>,
        known_primal: Option<Point>,
        known_duals: Option<Vec<Point>>,
    ) -> Result<Self, OperatorError> {
        if blocks.is_empty() {
            return Err(OperatorError::InvalidParameter(
                "composite problem needs at least one block".into(),
            ));
        }
        let dim = a.dim();
        for (name, d) in [("B", b.dim()), ("C", c.dim()), ("z", z.dim())] {
            if d != dim {
                return Err(OperatorError::InvalidParameter(format!(
                    "{name} has dimension {d}, expected {dim}"
                )));
            }
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
        let mut coupling_norms = Vec::with_capacity(blocks.len());
        for (i, block) in blocks.iter().enumerate() {
            let g = block.block_dim();
            if block.d_inv.dim() != g || block.c_inv.dim() != g || block.r_i.dim() != g {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: inconsistent block dimensions"
                )));
            }
            if block.coupling.nrows() != g || block.coupling.ncols() != dim {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: coupling matrix must be {g}×{dim}"
                )));
            }
            if !block.b_i.supports_inverse_resolvent() {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: dual operator family `{}` has no implementable inverse resolvent",
                    block.b_i.family_name()
                )));
            }
            if block.d_inv.effective_lipschitz().is_none() {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: D⁻¹ must declare a Lipschitz constant"
                )));
            }
            if !block.c_inv.is_zero() && block.c_inv.cocoercivity().is_none() {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: C⁻¹ must declare a cocoercivity modulus unless it is zero"
                )));
            }
            let norm = linalg::spectral_norm(&block.coupling.view());
            if norm <= 0.0 {
                return Err(OperatorError::InvalidParameter(format!(
                    "block {i}: coupling matrix must be nonzero"
                )));
            }
            coupling_norms.push(norm);
        }

        let problem = Self {
            a,
            b,
            c,
            z,
            blocks,
            dim,
            coupling_norms,
            known_primal: None,
            known_duals: None,
        };

        match (known_primal, known_duals) {
            (None, None) => Ok(problem),
            (Some(x), Some(v)) => {
                let (primal, duals) = problem.check_residuals(&x, &v, 1.0)?;
                let worst = duals.iter().fold(primal, |acc, d| acc.max(*d));
                if worst > 1e-8 {
                    return Err(OperatorError::InvalidParameter(format!(
                        "claimed solution pair has residual {worst:.3e}"
                    )));
                }
                Ok(Self {
                    known_primal: Some(x),
                    known_duals: Some(v),
                    ..problem
                })
            }
            _ => Err(OperatorError::InvalidParameter(
                "planted primal and duals must be provided together".into(),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[CompositeBlock] {
        &self.blocks
    }

    pub fn lifted_dim(&self) -> usize {
        self.dim + self.blocks.iter().map(CompositeBlock::block_dim).sum::<usize>()
    }

    pub fn known_solution(&self) -> Option<LiftedPoint> {
        match (&self.known_primal, &self.known_duals) {
            (Some(x), Some(v)) => Some(LiftedPoint {
                x: x.clone(),
                v: v.clone(),
            }),
            _ => None,
        }
    }

    pub fn zero_lifted(&self) -> LiftedPoint {
        LiftedPoint {
            x: Point::zeros(self.dim),
            v: self
                .blocks
                .iter()
                .map(|b| Point::zeros(b.block_dim()))
                .collect(),
        }
    }

    /// Splits a flat vector of the lifted space back into blocks.
    pub fn split_flat(&self, flat: &Point) -> Result<LiftedPoint, OperatorError> {
        if flat.dim() != self.lifted_dim() {
            return Err(OperatorError::DimensionMismatch {
                expected: self.lifted_dim(),
                got: flat.dim(),
            });
        }
        let coords = flat.coords();
        let x = Point::raw(coords.slice(ndarray::s![0..self.dim]).to_owned());
        let mut v = Vec::with_capacity(self.blocks.len());
        let mut offset = self.dim;
        for block in &self.blocks {
            let g = block.block_dim();
            v.push(Point::raw(coords.slice(ndarray::s![offset..offset + g]).to_owned()));
            offset += g;
        }
        Ok(LiftedPoint { x, v })
    }

    fn check_lifted_dims(&self, p: &LiftedPoint) -> Result<(), OperatorError> {
        if p.x.dim() != self.dim || p.v.len() != self.blocks.len() {
            return Err(OperatorError::InvalidParameter(
                "lifted point does not match problem block structure".into(),
            ));
        }
        for (vi, block) in p.v.iter().zip(&self.blocks) {
            if vi.dim() != block.block_dim() {
                return Err(OperatorError::DimensionMismatch {
                    expected: block.block_dim(),
                    got: vi.dim(),
                });
            }
        }
        Ok(())
    }

    /// Aggregate constants of the lifted problem:
    /// `L̄ = max{L, ν_1, …, ν_m} + √(Σ‖L_i‖²)` and `β̄ = min{β, μ_1, …, μ_m}`.
    pub fn aggregate_constants(&self) -> (f64, f64) {
        let mut l = self.b.effective_lipschitz().unwrap_or(0.0);
        let mut beta = if self.c.is_zero() {
            f64::INFINITY
        } else {
            self.c.cocoercivity().unwrap_or(f64::INFINITY)
        };
        let mut coupling_sq = 0.0;
        for (block, norm) in self.blocks.iter().zip(&self.coupling_norms) {
            l = l.max(block.d_inv.effective_lipschitz().unwrap_or(0.0));
            let mu = if block.c_inv.is_zero() {
                f64::INFINITY
            } else {
                block.c_inv.cocoercivity().unwrap_or(f64::INFINITY)
            };
            beta = beta.min(mu);
            coupling_sq += norm * norm;
        }
        (l + coupling_sq.sqrt(), beta)
    }

    /// The monotone Lipschitz part of the lift:
    /// `(Bx + Σ L_iᵀ v_i, D_i⁻¹v_i − L_i x, …)`.
    pub fn apply_lipschitz_part(&self, p: &LiftedPoint) -> Result<LiftedPoint, OperatorError> {
        self.check_lifted_dims(p)?;
        let mut first = self.b.apply(&p.x)?.into_array();
        for (block, vi) in self.blocks.iter().zip(&p.v) {
            first = first + block.coupling.t().dot(vi.coords());
        }
        let mut v_out = Vec::with_capacity(self.blocks.len());
        for (block, vi) in self.blocks.iter().zip(&p.v) {
            let dv = block.d_inv.apply(vi)?;
            let lx = block.coupling.dot(p.x.coords());
            v_out.push(Point::from_array(dv.into_array() - lx)?);
        }
        Ok(LiftedPoint {
            x: Point::from_array(first)?,
            v: v_out,
        })
    }

    /// The cocoercive part of the lift: `(Cx, C_1⁻¹v_1, …, C_m⁻¹v_m)`.
    pub fn apply_cocoercive_part(&self, p: &LiftedPoint) -> Result<LiftedPoint, OperatorError> {
        self.check_lifted_dims(p)?;
        let x = self.c.apply(&p.x)?;
        let mut v_out = Vec::with_capacity(self.blocks.len());
        for (block, vi) in self.blocks.iter().zip(&p.v) {
            v_out.push(block.c_inv.apply(vi)?);
        }
        Ok(LiftedPoint { x, v: v_out })
    }

    /// Blockwise resolvent of the lifted maximal part:
    /// `(J_{λA}(x + λz), J_{λB_1⁻¹}(v_1 − λr_1), …)`.
    pub fn lifted_resolvent(
        &self,
        lambda: f64,
        p: &LiftedPoint,
    ) -> Result<LiftedPoint, OperatorError> {
        self.check_lifted_dims(p)?;
        let arg = Point::from_array(p.x.coords() + &(self.z.coords() * lambda))?;
        let x = self.a.resolvent(lambda, &arg)?;
        let mut v_out = Vec::with_capacity(self.blocks.len());
        for (block, vi) in self.blocks.iter().zip(&p.v) {
            let shifted = Point::from_array(vi.coords() - &(block.r_i.coords() * lambda))?;
            v_out.push(block.b_i.inverse_resolvent(lambda, &shifted)?);
        }
        Ok(LiftedPoint { x, v: v_out })
    }

    /// Inclusion residuals at a candidate pair: the primal fixed-point
    /// residual and one parallel-sum membership residual per block, all zero
    /// exactly at solutions.
    pub fn check_residuals(
        &self,
        x: &Point,
        v: &[Point],
        lambda_probe: f64,
    ) -> Result<(f64, Vec<f64>), OperatorError> {
        if !(lambda_probe > 0.0 && lambda_probe.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!(
                "probe parameter must be positive, got {lambda_probe}"
            )));
        }
        let p = LiftedPoint {
            x: x.clone(),
            v: v.to_vec(),
        };
        self.check_lifted_dims(&p)?;

        let bx = self.b.apply(x)?;
        let cx = self.c.apply(x)?;
        let mut drift = self.z.coords().to_owned();
        for (block, vi) in self.blocks.iter().zip(v) {
            drift = drift - block.coupling.t().dot(vi.coords());
        }
        drift = drift - bx.coords() - cx.coords();
        let arg = Point::from_array(x.coords() + &(drift * lambda_probe))?;
        let primal = x.dist(&self.a.resolvent(lambda_probe, &arg)?);

        let mut duals = Vec::with_capacity(self.blocks.len());
        for (block, vi) in self.blocks.iter().zip(v) {
            let dv = block.d_inv.apply(vi)?;
            let cv = block.c_inv.apply(vi)?;
            let y = block.coupling.dot(x.coords())
                - block.r_i.coords()
                - dv.coords()
                - cv.coords();
            let arg = Point::from_array(vi.coords() + &(y * lambda_probe))?;
            duals.push(vi.dist(&block.b_i.inverse_resolvent(lambda_probe, &arg)?));
        }
        Ok((primal, duals))
    }

    /// Probe reports for the evaluable block inverses (and the base forward
    /// operators) against their declared constants.
    pub fn certify_blocks(
        &self,
        n_samples: usize,
        seed: u64,
    ) -> Result<Vec<(String, CertReport)>, OperatorError> {
        let config = ProbeConfig::default();
        let mut out = Vec::new();
        out.push((
            "B".to_string(),
            certify_with(&self.b, n_samples, seed, &config)?,
        ));
        out.push((
            "C".to_string(),
            certify_with(&self.c, n_samples, seed ^ 1, &config)?,
        ));
        for (i, block) in self.blocks.iter().enumerate() {
            out.push((
                format!("block{i}.D_inv"),
                certify_with(&block.d_inv, n_samples, seed ^ (2 + 2 * i as u64), &config)?,
            ));
            out.push((
                format!("block{i}.C_inv"),
                certify_with(&block.c_inv, n_samples, seed ^ (3 + 2 * i as u64), &config)?,
            ));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Flat-space adapters so the generic solver runs on the lift
// ---------------------------------------------------------------------------

/// Resolvent part of the lift over the flattened space.
pub struct LiftedResolventPart<'a> {
    pub problem: &'a CompositeProblem,
}

impl ResolventOp for LiftedResolventPart<'_> {
    fn dim(&self) -> usize {
        self.problem.lifted_dim()
    }

    fn resolvent(&self, lambda: f64, x: &Point) -> Result<Point, OperatorError> {
        let p = self.problem.split_flat(x)?;
        Ok(self.problem.lifted_resolvent(lambda, &p)?.flatten())
    }
}

/// Monotone Lipschitz part of the lift over the flattened space.
pub struct LiftedLipschitzPart<'a> {
    problem: &'a CompositeProblem,
    lipschitz: f64,
}

impl ForwardOp for LiftedLipschitzPart<'_> {
    fn dim(&self) -> usize {
        self.problem.lifted_dim()
    }

    fn apply(&self, x: &Point) -> Result<Point, OperatorError> {
        let p = self.problem.split_flat(x)?;
        Ok(self.problem.apply_lipschitz_part(&p)?.flatten())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn cocoercivity(&self) -> Option<f64> {
        None
    }
}

/// Cocoercive part of the lift over the flattened space.
pub struct LiftedCocoercivePart<'a> {
    problem: &'a CompositeProblem,
    beta: f64,
}

impl ForwardOp for LiftedCocoercivePart<'_> {
    fn dim(&self) -> usize {
        self.problem.lifted_dim()
    }

    fn apply(&self, x: &Point) -> Result<Point, OperatorError> {
        let p = self.problem.split_flat(x)?;
        Ok(self.problem.apply_cocoercive_part(&p)?.flatten())
    }

    fn lipschitz(&self) -> Option<f64> {
        if self.beta.is_infinite() {
            Some(0.0)
        } else {
            Some(1.0 / self.beta)
        }
    }

    fn cocoercivity(&self) -> Option<f64> {
        Some(self.beta)
    }
}

/// The three lifted operators, borrowing the problem.
pub struct LiftedOps<'a> {
    pub resolvent_part: LiftedResolventPart<'a>,
    pub lipschitz_part: LiftedLipschitzPart<'a>,
    pub cocoercive_part: LiftedCocoercivePart<'a>,
}

impl<'a> LiftedOps<'a> {
    pub fn new(problem: &'a CompositeProblem) -> Self {
        let (lbar, bbar) = problem.aggregate_constants();
        Self {
            resolvent_part: LiftedResolventPart { problem },
            lipschitz_part: LiftedLipschitzPart {
                problem,
                lipschitz: lbar,
            },
            cocoercive_part: LiftedCocoercivePart {
                problem,
                beta: bbar,
            },
        }
    }

    pub fn inclusion(&self) -> Inclusion<'_> {
        Inclusion {
            a: &self.resolvent_part,
            b: &self.lipschitz_part,
            c: &self.cocoercive_part,
        }
    }
}

/// Result of a primal-dual run.
#[derive(Debug, Clone)]
pub struct PdSolveOutcome {
    pub x: Point,
    pub v: Vec<Point>,
    pub trace: IterationTrace,
    pub converged: bool,
    /// Step size planned from the aggregate constants.
    pub lambda: f64,
}

/// Plans a step size from the aggregate constants and runs the outer
/// reflected scheme on the lifted inclusion.
pub fn primal_dual_solve(
    problem: &CompositeProblem,
    stop: &StoppingRule,
    init: &LiftedPoint,
) -> Result<PdSolveOutcome, SolveError> {
    problem.check_lifted_dims(init)?;
    let (lbar, bbar) = problem.aggregate_constants();
    let plan = plan_step_size(lbar, bbar, None).map_err(|e| {
        SolveError::Operator(OperatorError::InvalidParameter(format!(
            "step-size planning failed: {e}"
        )))
    })?;
    let ops = LiftedOps::new(problem);
    let inc = ops.inclusion();
    let flat0 = init.flatten();
    let reference = problem.known_solution().map(|p| p.flatten());
    let out: SolveOutcome = solve_inclusion(
        &inc,
        Method::Orfbs,
        plan.lambda,
        stop,
        &flat0,
        &flat0,
        reference.as_ref(),
    )?;
    let lifted = problem.split_flat(&out.point)?;
    Ok(PdSolveOutcome {
        x: lifted.x,
        v: lifted.v,
        trace: out.trace,
        converged: out.converged,
        lambda: plan.lambda,
    })
}

// ---------------------------------------------------------------------------
// Blockwise iteration, written out per the coupled update equations
// ---------------------------------------------------------------------------

/// State of the blockwise primal-dual iteration: the current lifted point
/// plus the Lipschitz-part value at the previous point (all the history the
/// reflected corrections need).
#[derive(Debug, Clone)]
pub struct BlockwiseState {
    curr: LiftedPoint,
    fwd_prev: LiftedPoint,
    k: usize,
}

impl BlockwiseState {
    pub fn curr(&self) -> &LiftedPoint {
        &self.curr
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Initializes the blockwise iteration, evaluating the coupling part at the
/// warm-start point inline.
pub fn blockwise_init(
    problem: &CompositeProblem,
    p0: &LiftedPoint,
    p_minus1: &LiftedPoint,
) -> Result<BlockwiseState, OperatorError> {
    problem.check_lifted_dims(p0)?;
    problem.check_lifted_dims(p_minus1)?;
    let fwd_prev = eval_coupling(problem, p_minus1)?;
    Ok(BlockwiseState {
        curr: p0.clone(),
        fwd_prev,
        k: 0,
    })
}

// Inline evaluation of the Lipschitz coupling part, kept separate from
// `apply_lipschitz_part` so the blockwise route exercises its own arithmetic.
fn eval_coupling(
    problem: &CompositeProblem,
    p: &LiftedPoint,
) -> Result<LiftedPoint, OperatorError> {
    let mut first = problem.b.apply(&p.x)?.into_array();
    for (block, vi) in problem.blocks.iter().zip(&p.v) {
        first = first + block.coupling.t().dot(vi.coords());
    }
    let mut v_out = Vec::with_capacity(problem.blocks.len());
    for (block, vi) in problem.blocks.iter().zip(&p.v) {
        let dv = block.d_inv.apply(vi)?;
        let lx = block.coupling.dot(p.x.coords());
        v_out.push(Point::from_array(dv.into_array() - lx)?);
    }
    Ok(LiftedPoint {
        x: Point::from_array(first)?,
        v: v_out,
    })
}

/// One blockwise primal-dual step:
///
/// ```text
/// x_{k+1}   = J_{λA}(x_k − λ(Bx_k + Σ L_iᵀ v_{i,k}) − λCx_k + λz)
///             − λ(Bx_k + Σ L_iᵀ v_{i,k} − (Bx_{k−1} + Σ L_iᵀ v_{i,k−1}))
/// v_{i,k+1} = J_{λB_i⁻¹}(v_{i,k} − λ(D_i⁻¹v_{i,k} − L_i x_k) − λC_i⁻¹v_{i,k} − λr_i)
///             − λ(D_i⁻¹v_{i,k} − L_i x_k − (D_i⁻¹v_{i,k−1} − L_i x_{k−1}))
/// ```
pub fn blockwise_step(
    problem: &CompositeProblem,
    lambda: f64,
    state: &BlockwiseState,
) -> Result<BlockwiseState, OperatorError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(OperatorError::InvalidParameter(format!(
            "step size must be positive, got {lambda}"
        )));
    }
    let p = &state.curr;
    let q = eval_coupling(problem, p)?;
    let cx = problem.c.apply(&p.x)?;

    // primal block
    let inner_x = Point::from_array(
        p.x.coords() - &(q.x.coords() * lambda) - &(cx.coords() * lambda),
    )?;
    let arg_x = Point::from_array(inner_x.coords() + &(problem.z.coords() * lambda))?;
    let jx = problem.a.resolvent(lambda, &arg_x)?;
    let x_next = Point::from_array(
        jx.coords() - &((q.x.coords() - state.fwd_prev.x.coords()) * lambda),
    )?;

    // dual blocks
    let mut v_next = Vec::with_capacity(problem.blocks.len());
    for (i, block) in problem.blocks.iter().enumerate() {
        let rv = block.c_inv.apply(&p.v[i])?;
        let inner = Point::from_array(
            p.v[i].coords() - &(q.v[i].coords() * lambda) - &(rv.coords() * lambda),
        )?;
        let arg = Point::from_array(inner.coords() - &(block.r_i.coords() * lambda))?;
        let jv = block.b_i.inverse_resolvent(lambda, &arg)?;
        v_next.push(Point::from_array(
            jv.coords() - &((q.v[i].coords() - state.fwd_prev.v[i].coords()) * lambda),
        )?);
    }

    Ok(BlockwiseState {
        curr: LiftedPoint {
            x: x_next,
            v: v_next,
        },
        fwd_prev: q,
        k: state.k + 1,
    })
}

// ---------------------------------------------------------------------------
// Planted composite instances
// ---------------------------------------------------------------------------

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| StandardNormal.sample(rng))
}

/// Builds a planted composite instance: the solution pair `(x*, v*)` is chosen
/// first, then `r_i` and `z` are set so both inclusion lines hold exactly.
/// Deterministic in `(seed, dim, block_dims)`.
pub fn synthesize_composite(
    seed: u64,
    dim: usize,
    block_dims: &[usize],
) -> Result<CompositeProblem, OperatorError> {
    if dim == 0 || block_dims.is_empty() || block_dims.contains(&0) {
        return Err(OperatorError::InvalidParameter(
            "composite synthesis needs a positive dimension and nonempty blocks".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_star = gaussian_vec(&mut rng, dim);

    // base triple: box interior at x*, skew B, strongly monotone quadratic C
    let margin = gaussian_vec(&mut rng, dim).mapv(|g| 1.0 + g.abs());
    let a = SetValuedOp::normal_cone_box(
        &Point::from_array(&x_star - &margin)?,
        &Point::from_array(&x_star + &margin)?,
    )?;
    let b = SingleValuedOp::skew_linear(catalog::random_skew(&mut rng, dim, 1.0))?;
    let q = catalog::random_psd(&mut rng, dim, 0.5, 2.0);
    let c = SingleValuedOp::quadratic_gradient(q, gaussian_vec(&mut rng, dim))?;

    let mut blocks = Vec::with_capacity(block_dims.len());
    let mut duals = Vec::with_capacity(block_dims.len());
    for (i, &g) in block_dims.iter().enumerate() {
        // coupling normalized to unit spectral norm
        let raw = ndarray::Array2::from_shape_fn((g, dim), |_| {
            let s: f64 = StandardNormal.sample(&mut rng);
            s
        });
        let norm = linalg::spectral_norm(&raw.view());
        let coupling = raw * (1.0 / norm);

        // invertible monotone affine dual operator
        let m_i = catalog::random_psd(&mut rng, g, 0.5, 1.5)
            + catalog::random_skew(&mut rng, g, 0.3);
        let b_vec = gaussian_vec(&mut rng, g);
        let y_hat = gaussian_vec(&mut rng, g);
        let v_star = m_i.dot(&y_hat) + &b_vec;
        let b_i = SetValuedOp::affine(m_i, b_vec)?;

        let d_inv = if i % 2 == 0 {
            SingleValuedOp::skew_linear(catalog::random_skew(&mut rng, g, 0.5))?
        } else {
            SingleValuedOp::scaled_identity(0.3, g)?
        };
        let c_inv = SingleValuedOp::scaled_identity(rng.gen_range(0.5..1.0), g)?;

        let v_star_pt = Point::from_array(v_star)?;
        let dv = d_inv.apply(&v_star_pt)?;
        let cv = c_inv.apply(&v_star_pt)?;
        // parallel-sum membership: L_i x* − r_i = ŷ + D⁻¹v* + C⁻¹v*
        let r_i = coupling.dot(&x_star) - &y_hat - dv.coords() - cv.coords();

        blocks.push(CompositeBlock {
            b_i,
            d_inv,
            c_inv,
            coupling,
            r_i: Point::from_array(r_i)?,
        });
        duals.push(v_star_pt);
    }

    // first inclusion line with A(x*) = {0}: z = Σ L_iᵀ v_i* + Bx* + Cx*
    let x_star_pt = Point::from_array(x_star)?;
    let mut z = b.apply(&x_star_pt)?.into_array() + c.apply(&x_star_pt)?.coords();
    for (block, vi) in blocks.iter().zip(&duals) {
        z = z + block.coupling.t().dot(vi.coords());
    }

    CompositeProblem::new(
        a,
        b,
        c,
        Point::from_array(z)?,
        blocks,
        Some(x_star_pt),
        Some(duals),
    )
}
