//! Iteration schemes for `0 ∈ Ax + Bx + Cx` and the solve driver.
//!
//! Every scheme evaluates the maximally monotone part through its resolvent
//! and the single-valued parts explicitly. The outer reflected scheme applies
//! its correction term `λ(Bx_k − Bx_{k−1})` outside the resolvent; reflected
//! and semi-reflected baselines fold their corrections into the resolvent
//! argument.

use std::time::Instant;

use crate::catalog::Inclusion;
use crate::error::{OperatorError, SolveError};
use crate::operators::{ForwardOp, SingleValuedOp};
use crate::point::Point;

use super::trace::{diagnostics_update, IterationTrace, Reference};

/// Any iterate coordinate beyond this magnitude is treated as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// The available iteration schemes. The reflected-only variants are the
/// semi-reflected schemes with the cocoercive part dropped, and `Fbs` ignores
/// the Lipschitz part by definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Outer reflected forward-backward splitting.
    Orfbs,
    /// Classical forward-backward splitting (uses A and C only).
    Fbs,
    /// Forward-backward-forward splitting (uses A and B only).
    Fbfs,
    /// Forward-backward-half-forward splitting.
    Fbhfs,
    /// Semi-forward-reflected-backward splitting.
    Sfrbs,
    /// Semi-reflected forward-backward splitting.
    Srfbs,
    /// Forward-reflected-backward splitting (Sfrbs with C = 0).
    Frbs,
    /// Reflected forward-backward splitting (Srfbs with C = 0).
    Rfbs,
    /// Two-operator scheme from the Douglas-Rachford discretization.
    Csetnek2,
    /// The same scheme applied to B + C as one Lipschitz operator.
    Csetnek3,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Orfbs,
        Method::Fbs,
        Method::Fbfs,
        Method::Fbhfs,
        Method::Sfrbs,
        Method::Srfbs,
        Method::Frbs,
        Method::Rfbs,
        Method::Csetnek2,
        Method::Csetnek3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Orfbs => "orfbs",
            Method::Fbs => "fbs",
            Method::Fbfs => "fbfs",
            Method::Fbhfs => "fbhfs",
            Method::Sfrbs => "sfrbs",
            Method::Srfbs => "srfbs",
            Method::Frbs => "frbs",
            Method::Rfbs => "rfbs",
            Method::Csetnek2 => "csetnek2",
            Method::Csetnek3 => "csetnek3",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| OperatorError::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// Iteration state: the two most recent iterates plus a cached forward-map
/// value at the previous iterate for schemes that reuse it (`Bx_{k−1}` for the
/// reflected schemes, `(B+C)x_{k−1}` for the three-operator Csetnek scheme).
/// When present, the cache always equals the scheme's forward operator
/// applied to `x_prev`.
#[derive(Debug, Clone)]
pub struct SolverState {
    x_curr: Point,
    x_prev: Point,
    b_prev: Option<Point>,
    k: usize,
}

impl SolverState {
    /// State without a forward cache (memoryless schemes).
    pub fn new(x_curr: Point, x_prev: Point) -> Result<Self, OperatorError> {
        if x_curr.dim() != x_prev.dim() {
            return Err(OperatorError::DimensionMismatch {
                expected: x_curr.dim(),
                got: x_prev.dim(),
            });
        }
        Ok(Self {
            x_curr,
            x_prev,
            b_prev: None,
            k: 0,
        })
    }

    /// State with `B(x_prev)` precomputed, so the first step already costs a
    /// single forward evaluation.
    pub fn with_cache(
        x_curr: Point,
        x_prev: Point,
        inc: &Inclusion<'_>,
    ) -> Result<Self, OperatorError> {
        let b_prev = inc.b.apply(&x_prev)?;
        let mut state = Self::new(x_curr, x_prev)?;
        state.b_prev = Some(b_prev);
        Ok(state)
    }

    /// Method-appropriate initialization: schemes that reuse a previous
    /// forward value get it precomputed.
    pub fn init(
        method: Method,
        inc: &Inclusion<'_>,
        x_curr: Point,
        x_prev: Point,
    ) -> Result<Self, OperatorError> {
        match method {
            Method::Orfbs | Method::Sfrbs | Method::Frbs | Method::Csetnek2 => {
                Self::with_cache(x_curr, x_prev, inc)
            }
            Method::Csetnek3 => {
                let b = inc.b.apply(&x_prev)?;
                let c = inc.c.apply(&x_prev)?;
                let mut state = Self::new(x_curr, x_prev)?;
                state.b_prev = Some(Point::from_array(b.coords() + c.coords())?);
                Ok(state)
            }
            _ => Self::new(x_curr, x_prev),
        }
    }

    #[cfg(test)]
    pub(crate) fn for_test(x_curr: Point, x_prev: Point, k: usize) -> Self {
        Self {
            x_curr,
            x_prev,
            b_prev: None,
            k,
        }
    }

    pub fn x_curr(&self) -> &Point {
        &self.x_curr
    }

    pub fn x_prev(&self) -> &Point {
        &self.x_prev
    }

    pub fn b_prev(&self) -> Option<&Point> {
        self.b_prev.as_ref()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn advance(&self, x_next: Point, b_cache: Option<Point>) -> Self {
        Self {
            x_prev: self.x_curr.clone(),
            x_curr: x_next,
            b_prev: b_cache,
            k: self.k + 1,
        }
    }
}

fn check_step_lambda(lambda: f64) -> Result<(), OperatorError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(OperatorError::InvalidParameter(format!(
            "step size must be positive, got {lambda}"
        )))
    }
}

fn cached_forward(
    state: &SolverState,
    op: &dyn ForwardOp,
) -> Result<Point, OperatorError> {
    match state.b_prev() {
        Some(b) => Ok(b.clone()),
        None => op.apply(state.x_prev()),
    }
}

/// One outer reflected step:
/// `x_{k+1} = J_{λA}(x_k − λBx_k − λCx_k) − λ(Bx_k − Bx_{k−1})`.
/// Costs exactly one evaluation each of B, C and the resolvent.
pub fn orfbs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let b_prev = cached_forward(state, inc.b)?;
    let inner = Point::from_array(
        state.x_curr().coords()
            - &(b_curr.coords() * lambda)
            - &(c_curr.coords() * lambda),
    )?;
    let z = inc.a.resolvent(lambda, &inner)?;
    let x_next = Point::from_array(
        z.coords() - &((b_curr.coords() - b_prev.coords()) * lambda),
    )?;
    Ok(state.advance(x_next, Some(b_curr)))
}

/// `x_{k+1} = J_{λA}(x_k − λCx_k)`; B is ignored by definition.
pub fn fbs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let inner =
        Point::from_array(state.x_curr().coords() - &(c_curr.coords() * lambda))?;
    let x_next = inc.a.resolvent(lambda, &inner)?;
    Ok(state.advance(x_next, None))
}

/// `u_k = J_{λA}(x_k − λBx_k)`, `x_{k+1} = u_k + λBx_k − λBu_k`; C is ignored.
/// Costs two B evaluations.
pub fn fbfs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let inner =
        Point::from_array(state.x_curr().coords() - &(b_curr.coords() * lambda))?;
    let u = inc.a.resolvent(lambda, &inner)?;
    let b_u = inc.b.apply(&u)?;
    let x_next = Point::from_array(
        u.coords() + &(b_curr.coords() * lambda) - &(b_u.coords() * lambda),
    )?;
    Ok(state.advance(x_next, None))
}

/// `u_k = J_{λA}(x_k − λ(B+C)x_k)`, `x_{k+1} = u_k + λBx_k − λBu_k`.
/// Costs two B evaluations and one C evaluation.
pub fn fbhfs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let inner = Point::from_array(
        state.x_curr().coords()
            - &(b_curr.coords() * lambda)
            - &(c_curr.coords() * lambda),
    )?;
    let u = inc.a.resolvent(lambda, &inner)?;
    let b_u = inc.b.apply(&u)?;
    let x_next = Point::from_array(
        u.coords() + &(b_curr.coords() * lambda) - &(b_u.coords() * lambda),
    )?;
    Ok(state.advance(x_next, None))
}

/// `x_{k+1} = J_{λA}(x_k − 2λBx_k + λBx_{k−1} − λCx_k)`.
pub fn sfrbs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let b_prev = cached_forward(state, inc.b)?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let inner = Point::from_array(
        state.x_curr().coords() - &(b_curr.coords() * (2.0 * lambda))
            + &(b_prev.coords() * lambda)
            - &(c_curr.coords() * lambda),
    )?;
    let x_next = inc.a.resolvent(lambda, &inner)?;
    Ok(state.advance(x_next, Some(b_curr)))
}

/// `x_{k+1} = J_{λA}(x_k − λB(2x_k − x_{k−1}) − λCx_k)`. B is evaluated at the
/// reflected point only, so no forward cache is kept.
pub fn srfbs_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let reflected = Point::from_array(
        state.x_curr().coords() * 2.0 - state.x_prev().coords(),
    )?;
    let b_refl = inc.b.apply(&reflected)?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let inner = Point::from_array(
        state.x_curr().coords()
            - &(b_refl.coords() * lambda)
            - &(c_curr.coords() * lambda),
    )?;
    let x_next = inc.a.resolvent(lambda, &inner)?;
    Ok(state.advance(x_next, None))
}

/// `x_{k+1} = J_{λA}(x_k − λBx_k) − λ(Bx_k − Bx_{k−1})`.
pub fn csetnek2_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let b_prev = cached_forward(state, inc.b)?;
    let inner =
        Point::from_array(state.x_curr().coords() - &(b_curr.coords() * lambda))?;
    let z = inc.a.resolvent(lambda, &inner)?;
    let x_next = Point::from_array(
        z.coords() - &((b_curr.coords() - b_prev.coords()) * lambda),
    )?;
    Ok(state.advance(x_next, Some(b_curr)))
}

/// `x_{k+1} = J_{λA}(x_k − λBx_k − λCx_k) − λ((B+C)x_k − (B+C)x_{k−1})`. The
/// forward cache holds the combined value `(B+C)x_k`.
pub fn csetnek3_step(
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    check_step_lambda(lambda)?;
    let b_curr = inc.b.apply(state.x_curr())?;
    let c_curr = inc.c.apply(state.x_curr())?;
    let s_curr = Point::from_array(b_curr.coords() + c_curr.coords())?;
    let s_prev = match state.b_prev() {
        Some(s) => s.clone(),
        None => {
            let b = inc.b.apply(state.x_prev())?;
            let c = inc.c.apply(state.x_prev())?;
            Point::from_array(b.coords() + c.coords())?
        }
    };
    let inner = Point::from_array(
        state.x_curr().coords()
            - &(b_curr.coords() * lambda)
            - &(c_curr.coords() * lambda),
    )?;
    let z = inc.a.resolvent(lambda, &inner)?;
    let x_next = Point::from_array(
        z.coords() - &((s_curr.coords() - s_prev.coords()) * lambda),
    )?;
    Ok(state.advance(x_next, Some(s_curr)))
}

/// Dispatches one step of the chosen method. The reflected-only variants run
/// their parent scheme with the cocoercive part replaced by zero.
pub fn step(
    method: Method,
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
) -> Result<SolverState, OperatorError> {
    match method {
        Method::Orfbs => orfbs_step(state, inc, lambda),
        Method::Fbs => fbs_step(state, inc, lambda),
        Method::Fbfs => fbfs_step(state, inc, lambda),
        Method::Fbhfs => fbhfs_step(state, inc, lambda),
        Method::Sfrbs => sfrbs_step(state, inc, lambda),
        Method::Srfbs => srfbs_step(state, inc, lambda),
        Method::Frbs => {
            let zero = SingleValuedOp::zero(inc.dim());
            let reduced = Inclusion {
                a: inc.a,
                b: inc.b,
                c: &zero,
            };
            sfrbs_step(state, &reduced, lambda)
        }
        Method::Rfbs => {
            let zero = SingleValuedOp::zero(inc.dim());
            let reduced = Inclusion {
                a: inc.a,
                b: inc.b,
                c: &zero,
            };
            srfbs_step(state, &reduced, lambda)
        }
        Method::Csetnek2 => csetnek2_step(state, inc, lambda),
        Method::Csetnek3 => csetnek3_step(state, inc, lambda),
    }
}

/// When to stop a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCriterion {
    StepNorm,
    Residual,
    DistToRef,
}

impl StopCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            StopCriterion::StepNorm => "step-norm",
            StopCriterion::Residual => "residual",
            StopCriterion::DistToRef => "dist-to-ref",
        }
    }
}

impl std::str::FromStr for StopCriterion {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "step-norm" => Ok(StopCriterion::StepNorm),
            "residual" => Ok(StopCriterion::Residual),
            "dist-to-ref" => Ok(StopCriterion::DistToRef),
            other => Err(OperatorError::InvalidParameter(format!(
                "unknown stopping criterion `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    pub tol: f64,
    pub max_iters: usize,
    pub criterion: StopCriterion,
}

impl StoppingRule {
    pub fn new(tol: f64, max_iters: usize, criterion: StopCriterion) -> Result<Self, OperatorError> {
        if tol <= 0.0 || tol.is_nan() {
            return Err(OperatorError::InvalidParameter(format!(
                "stopping tolerance must be positive, got {tol}"
            )));
        }
        if max_iters == 0 {
            return Err(OperatorError::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(Self {
            tol,
            max_iters,
            criterion,
        })
    }
}

/// Result of a run that did not diverge: the final iterate, its full trace,
/// and whether the stopping criterion was met before `max_iters`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub point: Point,
    pub trace: IterationTrace,
    pub converged: bool,
}

/// Iterates `method` from `(x0, x_minus1)` until the stopping criterion holds
/// or `max_iters` is reached. When a reference point is supplied, the trace
/// carries distance, energy, and cumulative cocoercive-error diagnostics.
pub fn solve_inclusion(
    inc: &Inclusion<'_>,
    method: Method,
    lambda: f64,
    stop: &StoppingRule,
    x0: &Point,
    x_minus1: &Point,
    reference: Option<&Point>,
) -> Result<SolveOutcome, SolveError> {
    if stop.criterion == StopCriterion::DistToRef && reference.is_none() {
        return Err(SolveError::MissingReference);
    }
    let reference = reference
        .map(|p| Reference::new(inc, p))
        .transpose()?;
    let mut state = SolverState::init(method, inc, x0.clone(), x_minus1.clone())?;
    let mut trace = IterationTrace::default();
    let mut converged = false;

    loop {
        let started = Instant::now();
        state = match step(method, &state, inc, lambda) {
            Ok(next) => next,
            Err(OperatorError::NonFiniteOutput) => {
                return Err(SolveError::Divergence {
                    k: state.k() + 1,
                    trace,
                })
            }
            Err(e) => return Err(e.into()),
        };
        if state
            .x_curr()
            .coords()
            .iter()
            .any(|v| v.abs() > DIVERGENCE_BOUND)
        {
            return Err(SolveError::Divergence { k: state.k(), trace });
        }
        let wall = started.elapsed().as_nanos() as u64;
        if let Err(e) =
            diagnostics_update(&mut trace, &state, inc, lambda, reference.as_ref(), wall)
        {
            return match e {
                OperatorError::NonFiniteOutput => {
                    Err(SolveError::Divergence { k: state.k(), trace })
                }
                other => Err(other.into()),
            };
        }
        let record = trace.last().expect("record just pushed");
        let met = match stop.criterion {
            StopCriterion::StepNorm => record.step_norm <= stop.tol,
            StopCriterion::Residual => record.residual <= stop.tol,
            StopCriterion::DistToRef => record.dist_to_ref.is_some_and(|d| d <= stop.tol),
        };
        if met {
            converged = true;
            break;
        }
        if state.k() >= stop.max_iters {
            break;
        }
    }

    Ok(SolveOutcome {
        point: state.x_curr().clone(),
        trace,
        converged,
    })
}

/// [`solve_inclusion`] over a catalog problem, using its planted solution (if
/// any) as the diagnostics reference.
pub fn solve(
    problem: &crate::catalog::ProblemInstance,
    method: Method,
    lambda: f64,
    stop: &StoppingRule,
    x0: &Point,
    x_minus1: &Point,
) -> Result<SolveOutcome, SolveError> {
    solve_inclusion(
        &problem.ops(),
        method,
        lambda,
        stop,
        x0,
        x_minus1,
        problem.known_solution(),
    )
}
