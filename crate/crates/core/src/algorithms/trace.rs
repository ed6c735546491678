//! Per-iteration convergence diagnostics.

use serde::Serialize;

use crate::catalog::Inclusion;
use crate::error::OperatorError;
use crate::point::Point;

use super::solver::SolverState;

/// One diagnostics record. Reference-dependent fields are present only when
/// the run has a reference point (typically a planted solution).
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    /// `‖x_k − J_{λA}(x_k − λBx_k − λCx_k)‖`, zero exactly at solutions.
    pub residual: f64,
    /// `‖x_k − x_{k−1}‖`.
    pub step_norm: f64,
    pub dist_to_ref: Option<f64>,
    pub lyapunov: Option<f64>,
    /// Running sum of `‖Cx_k − Cx*‖²`, which stays bounded on convergent runs.
    pub cum_c_err: Option<f64>,
    pub wall_time_ns: u64,
}

/// Ordered per-iteration records of one solver run.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub(crate) fn push(&mut self, record: TraceRecord) {
        assert!(
            self.records.last().is_none_or(|r| record.k > r.k),
            "iteration index must be strictly increasing"
        );
        assert!(
            record.residual.is_finite() && record.step_norm.is_finite(),
            "trace records must be finite"
        );
        self.records.push(record);
    }
}

/// A reference solution with the forward-operator values at it, evaluated
/// once so per-iteration diagnostics do not re-apply B and C to it.
#[derive(Debug, Clone)]
pub struct Reference {
    pub point: Point,
    pub b_at_ref: Point,
    pub c_at_ref: Point,
}

impl Reference {
    pub fn new(inc: &Inclusion<'_>, point: &Point) -> Result<Self, OperatorError> {
        Ok(Self {
            b_at_ref: inc.b.apply(point)?,
            c_at_ref: inc.c.apply(point)?,
            point: point.clone(),
        })
    }
}

/// Fixed-point residual of the inclusion at `x`.
pub fn fixed_point_residual(
    inc: &Inclusion<'_>,
    x: &Point,
    lambda: f64,
) -> Result<f64, OperatorError> {
    let bx = inc.b.apply(x)?;
    let cx = inc.c.apply(x)?;
    let arg =
        Point::from_array(x.coords() - &(bx.coords() * lambda) - &(cx.coords() * lambda))?;
    let j = inc.a.resolvent(lambda, &arg)?;
    Ok(x.dist(&j))
}

/// Energy `‖(x_k + λ·Bx_{k−1}) − (x* + λ·Bx*)‖² + ½‖x_k − x_{k−1}‖²`, which is
/// nonincreasing along outer reflected runs with a valid step size. Requires
/// the state's cached forward value; schemes that do not maintain one get
/// `None`.
pub fn lyapunov_value(
    state: &SolverState,
    ref_x: &Point,
    ref_bx: &Point,
    lambda: f64,
) -> Option<f64> {
    let b_prev = state.b_prev()?;
    let anchor = state.x_curr().coords() + &(b_prev.coords() * lambda);
    let target = ref_x.coords() + &(ref_bx.coords() * lambda);
    let d = &anchor - &target;
    let step = state.x_curr().coords() - state.x_prev().coords();
    Some(d.dot(&d) + 0.5 * step.dot(&step))
}

/// Appends one record for the state's current iterate.
pub fn diagnostics_update(
    trace: &mut IterationTrace,
    state: &SolverState,
    inc: &Inclusion<'_>,
    lambda: f64,
    reference: Option<&Reference>,
    wall_time_ns: u64,
) -> Result<(), OperatorError> {
    let residual = fixed_point_residual(inc, state.x_curr(), lambda)?;
    let step_norm = state.x_curr().dist(state.x_prev());

    let (dist_to_ref, lyapunov, cum_c_err) = match reference {
        None => (None, None, None),
        Some(r) => {
            let dist = state.x_curr().dist(&r.point);
            let lyap = lyapunov_value(state, &r.point, &r.b_at_ref, lambda);
            let c_here = inc.c.apply(state.x_curr())?;
            let dc = c_here.coords() - r.c_at_ref.coords();
            let prev = trace.last().and_then(|rec| rec.cum_c_err).unwrap_or(0.0);
            (Some(dist), lyap, Some(prev + dc.dot(&dc)))
        }
    };

    trace.push(TraceRecord {
        k: state.k(),
        residual,
        step_norm,
        dist_to_ref,
        lyapunov,
        cum_c_err,
        wall_time_ns,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ProblemInstance;
    use crate::operators::{SetValuedOp, SingleValuedOp};

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn zero_problem(dim: usize) -> ProblemInstance {
        ProblemInstance::new(
            SetValuedOp::zero(dim),
            SingleValuedOp::zero(dim),
            SingleValuedOp::zero(dim),
            None,
        )
        .unwrap()
    }

    #[test]
    fn lyapunov_by_hand() {
        let problem = zero_problem(1);
        let inc = problem.ops();
        // x_k = 1, x_{k−1} = 0, B = 0, ref = 0 → 1 + 0.5 = 1.5
        let state = SolverState::with_cache(pt(&[1.0]), pt(&[0.0]), &inc).unwrap();
        let v = lyapunov_value(&state, &pt(&[0.0]), &pt(&[0.0]), 0.3).unwrap();
        assert!((v - 1.5).abs() < 1e-15);

        // at the solution with equal iterates the energy vanishes
        let at_sol = SolverState::with_cache(pt(&[0.0]), pt(&[0.0]), &inc).unwrap();
        assert_eq!(
            lyapunov_value(&at_sol, &pt(&[0.0]), &pt(&[0.0]), 0.3).unwrap(),
            0.0
        );
    }

    #[test]
    fn lyapunov_nonnegative() {
        let problem = zero_problem(2);
        let inc = problem.ops();
        for k in 0..10 {
            let a = pt(&[k as f64 * 0.7 - 2.0, 1.0 - k as f64]);
            let b = pt(&[-(k as f64), k as f64 * 0.1]);
            let state = SolverState::with_cache(a, b, &inc).unwrap();
            let v = lyapunov_value(&state, &pt(&[0.3, -0.4]), &pt(&[0.0, 0.0]), 0.5).unwrap();
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn residual_zero_at_solution() {
        let inst = crate::catalog::synthesize_instance(
            5,
            3,
            crate::catalog::InstanceKind::AffineInterior,
        )
        .unwrap();
        let x = inst.known_solution().unwrap().clone();
        let res = fixed_point_residual(&inst.ops(), &x, 0.7).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn cumulative_error_is_monotone() {
        let problem = zero_problem(1);
        let inc = problem.ops();
        let reference = Reference::new(&inc, &pt(&[0.0])).unwrap();
        let mut trace = IterationTrace::default();
        let mut prev = 0.0;
        for k in 1..5 {
            let state = SolverState::for_test(pt(&[k as f64]), pt(&[k as f64 - 1.0]), k);
            diagnostics_update(&mut trace, &state, &inc, 0.5, Some(&reference), 0).unwrap();
            let cum = trace.last().unwrap().cum_c_err.unwrap();
            assert!(cum >= prev);
            prev = cum;
        }
        assert_eq!(trace.len(), 4);
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn trace_rejects_non_increasing_k() {
        let mut trace = IterationTrace::default();
        let rec = TraceRecord {
            k: 1,
            residual: 0.0,
            step_norm: 0.0,
            dist_to_ref: None,
            lyapunov: None,
            cum_c_err: None,
            wall_time_ns: 0,
        };
        trace.push(rec.clone());
        trace.push(rec);
    }
}
