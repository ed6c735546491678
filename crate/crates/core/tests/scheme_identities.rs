//! Reduction identities between the schemes, per-step evaluation budgets, and
//! descent/summability behavior of the outer reflected iteration.

use std::sync::atomic::{AtomicUsize, Ordering};

use monosplit_core::algorithms::{
    csetnek2_step, fbhfs_step, fbs_step, lyapunov_value, orfbs_step, plan_step_size, sfrbs_step,
    solve, srfbs_step, Method, SolverState, StopCriterion, StoppingRule,
};
use monosplit_core::catalog::{synthesize_instance, Inclusion, InstanceKind};
use monosplit_core::operators::{ForwardOp, ResolventOp, SetValuedOp, SingleValuedOp};
use monosplit_core::{OperatorError, Point};

struct CountingForward<'a> {
    inner: &'a SingleValuedOp,
    calls: AtomicUsize,
}

impl<'a> CountingForward<'a> {
    fn new(inner: &'a SingleValuedOp) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    fn count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ForwardOp for CountingForward<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &Point) -> Result<Point, OperatorError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.apply(x)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }

    fn cocoercivity(&self) -> Option<f64> {
        self.inner.cocoercivity()
    }
}

struct CountingResolvent<'a> {
    inner: &'a SetValuedOp,
    calls: AtomicUsize,
}

impl<'a> CountingResolvent<'a> {
    fn new(inner: &'a SetValuedOp) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    fn count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ResolventOp for CountingResolvent<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn resolvent(&self, lambda: f64, x: &Point) -> Result<Point, OperatorError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.resolvent(lambda, x)
    }
}

#[test]
fn outer_reflected_with_zero_b_is_classical_splitting() {
    // swap B for the zero operator and compare against the classical scheme
    for seed in 0..3u64 {
        let inst = synthesize_instance(seed, 3, InstanceKind::L1LassoLike).unwrap();
        assert!(inst.b.is_zero());
        let inc = inst.ops();
        let x0 = Point::zeros(3);
        let mut s_or = SolverState::init(Method::Orfbs, &inc, x0.clone(), x0.clone()).unwrap();
        let mut s_fbs = SolverState::init(Method::Fbs, &inc, x0.clone(), x0).unwrap();
        for _ in 0..1000 {
            s_or = orfbs_step(&s_or, &inc, 0.2).unwrap();
            s_fbs = fbs_step(&s_fbs, &inc, 0.2).unwrap();
            let gap = s_or.x_curr().dist(s_fbs.x_curr());
            assert!(gap <= 1e-14, "seed {seed}: gap {gap:.3e}");
        }
    }
}

#[test]
fn outer_reflected_with_zero_c_is_two_operator_scheme() {
    let b = SingleValuedOp::skew_linear(ndarray::array![[0.0, 0.8], [-0.8, 0.0]]).unwrap();
    let a = SetValuedOp::normal_cone_box(
        &Point::new(vec![-1.0, -1.0]).unwrap(),
        &Point::new(vec![1.0, 1.0]).unwrap(),
    )
    .unwrap();
    let inst = monosplit_core::ProblemInstance::new(a, b, SingleValuedOp::zero(2), None).unwrap();
    let inc = inst.ops();
    let x0 = Point::new(vec![0.9, -0.4]).unwrap();
    let mut s_or = SolverState::init(Method::Orfbs, &inc, x0.clone(), x0.clone()).unwrap();
    let mut s_c2 = SolverState::init(Method::Csetnek2, &inc, x0.clone(), x0).unwrap();
    for _ in 0..1000 {
        s_or = orfbs_step(&s_or, &inc, 0.3).unwrap();
        s_c2 = csetnek2_step(&s_c2, &inc, 0.3).unwrap();
        assert_eq!(s_or.x_curr(), s_c2.x_curr());
    }
}

#[test]
fn semi_schemes_coincide_for_linear_b() {
    for seed in 0..3u64 {
        let inst = synthesize_instance(seed, 4, InstanceKind::AffineInterior).unwrap();
        let inc = inst.ops();
        let x0 = Point::zeros(4);
        let xm1 = Point::new(vec![0.5, -0.5, 0.25, 0.0]).unwrap();
        let mut s_semi = SolverState::init(Method::Sfrbs, &inc, x0.clone(), xm1.clone()).unwrap();
        let mut s_refl = SolverState::init(Method::Srfbs, &inc, x0, xm1).unwrap();
        for _ in 0..1000 {
            s_semi = sfrbs_step(&s_semi, &inc, 0.1).unwrap();
            s_refl = srfbs_step(&s_refl, &inc, 0.1).unwrap();
            let gap = s_semi.x_curr().dist(s_refl.x_curr());
            assert!(gap <= 1e-12, "seed {seed}: gap {gap:.3e}");
        }
    }
}

#[test]
fn per_step_evaluation_budget() {
    let inst = synthesize_instance(4, 3, InstanceKind::AffineInterior).unwrap();
    let a = CountingResolvent::new(&inst.a);
    let b = CountingForward::new(&inst.b);
    let c = CountingForward::new(&inst.c);
    let inc = Inclusion {
        a: &a,
        b: &b,
        c: &c,
    };
    let x0 = Point::zeros(3);

    // outer reflected: one B, one C, one resolvent per step
    let mut state = SolverState::init(Method::Orfbs, &inc, x0.clone(), x0.clone()).unwrap();
    let (b0, c0, a0) = (b.count(), c.count(), a.count());
    for step_idx in 1..=25 {
        state = orfbs_step(&state, &inc, 0.05).unwrap();
        assert_eq!(b.count() - b0, step_idx);
        assert_eq!(c.count() - c0, step_idx);
        assert_eq!(a.count() - a0, step_idx);
    }

    // half-forward: two B, one C, one resolvent per step
    let (b0, c0, a0) = (b.count(), c.count(), a.count());
    let mut state = SolverState::init(Method::Fbhfs, &inc, x0.clone(), x0.clone()).unwrap();
    for step_idx in 1..=25 {
        state = fbhfs_step(&state, &inc, 0.05).unwrap();
        assert_eq!(b.count() - b0, 2 * step_idx);
        assert_eq!(c.count() - c0, step_idx);
        assert_eq!(a.count() - a0, step_idx);
    }

    // forward-forward: two B, zero C, one resolvent per step
    let (b0, c0, a0) = (b.count(), c.count(), a.count());
    let mut state = SolverState::init(Method::Fbfs, &inc, x0.clone(), x0).unwrap();
    for step_idx in 1..=25 {
        state = monosplit_core::algorithms::fbfs_step(&state, &inc, 0.05).unwrap();
        assert_eq!(b.count() - b0, 2 * step_idx);
        assert_eq!(c.count() - c0, 0);
        assert_eq!(a.count() - a0, step_idx);
    }
}

#[test]
fn lyapunov_descends_and_errors_are_summable() {
    for (seed, dim) in [(1u64, 2usize), (2, 5), (3, 8)] {
        let inst = synthesize_instance(seed, dim, InstanceKind::AffineInterior).unwrap();
        let (l, beta) = inst.constants();
        let plan = plan_step_size(l, beta, None).unwrap();
        let stop = StoppingRule::new(1e-11, 30_000, StopCriterion::StepNorm).unwrap();
        let out = solve(
            &inst,
            Method::Orfbs,
            plan.lambda,
            &stop,
            &Point::zeros(dim),
            &Point::zeros(dim),
        )
        .unwrap();
        assert!(out.converged);

        let mut prev = f64::INFINITY;
        for rec in out.trace.records() {
            let v = rec.lyapunov.expect("reference run records the energy");
            assert!(v <= prev + 1e-10, "energy rose at k={}", rec.k);
            prev = v;
        }
        // increments of the cumulative error vanish well before the end
        let records = out.trace.records();
        let n = records.len();
        assert!(n > 20);
        let tail_inc = records[n - 1].cum_c_err.unwrap() - records[n - 11].cum_c_err.unwrap();
        assert!(tail_inc <= 1e-12, "tail increment {tail_inc:.3e}");
        // step norms vanish: final recorded step is below tolerance
        assert!(records[n - 1].step_norm <= 1e-11);
    }
}

#[test]
fn lyapunov_matches_trace_values() {
    let inst = synthesize_instance(6, 3, InstanceKind::AffineFull).unwrap();
    let inc = inst.ops();
    let x_star = inst.known_solution().unwrap().clone();
    let b_star = inst.b.apply(&x_star).unwrap();
    let (l, beta) = inst.constants();
    let plan = plan_step_size(l, beta, None).unwrap();

    let mut state =
        SolverState::init(Method::Orfbs, &inc, Point::zeros(3), Point::zeros(3)).unwrap();
    for _ in 0..50 {
        state = orfbs_step(&state, &inc, plan.lambda).unwrap();
        let v = lyapunov_value(&state, &x_star, &b_star, plan.lambda).unwrap();
        assert!(v >= 0.0);
    }
}
