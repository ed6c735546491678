//! Step-size planning.
//!
//! The outer reflected scheme admits any λ satisfying three coupled upper
//! bounds parameterized by ε₁, ε₂, ε₃; the planner either validates a caller's
//! ε triple or grid-searches one maximizing λ. Baseline schemes use their own
//! published closed-form bounds.

use crate::error::PlanError;

use super::solver::Method;

/// Safety factor applied to strict upper bounds. The middle bound is a `≤`
/// and may be hit exactly.
const SAFETY: f64 = 0.99;

/// A step size together with the ε certificate that admits it.
///
/// Invariants (when `unconstrained` is false):
/// - `eps2 < 2·beta`, `2 < eps3 < 3`, `eps1 + 1/eps3 < 1/2`;
/// - `lambda < (2·beta − eps2)·eps1` (vacuous for `beta = +∞`);
/// - `lambda ≤ (3 − eps3)·eps2`;
/// - `lambda < (1/2 − eps1 − 1/eps3)/L` (vacuous for `L = 0`).
#[derive(Debug, Clone, Copy)]
pub struct StepSizePlan {
    pub lambda: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub lipschitz: f64,
    /// Cocoercivity modulus; `f64::INFINITY` when the cocoercive part is
    /// absent or constant.
    pub beta: f64,
    /// Set when no bound binds (`L = 0` and `beta = +∞`): λ defaulted to 1.
    pub unconstrained: bool,
}

impl StepSizePlan {
    /// Re-checks every invariant against the stored constants.
    pub fn validate(&self) -> Result<(), PlanError> {
        check_epsilons(self.lipschitz, self.beta, self.eps1, self.eps2, self.eps3)?;
        if self.lambda <= 0.0 || self.lambda.is_nan() {
            return Err(PlanError::LambdaNotPositive);
        }
        if self.lambda > (3.0 - self.eps3) * self.eps2 {
            return Err(PlanError::LambdaReflectionBound);
        }
        if self.unconstrained {
            // nothing else binds: λ is fixed at 1.0 by convention
            return Ok(());
        }
        if self.beta.is_finite() && self.lambda >= (2.0 * self.beta - self.eps2) * self.eps1 {
            return Err(PlanError::LambdaCocoercivityBound);
        }
        if self.lipschitz > 0.0
            && self.lambda >= (0.5 - self.eps1 - 1.0 / self.eps3) / self.lipschitz
        {
            return Err(PlanError::LambdaLipschitzBound);
        }
        Ok(())
    }
}

fn check_constants(l: f64, beta: f64) -> Result<(), PlanError> {
    if l < 0.0 || !l.is_finite() {
        return Err(PlanError::InvalidLipschitz);
    }
    if beta <= 0.0 || beta.is_nan() {
        return Err(PlanError::InvalidCocoercivity);
    }
    Ok(())
}

fn check_epsilons(_l: f64, beta: f64, e1: f64, e2: f64, e3: f64) -> Result<(), PlanError> {
    if e1 <= 0.0 || !e1.is_finite() {
        return Err(PlanError::Eps1NotPositive);
    }
    if e2 <= 0.0 || !e2.is_finite() {
        return Err(PlanError::Eps2NotPositive);
    }
    if !(e3 > 2.0 && e3 < 3.0) {
        return Err(PlanError::Eps3OutOfRange);
    }
    if beta.is_finite() && e2 >= 2.0 * beta {
        return Err(PlanError::Eps2TooLarge);
    }
    if e1 + 1.0 / e3 >= 0.5 {
        return Err(PlanError::Eps1Eps3TooLarge);
    }
    Ok(())
}

/// λ admitted by a valid ε triple: the minimum of the three bounds, strict
/// ones scaled by the safety factor, the middle `≤` bound taken exactly.
fn lambda_for(l: f64, beta: f64, e1: f64, e2: f64, e3: f64) -> f64 {
    let mut lam = f64::INFINITY;
    if beta.is_finite() {
        lam = lam.min(SAFETY * (2.0 * beta - e2) * e1);
    }
    lam = lam.min((3.0 - e3) * e2);
    if l > 0.0 {
        lam = lam.min(SAFETY * (0.5 - e1 - 1.0 / e3) / l);
    }
    lam
}

/// Grid resolution for the automatic planner.
#[derive(Debug, Clone)]
pub struct PlannerGrid {
    pub eps3: Vec<f64>,
    pub n_eps1: usize,
    pub n_eps2: usize,
}

impl Default for PlannerGrid {
    fn default() -> Self {
        Self {
            eps3: (1..=19).map(|i| 2.0 + 0.05 * i as f64).collect(),
            n_eps1: 50,
            n_eps2: 50,
        }
    }
}

/// Plans λ for the outer reflected scheme.
///
/// With `overrides = Some((eps1, eps2, eps3))` the triple is validated and λ
/// is set from the binding bound. Without overrides, a deterministic grid
/// search maximizes λ. `L = 0` skips the Lipschitz bound, `beta = +∞` skips
/// the cocoercivity bound; if both degenerate, λ defaults to 1.0 and the plan
/// is flagged `unconstrained`.
pub fn plan_step_size(
    l: f64,
    beta: f64,
    overrides: Option<(f64, f64, f64)>,
) -> Result<StepSizePlan, PlanError> {
    plan_step_size_with_grid(l, beta, overrides, &PlannerGrid::default())
}

pub fn plan_step_size_with_grid(
    l: f64,
    beta: f64,
    overrides: Option<(f64, f64, f64)>,
    grid: &PlannerGrid,
) -> Result<StepSizePlan, PlanError> {
    check_constants(l, beta)?;

    if let Some((e1, e2, e3)) = overrides {
        check_epsilons(l, beta, e1, e2, e3)?;
        if l == 0.0 && beta.is_infinite() {
            return Ok(StepSizePlan {
                lambda: 1.0_f64.min((3.0 - e3) * e2),
                eps1: e1,
                eps2: e2,
                eps3: e3,
                lipschitz: l,
                beta,
                unconstrained: true,
            });
        }
        return Ok(StepSizePlan {
            lambda: lambda_for(l, beta, e1, e2, e3),
            eps1: e1,
            eps2: e2,
            eps3: e3,
            lipschitz: l,
            beta,
            unconstrained: false,
        });
    }

    // 2β can overflow for enormous finite moduli; those behave like the
    // sentinel for grid purposes
    let beta_unbounded = beta.is_infinite() || !(2.0 * beta).is_finite();

    if l == 0.0 && beta_unbounded {
        // no bound binds; fix a valid ε triple and make the middle bound tight
        let (e1, e3, lambda) = (0.05, 2.5, 1.0);
        return Ok(StepSizePlan {
            lambda,
            eps1: e1,
            eps2: lambda / (3.0 - e3),
            eps3: e3,
            lipschitz: l,
            beta,
            unconstrained: true,
        });
    }

    if beta_unbounded {
        // only the Lipschitz bound binds; maximize it and back-fill ε₂ so the
        // middle bound holds with equality
        let mut best: Option<(f64, f64, f64)> = None;
        for &e3 in &grid.eps3 {
            let e1_upper = 0.5 - 1.0 / e3;
            for j in 1..=grid.n_eps1 {
                let e1 = e1_upper * j as f64 / (grid.n_eps1 + 1) as f64;
                let lam = SAFETY * (0.5 - e1 - 1.0 / e3) / l;
                if best.is_none_or(|(b, _, _)| lam > b) {
                    best = Some((lam, e1, e3));
                }
            }
        }
        let (lambda, e1, e3) = best.expect("grid is nonempty");
        return Ok(StepSizePlan {
            lambda,
            eps1: e1,
            eps2: lambda / (3.0 - e3),
            eps3: e3,
            lipschitz: l,
            beta,
            unconstrained: false,
        });
    }

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &e3 in &grid.eps3 {
        let e1_upper = 0.5 - 1.0 / e3;
        for j in 1..=grid.n_eps1 {
            let e1 = e1_upper * j as f64 / (grid.n_eps1 + 1) as f64;
            for k in 1..=grid.n_eps2 {
                let e2 = 2.0 * beta * k as f64 / (grid.n_eps2 + 1) as f64;
                let lam = lambda_for(l, beta, e1, e2, e3);
                if best.is_none_or(|(b, _, _, _)| lam > b) {
                    best = Some((lam, e1, e2, e3));
                }
            }
        }
    }
    let (lambda, e1, e2, e3) = best.expect("grid is nonempty");
    Ok(StepSizePlan {
        lambda,
        eps1: e1,
        eps2: e2,
        eps3: e3,
        lipschitz: l,
        beta,
        unconstrained: false,
    })
}

/// Published default step size for a baseline method, scaled by the safety
/// factor. Returns `(lambda, unconstrained)`; when no bound applies the
/// default is 1.0.
pub fn baseline_lambda(method: Method, l: f64, beta: f64) -> Result<(f64, bool), PlanError> {
    check_constants(l, beta)?;

    // bound for the half-forward scheme, with its natural degenerate limits
    let half_forward = |l: f64, beta: f64| -> Option<f64> {
        if beta.is_infinite() {
            if l == 0.0 {
                None
            } else {
                Some(1.0 / l)
            }
        } else {
            Some(4.0 * beta / (1.0 + (1.0 + 16.0 * beta * beta * l * l).sqrt()))
        }
    };
    // bound for the semi-forward-reflected scheme; the reflected variant
    // reuses it as a pragmatic default
    let semi_reflected = |l: f64, beta: f64| -> Option<f64> {
        if beta.is_infinite() {
            if l == 0.0 {
                None
            } else {
                Some(0.5 / l)
            }
        } else {
            Some(2.0 * beta / (4.0 * beta * l + 1.0))
        }
    };
    let third = |lt: f64| -> Option<f64> {
        if lt == 0.0 {
            None
        } else {
            Some(1.0 / (3.0 * lt))
        }
    };

    let bound = match method {
        Method::Orfbs => {
            let plan = plan_step_size(l, beta, None)?;
            return Ok((plan.lambda, plan.unconstrained));
        }
        // the classical scheme ignores B entirely
        Method::Fbs => half_forward(0.0, beta),
        // the forward-forward scheme ignores C
        Method::Fbfs => half_forward(l, f64::INFINITY),
        Method::Fbhfs => half_forward(l, beta),
        Method::Sfrbs | Method::Srfbs => semi_reflected(l, beta),
        Method::Frbs | Method::Rfbs => semi_reflected(l, f64::INFINITY),
        Method::Csetnek2 => third(l),
        Method::Csetnek3 => third(l + if beta.is_infinite() { 0.0 } else { 1.0 / beta }),
    };
    Ok(match bound {
        Some(b) => (SAFETY * b, false),
        None => (1.0, true),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_example_binding_lipschitz_bound() {
        // bounds: (2−1)·0.08 = 0.08, (3−2.5)·1 = 0.5, (0.5−0.08−0.4)/1 = 0.02
        let plan = plan_step_size(1.0, 1.0, Some((0.08, 1.0, 2.5))).unwrap();
        assert!((plan.lambda - 0.0198).abs() < 1e-12);
        plan.validate().unwrap();
    }

    #[test]
    fn override_example_zero_lipschitz() {
        // third bound skipped; λ = min(0.99·(2−1)·0.1, (3−2.6)·1) = 0.099
        let plan = plan_step_size(0.0, 1.0, Some((0.1, 1.0, 2.6))).unwrap();
        assert!((plan.lambda - 0.099).abs() < 1e-12);
        plan.validate().unwrap();
    }

    #[test]
    fn override_rejects_eps3_out_of_range() {
        let err = plan_step_size(1.0, 1.0, Some((0.05, 1.0, 3.5))).unwrap_err();
        assert_eq!(err, PlanError::Eps3OutOfRange);
        assert_eq!(err.to_string(), "eps3 must lie in (2,3)");
    }

    #[test]
    fn override_rejects_other_violations() {
        assert_eq!(
            plan_step_size(1.0, 1.0, Some((0.0, 1.0, 2.5))).unwrap_err(),
            PlanError::Eps1NotPositive
        );
        assert_eq!(
            plan_step_size(1.0, 1.0, Some((0.05, 2.5, 2.5))).unwrap_err(),
            PlanError::Eps2TooLarge
        );
        assert_eq!(
            plan_step_size(1.0, 1.0, Some((0.2, 1.0, 2.5))).unwrap_err(),
            PlanError::Eps1Eps3TooLarge
        );
        assert_eq!(
            plan_step_size(-1.0, 1.0, None).unwrap_err(),
            PlanError::InvalidLipschitz
        );
        assert_eq!(
            plan_step_size(1.0, 0.0, None).unwrap_err(),
            PlanError::InvalidCocoercivity
        );
    }

    #[test]
    fn auto_plan_self_validates() {
        for (l, beta) in [
            (1.0, 1.0),
            (0.0, 0.5),
            (3.0, f64::INFINITY),
            (2.5, 0.1),
            (1e-3, 10.0),
        ] {
            let plan = plan_step_size(l, beta, None).unwrap();
            assert!(plan.lambda > 0.0);
            plan.validate()
                .unwrap_or_else(|e| panic!("plan for ({l}, {beta}) invalid: {e}"));
        }
    }

    #[test]
    fn unconstrained_case_defaults_to_one() {
        let plan = plan_step_size(0.0, f64::INFINITY, None).unwrap();
        assert!(plan.unconstrained);
        assert_eq!(plan.lambda, 1.0);
        plan.validate().unwrap();
    }

    #[test]
    fn overflowing_modulus_is_treated_like_the_sentinel() {
        // 2β overflows for β near f64::MAX; the grid must not poison itself
        let plan = plan_step_size(2.0, f64::MAX, None).unwrap();
        assert!(plan.lambda.is_finite() && plan.lambda > 0.0);
        plan.validate().unwrap();
        let degenerate = plan_step_size(0.0, f64::MAX, None).unwrap();
        assert!(degenerate.unconstrained);
        degenerate.validate().unwrap();
    }

    #[test]
    fn baseline_bounds() {
        // half-forward at L=1, β=1: 4/(1+√17)
        let (lam, _) = baseline_lambda(Method::Fbhfs, 1.0, 1.0).unwrap();
        assert!((lam - 0.99 * 4.0 / (1.0 + 17.0_f64.sqrt())).abs() < 1e-12);
        // classical bound 2β when B is ignored
        let (lam, _) = baseline_lambda(Method::Fbs, 5.0, 1.0).unwrap();
        assert!((lam - 0.99 * 2.0).abs() < 1e-12);
        // forward-forward bound 1/L when C is ignored
        let (lam, _) = baseline_lambda(Method::Fbfs, 2.0, 1.0).unwrap();
        assert!((lam - 0.99 * 0.5).abs() < 1e-12);
        // semi-forward-reflected: 2β/(4βL+1)
        let (lam, _) = baseline_lambda(Method::Sfrbs, 1.0, 1.0).unwrap();
        assert!((lam - 0.99 * 0.4).abs() < 1e-12);
        // reflected-only variant recovers 1/(2L)
        let (lam, _) = baseline_lambda(Method::Frbs, 1.0, 1.0).unwrap();
        assert!((lam - 0.99 * 0.5).abs() < 1e-12);
        // discretized two-operator scheme: 1/(3L)
        let (lam, _) = baseline_lambda(Method::Csetnek2, 2.0, f64::INFINITY).unwrap();
        assert!((lam - 0.99 / 6.0).abs() < 1e-12);
        // same scheme applied to B+C: Lipschitz constant L + 1/β
        let (lam, _) = baseline_lambda(Method::Csetnek3, 1.0, 0.5).unwrap();
        assert!((lam - 0.99 / 9.0).abs() < 1e-12);
        // degenerate: nothing binds
        let (lam, unconstrained) = baseline_lambda(Method::Fbhfs, 0.0, f64::INFINITY).unwrap();
        assert!(unconstrained);
        assert_eq!(lam, 1.0);
    }
}
