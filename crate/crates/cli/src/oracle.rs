//! Independent reference solver.
//!
//! The oracle characterizes solutions through a route disjoint from the
//! iterative schemes under test: all-affine instances are solved directly
//! (a single linear solve, or active-set enumeration over box faces in low
//! dimension); everything else falls back on a long half-forward reference
//! loop written out locally. This module deliberately does not import
//! `monosplit_core::algorithms` — benchmark results are checked against it,
//! so it must not share step code with them.

use ndarray::{Array1, Array2};

use monosplit_core::json::{SetValuedDesc, SingleValuedDesc};
use monosplit_core::linalg::LuFactors;
use monosplit_core::operators::{ForwardOp, ResolventOp};
use monosplit_core::{OperatorError, Point, ProblemInstance};

/// Box-face enumeration is exponential; cap the dimension.
const ACTIVE_SET_MAX_DIM: usize = 6;
/// Iteration budget and exit threshold for the reference loop.
const FALLBACK_MAX_ITERS: usize = 1_000_000;
const FALLBACK_STEP_TOL: f64 = 1e-12;
/// Sign tolerance for active-set feasibility checks.
const FACE_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(
        "reference solve did not converge within {iterations} iterations \
         (last step norm {last_step:.3e})"
    )]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("no box face satisfies the inclusion conditions")]
    NoFaceFound,

    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// `(G, h)` with `T(x) = Gx + h`, when the operator family is affine.
fn affine_representation(op: &monosplit_core::SingleValuedOp) -> Option<(Array2<f64>, Array1<f64>)> {
    let dim = op.dim();
    let desc = SingleValuedDesc::from_op(op);
    let to_mat = |rows: Vec<Vec<f64>>| {
        Array2::from_shape_fn((dim, dim), |(i, j)| rows[i][j])
    };
    match desc {
        SingleValuedDesc::Zero => Some((Array2::zeros((dim, dim)), Array1::zeros(dim))),
        SingleValuedDesc::Linear { m } | SingleValuedDesc::Skew { m } => {
            Some((to_mat(m), Array1::zeros(dim)))
        }
        SingleValuedDesc::Affine { m, b } => Some((to_mat(m), Array1::from(b))),
        SingleValuedDesc::QuadGrad { q, b } => Some((to_mat(q), Array1::from(b))),
        SingleValuedDesc::ScaledIdentity { factor } => {
            Some((Array2::eye(dim) * factor, Array1::zeros(dim)))
        }
        SingleValuedDesc::Componentwise { .. } => None,
    }
}

/// High-accuracy reference solution for the inclusion.
pub fn oracle_solve(problem: &ProblemInstance) -> Result<Point, OracleError> {
    let dim = problem.dim();
    if let (Some((gb, hb)), Some((gc, hc))) = (
        affine_representation(&problem.b),
        affine_representation(&problem.c),
    ) {
        let g = &gb + &gc;
        let h = &hb + &hc;
        match SetValuedDesc::from_op(&problem.a) {
            SetValuedDesc::Zero => {
                // 0 = Gx + h
                if let Ok(f) = LuFactors::factor(&g.view()) {
                    return Ok(Point::from_array(f.solve(&(-&h)))?);
                }
            }
            SetValuedDesc::Affine { m, b } => {
                // 0 = (M_A + G)x + (b_A + h)
                let ma = Array2::from_shape_fn((dim, dim), |(i, j)| m[i][j]);
                let ba = match b {
                    Some(v) => Array1::from(v),
                    None => Array1::zeros(dim),
                };
                let total = &ma + &g;
                if let Ok(f) = LuFactors::factor(&total.view()) {
                    return Ok(Point::from_array(f.solve(&(-&(ba + &h))))?);
                }
            }
            SetValuedDesc::Box { lo, hi } if dim <= ACTIVE_SET_MAX_DIM => {
                return active_set_box(&g, &h, &Array1::from(lo), &Array1::from(hi));
            }
            _ => {}
        }
    }
    half_forward_reference(problem)
}

#[derive(Clone, Copy, PartialEq)]
enum Face {
    Lo,
    Free,
    Hi,
}

/// Piecewise-linear inclusion `0 ∈ N_[lo,hi](x) + Gx + h`, solved by
/// enumerating face assignments and checking the normal-cone sign conditions
/// on each.
fn active_set_box(
    g: &Array2<f64>,
    h: &Array1<f64>,
    lo: &Array1<f64>,
    hi: &Array1<f64>,
) -> Result<Point, OracleError> {
    let n = h.len();
    let mut assignment = vec![Face::Lo; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for slot in assignment.iter_mut() {
            *slot = match c % 3 {
                0 => Face::Lo,
                1 => Face::Free,
                _ => Face::Hi,
            };
            c /= 3;
        }
        if let Some(x) = try_face(g, h, lo, hi, &assignment) {
            return Ok(Point::from_array(x)?);
        }
    }
    Err(OracleError::NoFaceFound)
}

fn try_face(
    g: &Array2<f64>,
    h: &Array1<f64>,
    lo: &Array1<f64>,
    hi: &Array1<f64>,
    faces: &[Face],
) -> Option<Array1<f64>> {
    let n = h.len();
    let free: Vec<usize> = (0..n).filter(|&i| faces[i] == Face::Free).collect();
    let mut x = Array1::zeros(n);
    for i in 0..n {
        match faces[i] {
            Face::Lo => x[i] = lo[i],
            Face::Hi => x[i] = hi[i],
            Face::Free => {}
        }
    }
    if !free.is_empty() {
        // solve G_ff x_f = −h_f − G_fb x_b on the free coordinates
        let k = free.len();
        let gff = Array2::from_shape_fn((k, k), |(a, b)| g[[free[a], free[b]]]);
        let mut rhs = Array1::zeros(k);
        for (a, &i) in free.iter().enumerate() {
            let mut acc = -h[i];
            for j in 0..n {
                if faces[j] != Face::Free {
                    acc -= g[[i, j]] * x[j];
                }
            }
            rhs[a] = acc;
        }
        let factors = LuFactors::factor(&gff.view()).ok()?;
        let xf = factors.solve(&rhs);
        for (a, &i) in free.iter().enumerate() {
            if xf[a] < lo[i] - FACE_TOL || xf[a] > hi[i] + FACE_TOL {
                return None;
            }
            x[i] = xf[a].clamp(lo[i], hi[i]);
        }
    }
    // sign conditions: the residual F = Gx + h must point into the normal cone
    let f = g.dot(&x) + h;
    for i in 0..n {
        let ok = match faces[i] {
            Face::Free => f[i].abs() <= FACE_TOL,
            Face::Lo => f[i] >= -FACE_TOL,
            Face::Hi => f[i] <= FACE_TOL,
        };
        if !ok {
            return None;
        }
    }
    Some(x)
}

/// Step-size bound for the half-forward reference loop, with the degenerate
/// limits for absent parts. Kept local: the oracle must not depend on the
/// planners it is used to check.
fn reference_step_size(l: f64, beta: f64) -> f64 {
    let bound = if beta.is_infinite() {
        if l == 0.0 {
            return 1.0;
        }
        1.0 / l
    } else {
        4.0 * beta / (1.0 + (1.0 + 16.0 * beta * beta * l * l).sqrt())
    };
    0.99 * bound
}

fn half_forward_reference(problem: &ProblemInstance) -> Result<Point, OracleError> {
    let dim = problem.dim();
    let (l, beta) = problem.constants();
    let lambda = reference_step_size(l, beta);
    let mut x = Point::zeros(dim);
    let mut last_step = f64::INFINITY;
    for _ in 0..FALLBACK_MAX_ITERS {
        let bx = problem.b.apply(&x)?;
        let cx = problem.c.apply(&x)?;
        let inner = Point::from_array(
            x.coords() - &(bx.coords() * lambda) - &(cx.coords() * lambda),
        )?;
        let u = problem.a.resolvent(lambda, &inner)?;
        let bu = problem.b.apply(&u)?;
        let next = Point::from_array(
            u.coords() + &(bx.coords() * lambda) - &(bu.coords() * lambda),
        )?;
        last_step = next.dist(&x);
        x = next;
        if last_step <= FALLBACK_STEP_TOL {
            return Ok(x);
        }
    }
    Err(OracleError::NonConvergence {
        iterations: FALLBACK_MAX_ITERS,
        last_step,
    })
}
