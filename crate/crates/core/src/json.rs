//! Declarative JSON descriptions of operators and problems.
//!
//! Operator families are tagged by `"type"`, e.g.
//! `{"type":"box","lo":[...],"hi":[...]}`, `{"type":"skew","m":[[...]]}`,
//! `{"type":"quad_grad","q":[[...]],"b":[...]}`, `{"type":"l1","weight":w}`,
//! `{"type":"zero"}`. Dimensions of parameter-free families come from the
//! surrounding problem. Descriptors round-trip with the constructed operators.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::catalog::ProblemInstance;
use crate::error::OperatorError;
use crate::operators::{
    ResolventOp, ScalarMap, SetValuedKind, SetValuedOp, SingleValuedKind, SingleValuedOp,
};
use crate::point::Point;
use crate::product::{CompositeBlock, CompositeProblem};

fn to_matrix(rows: &[Vec<f64>]) -> Result<Array2<f64>, OperatorError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(OperatorError::InvalidParameter(
            "matrix rows must be nonempty and of equal length".into(),
        ));
    }
    Ok(Array2::from_shape_fn((r, c), |(i, j)| rows[i][j]))
}

fn from_matrix(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Description of a maximally monotone operator family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetValuedDesc {
    Zero,
    Affine {
        m: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    L1 {
        weight: f64,
    },
    ScaledShifted {
        inner: std::boxed::Box<SetValuedDesc>,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
}

impl SetValuedDesc {
    /// Builds the operator; `dim` supplies dimensions for parameter-free
    /// families.
    pub fn build(&self, dim: usize) -> Result<SetValuedOp, OperatorError> {
        match self {
            SetValuedDesc::Zero => Ok(SetValuedOp::zero(dim)),
            SetValuedDesc::Affine { m, b } => {
                let m = to_matrix(m)?;
                let b = match b {
                    Some(v) => Array1::from(v.clone()),
                    None => Array1::zeros(m.nrows()),
                };
                SetValuedOp::affine(m, b)
            }
            SetValuedDesc::Box { lo, hi } => SetValuedOp::normal_cone_box(
                &Point::new(lo.clone())?,
                &Point::new(hi.clone())?,
            ),
            SetValuedDesc::Ball { center, radius } => {
                SetValuedOp::normal_cone_ball(&Point::new(center.clone())?, *radius)
            }
            SetValuedDesc::L1 { weight } => SetValuedOp::l1(*weight, dim),
            SetValuedDesc::ScaledShifted {
                inner,
                scale,
                shift,
                offset,
            } => {
                let inner = inner.build(dim)?;
                let d = inner.dim();
                let shift = match shift {
                    Some(v) => Point::new(v.clone())?,
                    None => Point::zeros(d),
                };
                let offset = match offset {
                    Some(v) => Point::new(v.clone())?,
                    None => Point::zeros(d),
                };
                SetValuedOp::scaled_shifted(inner, *scale, &shift, &offset)
            }
        }
    }

    pub fn from_op(op: &SetValuedOp) -> Self {
        match &op.kind {
            SetValuedKind::Zero { .. } => SetValuedDesc::Zero,
            SetValuedKind::Affine(data) => SetValuedDesc::Affine {
                m: from_matrix(&data.m),
                b: Some(data.b.to_vec()),
            },
            SetValuedKind::NormalConeBox { lo, hi } => SetValuedDesc::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            SetValuedKind::NormalConeBall { center, radius } => SetValuedDesc::Ball {
                center: center.to_vec(),
                radius: *radius,
            },
            SetValuedKind::L1 { weight, .. } => SetValuedDesc::L1 { weight: *weight },
            SetValuedKind::ScaledShifted {
                inner,
                scale,
                shift,
                offset,
            } => SetValuedDesc::ScaledShifted {
                inner: std::boxed::Box::new(SetValuedDesc::from_op(inner)),
                scale: *scale,
                shift: Some(shift.to_vec()),
                offset: Some(offset.to_vec()),
            },
        }
    }
}

/// Description of an evaluable operator family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SingleValuedDesc {
    Zero,
    Linear {
        m: Vec<Vec<f64>>,
    },
    Affine {
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Skew {
        m: Vec<Vec<f64>>,
    },
    QuadGrad {
        q: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    ScaledIdentity {
        factor: f64,
    },
    Componentwise {
        f: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
}

impl SingleValuedDesc {
    pub fn build(&self, dim: usize) -> Result<SingleValuedOp, OperatorError> {
        match self {
            SingleValuedDesc::Zero => Ok(SingleValuedOp::zero(dim)),
            SingleValuedDesc::Linear { m } => SingleValuedOp::linear(to_matrix(m)?),
            SingleValuedDesc::Affine { m, b } => {
                SingleValuedOp::affine(to_matrix(m)?, Array1::from(b.clone()))
            }
            SingleValuedDesc::Skew { m } => SingleValuedOp::skew_linear(to_matrix(m)?),
            SingleValuedDesc::QuadGrad { q, b } => {
                SingleValuedOp::quadratic_gradient(to_matrix(q)?, Array1::from(b.clone()))
            }
            SingleValuedDesc::ScaledIdentity { factor } => {
                SingleValuedOp::scaled_identity(*factor, dim)
            }
            SingleValuedDesc::Componentwise { f, delta } => {
                let map = match f.as_str() {
                    "tanh" => ScalarMap::Tanh,
                    "huber" => ScalarMap::HuberGradient {
                        delta: delta.unwrap_or(1.0),
                    },
                    other => {
                        return Err(OperatorError::InvalidParameter(format!(
                            "unknown componentwise map `{other}`"
                        )))
                    }
                };
                SingleValuedOp::componentwise(map, dim)
            }
        }
    }

    pub fn from_op(op: &SingleValuedOp) -> Self {
        match &op.kind {
            SingleValuedKind::Zero => SingleValuedDesc::Zero,
            SingleValuedKind::Linear { m } => SingleValuedDesc::Linear { m: from_matrix(m) },
            SingleValuedKind::Affine { m, b } => SingleValuedDesc::Affine {
                m: from_matrix(m),
                b: b.to_vec(),
            },
            SingleValuedKind::SkewLinear { m } => SingleValuedDesc::Skew { m: from_matrix(m) },
            SingleValuedKind::QuadraticGradient { q, b } => SingleValuedDesc::QuadGrad {
                q: from_matrix(q),
                b: b.to_vec(),
            },
            SingleValuedKind::ScaledIdentity { factor } => {
                SingleValuedDesc::ScaledIdentity { factor: *factor }
            }
            SingleValuedKind::Componentwise { f } => match f {
                ScalarMap::Tanh => SingleValuedDesc::Componentwise {
                    f: "tanh".into(),
                    delta: None,
                },
                ScalarMap::HuberGradient { delta } => SingleValuedDesc::Componentwise {
                    f: "huber".into(),
                    delta: Some(*delta),
                },
            },
        }
    }
}

/// JSON form of a three-operator problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDesc {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: SetValuedDesc,
    #[serde(rename = "B")]
    pub b: SingleValuedDesc,
    #[serde(rename = "C")]
    pub c: SingleValuedDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_solution: Option<Vec<f64>>,
}

impl ProblemDesc {
    pub fn build(&self) -> Result<ProblemInstance, OperatorError> {
        let a = self.a.build(self.dim)?;
        let b = self.b.build(self.dim)?;
        let c = self.c.build(self.dim)?;
        let known = self
            .known_solution
            .as_ref()
            .map(|v| Point::new(v.clone()))
            .transpose()?;
        ProblemInstance::new(a, b, c, known)
    }

    pub fn from_instance(instance: &ProblemInstance) -> Self {
        Self {
            dim: instance.dim(),
            a: SetValuedDesc::from_op(&instance.a),
            b: SingleValuedDesc::from_op(&instance.b),
            c: SingleValuedDesc::from_op(&instance.c),
            known_solution: instance.known_solution().map(|p| p.coords().to_vec()),
        }
    }
}

/// JSON form of one composite block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositeBlockDesc {
    #[serde(rename = "Bi")]
    pub bi: SetValuedDesc,
    #[serde(rename = "Di_inv")]
    pub di_inv: SingleValuedDesc,
    #[serde(rename = "Ci_inv")]
    pub ci_inv: SingleValuedDesc,
    #[serde(rename = "Li")]
    pub li: Vec<Vec<f64>>,
    #[serde(rename = "ri")]
    pub ri: Vec<f64>,
}

/// JSON form of a composite primal-dual problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositeDesc {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: SetValuedDesc,
    #[serde(rename = "B")]
    pub b: SingleValuedDesc,
    #[serde(rename = "C")]
    pub c: SingleValuedDesc,
    pub z: Vec<f64>,
    pub blocks: Vec<CompositeBlockDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_primal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_duals: Option<Vec<Vec<f64>>>,
}

impl CompositeDesc {
    pub fn build(&self) -> Result<CompositeProblem, OperatorError> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for desc in &self.blocks {
            let g = desc.ri.len();
            blocks.push(CompositeBlock {
                b_i: desc.bi.build(g)?,
                d_inv: desc.di_inv.build(g)?,
                c_inv: desc.ci_inv.build(g)?,
                coupling: to_matrix(&desc.li)?,
                r_i: Point::new(desc.ri.clone())?,
            });
        }
        let known_primal = self
            .known_primal
            .as_ref()
            .map(|v| Point::new(v.clone()))
            .transpose()?;
        let known_duals = self
            .known_duals
            .as_ref()
            .map(|vs| {
                vs.iter()
                    .map(|v| Point::new(v.clone()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        CompositeProblem::new(
            self.a.build(self.dim)?,
            self.b.build(self.dim)?,
            self.c.build(self.dim)?,
            Point::new(self.z.clone())?,
            blocks,
            known_primal,
            known_duals,
        )
    }

    pub fn from_problem(problem: &CompositeProblem) -> Self {
        let known = problem.known_solution();
        Self {
            dim: problem.dim(),
            a: SetValuedDesc::from_op(&problem.a),
            b: SingleValuedDesc::from_op(&problem.b),
            c: SingleValuedDesc::from_op(&problem.c),
            z: problem.z.coords().to_vec(),
            blocks: problem
                .blocks()
                .iter()
                .map(|block| CompositeBlockDesc {
                    bi: SetValuedDesc::from_op(&block.b_i),
                    di_inv: SingleValuedDesc::from_op(&block.d_inv),
                    ci_inv: SingleValuedDesc::from_op(&block.c_inv),
                    li: from_matrix(&block.coupling),
                    ri: block.r_i.coords().to_vec(),
                })
                .collect(),
            known_primal: known.as_ref().map(|p| p.x.coords().to_vec()),
            known_duals: known
                .as_ref()
                .map(|p| p.v.iter().map(|v| v.coords().to_vec()).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{synthesize_instance, InstanceKind};
    use crate::operators::ForwardOp;
    use crate::product::synthesize_composite;

    #[test]
    fn family_schemas_parse() {
        let a: SetValuedDesc =
            serde_json::from_str(r#"{"type":"box","lo":[0.0,0.0],"hi":[1.0,1.0]}"#).unwrap();
        let op = a.build(2).unwrap();
        assert_eq!(op.family_name(), "box");

        let l1: SetValuedDesc = serde_json::from_str(r#"{"type":"l1","weight":0.5}"#).unwrap();
        assert_eq!(l1.build(3).unwrap().dim(), 3);

        let skew: SingleValuedDesc =
            serde_json::from_str(r#"{"type":"skew","m":[[0.0,1.0],[-1.0,0.0]]}"#).unwrap();
        assert!((skew.build(2).unwrap().lipschitz().unwrap() - 1.0).abs() < 1e-9);

        let qg: SingleValuedDesc =
            serde_json::from_str(r#"{"type":"quad_grad","q":[[1.0,0.0],[0.0,1.0]],"b":[0.0,0.0]}"#)
                .unwrap();
        assert!((qg.build(2).unwrap().cocoercivity().unwrap() - 1.0).abs() < 1e-9);

        let z: SingleValuedDesc = serde_json::from_str(r#"{"type":"zero"}"#).unwrap();
        assert!(z.build(4).unwrap().is_zero());
    }

    #[test]
    fn problem_round_trip() {
        for kind in [InstanceKind::AffineInterior, InstanceKind::L1LassoLike] {
            let inst = synthesize_instance(3, 3, kind).unwrap();
            let desc = ProblemDesc::from_instance(&inst);
            let text = serde_json::to_string(&desc).unwrap();
            let back: ProblemDesc = serde_json::from_str(&text).unwrap();
            let rebuilt = back.build().unwrap();
            assert_eq!(
                rebuilt.known_solution().unwrap(),
                inst.known_solution().unwrap()
            );
            let x = Point::new(vec![0.3, -0.8, 0.1]).unwrap();
            assert!(
                (rebuilt.residual_at(&x, 1.0).unwrap() - inst.residual_at(&x, 1.0).unwrap())
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn composite_round_trip() {
        let problem = synthesize_composite(4, 2, &[2, 1]).unwrap();
        let desc = CompositeDesc::from_problem(&problem);
        let text = serde_json::to_string_pretty(&desc).unwrap();
        assert!(text.contains("\"Bi\""));
        assert!(text.contains("\"Di_inv\""));
        let back: CompositeDesc = serde_json::from_str(&text).unwrap();
        let rebuilt = back.build().unwrap();
        let (l1, b1) = problem.aggregate_constants();
        let (l2, b2) = rebuilt.aggregate_constants();
        assert!((l1 - l2).abs() < 1e-12);
        assert!((b1 - b2).abs() < 1e-12);
        let sol = rebuilt.known_solution().unwrap();
        let (p, ds) = rebuilt.check_residuals(&sol.x, &sol.v, 1.0).unwrap();
        assert!(p <= 1e-10);
        assert!(ds.iter().all(|d| *d <= 1e-10));
    }

    #[test]
    fn bad_matrix_rejected() {
        let desc: SingleValuedDesc =
            serde_json::from_str(r#"{"type":"linear","m":[[1.0],[2.0,3.0]]}"#).unwrap();
        assert!(desc.build(2).is_err());
    }

    #[test]
    fn wrapper_and_componentwise_round_trip() {
        let wrapper = crate::SetValuedOp::scaled_shifted(
            crate::SetValuedOp::l1(0.4, 2).unwrap(),
            1.5,
            &Point::new(vec![0.1, -0.2]).unwrap(),
            &Point::new(vec![0.0, 0.3]).unwrap(),
        )
        .unwrap();
        let text = serde_json::to_string(&SetValuedDesc::from_op(&wrapper)).unwrap();
        let back: SetValuedDesc = serde_json::from_str(&text).unwrap();
        let rebuilt = back.build(2).unwrap();
        let x = Point::new(vec![2.0, -1.5]).unwrap();
        assert_eq!(
            rebuilt.resolvent(0.7, &x).unwrap(),
            wrapper.resolvent(0.7, &x).unwrap()
        );

        let huber = crate::SingleValuedOp::componentwise(
            crate::operators::ScalarMap::HuberGradient { delta: 0.6 },
            3,
        )
        .unwrap();
        let text = serde_json::to_string(&SingleValuedDesc::from_op(&huber)).unwrap();
        assert!(text.contains("\"delta\":0.6"));
        let back: SingleValuedDesc = serde_json::from_str(&text).unwrap();
        let rebuilt = back.build(3).unwrap();
        let x = Point::new(vec![2.0, -0.1, -4.0]).unwrap();
        assert_eq!(rebuilt.apply(&x).unwrap(), huber.apply(&x).unwrap());

        // delta defaults to 1 when omitted
        let bare: SingleValuedDesc =
            serde_json::from_str(r#"{"type":"componentwise","f":"huber"}"#).unwrap();
        let op = bare.build(1).unwrap();
        assert_eq!(
            op.apply(&Point::new(vec![5.0]).unwrap()).unwrap(),
            Point::new(vec![1.0]).unwrap()
        );
    }
}
