//! JSON shapes for files exchanged with the CLI and the browser demo.
//!
//! Integers are written as decimal strings. Matrices are row-major.
//! A local element is `{"prec": "P", "coeffs": [[[c_{a,b,c}; e]; phi]; f]}`,
//! always accompanied by the ring header it belongs to.

use serde::{Deserialize, Serialize};

use crate::builder::{LiftPair, VerificationReport};
use crate::decide::LiftPlan;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement, ResidueMatrix};
use crate::group::GroupParams;
use crate::local::{LocalElement, LocalMatrix, RingContext};
use crate::matrix::Matrix;
use crate::modular::{Decomposition, KModule, SummandSpec};

fn num(s: &str, what: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::Parse(format!("{what}: expected a non-negative decimal integer, got {s:?}")))
}

/// Accepts `"17"` or `17` on input; always writes `"17"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Str(String),
    Num(u64),
}

impl Int {
    pub fn get(&self, what: &str) -> Result<u64> {
        match self {
            Int::Str(s) => num(s, what),
            Int::Num(n) => Ok(*n),
        }
    }
}

impl From<u64> for Int {
    fn from(v: u64) -> Self {
        Int::Str(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub p: Int,
    pub h: Int,
    pub m: Int,
    pub alpha: Int,
}

impl GroupJson {
    pub fn from_params(g: &GroupParams) -> Self {
        GroupJson {
            p: g.p.into(),
            h: (g.h as u64).into(),
            m: g.m.into(),
            alpha: g.alpha.into(),
        }
    }

    pub fn params(&self) -> Result<GroupParams> {
        let h = self.h.get("h")?;
        let h = u32::try_from(h).map_err(|_| Error::Parse(format!("h = {h} too large")))?;
        GroupParams::new(self.p.get("p")?, h, self.m.get("m")?, self.alpha.get("alpha")?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionJson {
    #[serde(rename = "N")]
    pub n: Option<Int>,
    pub e: Option<Int>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingHeader {
    pub p: Int,
    pub h: Int,
    pub m: Int,
    pub alpha: Int,
    #[serde(rename = "N")]
    pub n: Int,
    pub e: Int,
}

impl RingHeader {
    pub fn of(ring: &RingContext) -> Self {
        let g = &ring.params;
        RingHeader {
            p: g.p.into(),
            h: (g.h as u64).into(),
            m: g.m.into(),
            alpha: g.alpha.into(),
            n: (ring.n as u64).into(),
            e: (ring.e as u64).into(),
        }
    }

    pub fn group(&self) -> GroupJson {
        GroupJson {
            p: self.p.clone(),
            h: self.h.clone(),
            m: self.m.clone(),
            alpha: self.alpha.clone(),
        }
    }

    pub fn ring(&self) -> Result<RingContext> {
        let params = self.group().params()?;
        let n = self.n.get("N")?;
        let e = self.e.get("e")?;
        RingContext::new(
            &params,
            u32::try_from(n).map_err(|_| Error::Parse("N too large".into()))?,
            usize::try_from(e).map_err(|_| Error::Parse("e too large".into()))?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalElementJson {
    pub prec: Int,
    pub coeffs: Vec<Vec<Vec<Int>>>,
}

pub fn local_to_json(ring: &RingContext, z: &LocalElement) -> LocalElementJson {
    let coeffs = (0..ring.f)
        .map(|a| {
            (0..ring.phi)
                .map(|b| (0..ring.e).map(|c| z.coeffs[ring.index(a, b, c)].into()).collect())
                .collect()
        })
        .collect();
    LocalElementJson {
        prec: (z.prec as u64).into(),
        coeffs,
    }
}

pub fn local_from_json(ring: &RingContext, j: &LocalElementJson) -> Result<LocalElement> {
    let shape_err = || {
        Error::Parse(format!(
            "coefficient array must have shape {} x {} x {}",
            ring.f, ring.phi, ring.e
        ))
    };
    if j.coeffs.len() != ring.f {
        return Err(shape_err());
    }
    let mut coeffs = vec![0u64; ring.len()];
    for (a, plane) in j.coeffs.iter().enumerate() {
        if plane.len() != ring.phi {
            return Err(shape_err());
        }
        for (b, row) in plane.iter().enumerate() {
            if row.len() != ring.e {
                return Err(shape_err());
            }
            for (c, v) in row.iter().enumerate() {
                coeffs[ring.index(a, b, c)] = v.get("coefficient")?;
            }
        }
    }
    let prec = j.prec.get("prec")?;
    let prec = u32::try_from(prec).map_err(|_| Error::Parse("prec too large".into()))?;
    ring.element(coeffs, prec)
}

pub type LocalMatrixJson = Vec<Vec<LocalElementJson>>;

pub fn local_matrix_to_json(ring: &RingContext, m: &LocalMatrix) -> LocalMatrixJson {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|z| local_to_json(ring, z)).collect())
        .collect()
}

pub fn local_matrix_from_json(ring: &RingContext, j: &LocalMatrixJson) -> Result<LocalMatrix> {
    let rows = j
        .iter()
        .map(|r| r.iter().map(|z| local_from_json(ring, z)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows)
}

/// A field element is its coefficient list in the polynomial basis of `F_p[Y]/(g)`.
pub type FieldElementJson = Vec<Int>;
pub type FieldMatrixJson = Vec<Vec<FieldElementJson>>;

pub fn field_elem_from_json(k: &FieldContext, j: &FieldElementJson) -> Result<FieldElement> {
    if j.len() != k.f {
        return Err(Error::Parse(format!("field element needs {} coefficients, got {}", k.f, j.len())));
    }
    let v = j.iter().map(|c| c.get("field coefficient")).collect::<Result<Vec<_>>>()?;
    if v.iter().any(|&c| c >= k.p) {
        return Err(Error::Parse(format!("field coefficient not reduced mod {}", k.p)));
    }
    Ok(v)
}

pub fn field_matrix_to_json(m: &ResidueMatrix) -> FieldMatrixJson {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|x| x.iter().map(|&c| c.into()).collect()).collect())
        .collect()
}

pub fn field_matrix_from_json(k: &FieldContext, j: &FieldMatrixJson) -> Result<ResidueMatrix> {
    let rows = j
        .iter()
        .map(|r| r.iter().map(|x| field_elem_from_json(k, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandJson {
    pub epsilon: Int,
    pub kappa: Int,
}

pub type DecompositionJson = Vec<SummandJson>;

pub fn decomposition_to_json(d: &Decomposition) -> DecompositionJson {
    d.0.iter()
        .map(|s| SummandJson {
            epsilon: s.epsilon.into(),
            kappa: s.kappa.into(),
        })
        .collect()
}

/// Parses and validates against the group: `1 <= kappa <= q`, eps taken mod `m`.
pub fn decomposition_from_json(params: &GroupParams, j: &DecompositionJson) -> Result<Decomposition> {
    let v = j
        .iter()
        .map(|s| {
            let spec = SummandSpec {
                epsilon: s.epsilon.get("epsilon")? % params.m,
                kappa: s.kappa.get("kappa")?,
            };
            spec.validate(params)?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KModuleJson {
    pub dimension: Int,
    pub tau: FieldMatrixJson,
    pub sigma: FieldMatrixJson,
}

pub fn kmodule_to_json(m: &KModule) -> KModuleJson {
    KModuleJson {
        dimension: (m.dimension as u64).into(),
        tau: field_matrix_to_json(&m.tau),
        sigma: field_matrix_to_json(&m.sigma),
    }
}

pub fn kmodule_from_json(k: &FieldContext, j: &KModuleJson) -> Result<KModule> {
    let dimension = j.dimension.get("dimension")? as usize;
    let tau = field_matrix_from_json(k, &j.tau)?;
    let sigma = field_matrix_from_json(k, &j.sigma)?;
    if dimension != 0 && (tau.rows != dimension || tau.cols != dimension || sigma.rows != dimension || sigma.cols != dimension) {
        return Err(Error::Parse(format!("matrices do not have dimension {dimension}")));
    }
    Ok(KModule {
        dimension,
        tau: if dimension == 0 { Matrix::from_fn(0, 0, |_, _| Vec::new()) } else { tau },
        sigma: if dimension == 0 { Matrix::from_fn(0, 0, |_, _| Vec::new()) } else { sigma },
    })
}

/// Output of `lift`, input of `reduce`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftJson {
    pub ring: RingHeader,
    #[serde(rename = "T")]
    pub t: LocalMatrixJson,
    #[serde(rename = "Gamma")]
    pub gamma: LocalMatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_per_block: Option<Vec<Int>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<LiftPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
}

pub fn lift_to_json(ring: &RingContext, pair: &LiftPair, report: Option<&VerificationReport>) -> LiftJson {
    LiftJson {
        ring: RingHeader::of(ring),
        t: local_matrix_to_json(ring, &pair.t),
        gamma: local_matrix_to_json(ring, &pair.gamma),
        epsilon_per_block: Some(pair.epsilon_per_block.iter().map(|&e| e.into()).collect()),
        plan: Some(pair.plan.clone()),
        report: report.cloned(),
    }
}

/// The job file read by every CLI command; only the payload a command
/// needs has to be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDescriptor {
    pub group: GroupJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<KModuleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftJson>,
}

pub fn parse_job(text: &str) -> Result<JobDescriptor> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_lift;
    use crate::decide::{assign_eigenvalues, decide_lift, DecideOptions};
    use crate::modular::{build_summand, ModularContext};

    #[test]
    fn integers_are_strings() {
        let s = serde_json::to_string(&Int::from(u64::MAX)).unwrap();
        assert_eq!(s, "\"18446744073709551615\"");
        let back: Int = serde_json::from_str("7").unwrap();
        assert_eq!(back.get("x").unwrap(), 7);
        assert!(Int::Str("-3".into()).get("x").is_err());
    }

    #[test]
    fn decomposition_round_trip_and_validation() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        let d = Decomposition(vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]);
        let text = serde_json::to_string(&decomposition_to_json(&d)).unwrap();
        assert_eq!(text, r#"[{"epsilon":"1","kappa":"2"},{"epsilon":"3","kappa":"2"}]"#);
        let j: DecompositionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(decomposition_from_json(&g, &j).unwrap(), d);
        let bad: DecompositionJson = serde_json::from_str(r#"[{"epsilon":"0","kappa":"26"}]"#).unwrap();
        assert!(decomposition_from_json(&g, &bad).is_err());
    }

    #[test]
    fn kmodule_round_trip() {
        let c = ModularContext::new(&GroupParams::new(5, 1, 3, 1).unwrap()).unwrap();
        let v = build_summand(&c, SummandSpec::new(1, 3)).unwrap();
        let text = serde_json::to_string(&kmodule_to_json(&v)).unwrap();
        let j: KModuleJson = serde_json::from_str(&text).unwrap();
        assert_eq!(kmodule_from_json(&c.field, &j).unwrap(), v);
    }

    #[test]
    fn lift_round_trip() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        let ring = RingContext::new(&g, 3, 2).unwrap();
        let dec = Decomposition(vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]);
        let plan = decide_lift(&dec, &ring.params, 1, DecideOptions::default());
        let plan = assign_eigenvalues(plan.plan().unwrap(), &ring.params).unwrap();
        let pair = build_lift(&plan, &ring).unwrap();
        let j = lift_to_json(&ring, &pair, None);
        let text = serde_json::to_string(&j).unwrap();
        let back: LiftJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
        let ring2 = back.ring.ring().unwrap();
        assert_eq!(local_matrix_from_json(&ring2, &back.gamma).unwrap(), pair.gamma);
    }

    #[test]
    fn malformed_elements_rejected() {
        let g = GroupParams::new(3, 1, 2, 2).unwrap();
        let ring = RingContext::new(&g, 2, 2).unwrap();
        let mut j = local_to_json(&ring, &ring.t());
        j.coeffs[0].pop();
        assert!(local_from_json(&ring, &j).is_err());
        let mut j = local_to_json(&ring, &ring.t());
        j.coeffs[0][0][0] = Int::Str("9".into());
        assert!(local_from_json(&ring, &j).is_err());
    }
}
