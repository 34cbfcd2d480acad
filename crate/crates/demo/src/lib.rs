//! wasm-bindgen glue for the browser page in `www/`.
//!
//! Each exported function takes plain numbers/strings and returns a JSON
//! string; errors come back as a thrown `Error` on the JS side. The `*_json`
//! twins are the same thing for native callers (and tests).

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use metalift::builder::{lift_with_escalation, PrecisionSpec};
use metalift::decide::{decide_lift, DecideOptions, Decision};
use metalift::field::FieldElement;
use metalift::group::GroupParams;
use metalift::io::decomposition_to_json;
use metalift::local::{LocalMatrix, RingContext, Valuation};
use metalift::matrix::Matrix;
use metalift::modular::{Decomposition, ModularContext};

type Out = Result<Value, String>;

fn context(p: u64, h: u32, m: u64, alpha: u64) -> Result<ModularContext, String> {
    let g = GroupParams::new(p, h, m, alpha).map_err(|e| e.to_string())?;
    ModularContext::new(&g).map_err(|e| e.to_string())
}

/// `3` for prime fields, `2+4y` otherwise.
fn show(c: &FieldElement) -> String {
    if c.len() <= 1 {
        return c.first().copied().unwrap_or(0).to_string();
    }
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, a)| match i {
            0 => a.to_string(),
            1 => format!("{a}y"),
            _ => format!("{a}y^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

fn shown(m: &Matrix<FieldElement>) -> Vec<Vec<String>> {
    (0..m.rows).map(|i| (0..m.cols).map(|j| show(m.get(i, j))).collect()).collect()
}

/// `t`-adic valuations; `null` where the entry vanishes to working precision.
fn valuations(ring: &RingContext, m: &LocalMatrix) -> Vec<Vec<Option<u32>>> {
    (0..m.rows)
        .map(|i| {
            (0..m.cols)
                .map(|j| match ring.valuation(m.get(i, j)) {
                    Valuation::Exact(v) => Some(v),
                    Valuation::AtLeast(_) => None,
                })
                .collect()
        })
        .collect()
}

pub fn info_json(p: u64, h: u32, m: u64, alpha: u64) -> Out {
    let ctx = context(p, h, m, alpha)?;
    let g = &ctx.params;
    Ok(json!({
        "q": g.q,
        "ord_table": g.ord_table,
        "m_prime": g.m_prime,
        "f": g.f,
        "faithful": g.faithful,
        "a0": ctx.a0(),
        "zeta_m": show(&ctx.field.zeta_m),
        "modulus": ctx.field.modulus_poly,
    }))
}

pub fn decide_json(p: u64, h: u32, m: u64, alpha: u64, summands: &str, strict: bool) -> Out {
    let ctx = context(p, h, m, alpha)?;
    let dec = Decomposition::parse(summands, &ctx.params).map_err(|e| e.to_string())?;
    let d = decide_lift(&dec, &ctx.params, ctx.a0(), DecideOptions { strict_uniform_a: strict });
    Ok(match d {
        Decision::Liftable(plan) => {
            let chains: Vec<String> = plan
                .chains
                .iter()
                .map(|c| c.summands.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" → "))
                .collect();
            json!({"liftable": true, "chains": chains, "plan": plan})
        }
        Decision::NotLiftable(cert) => json!({"liftable": false, "reason": cert.reason, "certificate": cert}),
    })
}

/// Builds and verifies the lift, returns the reductions mod the maximal ideal
/// and valuation grids for the heatmap.
pub fn lift_json(p: u64, h: u32, m: u64, alpha: u64, summands: &str, n: u32, e: u32) -> Out {
    let ctx = context(p, h, m, alpha)?;
    let dec = Decomposition::parse(summands, &ctx.params).map_err(|e| e.to_string())?;
    let plan = match decide_lift(&dec, &ctx.params, ctx.a0(), DecideOptions::default()) {
        Decision::Liftable(plan) => plan,
        Decision::NotLiftable(cert) => return Ok(json!({"liftable": false, "reason": cert.reason})),
    };
    let spec = PrecisionSpec {
        n: (n > 0).then_some(n),
        e: e.max(1) as usize,
        ..PrecisionSpec::default()
    };
    let out = lift_with_escalation(&plan, &ctx.params, spec).map_err(|e| e.to_string())?;
    let ring = RingContext::new(&ctx.params, out.n, out.e).map_err(|e| e.to_string())?;
    let checks: Vec<Value> = out
        .report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "precision": c.precision}))
        .collect();
    Ok(json!({
        "liftable": true,
        "N": out.n,
        "e": out.e,
        "escalated": out.escalated,
        "T_reduced": shown(&ring.reduce_matrix(&out.pair.t)),
        "Gamma_reduced": shown(&ring.reduce_matrix(&out.pair.gamma)),
        "T_valuation": valuations(&ring, &out.pair.t),
        "Gamma_valuation": valuations(&ring, &out.pair.gamma),
        "gamma_order": out.report.gamma_order,
        "checks": checks,
        "all_passed": out.report.all_passed(),
        "reduced": decomposition_to_json(&out.reduced),
    }))
}

fn to_js(r: Out) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

// u32 on the JS boundary: u64 would surface as BigInt.

#[wasm_bindgen]
pub fn info(p: u32, h: u32, m: u32, alpha: u32) -> Result<String, JsError> {
    to_js(info_json(p.into(), h, m.into(), alpha.into()))
}

#[wasm_bindgen]
pub fn decide(p: u32, h: u32, m: u32, alpha: u32, summands: &str, strict: bool) -> Result<String, JsError> {
    to_js(decide_json(p.into(), h, m.into(), alpha.into(), summands, strict))
}

#[wasm_bindgen]
pub fn lift(p: u32, h: u32, m: u32, alpha: u32, summands: &str, n: u32, e: u32) -> Result<String, JsError> {
    to_js(lift_json(p.into(), h, m.into(), alpha.into(), summands, n, e))
}
