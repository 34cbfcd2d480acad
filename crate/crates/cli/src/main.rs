//! `metalift` — decide, build and check characteristic-zero lifts of
//! modular representations of `C_q ⋊ C_m`.
//!
//! Every command writes one JSON document (stdout or `--out`). Exit codes:
//! 0 success, 1 negative verdict, 2 input error, 3 verification failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use metalift::builder::{lift_in, reduce_lift, LiftPair, PrecisionSpec};
use metalift::decide::{decide_lift, DecideOptions, Decision};
use metalift::error::Error;
use metalift::field::FieldContext;
use metalift::group::GroupParams;
use metalift::io::{
    decomposition_from_json, decomposition_to_json, kmodule_from_json, lift_to_json, local_matrix_from_json,
    parse_job, GroupJson, JobDescriptor, LiftJson,
};
use metalift::local::RingContext;
use metalift::modular::{decompose, verify_kg_relations, Decomposition, ModularContext};
use metalift::selftest::run_selftest;

#[derive(Parser)]
#[command(name = "metalift", version, about = "Lifts of modular representations of C_q ⋊ C_m")]
struct Cli {
    #[command(flatten)]
    opts: Opts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Opts {
    /// Prime p
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Exponent h, q = p^h
    #[arg(long, global = true)]
    h: Option<u32>,
    /// Order m of sigma
    #[arg(long, global = true)]
    m: Option<u64>,
    /// Conjugation exponent: sigma tau sigma^-1 = tau^alpha
    #[arg(long, global = true)]
    alpha: Option<u64>,

    /// p-adic precision exponent (coefficients mod p^N); default: smallest N with 64 digits in t
    #[arg(long = "N", global = true)]
    n: Option<u32>,
    /// Ramification index of the uniformizer t over Z_p[zeta_q]
    #[arg(long, global = true)]
    e: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,

    /// Require every chain to have the same dimension residue mod m
    #[arg(long = "strict-uniform-a", global = true)]
    strict_uniform_a: bool,

    /// Job file (JSON)
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Summands inline, e.g. "1:2,3:2" for V(1,2) + V(3,2)
    #[arg(long, global = true)]
    summands: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Group invariants, residue field and a0
    Info,
    /// Is the decomposition liftable? Prints a plan or a refusal certificate
    Decide,
    /// Build (T, Gamma), verify, and reduce
    Lift,
    /// Reduce a lift (T, Gamma) and decompose the reduction
    Reduce,
    /// Decompose a pair (tau, sigma) over the residue field
    Decompose,
    /// Seeded self-test battery
    Selftest,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

type Outcome = Result<(Value, u8), Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        kind: "input",
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::InvalidGroup(_)
            | Error::NoDiscreteLog { .. }
            | Error::InvalidPrecision(_)
            | Error::Dimension(_)
            | Error::Index(_)
            | Error::InvalidSummand(_)
            | Error::NotFaithful(_)
            | Error::InvalidPlan(_)
            | Error::UnsupportedSubdiagonal(_)
            | Error::Parse(_)
            | Error::A0Unbound => (2, "input"),
            _ => (3, "verification"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn load_job(opts: &Opts) -> Result<Option<(JobDescriptor, Option<LiftJson>)>, Failure> {
    let Some(path) = &opts.input else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    match parse_job(&text) {
        Ok(job) => Ok(Some((job, None))),
        Err(job_err) => {
            // a bare `lift` output file is accepted as well
            let lift: LiftJson = serde_json::from_str(&text).map_err(|_| Failure::from(job_err))?;
            let job = JobDescriptor {
                group: lift.ring.group(),
                precision: None,
                decomposition: None,
                module: None,
                lift: None,
            };
            Ok(Some((job, Some(lift))))
        }
    }
}

fn group(opts: &Opts, job: Option<&JobDescriptor>) -> Result<GroupParams, Failure> {
    match (opts.p, opts.h, opts.m, opts.alpha) {
        (Some(p), Some(h), Some(m), Some(alpha)) => Ok(GroupParams::new(p, h, m, alpha)?),
        (None, None, None, None) => match job {
            Some(j) => Ok(j.group.params()?),
            None => Err(input_error("no group: pass --p --h --m --alpha or a job file with \"group\"")),
        },
        _ => Err(input_error("--p, --h, --m and --alpha must be given together")),
    }
}

fn precision(opts: &Opts, job: Option<&JobDescriptor>) -> Result<PrecisionSpec, Failure> {
    let mut spec = PrecisionSpec::default();
    if let Some(pj) = job.and_then(|j| j.precision.as_ref()) {
        if let Some(n) = &pj.n {
            spec.n = Some(u32::try_from(n.get("N")?).map_err(|_| input_error("N too large"))?);
        }
        if let Some(e) = &pj.e {
            spec.e = e.get("e")? as usize;
        }
    }
    if let Some(n) = opts.n {
        spec.n = Some(n);
    }
    if let Some(e) = opts.e {
        spec.e = e;
    }
    Ok(spec)
}

fn decomposition(opts: &Opts, job: Option<&JobDescriptor>, params: &GroupParams) -> Result<Decomposition, Failure> {
    if let Some(s) = &opts.summands {
        return Ok(Decomposition::parse(s, params)?);
    }
    match job.and_then(|j| j.decomposition.as_ref()) {
        Some(d) => Ok(decomposition_from_json(params, d)?),
        None => Err(input_error("no decomposition: pass --summands or a job file with \"decomposition\"")),
    }
}

fn group_json(params: &GroupParams) -> Value {
    serde_json::to_value(GroupJson::from_params(params)).expect("serializable")
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn cmd_info(params: GroupParams) -> Outcome {
    let ctx = ModularContext::new(&params)?;
    let field = &ctx.field;
    let ords: Vec<Value> = params
        .ord_table
        .iter()
        .map(|(modulus, ord)| json!({"modulus": modulus.to_string(), "ord": ord.to_string()}))
        .collect();
    Ok((
        json!({
            "group": group_json(&params),
            "q": params.q.to_string(),
            "ord_table": ords,
            "m_prime": params.m_prime.to_string(),
            "f": params.f.to_string(),
            "faithful": params.faithful,
            "a0": ctx.a0().to_string(),
            "residue_field": residue_field_json(field),
        }),
        0,
    ))
}

fn residue_field_json(field: &FieldContext) -> Value {
    json!({
        "p": field.p.to_string(),
        "f": field.f.to_string(),
        "modulus": field.modulus_poly.iter().map(u64::to_string).collect::<Vec<_>>(),
        "zeta_m": field.zeta_m.iter().map(u64::to_string).collect::<Vec<_>>(),
    })
}

fn cmd_decide(params: GroupParams, dec: Decomposition, opts: &Opts) -> Outcome {
    let ctx = ModularContext::new(&params)?;
    let d = decide_lift(&dec, &ctx.params, ctx.a0(), DecideOptions { strict_uniform_a: opts.strict_uniform_a });
    let code = if d.is_liftable() { 0 } else { 1 };
    let mut v = json!({"group": group_json(&params), "input": decomposition_to_json(&dec), "liftable": d.is_liftable()});
    match &d {
        Decision::Liftable(plan) => v["plan"] = to_value(plan),
        Decision::NotLiftable(cert) => v["certificate"] = to_value(cert),
    }
    Ok((v, code))
}

fn cmd_lift(params: GroupParams, dec: Decomposition, spec: PrecisionSpec, opts: &Opts) -> Outcome {
    let ctx = ModularContext::new(&params)?;
    let d = decide_lift(&dec, &ctx.params, ctx.a0(), DecideOptions { strict_uniform_a: opts.strict_uniform_a });
    let plan = match d {
        Decision::Liftable(plan) => plan,
        Decision::NotLiftable(cert) => {
            return Ok((json!({"liftable": false, "certificate": cert}), 1));
        }
    };
    let ring = RingContext::new(&ctx.params, spec.resolve(&params), spec.e)?;
    let out = lift_in(&plan, &ring, spec)?;
    let ring = if out.escalated {
        RingContext::new(&ctx.params, out.n, out.e)?
    } else {
        ring
    };
    let mut v = to_value(&lift_to_json(&ring, &out.pair, Some(&out.report)));
    v["reduced"] = to_value(&decomposition_to_json(&out.reduced));
    v["escalated"] = json!(out.escalated);
    Ok((v, 0))
}

fn cmd_reduce(params: GroupParams, job: Option<&JobDescriptor>, bare: Option<LiftJson>) -> Outcome {
    let lift = bare
        .or_else(|| job.and_then(|j| j.lift.clone()))
        .ok_or_else(|| input_error("no lift: pass the output of `lift` or a job file with \"lift\""))?;
    let ring = lift.ring.ring()?;
    if ring.params.q != params.q || ring.params.m != params.m || ring.params.alpha != params.alpha {
        return Err(input_error("the lift's ring header disagrees with the group"));
    }
    let t = local_matrix_from_json(&ring, &lift.t)?;
    let gamma = local_matrix_from_json(&ring, &lift.gamma)?;
    if !t.is_square() || !gamma.is_square() || t.rows != gamma.rows {
        return Err(input_error("T and Gamma must be square of equal size"));
    }
    let decomposition = match &lift.plan {
        // with a plan, also insist on the predicted reduction
        Some(plan) => {
            let pair = LiftPair {
                t,
                gamma,
                epsilon_per_block: plan.chains.iter().map(|c| c.epsilon()).collect(),
                plan: plan.clone(),
            };
            reduce_lift(&pair, &ring)?
        }
        None => {
            let ctx = ModularContext {
                params: ring.params.clone(),
                field: ring.field.clone(),
            };
            let module = metalift::modular::KModule {
                dimension: t.rows,
                tau: ring.reduce_matrix(&t),
                sigma: ring.reduce_matrix(&gamma),
            };
            let rel = verify_kg_relations(&ctx, &module)?;
            if !rel.all_hold() {
                return Err(Failure {
                    code: 3,
                    kind: "verification",
                    message: format!("reduced pair violates the group relations: {rel:?}"),
                });
            }
            decompose(&ctx, &module)?
        }
    };
    Ok((to_value(&decomposition_to_json(&decomposition)), 0))
}

fn cmd_decompose(params: GroupParams, job: Option<&JobDescriptor>) -> Outcome {
    let ctx = ModularContext::new(&params)?;
    let mj = job
        .and_then(|j| j.module.as_ref())
        .ok_or_else(|| input_error("no module: pass a job file with \"module\""))?;
    let module = kmodule_from_json(&ctx.field, mj)?;
    let rel = verify_kg_relations(&ctx, &module)?;
    if !rel.all_hold() {
        return Err(input_error(format!("tau and sigma do not satisfy the group relations: {rel:?}")));
    }
    let d = decompose(&ctx, &module)?;
    Ok((to_value(&decomposition_to_json(&d)), 0))
}

fn cmd_selftest(opts: &Opts) -> Outcome {
    let summary = run_selftest(opts.seed, opts.trials);
    let code = if summary.passed() { 0 } else { 3 };
    Ok((json!({"passed": summary.passed(), "summary": summary}), code))
}

fn run(cli: &Cli) -> Outcome {
    let opts = &cli.opts;
    if let Command::Selftest = cli.command {
        return cmd_selftest(opts);
    }
    let loaded = load_job(opts)?;
    let (job, bare) = match loaded {
        Some((j, b)) => (Some(j), b),
        None => (None, None),
    };
    let params = group(opts, job.as_ref())?;
    match cli.command {
        Command::Info => cmd_info(params),
        Command::Decide => {
            let dec = decomposition(opts, job.as_ref(), &params)?;
            cmd_decide(params, dec, opts)
        }
        Command::Lift => {
            let dec = decomposition(opts, job.as_ref(), &params)?;
            let spec = precision(opts, job.as_ref())?;
            cmd_lift(params, dec, spec, opts)
        }
        Command::Reduce => cmd_reduce(params, job.as_ref(), bare),
        Command::Decompose => cmd_decompose(params, job.as_ref()),
        Command::Selftest => unreachable!(),
    }
}

fn emit(opts: &Opts, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    match &opts.out {
        Some(path) => fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(v, code)| emit(&cli.opts, &v).map(|_| code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let v = json!({"error": {"kind": f.kind, "message": f.message}});
            eprintln!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::from(f.code)
        }
    }
}
