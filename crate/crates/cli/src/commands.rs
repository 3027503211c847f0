use std::fs;
use std::path::{Path, PathBuf};

use fatcheck::encodings::{
    inj, io_plus_context, io_times_context, is_witness_atomic, pair, prod_type, sum_type, TermContext,
};
use fatcheck::equivalence::{
    bounded_search_in, extpoly_difference, extract_extpoly, monadic_to_type, numeral_context, parse_formula,
    separating_context, separating_pair, separating_pair_nat, translate_dyadic, translate_sequent,
    type_to_monadic, EquivalenceError, Formula,
};
use fatcheck::fat_unify::{fat_unify_with, verify_unifier, SolveConfig, SolveOutcome, SolveStats, UnifProblem};
use fatcheck::fou::{stlc_infer, FoFailure, StlcError};
use fatcheck::reduction::{beta_normalize, betaeta_normal_form, Fuel};
use fatcheck::syntax::{parse_any_term, parse_type, Term, Type, TypingContext};
use fatcheck::typecheck::{check_with, typability_judgment, CheckConfig, RejectReason, SyntheticDerivation, Verdict};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{Outcome, Report};
use crate::{Command, EncodeOp, TranslateMode};

pub fn run(cmd: &Command) -> Report {
    match cmd {
        Command::Check { ctx, term, ty, node_limit } => check(ctx.as_deref(), term, ty.as_deref(), *node_limit),
        Command::Infer { ctx, term } => infer(ctx.as_deref(), term),
        Command::Normalize { term, eta, fuel } => normalize(term, *eta, *fuel),
        Command::Unify { problem, no_pins, node_limit } => unify(problem, *no_pins, *node_limit),
        Command::Encode {
            op,
            target,
            left,
            right,
            index,
            check,
        } => encode(*op, target.as_deref(), left, right, *index, *check),
        Command::Eqnat { left, right, arity } => eqnat(left, right, *arity),
        Command::Separate { ty, witness, nat } => separate(ty, witness.as_deref(), *nat),
        Command::Translate {
            mode,
            formula,
            assume,
            ty,
        } => translate(*mode, formula.as_deref(), assume, ty.as_deref()),
        Command::Search { ty, depth, ctx } => search(ty, *depth, ctx.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// Input helpers
// ---------------------------------------------------------------------------

macro_rules! tryr {
    ($e:expr, $reason:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Report::fail($reason, e),
        }
    };
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Term files may contain `//` line comments.
fn read_term(path: &Path) -> Result<Term, String> {
    let text = read(path)?;
    let body: Vec<&str> = text.lines().map(|l| l.split("//").next().unwrap_or("")).collect();
    parse_any_term(&body.join("\n")).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_ctx(path: Option<&Path>) -> Result<TypingContext, String> {
    match path {
        None => Ok(TypingContext::new()),
        Some(p) => TypingContext::from_json_str(&read(p)?).map_err(|e| format!("{}: {e}", p.display())),
    }
}

fn ty_arg(text: &str) -> Result<Type, String> {
    parse_type(text).map_err(|e| format!("type `{text}`: {e}"))
}

fn lam_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lam"))
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Combine per-file reports: any error wins, then any no.
fn corpus(reports: Vec<(String, Report)>) -> Report {
    let outcome = if reports.iter().any(|(_, r)| r.outcome == Outcome::Error) {
        Outcome::Error
    } else if reports.iter().any(|(_, r)| r.outcome == Outcome::No) {
        Outcome::No
    } else {
        Outcome::Yes
    };
    let count = |o: Outcome| reports.iter().filter(|(_, r)| r.outcome == o).count();
    let summary = json!({"yes": count(Outcome::Yes), "no": count(Outcome::No), "error": count(Outcome::Error)});
    let files: Vec<Value> = reports
        .iter()
        .map(|(name, r)| json!({"file": name, "result": r.to_json()["result"], "reason": r.reason}))
        .collect();
    let note = format!(
        "{} files: {} yes, {} no, {} error",
        reports.len(),
        count(Outcome::Yes),
        count(Outcome::No),
        count(Outcome::Error)
    );
    Report {
        outcome,
        reason: "Corpus".into(),
        payload: json!({"summary": summary, "files": files}),
        note: Some(note),
    }
}

fn stats_json(s: &SolveStats) -> Value {
    json!({"nodes": s.nodes, "candidates": s.candidates, "rejected": s.rejected, "splits": s.splits})
}

// ---------------------------------------------------------------------------
// check / infer / normalize
// ---------------------------------------------------------------------------

fn check_config(node_limit: Option<u64>) -> CheckConfig {
    let mut c = CheckConfig::default();
    if let Some(n) = node_limit {
        c.node_limit = n;
    }
    c
}

fn verdict_report(v: Verdict, stats: &SolveStats) -> Report {
    match v {
        Verdict::Accept(d) => Report::yes("Accept", json!({"derivation": d.to_json(), "stats": stats_json(stats)})),
        Verdict::Reject(r) => Report::no(r.as_str(), json!({"stats": stats_json(stats)})),
        Verdict::Undecided => Report::error("Undecided", json!({"message": "search limit reached", "stats": stats_json(stats)})),
    }
}

fn check_one(ctx: &TypingContext, path: &Path, ty: &Type, config: CheckConfig) -> Report {
    let t = tryr!(read_term(path), "Input");
    let (v, stats) = check_with(ctx, &t, ty, config);
    verdict_report(v, &stats)
}

fn check(ctx: Option<&Path>, term: &Path, ty: Option<&str>, node_limit: Option<u64>) -> Report {
    let ctx = tryr!(read_ctx(ctx), "Input");
    let config = check_config(node_limit);
    let default_ty = match ty.map(ty_arg).transpose() {
        Ok(t) => t,
        Err(e) => return Report::fail("Input", e),
    };
    if term.is_dir() {
        let files = tryr!(lam_files(term), "Input");
        let reports = files
            .par_iter()
            .map(|f| {
                let sidecar = f.with_extension("type");
                let ty = if sidecar.exists() {
                    read(&sidecar).and_then(|s| ty_arg(s.trim()))
                } else {
                    default_ty.clone().ok_or_else(|| format!("{}: no type given", f.display()))
                };
                let r = match ty {
                    Ok(ty) => check_one(&ctx, f, &ty, config),
                    Err(e) => Report::fail("Input", e),
                };
                (file_name(f), r)
            })
            .collect();
        return corpus(reports);
    }
    let Some(ty) = default_ty else {
        return Report::fail("Input", "--type is required");
    };
    let r = check_one(&ctx, term, &ty, config);
    let note = format!("{} : {ty} ({})", term.display(), r.reason);
    r.with_note(note)
}

/// The type given to `t` inside the derivation of the typability probe.
fn probe_type(d: &SyntheticDerivation, t: &Term) -> Option<Type> {
    if d.term.alpha_eq(t) {
        return Some(d.ty.clone());
    }
    d.premises.iter().find_map(|p| probe_type(p, t))
}

fn infer_one(ctx: &TypingContext, path: &Path) -> Report {
    let t = tryr!(read_term(path), "Input").erase();
    let (probe, ty) = typability_judgment(ctx, &t);
    let (v, stats) = check_with(ctx, &probe, &ty, CheckConfig::default());
    match v {
        Verdict::Accept(d) => {
            let found = probe_type(&d, &t).map(|a| a.to_string());
            Report::yes("Accept", json!({"type": found, "derivation": d.to_json(), "stats": stats_json(&stats)}))
        }
        Verdict::Reject(RejectReason::StlcFail) => {
            // Refine the simply typed failure: an occurs-check failure is a cycle.
            match stlc_infer(&ctx.erase(), &t) {
                Err(StlcError::Unify(FoFailure::Cycle(x))) => {
                    Report::no("Cycle", json!({"stage": "stlc", "message": format!("occurs check on {x}")}))
                }
                Err(e) => Report::no("StlcFail", json!({"stage": "stlc", "message": e.to_string()})),
                Ok(_) => Report::no("StlcFail", json!({"stage": "stlc"})),
            }
        }
        other => verdict_report(other, &stats),
    }
}

fn infer(ctx: Option<&Path>, term: &Path) -> Report {
    let ctx = tryr!(read_ctx(ctx), "Input");
    if term.is_dir() {
        let files = tryr!(lam_files(term), "Input");
        return corpus(files.par_iter().map(|f| (file_name(f), infer_one(&ctx, f))).collect());
    }
    infer_one(&ctx, term)
}

fn normalize_one(path: &Path, eta: bool, fuel: Fuel) -> Report {
    let t = tryr!(read_term(path), "Input");
    let nf = if eta { betaeta_normal_form(&t, fuel) } else { beta_normalize(&t, fuel) };
    match nf {
        Ok(n) => Report::yes("Normal", json!({"normal_form": n.to_string()})),
        Err(e) => Report::fail("FuelExhausted", e),
    }
}

fn normalize(term: &Path, eta: bool, fuel: Option<u64>) -> Report {
    let fuel = fuel.map(Fuel::new).unwrap_or_else(Fuel::from_env);
    if term.is_dir() {
        let files = tryr!(lam_files(term), "Input");
        return corpus(files.par_iter().map(|f| (file_name(f), normalize_one(f, eta, fuel))).collect());
    }
    normalize_one(term, eta, fuel)
}

// ---------------------------------------------------------------------------
// unify
// ---------------------------------------------------------------------------

fn unify(path: &Path, no_pins: bool, node_limit: Option<u64>) -> Report {
    let text = tryr!(read(path), "Input");
    let v: Value = tryr!(serde_json::from_str(&text), "MalformedProblem");
    let p = tryr!(UnifProblem::from_json(&v), "MalformedProblem");
    let mut config = SolveConfig {
        allow_pins: !no_pins,
        ..SolveConfig::default()
    };
    if let Some(n) = node_limit {
        config.node_limit = n;
    }
    let (outcome, stats) = fat_unify_with(&p, config, &mut |_| true);
    match outcome {
        SolveOutcome::Unifier(s) => Report::yes(
            "Unifier",
            json!({"unifier": s.to_json(), "verified": verify_unifier(&p, &s), "stats": stats_json(&stats)}),
        ),
        SolveOutcome::NoSolution(n) => Report::no(RejectReason::from(n).as_str(), json!({"stats": stats_json(&stats)})),
        SolveOutcome::Aborted => Report::error("Aborted", json!({"message": "node limit reached", "stats": stats_json(&stats)})),
    }
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

fn encode(op: EncodeOp, target: Option<&str>, left: &str, right: &str, index: u8, check: bool) -> Report {
    let a = tryr!(ty_arg(left), "Input");
    let b = tryr!(ty_arg(right), "Input");
    let target = match target.map(ty_arg).transpose() {
        Ok(t) => t,
        Err(e) => return Report::fail("Input", e),
    };
    let (name, term, ctx, ty) = match op {
        EncodeOp::IoPlus | EncodeOp::IoTimes => {
            let Some(c) = target else {
                return Report::fail("Input", "--target is required for destructor contexts");
            };
            let (k, hole_ty, ty): (TermContext, Type, Type) = match op {
                EncodeOp::IoPlus => (
                    io_plus_context(&a, &b, &c),
                    sum_type(&a, &b),
                    Type::arrows(vec![Type::arrow(a.clone(), c.clone()), Type::arrow(b.clone(), c.clone())], c.clone()),
                ),
                _ => (
                    io_times_context(&a, &b, &c),
                    prod_type(&a, &b),
                    Type::arrow(Type::arrows(vec![a.clone(), b.clone()], c.clone()), c.clone()),
                ),
            };
            let ctx = TypingContext::new().with(k.hole.clone(), hole_ty);
            ("context", k.body, ctx, ty)
        }
        EncodeOp::Inj => {
            if index != 1 && index != 2 {
                return Report::fail("Input", "--index must be 1 or 2");
            }
            let arg = if index == 1 { a.clone() } else { b.clone() };
            let t = inj(index, &Term::var("x"), &a, &b);
            ("term", t, TypingContext::new().with("x", arg), sum_type(&a, &b))
        }
        EncodeOp::Pair => {
            let t = pair(&Term::var("x"), &Term::var("y"), &a, &b);
            let ctx = TypingContext::new().with("x", a.clone()).with("y", b.clone());
            ("term", t, ctx, prod_type(&a, &b))
        }
    };
    let mut payload = json!({
        name: term.to_string(),
        "context_types": ctx.to_json(),
        "type": ty.to_string(),
        "witness_atomic": is_witness_atomic(&term),
    });
    if !check {
        return Report::yes("Encoded", payload);
    }
    let (v, stats) = check_with(&ctx, &term, &ty, CheckConfig::default());
    payload["stats"] = stats_json(&stats);
    match v {
        Verdict::Accept(_) => Report::yes("Accept", payload),
        Verdict::Reject(r) => Report::no(r.as_str(), payload),
        Verdict::Undecided => Report::error("Undecided", payload),
    }
}

// ---------------------------------------------------------------------------
// eqnat / separate / translate / search
// ---------------------------------------------------------------------------

fn equivalence_failure(e: EquivalenceError) -> Report {
    let reason = match &e {
        EquivalenceError::NotTypable(_) => "NotTypable",
        EquivalenceError::FuelExhausted(_) => "FuelExhausted",
        EquivalenceError::NotANumeral(_) => "NotANumeral",
        EquivalenceError::DegreeBoundExceeded(_) => "DegreeBoundExceeded",
        EquivalenceError::ArityMismatch { .. } => "ArityMismatch",
        EquivalenceError::WitnessRejected(_) => "WitnessRejected",
        EquivalenceError::SeparationFailed(_) => "SeparationFailed",
        EquivalenceError::IllFormedFormula(_) => "IllFormedFormula",
        EquivalenceError::Parse(_) => "Input",
    };
    Report::fail(reason, e)
}

fn eqnat(left: &Path, right: &Path, arity: usize) -> Report {
    let t = tryr!(read_term(left), "Input");
    let u = tryr!(read_term(right), "Input");
    let p = match extract_extpoly(&t, arity) {
        Ok(p) => p,
        Err(e) => return equivalence_failure(e),
    };
    let q = match extract_extpoly(&u, arity) {
        Ok(q) => q,
        Err(e) => return equivalence_failure(e),
    };
    let polys = json!({"left": p.to_json(), "right": q.to_json(), "left_form": p.to_string(), "right_form": q.to_string()});
    match extpoly_difference(&p, &q) {
        None => Report::yes("Equivalent", polys),
        Some(tuple) => {
            let mut payload = polys;
            payload["tuple"] = json!(tuple);
            payload["context"] = json!(numeral_context(&tuple).to_string());
            payload["left_value"] = json!(p.eval(&tuple).to_string());
            payload["right_value"] = json!(q.eval(&tuple).to_string());
            Report::no("Separated", payload)
        }
    }
}

fn separate(ty: &str, witness: Option<&Path>, nat: bool) -> Report {
    let a = tryr!(ty_arg(ty), "Input");
    let pair = if nat { separating_pair_nat(&a) } else { separating_pair(&a) };
    let mut payload = json!({
        "variant": if nat { "nat" } else { "bool" },
        "a_star": pair.a_star.to_string(),
        "argument_type": pair.argument.to_string(),
        "type": pair.ty().to_string(),
        "u": pair.u.to_string(),
        "v": pair.v.to_string(),
    });
    let Some(w) = witness else {
        return Report::yes("Pair", payload);
    };
    let w = tryr!(read_term(w), "Input");
    match separating_context(&a, &w) {
        Ok(k) => {
            let fuel = Fuel::from_env();
            let nf = |t: &Term| betaeta_normal_form(&t.erase(), fuel).map(|n| n.to_string()).unwrap_or_default();
            payload["context"] = json!(k.to_string());
            payload["context_u"] = json!(nf(&k.fill(&pair.u)));
            payload["context_v"] = json!(nf(&k.fill(&pair.v)));
            Report::yes("Separated", payload)
        }
        Err(EquivalenceError::WitnessRejected(m)) => {
            payload["message"] = json!(m);
            Report::no("WitnessRejected", payload)
        }
        Err(e) => equivalence_failure(e),
    }
}

fn formula_arg(text: &str) -> Result<Formula, EquivalenceError> {
    Ok(parse_formula(text)?)
}

fn translate(mode: TranslateMode, formula: Option<&str>, assume: &[String], ty: Option<&str>) -> Report {
    match mode {
        TranslateMode::Dyadic => {
            let Some(f) = formula else {
                return Report::fail("Input", "--formula is required");
            };
            let run = || -> Result<Value, EquivalenceError> {
                let phi = formula_arg(f)?;
                let hyps = assume.iter().map(|a| formula_arg(a)).collect::<Result<Vec<_>, _>>()?;
                let t = translate_dyadic(&phi, &hyps)?;
                let (ctx, _) = translate_sequent(&hyps, &phi)?;
                Ok(json!({"formula": phi.to_string(), "type": t.to_string(), "context": ctx.to_json()}))
            };
            match run() {
                Ok(p) => Report::yes("Translated", p),
                Err(e) => equivalence_failure(e),
            }
        }
        TranslateMode::Monadic => match (formula, ty) {
            (Some(f), None) => match formula_arg(f).and_then(|phi| monadic_to_type(&phi)) {
                Ok(t) => Report::yes("Translated", json!({"type": t.to_string()})),
                Err(e) => equivalence_failure(e),
            },
            (None, Some(t)) => {
                let a = tryr!(ty_arg(t), "Input");
                match type_to_monadic(&a) {
                    Ok(phi) => Report::yes("Translated", json!({"formula": phi.to_string()})),
                    Err(e) => equivalence_failure(e),
                }
            }
            _ => Report::fail("Input", "give exactly one of --formula and --type"),
        },
    }
}

fn search(ty: &str, depth: u32, ctx: Option<&Path>) -> Report {
    let a = tryr!(ty_arg(ty), "Input");
    let ctx = tryr!(read_ctx(ctx), "Input");
    match bounded_search_in(&ctx, &a, depth) {
        Some(t) => Report::yes("Found", json!({"term": t.to_string(), "erased": t.erase().to_string(), "depth": depth})),
        None => Report::no("NotFound", json!({"depth": depth})),
    }
}
