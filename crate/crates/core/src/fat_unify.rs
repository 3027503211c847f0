//! Fat-unification: a second-order unification problem over sequence
//! variables, projection variables and type schemes, decided by
//! normalization, a first-order cycle check, arrow elimination and a bounded
//! search over simple problems.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::fou::{fo_unify, FoFailure, FoProblem, FoTerm};
use crate::syntax::Type;

/// Name of the type constant ♣ inside unification problems.
pub const CLUB: &str = "#";

// ---------------------------------------------------------------------------
// Language
// ---------------------------------------------------------------------------

/// Expressions of sort ⟨*⟩.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeqExpr {
    Lit(Vec<String>),
    Var(String),
    /// `α a1 ... an`
    Proj(String, Vec<String>),
}

/// Expressions of sort *.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StarExpr {
    TVar(String),
    /// `π^l(𝔞)`, with `l ≥ 1`.
    Pi(usize, SeqExpr),
    /// `F 𝔞1 ... 𝔞n`
    Meta(String, Vec<SeqExpr>),
    Arrow(Box<QType>, Box<QType>),
}

/// Expressions of sort T(*): `∀a.φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QType {
    pub binder: String,
    pub body: StarExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// `(α : a)`: `k_α = k_a`.
    ArityLink(String, String),
    /// `(a : k)`: `k_a = k`.
    LengthPin(String, usize),
    /// `k_a = k_b`; introduced when a type scheme is split into an arrow.
    SameLength(String, String),
}

pub type Equation = (StarExpr, StarExpr);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnifProblem {
    pub seq_vars: BTreeSet<String>,
    pub proj_vars: BTreeMap<String, usize>,
    pub meta_vars: BTreeMap<String, usize>,
    pub equations: Vec<Equation>,
    pub constraints: Vec<Constraint>,
}

impl SeqExpr {
    pub fn var(a: impl Into<String>) -> SeqExpr {
        SeqExpr::Var(a.into())
    }

    pub fn proj(alpha: impl Into<String>, args: &[&str]) -> SeqExpr {
        SeqExpr::Proj(alpha.into(), args.iter().map(|s| s.to_string()).collect())
    }

    fn rename_seq(&self, from: &str, to: &str) -> SeqExpr {
        let r = |s: &String| if s == from { to.to_string() } else { s.clone() };
        match self {
            SeqExpr::Lit(_) => self.clone(),
            SeqExpr::Var(a) => SeqExpr::Var(r(a)),
            SeqExpr::Proj(al, args) => SeqExpr::Proj(al.clone(), args.iter().map(r).collect()),
        }
    }
}

impl StarExpr {
    pub fn tvar(x: impl Into<String>) -> StarExpr {
        StarExpr::TVar(x.into())
    }

    pub fn pi(l: usize, a: SeqExpr) -> StarExpr {
        StarExpr::Pi(l, a)
    }

    pub fn meta(f: impl Into<String>, args: Vec<SeqExpr>) -> StarExpr {
        StarExpr::Meta(f.into(), args)
    }

    pub fn arrow(l: QType, r: QType) -> StarExpr {
        StarExpr::Arrow(Box::new(l), Box::new(r))
    }

    fn rename_seq(&self, from: &str, to: &str) -> StarExpr {
        match self {
            StarExpr::TVar(_) => self.clone(),
            StarExpr::Pi(l, a) => StarExpr::Pi(*l, a.rename_seq(from, to)),
            StarExpr::Meta(f, args) => StarExpr::Meta(f.clone(), args.iter().map(|a| a.rename_seq(from, to)).collect()),
            StarExpr::Arrow(l, r) => StarExpr::arrow(l.rename_seq(from, to), r.rename_seq(from, to)),
        }
    }

    /// Rebuild with every `F 𝔞⃗` for which `f` returns `Some` replaced.
    fn map_metas(&self, f: &mut dyn FnMut(&str, &[SeqExpr]) -> Option<StarExpr>) -> StarExpr {
        match self {
            StarExpr::Meta(name, args) => f(name, args).unwrap_or_else(|| self.clone()),
            StarExpr::Arrow(l, r) => {
                let l = QType {
                    binder: l.binder.clone(),
                    body: l.body.map_metas(f),
                };
                let r = QType {
                    binder: r.binder.clone(),
                    body: r.body.map_metas(f),
                };
                StarExpr::arrow(l, r)
            }
            _ => self.clone(),
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&StarExpr)) {
        f(self);
        if let StarExpr::Arrow(l, r) = self {
            l.body.visit(f);
            r.body.visit(f);
        }
    }

    fn visit_seqs(&self, f: &mut dyn FnMut(&SeqExpr)) {
        self.visit(&mut |e| match e {
            StarExpr::Pi(_, a) => f(a),
            StarExpr::Meta(_, args) => args.iter().for_each(&mut *f),
            _ => {}
        });
    }

    fn is_arrow(&self) -> bool {
        matches!(self, StarExpr::Arrow(..))
    }

    fn has_arrow(&self) -> bool {
        self.is_arrow()
    }
}

impl QType {
    pub fn new(binder: impl Into<String>, body: StarExpr) -> QType {
        QType {
            binder: binder.into(),
            body,
        }
    }

    fn rename_seq(&self, from: &str, to: &str) -> QType {
        QType {
            binder: if self.binder == from {
                to.to_string()
            } else {
                self.binder.clone()
            },
            body: self.body.rename_seq(from, to),
        }
    }
}

impl Constraint {
    fn rename_seq(&self, from: &str, to: &str) -> Constraint {
        let r = |s: &String| if s == from { to.to_string() } else { s.clone() };
        match self {
            Constraint::ArityLink(al, a) => Constraint::ArityLink(al.clone(), r(a)),
            Constraint::LengthPin(a, k) => Constraint::LengthPin(r(a), *k),
            Constraint::SameLength(a, b) => Constraint::SameLength(r(a), r(b)),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("variable `{0}` is used but not declared")]
    Undeclared(String),
    #[error("`{name}` is declared with arity {declared} but applied to {used} arguments")]
    Arity { name: String, declared: usize, used: usize },
    #[error("projection index must be at least 1")]
    ZeroIndex,
    #[error("malformed problem: {0}")]
    Malformed(String),
}

impl UnifProblem {
    pub fn new() -> Self {
        UnifProblem::default()
    }

    pub fn push(&mut self, l: StarExpr, r: StarExpr) {
        self.equations.push((l, r));
    }

    /// Add declarations for every variable in use, with the arity of its
    /// first use.
    pub fn declare_from_use(&mut self) {
        let mut seqs = BTreeSet::new();
        let mut projs = BTreeMap::new();
        let mut metas = BTreeMap::new();
        for (l, r) in &self.equations {
            for e in [l, r] {
                collect_decls(e, &mut seqs, &mut projs, &mut metas);
            }
        }
        for c in &self.constraints {
            match c {
                Constraint::ArityLink(al, a) => {
                    seqs.insert(a.clone());
                    projs.entry(al.clone()).or_insert(0);
                }
                Constraint::LengthPin(a, _) => {
                    seqs.insert(a.clone());
                }
                Constraint::SameLength(a, b) => {
                    seqs.insert(a.clone());
                    seqs.insert(b.clone());
                }
            }
        }
        self.seq_vars.extend(seqs);
        for (k, v) in projs {
            self.proj_vars.entry(k).or_insert(v);
        }
        for (k, v) in metas {
            self.meta_vars.entry(k).or_insert(v);
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let mut err = None;
        let check_seq = |a: &SeqExpr, err: &mut Option<ProblemError>| match a {
            SeqExpr::Lit(_) => {}
            SeqExpr::Var(v) => {
                if !self.seq_vars.contains(v) {
                    err.get_or_insert(ProblemError::Undeclared(v.clone()));
                }
            }
            SeqExpr::Proj(al, args) => {
                match self.proj_vars.get(al) {
                    None => {
                        err.get_or_insert(ProblemError::Undeclared(al.clone()));
                    }
                    Some(&n) if n != args.len() => {
                        err.get_or_insert(ProblemError::Arity {
                            name: al.clone(),
                            declared: n,
                            used: args.len(),
                        });
                    }
                    _ => {}
                }
                for v in args {
                    if !self.seq_vars.contains(v) {
                        err.get_or_insert(ProblemError::Undeclared(v.clone()));
                    }
                }
            }
        };
        for (l, r) in &self.equations {
            for e in [l, r] {
                e.visit(&mut |x| match x {
                    StarExpr::Pi(0, _) => {
                        err.get_or_insert(ProblemError::ZeroIndex);
                    }
                    StarExpr::Pi(_, a) => check_seq(a, &mut err),
                    StarExpr::Meta(f, args) => {
                        match self.meta_vars.get(f) {
                            None => {
                                err.get_or_insert(ProblemError::Undeclared(f.clone()));
                            }
                            Some(&n) if n != args.len() => {
                                err.get_or_insert(ProblemError::Arity {
                                    name: f.clone(),
                                    declared: n,
                                    used: args.len(),
                                });
                            }
                            _ => {}
                        }
                        for a in args {
                            check_seq(a, &mut err);
                        }
                    }
                    StarExpr::Arrow(l, r) => {
                        for b in [&l.binder, &r.binder] {
                            if !self.seq_vars.contains(b) {
                                err.get_or_insert(ProblemError::Undeclared(b.clone()));
                            }
                        }
                    }
                    StarExpr::TVar(_) => {}
                });
            }
        }
        for c in &self.constraints {
            let (seqs, proj): (Vec<&String>, Option<&String>) = match c {
                Constraint::ArityLink(al, a) => (vec![a], Some(al)),
                Constraint::LengthPin(a, _) => (vec![a], None),
                Constraint::SameLength(a, b) => (vec![a, b], None),
            };
            for s in seqs {
                if !self.seq_vars.contains(s) {
                    err.get_or_insert(ProblemError::Undeclared(s.clone()));
                }
            }
            if let Some(al) = proj {
                if !self.proj_vars.contains_key(al) {
                    err.get_or_insert(ProblemError::Undeclared(al.clone()));
                }
            }
        }
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Every concrete type-variable name in the problem.
    pub fn type_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (l, r) in &self.equations {
            for e in [l, r] {
                e.visit(&mut |x| {
                    if let StarExpr::TVar(v) = x {
                        out.insert(v.clone());
                    }
                });
                e.visit_seqs(&mut |a| {
                    if let SeqExpr::Lit(xs) = a {
                        out.extend(xs.iter().cloned());
                    }
                });
            }
        }
        out
    }

    fn all_var_names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.seq_vars.clone();
        out.extend(self.proj_vars.keys().cloned());
        out.extend(self.meta_vars.keys().cloned());
        out
    }

    fn rename_seq_everywhere(&mut self, from: &str, to: &str) {
        for (l, r) in self.equations.iter_mut() {
            *l = l.rename_seq(from, to);
            *r = r.rename_seq(from, to);
        }
        for c in self.constraints.iter_mut() {
            *c = c.rename_seq(from, to);
        }
        self.seq_vars.remove(from);
        self.seq_vars.insert(to.to_string());
    }
}

fn collect_decls(
    e: &StarExpr,
    seqs: &mut BTreeSet<String>,
    projs: &mut BTreeMap<String, usize>,
    metas: &mut BTreeMap<String, usize>,
) {
    e.visit(&mut |x| match x {
        StarExpr::Meta(f, args) => {
            metas.entry(f.clone()).or_insert(args.len());
        }
        StarExpr::Arrow(l, r) => {
            seqs.insert(l.binder.clone());
            seqs.insert(r.binder.clone());
        }
        _ => {}
    });
    e.visit_seqs(&mut |a| match a {
        SeqExpr::Var(v) => {
            seqs.insert(v.clone());
        }
        SeqExpr::Proj(al, args) => {
            projs.entry(al.clone()).or_insert(args.len());
            seqs.extend(args.iter().cloned());
        }
        SeqExpr::Lit(_) => {}
    });
}

/// `Ua`: append the sequence variable `a` to every projection and scheme
/// application.
pub fn extend_equations(eqs: &[Equation], a: &str) -> Vec<Equation> {
    extend_equations_except(eqs, a, &BTreeSet::new())
}

/// As [`extend_equations`], leaving applications of the schemes in `keep`
/// untouched.  Projection applications are always extended.
pub fn extend_equations_except(eqs: &[Equation], a: &str, keep: &BTreeSet<String>) -> Vec<Equation> {
    fn ext_seq(s: &SeqExpr, a: &str) -> SeqExpr {
        match s {
            SeqExpr::Proj(al, args) => {
                let mut args = args.clone();
                args.push(a.to_string());
                SeqExpr::Proj(al.clone(), args)
            }
            other => other.clone(),
        }
    }
    fn ext(e: &StarExpr, a: &str, keep: &BTreeSet<String>) -> StarExpr {
        match e {
            StarExpr::TVar(_) => e.clone(),
            StarExpr::Pi(l, s) => StarExpr::Pi(*l, ext_seq(s, a)),
            StarExpr::Meta(f, args) => {
                let mut args: Vec<SeqExpr> = args.iter().map(|s| ext_seq(s, a)).collect();
                if !keep.contains(f) {
                    args.push(SeqExpr::Var(a.to_string()));
                }
                StarExpr::Meta(f.clone(), args)
            }
            StarExpr::Arrow(l, r) => StarExpr::arrow(
                QType::new(l.binder.clone(), ext(&l.body, a, keep)),
                QType::new(r.binder.clone(), ext(&r.body, a, keep)),
            ),
        }
    }
    eqs.iter()
        .map(|(l, r)| (ext(l, a, keep), ext(r, a, keep)))
        .collect()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Lit(xs) => write!(f, "<{}>", xs.join(" ")),
            SeqExpr::Var(a) => write!(f, "{a}"),
            SeqExpr::Proj(al, args) => write!(f, "{al}({})", args.join(", ")),
        }
    }
}

impl fmt::Display for StarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarExpr::TVar(x) => write!(f, "{x}"),
            StarExpr::Pi(l, a) => write!(f, "π{l}({a})"),
            StarExpr::Meta(name, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{name}({})", parts.join(", "))
            }
            StarExpr::Arrow(l, r) => write!(f, "({l}) => ({r})"),
        }
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "∀{}. {}", self.binder, self.body)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::ArityLink(al, a) => write!(f, "({al} : {a})"),
            Constraint::LengthPin(a, k) => write!(f, "({a} : {k})"),
            Constraint::SameLength(a, b) => write!(f, "(|{a}| = |{b}|)"),
        }
    }
}

impl fmt::Display for UnifProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, r) in &self.equations {
            writeln!(f, "{l} = {r}")?;
        }
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

fn strs(v: &Value, what: &str) -> Result<Vec<String>, ProblemError> {
    v.as_array()
        .ok_or_else(|| ProblemError::Malformed(format!("{what}: expected an array of names")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(|s| s.to_string())
                .ok_or_else(|| ProblemError::Malformed(format!("{what}: expected a name")))
        })
        .collect()
}

fn tagged<'a>(v: &'a Value, what: &str) -> Result<(&'a str, &'a [Value]), ProblemError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ProblemError::Malformed(format!("{what}: expected a tagged array, got {v}")))?;
    let tag = arr
        .first()
        .and_then(|t| t.as_str())
        .ok_or_else(|| ProblemError::Malformed(format!("{what}: missing tag in {v}")))?;
    Ok((tag, &arr[1..]))
}

fn name_at(args: &[Value], i: usize, what: &str) -> Result<String, ProblemError> {
    args.get(i)
        .and_then(|x| x.as_str())
        .map(|s| s.to_string())
        .ok_or_else(|| ProblemError::Malformed(format!("{what}: expected a name at position {}", i + 1)))
}

fn index_at(args: &[Value], i: usize, what: &str) -> Result<usize, ProblemError> {
    args.get(i)
        .and_then(|x| x.as_u64())
        .map(|n| n as usize)
        .ok_or_else(|| ProblemError::Malformed(format!("{what}: expected a natural number at position {}", i + 1)))
}

pub fn seq_from_json(v: &Value) -> Result<SeqExpr, ProblemError> {
    if let Some(s) = v.as_str() {
        return Ok(SeqExpr::Var(s.to_string()));
    }
    let (tag, args) = tagged(v, "sequence")?;
    match tag {
        "lit" => Ok(SeqExpr::Lit(strs(args.first().unwrap_or(&Value::Null), "lit")?)),
        "seq" => Ok(SeqExpr::Var(name_at(args, 0, "seq")?)),
        "proj" => Ok(SeqExpr::Proj(
            name_at(args, 0, "proj")?,
            strs(args.get(1).unwrap_or(&Value::Null), "proj")?,
        )),
        other => Err(ProblemError::Malformed(format!("unknown sequence tag `{other}`"))),
    }
}

pub fn star_from_json(v: &Value) -> Result<StarExpr, ProblemError> {
    if let Some(s) = v.as_str() {
        return Ok(StarExpr::TVar(s.to_string()));
    }
    let (tag, args) = tagged(v, "expression")?;
    match tag {
        "var" => Ok(StarExpr::TVar(name_at(args, 0, "var")?)),
        "club" => Ok(StarExpr::TVar(CLUB.to_string())),
        "pi" => Ok(StarExpr::Pi(
            index_at(args, 0, "pi")?,
            seq_from_json(args.get(1).unwrap_or(&Value::Null))?,
        )),
        "meta" => {
            let list = args
                .get(1)
                .and_then(|x| x.as_array())
                .ok_or_else(|| ProblemError::Malformed("meta: expected an argument array".into()))?;
            Ok(StarExpr::Meta(
                name_at(args, 0, "meta")?,
                list.iter().map(seq_from_json).collect::<Result<_, _>>()?,
            ))
        }
        "arrow" => Ok(StarExpr::arrow(
            qtype_from_json(args.first().unwrap_or(&Value::Null))?,
            qtype_from_json(args.get(1).unwrap_or(&Value::Null))?,
        )),
        other => Err(ProblemError::Malformed(format!("unknown expression tag `{other}`"))),
    }
}

pub fn qtype_from_json(v: &Value) -> Result<QType, ProblemError> {
    let (tag, args) = tagged(v, "quantified type")?;
    if tag != "forall" {
        return Err(ProblemError::Malformed(format!("expected `forall`, got `{tag}`")));
    }
    Ok(QType::new(
        name_at(args, 0, "forall")?,
        star_from_json(args.get(1).unwrap_or(&Value::Null))?,
    ))
}

pub fn seq_to_json(s: &SeqExpr) -> Value {
    match s {
        SeqExpr::Lit(xs) => json!(["lit", xs]),
        SeqExpr::Var(a) => json!(["seq", a]),
        SeqExpr::Proj(al, args) => json!(["proj", al, args]),
    }
}

pub fn star_to_json(e: &StarExpr) -> Value {
    match e {
        StarExpr::TVar(x) if x == CLUB => json!(["club"]),
        StarExpr::TVar(x) => json!(["var", x]),
        StarExpr::Pi(l, a) => json!(["pi", l, seq_to_json(a)]),
        StarExpr::Meta(f, args) => json!(["meta", f, args.iter().map(seq_to_json).collect::<Vec<_>>()]),
        StarExpr::Arrow(l, r) => json!(["arrow", qtype_to_json(l), qtype_to_json(r)]),
    }
}

pub fn qtype_to_json(q: &QType) -> Value {
    json!(["forall", q.binder, star_to_json(&q.body)])
}

impl UnifProblem {
    /// Parse the problem-file format; see `docs/unify-format.md`.
    pub fn from_json(v: &Value) -> Result<UnifProblem, ProblemError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ProblemError::Malformed("problem must be a JSON object".into()))?;
        let mut p = UnifProblem::new();
        if let Some(s) = obj.get("seq_vars") {
            p.seq_vars = strs(s, "seq_vars")?.into_iter().collect();
        }
        for (key, target) in [("proj_vars", &mut p.proj_vars), ("meta_vars", &mut p.meta_vars)] {
            if let Some(list) = obj.get(key) {
                let list = list
                    .as_array()
                    .ok_or_else(|| ProblemError::Malformed(format!("{key} must be an array")))?;
                for d in list {
                    let name = d
                        .get("name")
                        .and_then(|n| n.as_str())
                        .ok_or_else(|| ProblemError::Malformed(format!("{key}: missing name")))?;
                    let arity = d
                        .get("arity")
                        .and_then(|n| n.as_u64())
                        .ok_or_else(|| ProblemError::Malformed(format!("{key}: missing arity")))?;
                    target.insert(name.to_string(), arity as usize);
                }
            }
        }
        if let Some(eqs) = obj.get("equations") {
            let eqs = eqs
                .as_array()
                .ok_or_else(|| ProblemError::Malformed("equations must be an array".into()))?;
            for e in eqs {
                let pair = e
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| ProblemError::Malformed("an equation is a pair [lhs, rhs]".into()))?;
                p.push(star_from_json(&pair[0])?, star_from_json(&pair[1])?);
            }
        }
        if let Some(cs) = obj.get("constraints") {
            let cs = cs
                .as_array()
                .ok_or_else(|| ProblemError::Malformed("constraints must be an array".into()))?;
            for c in cs {
                let (tag, args) = tagged(c, "constraint")?;
                p.constraints.push(match tag {
                    "arity" => Constraint::ArityLink(name_at(args, 0, "arity")?, name_at(args, 1, "arity")?),
                    "length" => Constraint::LengthPin(name_at(args, 0, "length")?, index_at(args, 1, "length")?),
                    "same_length" => {
                        Constraint::SameLength(name_at(args, 0, "same_length")?, name_at(args, 1, "same_length")?)
                    }
                    other => return Err(ProblemError::Malformed(format!("unknown constraint tag `{other}`"))),
                });
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seq_vars": self.seq_vars,
            "proj_vars": self.proj_vars.iter().map(|(k, v)| json!({"name": k, "arity": v})).collect::<Vec<_>>(),
            "meta_vars": self.meta_vars.iter().map(|(k, v)| json!({"name": k, "arity": v})).collect::<Vec<_>>(),
            "equations": self.equations.iter().map(|(l, r)| json!([star_to_json(l), star_to_json(r)])).collect::<Vec<_>>(),
            "constraints": self.constraints.iter().map(|c| match c {
                Constraint::ArityLink(al, a) => json!(["arity", al, a]),
                Constraint::LengthPin(a, k) => json!(["length", a, k]),
                Constraint::SameLength(a, b) => json!(["same_length", a, b]),
            }).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

/// One component of `S(α)`: `λx⃗.X` or `λx⃗.π^pos(x_arg)` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Const(String),
    ProjOf { arg: usize, pos: usize },
}

/// `λρ1 ... ρn. A`.  Occurrences of `π^l(ρi)` in `A` are type variables named
/// by [`placeholder`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub arity: usize,
    pub body: Type,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnifSubstitution {
    /// `S(a)`; its length is `k_a`.
    pub seq: BTreeMap<String, Vec<String>>,
    /// `S(α)`; its length is `k_α`.
    pub proj: BTreeMap<String, Vec<Component>>,
    pub meta: BTreeMap<String, Scheme>,
}

/// The variable standing for `π^pos(ρ_arg)` inside a scheme body.
pub fn placeholder(arg: usize, pos: usize) -> String {
    format!("π{pos}(ρ{arg})")
}

pub fn parse_placeholder(s: &str) -> Option<(usize, usize)> {
    let rest = s.strip_prefix('π')?;
    let (pos, rest) = rest.split_once("(ρ")?;
    let arg = rest.strip_suffix(')')?;
    Some((arg.parse().ok()?, pos.parse().ok()?))
}

pub fn name_to_type(n: &str) -> Type {
    if n == CLUB {
        Type::Club
    } else {
        Type::Var(n.to_string())
    }
}

impl UnifSubstitution {
    pub fn k_seq(&self, a: &str) -> Option<usize> {
        self.seq.get(a).map(|s| s.len())
    }

    pub fn seq_value(&self, s: &SeqExpr) -> Option<Vec<String>> {
        match s {
            SeqExpr::Lit(xs) => Some(xs.clone()),
            SeqExpr::Var(a) => self.seq.get(a).cloned(),
            SeqExpr::Proj(al, args) => {
                let comps = self.proj.get(al)?;
                let vals: Vec<Vec<String>> = args.iter().map(|a| self.seq.get(a).cloned()).collect::<Option<_>>()?;
                comps
                    .iter()
                    .map(|c| match c {
                        Component::Const(x) => Some(x.clone()),
                        Component::ProjOf { arg, pos } => vals.get(arg.checked_sub(1)?)?.get(pos.checked_sub(1)?).cloned(),
                    })
                    .collect()
            }
        }
    }

    pub fn star_value(&self, e: &StarExpr) -> Option<Type> {
        match e {
            StarExpr::TVar(x) => Some(name_to_type(x)),
            StarExpr::Pi(l, a) => {
                let v = self.seq_value(a)?;
                v.get(l.checked_sub(1)?).map(|n| name_to_type(n))
            }
            StarExpr::Meta(f, args) => {
                let scheme = self.meta.get(f)?;
                if scheme.arity != args.len() {
                    return None;
                }
                let vals: Vec<Vec<String>> = args.iter().map(|a| self.seq_value(a)).collect::<Option<_>>()?;
                instantiate_scheme(&scheme.body, &vals)
            }
            StarExpr::Arrow(l, r) => Some(Type::arrow(self.qtype_value(l)?, self.qtype_value(r)?)),
        }
    }

    pub fn qtype_value(&self, q: &QType) -> Option<Type> {
        let names = self.seq.get(&q.binder)?;
        Some(Type::foralls(names, self.star_value(&q.body)?))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seq": self.seq,
            "proj": self.proj.iter().map(|(k, comps)| (k.clone(), Value::Array(comps.iter().map(|c| match c {
                Component::Const(x) => json!({"const": x}),
                Component::ProjOf { arg, pos } => json!({"arg": arg, "pos": pos}),
            }).collect()))).collect::<serde_json::Map<_, _>>(),
            "meta": self.meta.iter().map(|(k, s)| (k.clone(), json!({"arity": s.arity, "body": s.body.to_string()}))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// `A[π^l(ρi) ↦ args_i[l]]`, capture-avoiding.  `None` when an index is out
/// of range.
pub fn instantiate_scheme(body: &Type, args: &[Vec<String>]) -> Option<Type> {
    let mut m = BTreeMap::new();
    for v in body.free_vars() {
        if let Some((i, l)) = parse_placeholder(&v) {
            let name = args.get(i.checked_sub(1)?)?.get(l.checked_sub(1)?)?;
            m.insert(v, name_to_type(name));
        }
    }
    Some(body.subst_many(&m))
}

/// Why `S` fails to be a unifier of `p`, if it does.
pub fn unifier_defect(p: &UnifProblem, s: &UnifSubstitution) -> Option<String> {
    for a in &p.seq_vars {
        match s.seq.get(a) {
            None => return Some(format!("no value for sequence variable {a}")),
            Some(names) => {
                let set: BTreeSet<&String> = names.iter().collect();
                if set.len() != names.len() {
                    return Some(format!("S({a}) repeats a variable"));
                }
            }
        }
    }
    for (al, _) in &p.proj_vars {
        if !s.proj.contains_key(al) {
            return Some(format!("no value for projection variable {al}"));
        }
    }
    for (f, n) in &p.meta_vars {
        match s.meta.get(f) {
            None => return Some(format!("no value for scheme {f}")),
            Some(sc) if sc.arity != *n => return Some(format!("scheme {f} has the wrong arity")),
            _ => {}
        }
    }
    for (l, r) in &p.equations {
        match (s.star_value(l), s.star_value(r)) {
            (Some(a), Some(b)) => {
                if !a.alpha_eq(&b) {
                    return Some(format!("{l} = {r} becomes {a} = {b}"));
                }
            }
            _ => return Some(format!("{l} = {r} refers past the end of a sequence")),
        }
    }
    for c in &p.constraints {
        let ok = match c {
            Constraint::ArityLink(al, a) => s.proj.get(al).map(|v| v.len()) == s.k_seq(a),
            Constraint::LengthPin(a, k) => s.k_seq(a) == Some(*k),
            Constraint::SameLength(a, b) => s.k_seq(a) == s.k_seq(b),
        };
        if !ok {
            return Some(format!("constraint {c} violated"));
        }
    }
    None
}

/// Apply `S` to every equation, compare up to α, and check every constraint.
pub fn verify_unifier(p: &UnifProblem, s: &UnifSubstitution) -> bool {
    unifier_defect(p, s).is_none()
}

// ---------------------------------------------------------------------------
// Normalization, skeleton and cycle check
// ---------------------------------------------------------------------------

/// Split every `Φ1⇒Ψ1 = Φ2⇒Ψ2`, renaming the right binders to the left ones
/// throughout the problem.
pub fn normalize_problem(p: &UnifProblem) -> UnifProblem {
    normalize_tracking(p, &mut BTreeMap::new())
}

fn normalize_tracking(p: &UnifProblem, aliases: &mut BTreeMap<String, String>) -> UnifProblem {
    let mut out = p.clone();
    loop {
        let pos = out
            .equations
            .iter()
            .position(|(l, r)| l.is_arrow() && r.is_arrow());
        let Some(i) = pos else {
            return out;
        };
        let (l, r) = out.equations.remove(i);
        let (StarExpr::Arrow(l1, r1), StarExpr::Arrow(l2, r2)) = (l, r) else {
            unreachable!()
        };
        out.equations.push((l1.body.clone(), l2.body.clone()));
        out.equations.push((r1.body.clone(), r2.body.clone()));
        for (from, to) in [(&l2.binder, &l1.binder), (&r2.binder, &r1.binder)] {
            // Earlier renames may have changed the binder names in this pair.
            let from = resolve_alias(aliases, from);
            let to = resolve_alias(aliases, to);
            if from != to {
                out.rename_seq_everywhere(&from, &to);
                aliases.insert(from, to);
            }
        }
    }
}

fn resolve_alias(aliases: &BTreeMap<String, String>, a: &str) -> String {
    let mut cur = a.to_string();
    let mut steps = 0;
    while let Some(next) = aliases.get(&cur) {
        cur = next.clone();
        steps += 1;
        if steps > aliases.len() {
            break;
        }
    }
    cur
}

/// `U*`: schemes become first-order variables, all sequence material and
/// all type variables the constant `c`, quantifiers are dropped.
pub fn build_fo_skeleton(p: &UnifProblem) -> FoProblem {
    fn tr(e: &StarExpr) -> FoTerm {
        match e {
            StarExpr::TVar(_) | StarExpr::Pi(..) => FoTerm::constant("c"),
            StarExpr::Meta(f, _) => FoTerm::var(f.clone()),
            StarExpr::Arrow(l, r) => FoTerm::arrow(tr(&l.body), tr(&r.body)),
        }
    }
    FoProblem {
        equations: p.equations.iter().map(|(l, r)| (tr(l), tr(r))).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoSolution {
    Cycle,
    ArrowClash,
    Exhausted,
}

impl NoSolution {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoSolution::Cycle => "Cycle",
            NoSolution::ArrowClash => "ArrowClash",
            NoSolution::Exhausted => "Exhausted",
        }
    }
}

impl fmt::Display for NoSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn phase1_cycle_check(p: &UnifProblem) -> Result<(), NoSolution> {
    match fo_unify(&build_fo_skeleton(p)) {
        Ok(_) => Ok(()),
        Err(FoFailure::Cycle(_)) => Err(NoSolution::Cycle),
        Err(FoFailure::Clash(..)) => Err(NoSolution::ArrowClash),
    }
}

// ---------------------------------------------------------------------------
// Arrow elimination
// ---------------------------------------------------------------------------

/// `F ↦ λ𝔞⃗. (∀c. left 𝔞⃗ c) ⇒ (∀d. right 𝔞⃗ d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub meta: String,
    pub arity: usize,
    pub left: String,
    pub right: String,
    pub left_binder: String,
    pub right_binder: String,
}

/// Result of reducing a problem to a simple one.
#[derive(Clone, Debug)]
pub struct Simplified {
    pub problem: UnifProblem,
    pub splits: Vec<Split>,
    pub aliases: BTreeMap<String, String>,
}

struct Names {
    used: BTreeSet<String>,
    counter: usize,
}

impl Names {
    fn new(used: BTreeSet<String>) -> Names {
        Names { used, counter: 0 }
    }

    fn fresh(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{base}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

const MAX_SPLITS: usize = 100_000;

fn arrow_clash(p: &UnifProblem) -> bool {
    p.equations.iter().any(|(l, r)| {
        matches!(
            (l, r),
            (StarExpr::TVar(_) | StarExpr::Pi(..), StarExpr::Arrow(..))
                | (StarExpr::Arrow(..), StarExpr::TVar(_) | StarExpr::Pi(..))
        )
    })
}

/// Reduce a normalized, acyclic problem to a simple one.
pub fn eliminate_arrows(p: &UnifProblem) -> Result<UnifProblem, NoSolution> {
    simplify(p).map(|s| s.problem)
}

/// Normalize, then split type schemes until no arrow remains.  Problems
/// whose skeleton is cyclic are rejected first, since splitting never ends
/// on them.
pub fn simplify(p: &UnifProblem) -> Result<Simplified, NoSolution> {
    phase1_cycle_check(&normalize_problem(p))?;
    simplify_with_limit(p, MAX_SPLITS)
}

/// [`simplify`] without the cycle check, giving up with
/// [`NoSolution::Exhausted`] after `max_splits` splits.
pub fn simplify_with_limit(p: &UnifProblem, max_splits: usize) -> Result<Simplified, NoSolution> {
    let mut aliases = BTreeMap::new();
    let mut cur = normalize_tracking(p, &mut aliases);
    let mut names = Names::new(cur.all_var_names());
    let mut splits = Vec::new();
    loop {
        if arrow_clash(&cur) {
            return Err(NoSolution::ArrowClash);
        }
        let target = cur.equations.iter().find_map(|(l, r)| match (l, r) {
            (StarExpr::Meta(f, _), StarExpr::Arrow(..)) | (StarExpr::Arrow(..), StarExpr::Meta(f, _)) => Some(f.clone()),
            _ => None,
        });
        let Some(f) = target else {
            break;
        };
        if splits.len() >= max_splits {
            return Err(NoSolution::Exhausted);
        }
        let n = cur.meta_vars[&f];
        let split = Split {
            meta: f.clone(),
            arity: n,
            left: names.fresh(&format!("{f}_l")),
            right: names.fresh(&format!("{f}_r")),
            left_binder: names.fresh("c"),
            right_binder: names.fresh("d"),
        };
        let mut next = UnifProblem {
            seq_vars: cur.seq_vars.clone(),
            proj_vars: cur.proj_vars.clone(),
            meta_vars: cur.meta_vars.clone(),
            equations: Vec::new(),
            constraints: cur.constraints.clone(),
        };
        next.meta_vars.remove(&f);
        next.meta_vars.insert(split.left.clone(), n + 1);
        next.meta_vars.insert(split.right.clone(), n + 1);
        next.seq_vars.insert(split.left_binder.clone());
        next.seq_vars.insert(split.right_binder.clone());

        let mut replace = |e: &StarExpr, next: &mut UnifProblem| -> StarExpr {
            let mut fresh_binders = Vec::new();
            let out = e.map_metas(&mut |g, args| {
                if g != f {
                    return None;
                }
                let c = names.fresh("c");
                let d = names.fresh("d");
                fresh_binders.push((c.clone(), d.clone()));
                let mut la = args.to_vec();
                la.push(SeqExpr::Var(c.clone()));
                let mut ra = args.to_vec();
                ra.push(SeqExpr::Var(d.clone()));
                Some(StarExpr::arrow(
                    QType::new(c, StarExpr::Meta(split.left.clone(), la)),
                    QType::new(d, StarExpr::Meta(split.right.clone(), ra)),
                ))
            });
            for (c, d) in fresh_binders {
                next.seq_vars.insert(c.clone());
                next.seq_vars.insert(d.clone());
                next.constraints.push(Constraint::SameLength(split.left_binder.clone(), c));
                next.constraints.push(Constraint::SameLength(split.right_binder.clone(), d));
            }
            out
        };

        for (l, r) in &cur.equations {
            let shaped = match (l, r) {
                (StarExpr::Meta(g, args), StarExpr::Arrow(ql, qr)) | (StarExpr::Arrow(ql, qr), StarExpr::Meta(g, args))
                    if *g == f =>
                {
                    Some((args, ql, qr))
                }
                _ => None,
            };
            match shaped {
                Some((args, ql, qr)) => {
                    let mut la = args.clone();
                    la.push(SeqExpr::Var(ql.binder.clone()));
                    let mut ra = args.clone();
                    ra.push(SeqExpr::Var(qr.binder.clone()));
                    let phi = replace(&ql.body, &mut next);
                    let psi = replace(&qr.body, &mut next);
                    next.equations.push((StarExpr::Meta(split.left.clone(), la), phi));
                    next.equations.push((StarExpr::Meta(split.right.clone(), ra), psi));
                    next.constraints
                        .push(Constraint::SameLength(split.left_binder.clone(), ql.binder.clone()));
                    next.constraints
                        .push(Constraint::SameLength(split.right_binder.clone(), qr.binder.clone()));
                }
                None => {
                    let l2 = replace(l, &mut next);
                    let r2 = replace(r, &mut next);
                    next.equations.push((l2, r2));
                }
            }
        }
        splits.push(split);
        cur = normalize_tracking(&next, &mut aliases);
        names.used.extend(cur.all_var_names());
    }
    Ok(Simplified {
        problem: cur,
        splits,
        aliases,
    })
}

/// Lift a unifier of the simplified problem back to the original one.
pub fn reconstruct(original: &UnifProblem, simplified: &Simplified, s: &UnifSubstitution) -> UnifSubstitution {
    let mut s = s.clone();
    let mut used: BTreeSet<String> = s.seq.values().flatten().cloned().collect();
    for sc in s.meta.values() {
        used.extend(sc.body.all_names());
    }
    for comps in s.proj.values() {
        for c in comps {
            if let Component::Const(x) = c {
                used.insert(x.clone());
            }
        }
    }
    used.extend(original.type_constants());
    let mut names = Names::new(used);
    for sp in simplified.splits.iter().rev() {
        let n = sp.arity;
        let mut side = |meta: &str, binder: &str| -> Type {
            let k = s.k_seq(binder).unwrap_or(0);
            let vars: Vec<String> = (0..k).map(|_| names.fresh("Y")).collect();
            let body = s.meta.get(meta).map(|sc| sc.body.clone()).unwrap_or(Type::Var("?".into()));
            let m: BTreeMap<String, Type> = (1..=k)
                .map(|l| (placeholder(n + 1, l), Type::Var(vars[l - 1].clone())))
                .collect();
            Type::foralls(&vars, body.subst_many(&m))
        };
        let l = side(&sp.left, &sp.left_binder);
        let r = side(&sp.right, &sp.right_binder);
        s.meta.insert(
            sp.meta.clone(),
            Scheme {
                arity: n,
                body: Type::arrow(l, r),
            },
        );
    }
    for a in simplified.aliases.keys() {
        let target = resolve_alias(&simplified.aliases, a);
        if let Some(v) = s.seq.get(&target).cloned() {
            s.seq.insert(a.clone(), v);
        }
    }
    s.seq.retain(|k, _| original.seq_vars.contains(k));
    s.proj.retain(|k, _| original.proj_vars.contains_key(k));
    s.meta.retain(|k, _| original.meta_vars.contains_key(k));
    s
}

// ---------------------------------------------------------------------------
// Solving simple problems
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    /// Accept residual `X = π^l(a)` by naming `S(a)_l` after `X`.
    pub allow_pins: bool,
    /// Search nodes before giving up with [`SolveOutcome::Aborted`].
    pub node_limit: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            allow_pins: true,
            node_limit: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Unifier(UnifSubstitution),
    NoSolution(NoSolution),
    /// The node limit was reached before the search space was exhausted.
    Aborted,
}

impl SolveOutcome {
    pub fn is_unifier(&self) -> bool {
        matches!(self, SolveOutcome::Unifier(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub candidates: u64,
    pub rejected: u64,
    pub splits: usize,
}

type Id = u32;

#[derive(Clone, Debug)]
enum CSeq {
    Lit(Vec<Id>),
    Var(Id),
    Proj(Id, Vec<Id>),
}

#[derive(Clone, Debug)]
enum CStar {
    Const(Id),
    Pi(usize, CSeq),
    Meta(Id, Vec<CSeq>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MVal {
    Const(Id),
    Proj { j: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CVal {
    Const(Id),
    ProjOf { i: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Rigid {
    Const(Id),
    Pos(Id, usize),
}

#[derive(Clone, Copy, Debug)]
enum Val<'a> {
    Rigid(Rigid),
    FlexMeta(Id, &'a [CSeq]),
    FlexProj(Id, usize, &'a [Id]),
    Fail,
}

#[derive(Clone, Debug)]
struct State {
    meta: Vec<Option<MVal>>,
    comp: Vec<BTreeMap<usize, CVal>>,
    n_consts: Id,
}

#[derive(Clone, Copy, Debug)]
enum Assign {
    Meta(Id, MVal),
    Comp(Id, usize, CVal),
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

struct Compiled {
    const_names: Vec<String>,
    club: Option<Id>,
    seq_names: Vec<String>,
    proj_names: Vec<String>,
    proj_arity: Vec<usize>,
    meta_names: Vec<String>,
    meta_arity: Vec<usize>,
    eqs: Vec<(CStar, CStar)>,
    /// Length class of each sequence variable, then of each projection variable.
    len_class: Vec<usize>,
    len_fixed: Vec<Option<usize>>,
    /// Index class of each meta slot `(F, j)` and projection slot `(α, i)`.
    meta_slot: Vec<Vec<usize>>,
    proj_slot: Vec<Vec<usize>>,
    idx_symmetric: Vec<bool>,
    idx_static: Vec<BTreeSet<usize>>,
    idx_cap: Vec<Option<usize>>,
    bound: usize,
}

struct ClassInfo {
    konst: Option<Id>,
    pos: Option<(Id, usize)>,
}

struct Analysis<'a> {
    rigid_flex: Vec<(Val<'a>, usize)>,
    classes: Vec<ClassInfo>,
    need_len: Vec<usize>,
    pos_class: HashMap<Rigid, usize>,
}

fn compile(p: &UnifProblem) -> Result<Compiled, NoSolution> {
    let mut const_ids: HashMap<String, Id> = HashMap::new();
    let mut const_names = Vec::new();
    let mut intern_const = |x: &str, const_names: &mut Vec<String>| -> Id {
        *const_ids.entry(x.to_string()).or_insert_with(|| {
            const_names.push(x.to_string());
            (const_names.len() - 1) as Id
        })
    };
    let seq_names: Vec<String> = p.seq_vars.iter().cloned().collect();
    let seq_ids: HashMap<&str, Id> = seq_names.iter().enumerate().map(|(i, s)| (s.as_str(), i as Id)).collect();
    let proj_names: Vec<String> = p.proj_vars.keys().cloned().collect();
    let proj_arity: Vec<usize> = p.proj_vars.values().cloned().collect();
    let proj_ids: HashMap<&str, Id> = proj_names.iter().enumerate().map(|(i, s)| (s.as_str(), i as Id)).collect();
    let meta_names: Vec<String> = p.meta_vars.keys().cloned().collect();
    let meta_arity: Vec<usize> = p.meta_vars.values().cloned().collect();
    let meta_ids: HashMap<&str, Id> = meta_names.iter().enumerate().map(|(i, s)| (s.as_str(), i as Id)).collect();

    let cseq = |s: &SeqExpr, const_names: &mut Vec<String>, intern: &mut dyn FnMut(&str, &mut Vec<String>) -> Id| -> CSeq {
        match s {
            SeqExpr::Lit(xs) => CSeq::Lit(xs.iter().map(|x| intern(x, const_names)).collect()),
            SeqExpr::Var(a) => CSeq::Var(seq_ids[a.as_str()]),
            SeqExpr::Proj(al, args) => CSeq::Proj(proj_ids[al.as_str()], args.iter().map(|a| seq_ids[a.as_str()]).collect()),
        }
    };
    let mut eqs = Vec::new();
    for (l, r) in &p.equations {
        let mut side = |e: &StarExpr| -> CStar {
            match e {
                StarExpr::TVar(x) => CStar::Const(intern_const(x, &mut const_names)),
                StarExpr::Pi(l, a) => CStar::Pi(*l, cseq(a, &mut const_names, &mut intern_const)),
                StarExpr::Meta(f, args) => CStar::Meta(
                    meta_ids[f.as_str()],
                    args.iter().map(|a| cseq(a, &mut const_names, &mut intern_const)).collect(),
                ),
                StarExpr::Arrow(..) => unreachable!("simple problems contain no arrows"),
            }
        };
        let l = side(l);
        let r = side(r);
        eqs.push((l, r));
    }
    let club = const_names.iter().position(|c| c == CLUB).map(|i| i as Id);

    // Length classes over sequence and projection variables.
    let ns = seq_names.len();
    let np = proj_names.len();
    let mut luf = UnionFind::new(ns + np);
    for c in &p.constraints {
        match c {
            Constraint::ArityLink(al, a) => luf.union(ns + proj_ids[al.as_str()] as usize, seq_ids[a.as_str()] as usize),
            Constraint::SameLength(a, b) => luf.union(seq_ids[a.as_str()] as usize, seq_ids[b.as_str()] as usize),
            Constraint::LengthPin(..) => {}
        }
    }
    let len_class: Vec<usize> = (0..ns + np).map(|i| luf.find(i)).collect();
    let mut len_fixed: Vec<Option<usize>> = vec![None; ns + np];
    for c in &p.constraints {
        if let Constraint::LengthPin(a, k) = c {
            let cls = len_class[seq_ids[a.as_str()] as usize];
            match len_fixed[cls] {
                Some(k2) if k2 != *k => return Err(NoSolution::Exhausted),
                _ => len_fixed[cls] = Some(*k),
            }
        }
    }

    // Index classes: sequence positions, projection components, meta slots,
    // projection slots, and one node for literal sequences.
    let mut meta_slot = Vec::new();
    let mut next = ns + np;
    for &n in &meta_arity {
        meta_slot.push((next..next + n).collect::<Vec<_>>());
        next += n;
    }
    let mut proj_slot = Vec::new();
    for &n in &proj_arity {
        proj_slot.push((next..next + n).collect::<Vec<_>>());
        next += n;
    }
    let rigid_node = next;
    let total = next + 1;
    let mut iuf = UnionFind::new(total);
    let mut lit_max = 0usize;
    let space = |s: &CSeq| -> usize {
        match s {
            CSeq::Lit(_) => rigid_node,
            CSeq::Var(a) => *a as usize,
            CSeq::Proj(al, _) => ns + *al as usize,
        }
    };
    let mut statics: Vec<(usize, usize)> = Vec::new();
    let mut k_max = 0usize;
    {
        let link_seq = |s: &CSeq, iuf: &mut UnionFind, lit_max: &mut usize, k_max: &mut usize| {
            match s {
                CSeq::Lit(xs) => {
                    *lit_max = (*lit_max).max(xs.len());
                    *k_max = (*k_max).max(xs.len());
                }
                CSeq::Proj(al, args) => {
                    for (i, a) in args.iter().enumerate() {
                        iuf.union(proj_slot[*al as usize][i], *a as usize);
                    }
                }
                CSeq::Var(_) => {}
            }
        };
        for (l, r) in &eqs {
            for e in [l, r] {
                match e {
                    CStar::Const(_) => {}
                    CStar::Pi(idx, s) => {
                        k_max = k_max.max(*idx);
                        link_seq(s, &mut iuf, &mut lit_max, &mut k_max);
                        if !matches!(s, CSeq::Lit(_)) {
                            statics.push((space(s), *idx));
                        }
                    }
                    CStar::Meta(f, args) => {
                        for (j, s) in args.iter().enumerate() {
                            link_seq(s, &mut iuf, &mut lit_max, &mut k_max);
                            iuf.union(meta_slot[*f as usize][j], space(s));
                        }
                    }
                }
            }
        }
    }
    for c in &p.constraints {
        if let Constraint::LengthPin(_, k) = c {
            k_max = k_max.max(*k);
        }
    }
    let mut idx_static = vec![BTreeSet::new(); total];
    for (node, idx) in statics {
        let r = iuf.find(node);
        idx_static[r].insert(idx);
    }
    let rigid_root = iuf.find(rigid_node);
    idx_static[rigid_root].extend(1..=lit_max);
    let mut members_len: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); total];
    for node in 0..ns + np {
        let r = iuf.find(node);
        members_len[r].insert(len_class[node]);
    }
    let mut idx_symmetric = vec![false; total];
    let mut idx_cap = vec![None; total];
    for r in 0..total {
        if iuf.find(r) != r {
            continue;
        }
        if members_len[r].len() <= 1 {
            idx_symmetric[r] = true;
            if let Some(&lc) = members_len[r].iter().next() {
                idx_cap[r] = len_fixed[lc];
            } else if r == rigid_root {
                idx_cap[r] = Some(lit_max);
            }
        }
    }
    let find_all = |v: &Vec<Vec<usize>>, iuf: &mut UnionFind| -> Vec<Vec<usize>> {
        v.iter().map(|slots| slots.iter().map(|&s| iuf.find(s)).collect()).collect()
    };
    let meta_slot = find_all(&meta_slot, &mut iuf);
    let proj_slot = find_all(&proj_slot, &mut iuf);
    let bound = (k_max + eqs.len()).max(1);
    Ok(Compiled {
        const_names,
        club,
        seq_names,
        proj_names,
        proj_arity,
        meta_names,
        meta_arity,
        eqs,
        len_class,
        len_fixed,
        meta_slot,
        proj_slot,
        idx_symmetric,
        idx_static,
        idx_cap,
        bound,
    })
}

struct Search<'c, 'f> {
    c: &'c Compiled,
    pins: bool,
    node_limit: u64,
    nodes: u64,
    pruned: bool,
    accept: &'f mut dyn FnMut(UnifSubstitution) -> bool,
    candidates: u64,
    rejected: u64,
}

enum Flow {
    Found,
    Continue,
    Abort,
}

impl<'c, 'f> Search<'c, 'f> {
    fn eval_pi<'a>(&self, st: &State, l: usize, s: &'a CSeq) -> Val<'a> {
        match s {
            CSeq::Lit(xs) => match l.checked_sub(1).and_then(|i| xs.get(i)) {
                Some(&x) => Val::Rigid(Rigid::Const(x)),
                None => Val::Fail,
            },
            CSeq::Var(a) => Val::Rigid(Rigid::Pos(*a, l)),
            CSeq::Proj(al, args) => match st.comp[*al as usize].get(&l) {
                None => Val::FlexProj(*al, l, args),
                Some(CVal::Const(x)) => Val::Rigid(Rigid::Const(*x)),
                Some(CVal::ProjOf { i, q }) => Val::Rigid(Rigid::Pos(args[*i], *q)),
            },
        }
    }

    fn eval<'a>(&self, st: &State, e: &'a CStar) -> Val<'a> {
        match e {
            CStar::Const(x) => Val::Rigid(Rigid::Const(*x)),
            CStar::Pi(l, s) => self.eval_pi(st, *l, s),
            CStar::Meta(f, args) => match st.meta[*f as usize] {
                None => Val::FlexMeta(*f, args),
                Some(MVal::Const(x)) => Val::Rigid(Rigid::Const(x)),
                Some(MVal::Proj { j, q }) => self.eval_pi(st, q, &args[j]),
            },
        }
    }

    fn analyse(&self, st: &State) -> Option<Analysis<'c>> {
        let c = self.c;
        let ns = c.seq_names.len();
        let mut need = vec![0usize; c.len_class.len()];
        let mut vals = Vec::with_capacity(c.eqs.len());
        for (l, r) in &c.eqs {
            let lv = self.eval(st, l);
            let rv = self.eval(st, r);
            for v in [lv, rv] {
                match v {
                    Val::Fail => return None,
                    Val::Rigid(Rigid::Pos(a, l)) => {
                        let cls = c.len_class[a as usize];
                        need[cls] = need[cls].max(l);
                    }
                    Val::FlexProj(al, l, _) => {
                        let cls = c.len_class[ns + al as usize];
                        need[cls] = need[cls].max(l);
                    }
                    _ => {}
                }
            }
            vals.push((lv, rv));
        }
        for (al, comps) in st.comp.iter().enumerate() {
            if let Some((&l, _)) = comps.iter().next_back() {
                let cls = c.len_class[ns + al];
                need[cls] = need[cls].max(l);
            }
        }
        for (cls, &n) in need.iter().enumerate() {
            if let Some(k) = c.len_fixed[cls] {
                if n > k {
                    return None;
                }
            }
        }
        // Rigid classes.
        let mut ids: HashMap<Rigid, usize> = HashMap::new();
        let mut order: Vec<Rigid> = Vec::new();
        let id_of = |r: Rigid, ids: &mut HashMap<Rigid, usize>, order: &mut Vec<Rigid>| -> usize {
            *ids.entry(r).or_insert_with(|| {
                order.push(r);
                order.len() - 1
            })
        };
        let mut pairs = Vec::new();
        for (lv, rv) in &vals {
            let li = if let Val::Rigid(r) = lv { Some(id_of(*r, &mut ids, &mut order)) } else { None };
            let ri = if let Val::Rigid(r) = rv { Some(id_of(*r, &mut ids, &mut order)) } else { None };
            pairs.push((li, ri));
        }
        let mut uf = UnionFind::new(order.len());
        for (li, ri) in &pairs {
            if let (Some(a), Some(b)) = (li, ri) {
                uf.union(*a, *b);
            }
        }
        let mut classes: Vec<ClassInfo> = (0..order.len()).map(|_| ClassInfo { konst: None, pos: None }).collect();
        for (i, r) in order.iter().enumerate() {
            let root = uf.find(i);
            let info = &mut classes[root];
            match *r {
                Rigid::Const(x) => match info.konst {
                    Some(y) if y != x => return None,
                    _ => info.konst = Some(x),
                },
                Rigid::Pos(a, l) => match info.pos {
                    Some(p) if p != (a, l) => return None,
                    _ => info.pos = Some((a, l)),
                },
            }
            if let (Some(x), Some(_)) = (info.konst, info.pos) {
                if !self.pins || Some(x) == c.club {
                    return None;
                }
            }
        }
        let mut rigid_flex = Vec::new();
        for ((lv, rv), (li, ri)) in vals.iter().zip(&pairs) {
            match (li, ri) {
                (Some(a), None) => rigid_flex.push((*rv, uf.find(*a))),
                (None, Some(b)) => rigid_flex.push((*lv, uf.find(*b))),
                _ => {}
            }
        }
        let mut pos_class = HashMap::new();
        for (i, r) in order.iter().enumerate() {
            pos_class.insert(*r, uf.find(i));
        }
        Some(Analysis {
            rigid_flex,
            classes,
            need_len: need,
            pos_class,
        })
    }

    fn compatible(&self, v: &Val, target: &ClassInfo) -> bool {
        let (konst, pos) = match v {
            Val::Fail => return false,
            Val::FlexMeta(..) | Val::FlexProj(..) => return true,
            Val::Rigid(Rigid::Const(x)) => {
                if target.konst.is_some_and(|y| y != *x) {
                    return false;
                }
                (Some(*x), target.pos)
            }
            Val::Rigid(Rigid::Pos(a, l)) => {
                if let Some(k) = self.c.len_fixed[self.c.len_class[*a as usize]] {
                    if *l > k {
                        return false;
                    }
                }
                if target.pos.is_some_and(|p| p != (*a, *l)) {
                    return false;
                }
                (target.konst, Some((*a, *l)))
            }
        };
        match (konst, pos) {
            (Some(x), Some(_)) => self.pins && Some(x) != self.c.club,
            _ => true,
        }
    }

    fn dynamic_refs(&self, st: &State) -> HashMap<usize, BTreeSet<usize>> {
        let mut out: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for (f, v) in st.meta.iter().enumerate() {
            if let Some(MVal::Proj { j, q }) = v {
                out.entry(self.c.meta_slot[f][*j]).or_default().insert(*q);
            }
        }
        for (al, comps) in st.comp.iter().enumerate() {
            for v in comps.values() {
                if let CVal::ProjOf { i, q } = v {
                    out.entry(self.c.proj_slot[al][*i]).or_default().insert(*q);
                }
            }
        }
        out
    }

    fn index_candidates(&self, cls: usize, dynamic: &HashMap<usize, BTreeSet<usize>>) -> Vec<usize> {
        let c = self.c;
        if c.idx_symmetric[cls] {
            let mut refs = c.idx_static[cls].clone();
            if let Some(d) = dynamic.get(&cls) {
                refs.extend(d.iter().cloned());
            }
            let mut first_free = 1;
            while refs.contains(&first_free) {
                first_free += 1;
            }
            refs.insert(first_free);
            refs.into_iter()
                .filter(|&q| q >= 1 && c.idx_cap[cls].map_or(true, |k| q <= k))
                .collect()
        } else {
            (1..=c.bound).collect()
        }
    }

    fn const_options(&self, st: &State, target: &ClassInfo) -> Vec<Id> {
        if let Some(x) = target.konst {
            return vec![x];
        }
        if self.pins && target.pos.is_some() {
            let mut out: Vec<Id> = (0..st.n_consts).filter(|&x| Some(x) != self.c.club).collect();
            out.push(st.n_consts);
            return out;
        }
        Vec::new()
    }

    fn options(&self, st: &State, flex: &Val, target: &ClassInfo, dynamic: &HashMap<usize, BTreeSet<usize>>) -> Vec<Assign> {
        let mut out = Vec::new();
        match flex {
            Val::FlexMeta(f, args) => {
                for (j, a) in args.iter().enumerate() {
                    for q in self.index_candidates(self.c.meta_slot[*f as usize][j], dynamic) {
                        let v = self.eval_pi(st, q, a);
                        if self.compatible(&v, target) {
                            out.push(Assign::Meta(*f, MVal::Proj { j, q }));
                        }
                    }
                }
                for x in self.const_options(st, target) {
                    out.push(Assign::Meta(*f, MVal::Const(x)));
                }
            }
            Val::FlexProj(al, l, args) => {
                for (i, a) in args.iter().enumerate() {
                    for q in self.index_candidates(self.c.proj_slot[*al as usize][i], dynamic) {
                        let v = Val::Rigid(Rigid::Pos(*a, q));
                        if self.compatible(&v, target) {
                            out.push(Assign::Comp(*al, *l, CVal::ProjOf { i, q }));
                        }
                    }
                }
                for x in self.const_options(st, target) {
                    out.push(Assign::Comp(*al, *l, CVal::Const(x)));
                }
            }
            _ => {}
        }
        out
    }

    fn apply(&self, st: &State, a: Assign) -> State {
        let mut st = st.clone();
        let bump = |x: Id, st: &mut State| {
            if x >= st.n_consts {
                st.n_consts = x + 1;
            }
        };
        match a {
            Assign::Meta(f, v) => {
                if let MVal::Const(x) = v {
                    bump(x, &mut st);
                }
                st.meta[f as usize] = Some(v);
            }
            Assign::Comp(al, l, v) => {
                if let CVal::Const(x) = v {
                    bump(x, &mut st);
                }
                st.comp[al as usize].insert(l, v);
            }
        }
        st
    }

    /// Send every remaining flexible head to one shared fresh variable.
    fn complete(&self, st: &State) -> State {
        let mut st = st.clone();
        let z = st.n_consts;
        st.n_consts += 1;
        loop {
            let mut changed = false;
            for (l, r) in &self.c.eqs {
                for e in [l, r] {
                    match self.eval(&st, e) {
                        Val::FlexMeta(f, _) => {
                            st.meta[f as usize] = Some(MVal::Const(z));
                            changed = true;
                        }
                        Val::FlexProj(al, l, _) => {
                            st.comp[al as usize].insert(l, CVal::Const(z));
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
            if !changed {
                return st;
            }
        }
    }

    fn build(&self, st: &State, an: &Analysis) -> UnifSubstitution {
        let c = self.c;
        let ns = c.seq_names.len();
        let mut used: BTreeSet<String> = c.const_names.iter().cloned().collect();
        let mut counter = 0usize;
        let mut fresh = |used: &mut BTreeSet<String>| -> String {
            loop {
                counter += 1;
                let n = format!("Z{counter}");
                if used.insert(n.clone()) {
                    return n;
                }
            }
        };
        let mut const_name: Vec<String> = c.const_names.clone();
        while const_name.len() < st.n_consts as usize {
            let n = fresh(&mut used);
            const_name.push(n);
        }
        let default_name = fresh(&mut used);
        let class_len = |node: usize| -> usize {
            let cls = c.len_class[node];
            c.len_fixed[cls].unwrap_or(an.need_len[cls])
        };
        let mut out = UnifSubstitution::default();
        for (a, name) in c.seq_names.iter().enumerate() {
            let k = class_len(a);
            let mut names = Vec::with_capacity(k);
            for l in 1..=k {
                let pinned = an
                    .pos_class
                    .get(&Rigid::Pos(a as Id, l))
                    .and_then(|&cls| an.classes[cls].konst);
                names.push(match pinned {
                    Some(x) => const_name[x as usize].clone(),
                    None => fresh(&mut used),
                });
            }
            out.seq.insert(name.clone(), names);
        }
        for (al, name) in c.proj_names.iter().enumerate() {
            let k = class_len(ns + al);
            let comps = (1..=k)
                .map(|l| match st.comp[al].get(&l) {
                    Some(CVal::Const(x)) => Component::Const(const_name[*x as usize].clone()),
                    Some(CVal::ProjOf { i, q }) => Component::ProjOf { arg: i + 1, pos: *q },
                    None => Component::Const(default_name.clone()),
                })
                .collect();
            let _ = c.proj_arity[al];
            out.proj.insert(name.clone(), comps);
        }
        for (f, name) in c.meta_names.iter().enumerate() {
            let body = match st.meta[f] {
                Some(MVal::Const(x)) => name_to_type(&const_name[x as usize]),
                Some(MVal::Proj { j, q }) => Type::Var(placeholder(j + 1, q)),
                None => Type::Var(default_name.clone()),
            };
            out.meta.insert(
                name.clone(),
                Scheme {
                    arity: c.meta_arity[f],
                    body,
                },
            );
        }
        out
    }

    fn dfs(&mut self, st: State, budget: Option<usize>) -> Flow {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Flow::Abort;
        }
        let Some(an) = self.analyse(&st) else {
            return Flow::Continue;
        };
        if an.rigid_flex.is_empty() {
            let done = self.complete(&st);
            let Some(an2) = self.analyse(&done) else {
                return Flow::Continue;
            };
            let s = self.build(&done, &an2);
            self.candidates += 1;
            if (self.accept)(s) {
                return Flow::Found;
            }
            self.rejected += 1;
            return Flow::Continue;
        }
        let dynamic = self.dynamic_refs(&st);
        let mut best: Option<Vec<Assign>> = None;
        for (flex, cls) in &an.rigid_flex {
            let opts = self.options(&st, flex, &an.classes[*cls], &dynamic);
            let better = best.as_ref().map_or(true, |b| opts.len() < b.len());
            if better {
                let empty = opts.is_empty();
                best = Some(opts);
                if empty {
                    break;
                }
            }
        }
        let options = best.unwrap_or_default();
        for (k, opt) in options.into_iter().enumerate() {
            let cost = usize::from(k > 0);
            let next_budget = match budget {
                Some(b) if cost > b => {
                    self.pruned = true;
                    break;
                }
                Some(b) => Some(b - cost),
                None => None,
            };
            let st2 = self.apply(&st, opt);
            match self.dfs(st2, next_budget) {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }
}

/// Decide a simple problem, offering each candidate unifier to `accept`
/// until one is taken.
pub fn solve_simple_with(
    p: &UnifProblem,
    config: SolveConfig,
    accept: &mut dyn FnMut(UnifSubstitution) -> bool,
) -> (SolveOutcome, SolveStats) {
    let mut stats = SolveStats::default();
    if p.equations.iter().any(|(l, r)| l.has_arrow() || r.has_arrow()) {
        return (SolveOutcome::NoSolution(NoSolution::ArrowClash), stats);
    }
    let compiled = match compile(p) {
        Ok(c) => c,
        Err(e) => return (SolveOutcome::NoSolution(e), stats),
    };
    let init = State {
        meta: vec![None; compiled.meta_names.len()],
        comp: vec![BTreeMap::new(); compiled.proj_names.len()],
        n_consts: compiled.const_names.len() as Id,
    };
    let mut found: Option<UnifSubstitution> = None;
    let mut wrapped = |s: UnifSubstitution| -> bool {
        if accept(s.clone()) {
            found = Some(s);
            true
        } else {
            false
        }
    };
    let mut search = Search {
        c: &compiled,
        pins: config.allow_pins,
        node_limit: config.node_limit,
        nodes: 0,
        pruned: false,
        accept: &mut wrapped,
        candidates: 0,
        rejected: 0,
    };
    let mut outcome = None;
    for budget in [Some(0), Some(1), Some(2), Some(3), None] {
        search.pruned = false;
        match search.dfs(init.clone(), budget) {
            Flow::Found => {
                outcome = Some(true);
                break;
            }
            Flow::Abort => {
                outcome = Some(false);
                break;
            }
            Flow::Continue => {
                if !search.pruned {
                    break;
                }
            }
        }
    }
    stats.nodes = search.nodes;
    stats.candidates = search.candidates;
    stats.rejected = search.rejected;
    let result = match outcome {
        Some(true) => SolveOutcome::Unifier(found.expect("accepted candidate")),
        Some(false) => SolveOutcome::Aborted,
        None => SolveOutcome::NoSolution(NoSolution::Exhausted),
    };
    (result, stats)
}

pub fn solve_simple(p: &UnifProblem) -> SolveOutcome {
    solve_simple_with(p, SolveConfig::default(), &mut |_| true).0
}

/// The full pipeline, with every candidate lifted back to `p`, verified, and
/// then offered to `accept`.
pub fn fat_unify_with(
    p: &UnifProblem,
    config: SolveConfig,
    accept: &mut dyn FnMut(&UnifSubstitution) -> bool,
) -> (SolveOutcome, SolveStats) {
    let normal = normalize_problem(p);
    if let Err(e) = phase1_cycle_check(&normal) {
        return (SolveOutcome::NoSolution(e), SolveStats::default());
    }
    let simplified = match simplify_with_limit(p, MAX_SPLITS) {
        Ok(s) => s,
        Err(e) => return (SolveOutcome::NoSolution(e), SolveStats::default()),
    };
    let mut lifted: Option<UnifSubstitution> = None;
    let (outcome, mut stats) = solve_simple_with(&simplified.problem, config, &mut |s| {
        let full = reconstruct(p, &simplified, &s);
        if !verify_unifier(p, &full) {
            return false;
        }
        if accept(&full) {
            lifted = Some(full);
            true
        } else {
            false
        }
    });
    stats.splits = simplified.splits.len();
    let outcome = match outcome {
        SolveOutcome::Unifier(_) => SolveOutcome::Unifier(lifted.expect("lifted unifier")),
        other => other,
    };
    (outcome, stats)
}

/// Decide a Fat-unification problem.  Every returned unifier passes
/// [`verify_unifier`].
pub fn fat_unify(p: &UnifProblem) -> SolveOutcome {
    fat_unify_with(p, SolveConfig::default(), &mut |_| true).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;

    fn v(a: &str) -> SeqExpr {
        SeqExpr::var(a)
    }

    fn pi(l: usize, a: SeqExpr) -> StarExpr {
        StarExpr::pi(l, a)
    }

    fn meta(f: &str, args: Vec<SeqExpr>) -> StarExpr {
        StarExpr::meta(f, args)
    }

    fn arrow(b1: &str, l: StarExpr, b2: &str, r: StarExpr) -> StarExpr {
        StarExpr::arrow(QType::new(b1, l), QType::new(b2, r))
    }

    fn finish(mut p: UnifProblem) -> UnifProblem {
        p.declare_from_use();
        p.validate().unwrap();
        p
    }

    /// `Γ(x) = ∀X.X⇒X`, `Γ(y) = ∀Y.Y` or `Y`, `xy : ∀Z.Z`.
    fn worked_example(poly_y: bool) -> UnifProblem {
        let mut p = UnifProblem::new();
        p.push(meta("F", vec![v("a")]), arrow("e1", pi(1, v("a")), "e2", pi(1, v("a"))));
        p.constraints.push(Constraint::LengthPin("a".into(), 1));
        p.constraints.push(Constraint::LengthPin("e1".into(), 0));
        p.constraints.push(Constraint::LengthPin("e2".into(), 0));
        if poly_y {
            p.push(meta("G", vec![v("b")]), pi(1, v("b")));
            p.constraints.push(Constraint::LengthPin("b".into(), 1));
        } else {
            p.push(meta("G", vec![v("b")]), StarExpr::tvar("Y"));
            p.constraints.push(Constraint::LengthPin("b".into(), 0));
        }
        p.push(
            meta("F", vec![SeqExpr::proj("alpha", &["z"])]),
            arrow("e3", meta("G", vec![SeqExpr::proj("beta", &["z"])]), "e4", meta("H", vec![v("z")])),
        );
        p.constraints.push(Constraint::LengthPin("e3".into(), 0));
        p.constraints.push(Constraint::LengthPin("e4".into(), 0));
        p.push(meta("H", vec![v("z")]), pi(1, v("z")));
        p.constraints.push(Constraint::LengthPin("z".into(), 1));
        p.constraints.push(Constraint::ArityLink("alpha".into(), "a".into()));
        p.constraints.push(Constraint::ArityLink("beta".into(), "b".into()));
        finish(p)
    }

    #[test]
    fn normalization_splits_arrows() {
        let mut p = UnifProblem::new();
        p.push(
            arrow("a1", StarExpr::tvar("X"), "b1", pi(1, v("b1"))),
            arrow("a2", StarExpr::tvar("X"), "b2", pi(1, v("b2"))),
        );
        let n = normalize_problem(&finish(p));
        assert_eq!(
            n.equations,
            vec![
                (StarExpr::tvar("X"), StarExpr::tvar("X")),
                (pi(1, v("b1")), pi(1, v("b1"))),
            ]
        );
        let mut q = UnifProblem::new();
        q.push(StarExpr::tvar("X"), StarExpr::tvar("Y"));
        let q = finish(q);
        assert_eq!(normalize_problem(&q), q);
    }

    #[test]
    fn nested_normalization() {
        let inner1 = arrow("c1", StarExpr::tvar("X"), "d1", StarExpr::tvar("Y"));
        let inner2 = arrow("c2", StarExpr::tvar("X"), "d2", StarExpr::tvar("Y"));
        let mut p = UnifProblem::new();
        p.push(
            arrow("a1", inner1, "b1", StarExpr::tvar("Z")),
            arrow("a2", inner2, "b2", StarExpr::tvar("Z")),
        );
        let n = normalize_problem(&finish(p));
        assert_eq!(n.equations.len(), 3);
        assert!(n.equations.iter().all(|(l, r)| !l.is_arrow() && !r.is_arrow()));
    }

    #[test]
    fn skeleton_and_cycle() {
        let mut p = UnifProblem::new();
        p.push(meta("F", vec![v("a")]), arrow("c", meta("F", vec![v("b")]), "d", meta("G", vec![])));
        let p = finish(p);
        let sk = build_fo_skeleton(&p);
        assert_eq!(
            sk.equations[0],
            (FoTerm::var("F"), FoTerm::arrow(FoTerm::var("F"), FoTerm::var("G")))
        );
        assert_eq!(phase1_cycle_check(&p), Err(NoSolution::Cycle));
        assert_eq!(fat_unify(&p), SolveOutcome::NoSolution(NoSolution::Cycle));
        assert_eq!(phase1_cycle_check(&worked_example(true)), Ok(()));
        assert_eq!(phase1_cycle_check(&UnifProblem::new()), Ok(()));
    }

    #[test]
    fn arrow_clash_and_split() {
        let mut p = UnifProblem::new();
        p.push(StarExpr::tvar("X"), arrow("c", StarExpr::tvar("A"), "d", StarExpr::tvar("B")));
        assert_eq!(eliminate_arrows(&finish(p)), Err(NoSolution::ArrowClash));

        let mut p = UnifProblem::new();
        p.push(
            meta("F", vec![SeqExpr::Lit(vec!["X".into()])]),
            arrow("c", StarExpr::tvar("A"), "d", StarExpr::tvar("B")),
        );
        let s = eliminate_arrows(&finish(p)).unwrap();
        assert_eq!(s.equations.len(), 2);
        assert!(!s.meta_vars.contains_key("F"));
        assert!(s.equations.iter().all(|(l, r)| !l.is_arrow() && !r.is_arrow()));

        let mut q = UnifProblem::new();
        q.push(meta("F", vec![v("a")]), StarExpr::tvar("X"));
        let q = finish(q);
        assert_eq!(eliminate_arrows(&q).unwrap(), q);
    }

    #[test]
    fn worked_example_positive() {
        let p = worked_example(true);
        let SolveOutcome::Unifier(s) = fat_unify(&p) else {
            panic!("expected a unifier");
        };
        assert!(verify_unifier(&p, &s));
        let f = &s.meta["F"].body;
        let id = parse_type("forall X. X -> X").unwrap();
        let closed = Type::forall("X", instantiate_scheme(f, &[vec!["X".into()]]).unwrap());
        assert!(closed.alpha_eq(&id));
        assert_eq!(s.proj["alpha"], vec![Component::ProjOf { arg: 1, pos: 1 }]);
        assert_eq!(s.proj["beta"], vec![Component::ProjOf { arg: 1, pos: 1 }]);
    }

    #[test]
    fn worked_example_negative() {
        let p = worked_example(false);
        let strict = SolveConfig {
            allow_pins: false,
            ..SolveConfig::default()
        };
        assert_eq!(
            fat_unify_with(&p, strict, &mut |_| true).0,
            SolveOutcome::NoSolution(NoSolution::Exhausted)
        );
        // Naming the root binder after `Y` is only possible with pins.
        let SolveOutcome::Unifier(s) = fat_unify(&p) else {
            panic!("expected a pinned unifier");
        };
        assert_eq!(s.seq["z"], vec!["Y".to_string()]);
    }

    #[test]
    fn verify_rejects_wrong_scheme() {
        let p = worked_example(true);
        let SolveOutcome::Unifier(mut s) = fat_unify(&p) else {
            panic!("expected a unifier");
        };
        s.meta.insert(
            "F".into(),
            Scheme {
                arity: 1,
                body: Type::Var(placeholder(1, 1)),
            },
        );
        assert!(!verify_unifier(&p, &s));
        assert!(verify_unifier(&UnifProblem::new(), &UnifSubstitution::default()));
    }

    #[test]
    fn constant_scheme() {
        let mut p = UnifProblem::new();
        p.push(meta("F", vec![v("a")]), StarExpr::tvar("X"));
        let p = finish(p);
        let SolveOutcome::Unifier(s) = solve_simple(&p) else {
            panic!()
        };
        assert!(verify_unifier(&p, &s));
    }

    #[test]
    fn pins_follow_config() {
        let mut p = UnifProblem::new();
        p.push(StarExpr::tvar("X"), pi(1, v("a")));
        let p = finish(p);
        assert!(fat_unify(&p).is_unifier());
        let strict = SolveConfig {
            allow_pins: false,
            ..SolveConfig::default()
        };
        assert_eq!(
            fat_unify_with(&p, strict, &mut |_| true).0,
            SolveOutcome::NoSolution(NoSolution::Exhausted)
        );
        let mut q = UnifProblem::new();
        q.push(StarExpr::tvar("X"), pi(1, v("a")));
        q.push(StarExpr::tvar("X"), pi(2, v("a")));
        assert!(!fat_unify(&finish(q)).is_unifier());
    }

    #[test]
    fn extension_appends_in_order() {
        let eqs = vec![(
            meta("F", vec![SeqExpr::proj("alpha", &["b"])]),
            meta("G", vec![v("b")]),
        )];
        let once = extend_equations(&eqs, "c");
        assert_eq!(
            once[0],
            (
                meta("F", vec![SeqExpr::proj("alpha", &["b", "c"]), v("c")]),
                meta("G", vec![v("b"), v("c")])
            )
        );
        let twice = extend_equations(&once, "d");
        assert_eq!(
            twice[0].1,
            meta("G", vec![v("b"), v("c"), v("d")])
        );
        assert!(extend_equations(&[], "c").is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = worked_example(true);
        let back = UnifProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
