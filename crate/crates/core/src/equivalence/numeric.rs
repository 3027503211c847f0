//! Numerical functions `Nat^k ⇒ Nat`: evaluation, extended-polynomial
//! normal forms and the decision procedure for ≃Nat built on them.
//!
//! An extended polynomial is stored as one polynomial per zero-pattern: for
//! `S ⊆ {1..k}` the region is `{x_i = 0 for i ∈ S, x_i ≥ 1 otherwise}`.  On
//! each region the function is an ordinary polynomial with natural
//! coefficients (see `docs/extended-polynomials.md`), recovered here by
//! interpolation on a tensor grid and then checked at random points off the
//! grid.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::EquivalenceError;
use crate::encodings::TermContext;
use crate::reduction::{betaeta_normal_form, beta_normalize, church_numeral, nat_type, Fuel};
use crate::syntax::{Term, Type, TypingContext};
use crate::typecheck::check;

/// `Nat ⇒ … ⇒ Nat ⇒ Nat` with `k` arguments.
pub fn numeric_type(k: usize) -> Type {
    Type::arrows(vec![nat_type(); k], nat_type())
}

fn require_numeric(t: &Term, k: usize) -> Result<(), EquivalenceError> {
    let ty = numeric_type(k);
    if check(&TypingContext::new(), t, &ty).is_accept() {
        Ok(())
    } else {
        Err(EquivalenceError::NotTypable(ty.to_string()))
    }
}

/// Stack for evaluation threads.  Numerals and their normal forms nest one
/// level per unit, and every traversal of them (including drop) recurses.
const EVAL_STACK: usize = 1 << 30;

/// Normalize `t n̄₁ … n̄ₖ g s` and count the `g`s in front of `s`.
fn eval_unchecked(t: &Term, args: &[u64], fuel: Fuel) -> Result<u64, EquivalenceError> {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(EVAL_STACK)
            .spawn_scoped(scope, || eval_here(t, args, fuel))
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|panic| std::panic::resume_unwind(panic))
    })
}

fn eval_here(t: &Term, args: &[u64], fuel: Fuel) -> Result<u64, EquivalenceError> {
    let mut spine: Vec<Term> = args.iter().map(|&n| church_numeral(n)).collect();
    spine.push(Term::var("g"));
    spine.push(Term::var("s"));
    let nf = beta_normalize(&Term::apps(t.erase(), spine), fuel)?;
    let mut n = 0;
    let mut cur = &nf;
    loop {
        match cur {
            Term::Var(v) if v == "s" => return Ok(n),
            Term::App(f, a) if matches!(&**f, Term::Var(g) if g == "g") => {
                n += 1;
                cur = a;
            }
            _ => return Err(EquivalenceError::NotANumeral(nf.to_string())),
        }
    }
}

/// The value of `t` on the given numerals.  `t` must be closed and typable
/// at [`numeric_type`] of the argument count.
pub fn eval_numeric(t: &Term, args: &[u64], fuel: Fuel) -> Result<u64, EquivalenceError> {
    require_numeric(t, args.len())?;
    eval_unchecked(t, args, fuel)
}

// ---------------------------------------------------------------------------
// Extended polynomials
// ---------------------------------------------------------------------------

/// One zero-pattern and the polynomial valid on it.  `zeros` lists 1-based
/// argument positions; monomial exponent vectors have length `arity` with
/// zero exponents at those positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub zeros: Vec<usize>,
    pub monomials: BTreeMap<Vec<u32>, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtPoly {
    pub arity: usize,
    /// One region per subset of `{1..arity}`, ordered by the bitmask of
    /// their zero sets.
    pub regions: Vec<Region>,
}

fn zeros_of_mask(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

fn mask_of_args(args: &[u64]) -> usize {
    args.iter().enumerate().filter(|(_, &a)| a == 0).fold(0, |m, (i, _)| m | (1 << i))
}

fn eval_monomials(monomials: &BTreeMap<Vec<u32>, u64>, args: &[u64]) -> BigUint {
    let mut total = BigUint::zero();
    for (exps, &c) in monomials {
        let mut term = BigUint::from(c);
        for (&x, &e) in args.iter().zip(exps) {
            term *= BigUint::from(x).pow(e);
        }
        total += term;
    }
    total
}

impl ExtPoly {
    pub fn region(&self, args: &[u64]) -> &Region {
        &self.regions[mask_of_args(args)]
    }

    pub fn eval(&self, args: &[u64]) -> BigUint {
        assert_eq!(args.len(), self.arity, "argument count differs from the arity");
        eval_monomials(&self.region(args).monomials, args)
    }

    pub fn to_json(&self) -> Value {
        let regions: Vec<Value> = self
            .regions
            .iter()
            .map(|r| {
                let monomials: Vec<Value> =
                    r.monomials.iter().map(|(e, c)| json!({"exps": e, "coeff": c})).collect();
                json!({"zeros": r.zeros, "monomials": monomials})
            })
            .collect();
        json!({"arity": self.arity, "regions": regions})
    }

    pub fn from_json(v: &Value) -> Result<ExtPoly, String> {
        let arity = v["arity"].as_u64().ok_or("missing arity")? as usize;
        if arity > 16 {
            return Err("arity too large".into());
        }
        let mut by_mask: BTreeMap<usize, Region> = BTreeMap::new();
        for r in v["regions"].as_array().ok_or("missing regions")? {
            let zeros: Vec<usize> = r["zeros"]
                .as_array()
                .ok_or("missing zeros")?
                .iter()
                .map(|z| z.as_u64().filter(|&z| z >= 1 && z as usize <= arity).map(|z| z as usize))
                .collect::<Option<_>>()
                .ok_or("zero positions must lie in 1..=arity")?;
            let mask = zeros.iter().fold(0, |m, z| m | (1 << (z - 1)));
            let mut monomials = BTreeMap::new();
            for m in r["monomials"].as_array().ok_or("missing monomials")? {
                let exps: Vec<u32> = m["exps"]
                    .as_array()
                    .ok_or("missing exps")?
                    .iter()
                    .map(|e| e.as_u64().map(|e| e as u32))
                    .collect::<Option<_>>()
                    .ok_or("exponents must be naturals")?;
                if exps.len() != arity || zeros.iter().any(|&z| exps[z - 1] != 0) {
                    return Err("exponent vector does not fit the region".into());
                }
                let c = m["coeff"].as_u64().ok_or("coefficients must be naturals")?;
                if c != 0 {
                    *monomials.entry(exps).or_insert(0) += c;
                }
            }
            let mut zeros = zeros;
            zeros.sort_unstable();
            zeros.dedup();
            by_mask.insert(mask, Region { zeros, monomials });
        }
        if by_mask.len() != 1 << arity {
            return Err("one region per zero pattern is required".into());
        }
        Ok(ExtPoly {
            arity,
            regions: by_mask.into_values().collect(),
        })
    }
}

fn fmt_monomials(monomials: &BTreeMap<Vec<u32>, u64>) -> String {
    if monomials.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (exps, c) in monomials.iter().rev() {
        let mut factors = Vec::new();
        if *c != 1 || exps.iter().all(|&e| e == 0) {
            factors.push(c.to_string());
        }
        for (i, &e) in exps.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(format!("x{}", i + 1)),
                e => factors.push(format!("x{}^{e}", i + 1)),
            }
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

impl fmt::Display for ExtPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for r in &self.regions {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            let conds: Vec<String> = (1..=self.arity)
                .map(|i| if r.zeros.contains(&i) { format!("x{i}=0") } else { format!("x{i}>0") })
                .collect();
            let guard = if conds.is_empty() { "always".to_string() } else { conds.join(",") };
            write!(f, "[{guard}] {}", fmt_monomials(&r.monomials))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ExtractConfig {
    pub fuel: Fuel,
    /// How many times the per-variable degree bound may double.
    pub doublings: u32,
    /// Off-grid verification points per region.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            fuel: Fuel::from_env(),
            doublings: 3,
            samples: 10,
            seed: 0x5eed,
        }
    }
}

fn count_occurrences(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::Star => 0,
        Term::Abs(_, b) | Term::TyAbs(_, b) | Term::TyApp(b, _) => count_occurrences(b),
        Term::App(f, a) => count_occurrences(f) + count_occurrences(a),
    }
}

/// Inverse of the Vandermonde matrix on the nodes `1..=n`.
fn inverse_vandermonde(n: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let x = BigInt::from(i as u64 + 1);
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| BigRational::from_integer(num_traits::pow(x.clone(), j)))
                .collect();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).expect("Vandermonde matrices are invertible");
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v = &*v - &factor * pv;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n..].to_vec()).collect()
}

struct Evaluator<'a> {
    t: &'a Term,
    fuel: Fuel,
    cache: HashMap<Vec<u64>, u64>,
}

impl Evaluator<'_> {
    fn eval(&mut self, args: &[u64]) -> Result<u64, EquivalenceError> {
        if let Some(&v) = self.cache.get(args) {
            return Ok(v);
        }
        let v = eval_unchecked(self.t, args, self.fuel)?;
        self.cache.insert(args.to_vec(), v);
        Ok(v)
    }
}

/// Interpolate on `{1..=d+1}^free` with the zero positions fixed.  `None`
/// when some coefficient is not a natural number.
fn interpolate(
    ev: &mut Evaluator,
    k: usize,
    free: &[usize],
    d: usize,
) -> Result<Option<BTreeMap<Vec<u32>, u64>>, EquivalenceError> {
    let n = d + 1;
    let m = free.len();
    let total = n.pow(m as u32);
    let mut values: Vec<BigRational> = Vec::with_capacity(total);
    for idx in 0..total {
        let mut args = vec![0u64; k];
        let mut rest = idx;
        for &var in free.iter().rev() {
            args[var] = (rest % n) as u64 + 1;
            rest /= n;
        }
        values.push(BigRational::from_integer(BigInt::from(ev.eval(&args)?)));
    }
    let inv = inverse_vandermonde(n);
    // Apply the inverse along each axis in turn; axis `a` has stride n^(m-1-a).
    for axis in 0..m {
        let stride = n.pow((m - 1 - axis) as u32);
        let mut next = values.clone();
        for base in 0..total {
            if (base / stride) % n != 0 {
                continue;
            }
            for (i, row) in inv.iter().enumerate() {
                let mut acc = BigRational::zero();
                for (j, c) in row.iter().enumerate() {
                    acc += c * &values[base + j * stride];
                }
                next[base + i * stride] = acc;
            }
        }
        values = next;
    }
    let mut monomials = BTreeMap::new();
    for (idx, c) in values.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !c.is_integer() || c < BigRational::zero() {
            return Ok(None);
        }
        let Some(c) = c.to_integer().to_u64() else {
            return Ok(None);
        };
        let mut exps = vec![0u32; k];
        let mut rest = idx;
        for &var in free.iter().rev() {
            exps[var] = (rest % n) as u32;
            rest /= n;
        }
        monomials.insert(exps, c);
    }
    Ok(Some(monomials))
}

/// The extended polynomial computed by `t`, verified off the interpolation
/// grid; fails loudly rather than returning an unverified fit.
pub fn extract_extpoly(t: &Term, k: usize) -> Result<ExtPoly, EquivalenceError> {
    extract_extpoly_with(t, k, ExtractConfig::default())
}

pub fn extract_extpoly_with(t: &Term, k: usize, config: ExtractConfig) -> Result<ExtPoly, EquivalenceError> {
    require_numeric(t, k)?;
    let nf = betaeta_normal_form(&t.erase(), config.fuel)?;
    let d0 = count_occurrences(&nf).max(1);
    let mut ev = Evaluator {
        t,
        fuel: config.fuel,
        cache: HashMap::new(),
    };
    let mut regions = Vec::with_capacity(1 << k);
    for mask in 0..(1usize << k) {
        let zeros = zeros_of_mask(mask, k);
        let free: Vec<usize> = (0..k).filter(|i| mask & (1 << i) == 0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (mask as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut found = None;
        let mut d = d0;
        for attempt in 0..=config.doublings {
            if attempt > 0 {
                d *= 2;
            }
            let Some(monomials) = interpolate(&mut ev, k, &free, d)? else {
                continue;
            };
            let samples = if free.is_empty() { 0 } else { config.samples };
            let mut ok = true;
            for _ in 0..samples {
                let mut args = vec![0u64; k];
                for &var in &free {
                    args[var] = rng.gen_range(d as u64 + 2..=2 * d as u64 + 3);
                }
                if BigUint::from(ev.eval(&args)?) != eval_monomials(&monomials, &args) {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = Some(monomials);
                break;
            }
        }
        match found {
            Some(monomials) => regions.push(Region { zeros, monomials }),
            None => return Err(EquivalenceError::DegreeBoundExceeded(d as u32)),
        }
    }
    Ok(ExtPoly { arity: k, regions })
}

pub fn extpoly_equal(p: &ExtPoly, q: &ExtPoly) -> bool {
    p == q
}

/// A tuple on which `p` and `q` take different values, if they differ.
pub fn extpoly_difference(p: &ExtPoly, q: &ExtPoly) -> Option<Vec<u64>> {
    if p.arity != q.arity {
        return Some(vec![]);
    }
    let k = p.arity;
    for (rp, rq) in p.regions.iter().zip(&q.regions) {
        if rp.monomials == rq.monomials {
            continue;
        }
        let free: Vec<usize> = (0..k).filter(|i| !rp.zeros.contains(&(i + 1))).collect();
        let dmax = rp
            .monomials
            .keys()
            .chain(rq.monomials.keys())
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        // Distinct polynomials of degree ≤ dmax per variable differ somewhere
        // on the tensor grid {1..=dmax+1}^free.
        let n = dmax + 1;
        for idx in 0..n.pow(free.len() as u32) {
            let mut args = vec![0u64; k];
            let mut rest = idx;
            for &var in free.iter().rev() {
                args[var] = (rest % n) as u64 + 1;
                rest /= n;
            }
            if eval_monomials(&rp.monomials, &args) != eval_monomials(&rq.monomials, &args) {
                return Some(args);
            }
        }
    }
    None
}

/// `t ≃Nat u` for numerical functions of arity `k`.
pub fn eq_nat_numerical(t: &Term, u: &Term, k: usize) -> Result<bool, EquivalenceError> {
    Ok(nat_separation(t, u, k)?.is_none())
}

/// `None` when `t ≃Nat u`; otherwise a tuple `p⃗` such that the context
/// `[ ] p̄₁ … p̄ₖ` separates them.
pub fn nat_separation(t: &Term, u: &Term, k: usize) -> Result<Option<Vec<u64>>, EquivalenceError> {
    let p = extract_extpoly(t, k)?;
    let q = extract_extpoly(u, k)?;
    Ok(extpoly_difference(&p, &q))
}

/// `[ ] n̄₁ … n̄ₖ`
pub fn numeral_context(args: &[u64]) -> TermContext {
    let hole = TermContext::hole();
    TermContext {
        body: Term::apps(hole.body.clone(), args.iter().map(|&n| church_numeral(n)).collect()),
        hole: hole.hole,
    }
}
