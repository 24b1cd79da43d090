//! Verification suites: each binds one family of identities to exact checks.
//!
//! Two routes are used. "terms" compares universal term lists (labels in
//! Q[K,e]/(K³,Ke,e²)) at the cutoff and instantiates the difference at every
//! requested class or class pair. "action" builds explicit operators over the
//! basis of H*(X) and compares their action on every Fock basis state up to a
//! smaller action window, with the boundary operator computed recursively.
//! Identities that need K·α = 0 are only instantiated at such classes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::hilbert::{self, ChernClassRequest, IntersectionRequest};
use crate::operators::{describe, describe_term, first_disagreement, Boundary, OperatorSum};
use crate::partitions::GenPartition;
use crate::rational::{factorial, fmt_q, q, qf, Q};
use crate::ring::{Basis, RingElem, SurfaceRing};
use crate::smeared::{ClassPoly, SmearedOp};
use crate::walgebra::{self, AbstractBracket, FourierSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteId {
    Heis,
    Vir,
    Thm31,
    Lem32,
    Thm42,
    Rmk43,
    Thm46Unique,
    Cor48,
    Rmk410,
    Def51Ids,
    Lem52,
    Lem53,
    Thm55,
    Rmk56,
    Thm57,
    Lem61,
    Eq22,
}

const CATALOG: [(SuiteId, &str, &str); 17] = [
    (SuiteId::Heis, "heis", "Heisenberg commutation relations [a_m(α), a_n(β)] = -m δ ∫(αβ) Id"),
    (SuiteId::Vir, "vir", "Virasoro relations for L_n(α) with central term (m³-m)/12 δ ∫(eαβ)"),
    (
        SuiteId::Thm31,
        "thm31",
        "brackets of L with a, the derivative a'_n(α) = n L_n(α) - n(|n|-1)/2 a_n(Kα), and [G_k(α), a_{-1}(β)]",
    ),
    (
        SuiteId::Lem32,
        "lem32",
        "transfer rules for smeared monomials: commutators, derivatives and reordering",
    ),
    (SuiteId::Thm42, "thm42", "closed formula for the higher derivatives a_n^{(k)}(α) when Kα = 0"),
    (SuiteId::Rmk43, "rmk43", "derivative of the shifted partition sums with parameter d"),
    (
        SuiteId::Thm46Unique,
        "thm46-unique",
        "Chern character operators: vacuum annihilation, vanishing derivative and bracket with a_{-1}",
    ),
    (SuiteId::Cor48, "cor48", "classes G_k(α, n) from the operator against the closed expansion"),
    (SuiteId::Rmk410, "rmk410", "intersection numbers of point-class generators against the closed sum"),
    (
        SuiteId::Def51Ids,
        "def51-ids",
        "low cases of the W generators: J^0 = -a, J^1 = L, J^p_0 = p! G_{p-1}, J^p_{-1} = -a_{-1}^{(p)}",
    ),
    (SuiteId::Lem52, "lem52", "bracket of Chern character operators with a_n: [G_p(α), a_n(β)] = n/p! J^p_n(αβ)"),
    (SuiteId::Lem53, "lem53", "W generators as Fourier components of normally ordered vertex operators"),
    (SuiteId::Thm55, "thm55", "closure of the W algebra: [J^p_m(α), J^q_n(β)] including Ω and central terms"),
    (SuiteId::Rmk56, "rmk56", "derivative of the W generators: J' = -n J^{p+1} - (n³-n)p/12 J^{p-1}(e·)"),
    (SuiteId::Thm57, "thm57", "structure constants on a surface with K = e = 0 against the abstract W algebra"),
    (SuiteId::Lem61, "lem61", "derivative rules for Fourier components of normally ordered fields"),
    (SuiteId::Eq22, "eq22", "abstract W algebra bracket against differential operators on the circle"),
];

impl SuiteId {
    pub fn all() -> Vec<SuiteId> {
        CATALOG.iter().map(|c| c.0).collect()
    }

    pub fn as_str(&self) -> &'static str {
        CATALOG.iter().find(|c| c.0 == *self).expect("catalogued").1
    }

    pub fn title(&self) -> &'static str {
        CATALOG.iter().find(|c| c.0 == *self).expect("catalogued").2
    }

    /// Parameter bounds used when none are given.
    pub fn default_ranges(&self) -> Ranges {
        let mut r = Ranges { m: 3, n: 3, p: 4, pq: 6, k: 3, points: 4 };
        match self {
            SuiteId::Heis => {
                r.m = 4;
                r.n = 4;
            }
            SuiteId::Rmk43 => r.k = 2,
            SuiteId::Rmk56 => {
                r.p = 3;
                r.n = 2;
            }
            SuiteId::Thm57 | SuiteId::Eq22 => r.pq = 5,
            SuiteId::Lem61 => r.k = 4,
            _ => {}
        }
        r
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CATALOG
            .iter()
            .find(|c| c.1 == s)
            .map(|c| c.0)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// (id, description) for every suite, in catalog order.
pub fn list_suites() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|c| (c.1, c.2)).collect()
}

/// Parameter bounds; each suite reads the fields it needs.
/// m, n bound |modes|; p bounds W-generator indices; pq bounds p + q;
/// k bounds derivative orders, factor counts or sequence lengths; points bounds n in X^[n].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ranges {
    pub m: i64,
    pub n: i64,
    pub p: usize,
    pub pq: usize,
    pub k: usize,
    pub points: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSelection {
    AllBasis,
    Named(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub suite: SuiteId,
    pub ring: Arc<SurfaceRing>,
    pub cutoff: u32,
    pub ranges: Ranges,
    pub classes: ClassSelection,
    /// Weight bound for the action route; defaults by surface size.
    pub action_window: Option<i64>,
    /// Perturb one coefficient of every expected side (harness self-test).
    pub mutate: bool,
    pub timings: bool,
}

impl SuiteSpec {
    pub fn new(suite: SuiteId, ring: Arc<SurfaceRing>, cutoff: u32) -> Self {
        Self {
            suite,
            ring,
            cutoff,
            ranges: suite.default_ranges(),
            classes: ClassSelection::AllBasis,
            action_window: None,
            mutate: false,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub suite: String,
    pub surface: String,
    pub instance: String,
    pub route: String,
    /// classes, class pairs or basis states covered
    pub checked: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub surface: String,
    pub cutoff: u32,
    pub action_window: i64,
    pub passed: usize,
    pub failed: usize,
    pub records: Vec<Record>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn first_failure(&self) -> Option<&Record> {
        self.records.iter().find(|r| !r.pass)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} on {} (cutoff {}, action window {}): {} passed, {} failed",
            self.suite, self.surface, self.cutoff, self.action_window, self.passed, self.failed
        )
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,surface,instance,route,checked,pass,value,detail,millis\n");
        let esc = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.suite,
                r.surface,
                esc(&r.instance),
                r.route,
                r.checked,
                r.pass,
                esc(r.value.as_deref().unwrap_or("")),
                esc(r.detail.as_deref().unwrap_or("")),
                r.millis.map(|m| m.to_string()).unwrap_or_default()
            ));
        }
        out
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.pass { "ok  " } else { "FAIL" };
            out.push_str(&format!("{status} {:<7} {} [{} checked]", r.route, r.instance, r.checked));
            if let Some(v) = &r.value {
                out.push_str(&format!(" value {v}"));
            }
            if let Some(m) = r.millis {
                out.push_str(&format!(" {m}ms"));
            }
            out.push('\n');
            if let Some(d) = &r.detail {
                out.push_str(&format!("     {d}\n"));
            }
        }
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }
}

/// Default action window: the largest weight whose Fock basis keeps a suite in seconds.
pub fn default_action_window(ring: &SurfaceRing) -> i64 {
    if ring.dim() <= 4 {
        4
    } else {
        2
    }
}

struct Ctx<'a> {
    spec: &'a SuiteSpec,
    ring: &'a SurfaceRing,
    /// all requested classes
    classes: Vec<(String, RingElem)>,
    /// requested classes with K·α = 0
    kernel: Vec<(String, RingElem)>,
    /// subset used on the action route
    action_classes: Vec<(String, RingElem)>,
    action_window: i64,
    n: i64,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a SuiteSpec) -> Result<Self> {
        let ring: &SurfaceRing = &spec.ring;
        let classes: Vec<(String, RingElem)> = match &spec.classes {
            ClassSelection::AllBasis => (0..ring.dim() as Basis)
                .map(|i| (ring.basis_name(i).to_string(), RingElem::basis(i)))
                .collect(),
            ClassSelection::Named(names) => names
                .iter()
                .map(|s| Ok((s.clone(), ring.parse_elem(s)?)))
                .collect::<Result<_>>()?,
        };
        for (name, c) in &classes {
            if ring.parity_of(c).is_none() {
                return Err(Error::MixedParity(format!("class {name} is not of pure parity")));
            }
        }
        let kernel: Vec<_> = classes.iter().filter(|(_, c)| ring.kills_canonical(c)).cloned().collect();
        let action_classes = if ring.dim() > 4 && spec.classes == ClassSelection::AllBasis {
            representatives(ring)
        } else {
            classes.clone()
        };
        let action_window = spec
            .action_window
            .unwrap_or_else(|| default_action_window(ring))
            .min(spec.cutoff as i64);
        Ok(Self { spec, ring, classes, kernel, action_classes, action_window, n: spec.cutoff as i64 })
    }

    fn record(&self, instance: String, route: &str, checked: usize, failure: Option<String>) -> Record {
        Record {
            suite: self.spec.suite.to_string(),
            surface: self.ring.name().to_string(),
            instance,
            route: route.to_string(),
            checked,
            pass: failure.is_none(),
            value: None,
            detail: failure,
            millis: None,
        }
    }

    fn class_set(&self, hyp: Hyp) -> &[(String, RingElem)] {
        match hyp {
            Hyp::None => &self.classes,
            Hyp::KillsCanonical => &self.kernel,
        }
    }

    fn action_set(&self, hyp: Hyp) -> Vec<(String, RingElem)> {
        match hyp {
            Hyp::None => self.action_classes.clone(),
            Hyp::KillsCanonical => {
                let mut v: Vec<_> =
                    self.action_classes.iter().filter(|(_, c)| self.ring.kills_canonical(c)).cloned().collect();
                if v.is_empty() {
                    v = self.kernel.iter().take(1).cloned().collect();
                }
                v
            }
        }
    }

    fn mutate(&self, op: SmearedOp) -> SmearedOp {
        if self.spec.mutate {
            mutate(&op)
        } else {
            op
        }
    }
}

/// The unit, the point class, and one middle class of each degree together with a
/// class pairing nonzero against it, plus a further degree-2 class orthogonal to
/// the first: self, dual and orthogonal pairs all occur among them.
fn representatives(ring: &SurfaceRing) -> Vec<(String, RingElem)> {
    let mut pick: Vec<Basis> = vec![ring.unit_index()];
    for d in 1..3u8 {
        let Some(i) = (0..ring.dim() as Basis).find(|&i| ring.degree(i) == d && !pick.contains(&i)) else {
            continue;
        };
        pick.push(i);
        if let Some(j) = (0..ring.dim() as Basis).find(|&j| j != i && !pick.contains(&j) && !ring.pairing(i, j).is_zero()) {
            pick.push(j);
        }
        if d == 2 {
            let orthogonal = (0..ring.dim() as Basis)
                .find(|&j| ring.degree(j) == 2 && !pick.contains(&j) && ring.pairing(i, j).is_zero());
            pick.extend(orthogonal);
        }
    }
    pick.push(ring.top_index());
    pick.into_iter().map(|i| (ring.basis_name(i).to_string(), RingElem::basis(i))).collect()
}

/// Hypothesis on the first class of an identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Hyp {
    None,
    KillsCanonical,
}

/// Adds 1 to the coefficient of one term (a_{mode} or the scalar if there is none).
fn mutate(op: &SmearedOp) -> SmearedOp {
    let mut out = op.clone();
    let target = op.iter().next().map(|(l, _)| l.clone()).unwrap_or_else(|| {
        if op.mode() == 0 {
            GenPartition::empty()
        } else {
            GenPartition::new([op.mode() as i32]).expect("nonzero")
        }
    });
    out.add_term(target, &ClassPoly::one());
    out
}

fn difference(lhs: &SmearedOp, rhs: &SmearedOp) -> SmearedOp {
    lhs.plus(&q(-1), rhs)
}

/// Instantiates a universal difference at each base; reports the first survivor.
fn instantiate_failure(ring: &SurfaceRing, diff: &SmearedOp, bases: &[(String, RingElem)]) -> Option<String> {
    for (name, b) in bases {
        if let Some((l, v)) = diff.first_nonvanishing(ring, b) {
            let what = if l.is_empty() {
                format!("scalar ∫ = {}", fmt_q(&ring.integrate(&v)))
            } else {
                format!("a[{l}] with class {}", ring.render(&v))
            };
            return Some(format!("at {name}: leftover {what}"));
        }
    }
    None
}

fn pair_products(ring: &SurfaceRing, a: &[(String, RingElem)], b: &[(String, RingElem)]) -> Vec<(String, RingElem)> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (na, x) in a {
        for (nb, y) in b {
            out.push((format!("α={na}, β={nb}"), ring.multiply(x, y)));
        }
    }
    out
}

type Build<'b> = &'b (dyn Fn(i64) -> Result<SmearedOp> + Sync);

/// [F(α), G(β)] = E(αβ): terms route at the cutoff, action route on the window.
fn check_bracket(ctx: &Ctx, label: &str, f: Build, g: Build, e: Build, hyp: Hyp, action: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let mut out = Vec::new();
    let lhs = f(ctx.n)?.commutator(&g(ctx.n)?)?;
    let rhs = ctx.mutate(e(lhs.window())?);
    let diff = difference(&lhs, &rhs);
    let bases = pair_products(ring, ctx.class_set(hyp), &ctx.classes);
    let failure = instantiate_failure(ring, &diff, &bases);
    out.push(ctx.record(label.to_string(), "terms", bases.len(), failure));
    if action {
        let w = ctx.action_window;
        let big = w + 6;
        let (fs, gs, es) = (f(big)?, g(big)?, ctx.mutate(e(big)?));
        let alphas = ctx.action_set(hyp);
        let betas = ctx.action_set(Hyp::None);
        let mut failure = None;
        let mut checked = 0;
        'outer: for (na, a) in &alphas {
            let fo = OperatorSum::from_smeared(ring, &fs, a);
            for (nb, b) in &betas {
                let go = OperatorSum::from_smeared(ring, &gs, b);
                let eo = OperatorSum::from_smeared(ring, &es, &ring.multiply(a, b));
                let sign = if ring.parity_of(a) == Some(1) && ring.parity_of(b) == Some(1) { q(1) } else { q(-1) };
                checked += 1;
                let d = first_disagreement(
                    ring,
                    w,
                    |v| -> Result<FockVector> {
                        let mut x = fo.apply(ring, &go.apply(ring, v)?)?;
                        x.add_scaled(&sign, &go.apply(ring, &fo.apply(ring, v)?)?);
                        Ok(x)
                    },
                    |v| eo.apply(ring, v),
                )?;
                if let Some(d) = d {
                    failure = Some(format!("α={na}, β={nb} {}", describe(ring, &d)));
                    break 'outer;
                }
            }
        }
        out.push(ctx.record(label.to_string(), "action", checked, failure));
    }
    Ok(out)
}

/// F^{(k)}(α) = E(α): terms route through the term-list boundary operator,
/// action route through the recursive one.
fn check_derivative(ctx: &Ctx, label: &str, f: Build, k: usize, e: Build, hyp: Hyp, action: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let mut out = Vec::new();
    let lhs = walgebra::derivative_k(&f(ctx.n)?, k)?;
    let rhs = ctx.mutate(e(lhs.window())?);
    let diff = difference(&lhs, &rhs);
    let bases = ctx.class_set(hyp);
    out.push(ctx.record(label.to_string(), "terms", bases.len(), instantiate_failure(ring, &diff, bases)));
    if action {
        let w = ctx.action_window;
        let big = w + 6;
        let (fs, es) = (f(big)?, ctx.mutate(e(big)?));
        let d = Boundary::new(ring, w + (-fs.mode()).max(0));
        let mut failure = None;
        let alphas = ctx.action_set(hyp);
        for (na, a) in &alphas {
            let fo = OperatorSum::from_smeared(ring, &fs, a);
            let eo = OperatorSum::from_smeared(ring, &es, a);
            if let Some(dis) = first_disagreement(ring, w, |v| d.derivative_k_apply(&fo, k, v), |v| eo.apply(ring, v))? {
                failure = Some(format!("α={na} {}", describe(ring, &dis)));
                break;
            }
        }
        out.push(ctx.record(label.to_string(), "action", alphas.len(), failure));
    }
    Ok(out)
}

/// Universal term-list identity lhs = rhs, reduced modulo K under the hypothesis,
/// then instantiated at the requested classes.
fn check_terms(ctx: &Ctx, label: &str, lhs: &SmearedOp, rhs: &SmearedOp, hyp: Hyp) -> Vec<Record> {
    let rhs = ctx.mutate(rhs.clone());
    let (l, r) = match hyp {
        Hyp::None => (lhs.clone(), rhs.clone()),
        Hyp::KillsCanonical => (lhs.modulo_canonical(), rhs.modulo_canonical()),
    };
    let failure = l
        .first_difference(&r)
        .map(|(t, a, b)| format!("coefficient of a[{t}]: {a} vs {b}"))
        .or_else(|| instantiate_failure(ctx.ring, &difference(lhs, &rhs), ctx.class_set(hyp)));
    vec![ctx.record(label.to_string(), "terms", ctx.class_set(hyp).len(), failure)]
}

fn modes(bound: i64) -> impl Iterator<Item = i64> + Clone {
    -bound..=bound
}

fn nonzero_modes(bound: i64) -> impl Iterator<Item = i64> + Clone {
    (-bound..=bound).filter(|&m| m != 0)
}

fn central(c: Q, window: i64) -> SmearedOp {
    SmearedOp::identity(&ClassPoly::euler().scale(&c), window)
}

/// Runs every cell in parallel, keeping the cell order in the report.
fn run_cells<T: Sync>(cells: &[T], f: impl Fn(&T) -> Result<Vec<Record>> + Sync, timings: bool) -> Result<Vec<Record>> {
    let chunks: Vec<Result<Vec<Record>>> = cells
        .par_iter()
        .map(|c| {
            let t = Instant::now();
            let mut recs = f(c)?;
            if timings {
                let ms = t.elapsed().as_millis() as u64;
                for r in &mut recs {
                    r.millis = Some(ms);
                }
            }
            Ok(recs)
        })
        .collect();
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn run_suite(spec: &SuiteSpec) -> Result<VerificationReport> {
    let ctx = Ctx::new(spec)?;
    let r = &spec.ranges;
    let t = spec.timings;
    let records = match spec.suite {
        SuiteId::Heis => heis(&ctx, r, t)?,
        SuiteId::Vir => vir(&ctx, r, t)?,
        SuiteId::Thm31 => thm31(&ctx, r, t)?,
        SuiteId::Lem32 => lem32(&ctx, r, t)?,
        SuiteId::Thm42 => thm42(&ctx, r, t)?,
        SuiteId::Rmk43 => rmk43(&ctx, r, t)?,
        SuiteId::Thm46Unique => thm46(&ctx, r, t)?,
        SuiteId::Cor48 => cor48(&ctx, r, t)?,
        SuiteId::Rmk410 => rmk410(&ctx, r, t)?,
        SuiteId::Def51Ids => def51(&ctx, r, t)?,
        SuiteId::Lem52 => lem52(&ctx, r, t)?,
        SuiteId::Lem53 => lem53(&ctx, r, t)?,
        SuiteId::Thm55 => thm55(&ctx, r, t)?,
        SuiteId::Rmk56 => rmk56(&ctx, r, t)?,
        SuiteId::Thm57 => thm57(&ctx, r, t)?,
        SuiteId::Lem61 => lem61(&ctx, r, t)?,
        SuiteId::Eq22 => eq22(&ctx, r, t)?,
    };
    let failed = records.iter().filter(|r| !r.pass).count();
    Ok(VerificationReport {
        suite: spec.suite.to_string(),
        surface: spec.ring.name().to_string(),
        cutoff: spec.cutoff,
        action_window: ctx.action_window,
        passed: records.len() - failed,
        failed,
        records,
    })
}

fn heis(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let cells: Vec<(i64, i64)> = nonzero_modes(r.m).flat_map(|m| nonzero_modes(r.n).map(move |n| (m, n))).collect();
    run_cells(
        &cells,
        |&(m, n)| {
            let mut failure = None;
            for (na, a) in &ctx.classes {
                let fa = OperatorSum::heisenberg(ring, m, a, ctx.n);
                for (nb, b) in &ctx.classes {
                    let gb = OperatorSum::heisenberg(ring, n, b, ctx.n);
                    let got = fa.commutator(ring, &gb)?;
                    let mut c = if m == -n { -q(m) * ring.integrate(&ring.multiply(a, b)) } else { Q::zero() };
                    if ctx.spec.mutate && m == -n {
                        c *= q(2);
                    }
                    let want = OperatorSum::identity(&c, got.window());
                    if let Some((w, x, y)) = got.first_difference(&want) {
                        failure = Some(format!("α={na}, β={nb}: {}", describe_term(ring, &w, &x, &y)));
                        break;
                    }
                }
                if failure.is_some() {
                    break;
                }
            }
            let k = ctx.classes.len();
            Ok(vec![ctx.record(format!("m={m} n={n}"), "explicit", k * k, failure)])
        },
        t,
    )
}

fn vir(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let cells: Vec<(i64, i64)> = modes(r.m).flat_map(|m| modes(r.n).map(move |n| (m, n))).collect();
    run_cells(
        &cells,
        |&(m, n)| {
            let f = |w: i64| Ok(walgebra::virasoro(m, w));
            let g = |w: i64| Ok(walgebra::virasoro(n, w));
            let e = |w: i64| {
                let mut o = walgebra::virasoro(m + n, w).scale(&q(m - n));
                if m == -n {
                    o.add_scaled(&Q::one(), &central(qf(m * m * m - m, 12), w));
                }
                Ok(o)
            };
            let action = m.abs() <= 2 && n.abs() <= 2;
            let mut recs = check_bracket(ctx, &format!("m={m} n={n}"), &f, &g, &e, Hyp::None, action)?;
            if m == -n {
                // central scalar at α = β = 1_X
                let lhs = walgebra::virasoro(m, ctx.n).commutator(&walgebra::virasoro(n, ctx.n))?;
                let c = lhs.coeff(&GenPartition::empty()).instantiate(ring, &ring.unit());
                recs[0].value = Some(fmt_q(&ring.integrate(&c)));
            }
            Ok(recs)
        },
        t,
    )
}

fn thm31(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    #[derive(Clone, Copy)]
    enum Cell {
        LBracket(i64, i64),
        Deriv(i64),
        Chern(usize),
    }
    let mut cells = Vec::new();
    for m in modes(r.m) {
        for n in nonzero_modes(r.n) {
            cells.push(Cell::LBracket(m, n));
        }
    }
    for n in nonzero_modes(r.n.max(r.m)) {
        cells.push(Cell::Deriv(n));
    }
    for k in 0..=r.k {
        cells.push(Cell::Chern(k));
    }
    run_cells(
        &cells,
        |c| match *c {
            Cell::LBracket(m, n) => {
                let f = |w: i64| Ok(walgebra::virasoro(m, w));
                let g = |w: i64| Ok(walgebra::heisenberg(n, w));
                let e = |w: i64| Ok(walgebra::heisenberg(m + n, w).scale(&q(-n)));
                let action = m.abs() <= 2 && n.abs() <= 2;
                check_bracket(ctx, &format!("[L_{m}, a_{n}]"), &f, &g, &e, Hyp::None, action)
            }
            Cell::Deriv(n) => {
                let f = |w: i64| Ok(walgebra::heisenberg(n, w));
                let e = |w: i64| {
                    let mut o = walgebra::virasoro(n, w).scale(&q(n));
                    let k = walgebra::heisenberg(n, w).mul_class(&ClassPoly::canonical());
                    o.add_scaled(&qf(-n * (n.abs() - 1), 2), &k);
                    Ok(o)
                };
                check_derivative(ctx, &format!("a_{n}'"), &f, 1, &e, Hyp::None, true)
            }
            Cell::Chern(k) => {
                let f = |w: i64| Ok(walgebra::chern(k, w));
                let g = |w: i64| Ok(walgebra::heisenberg(-1, w));
                let e = |w: i64| {
                    Ok(walgebra::derivative_k(&walgebra::heisenberg(-1, w), k)?.scale(&factorial(k as u64).recip()))
                };
                check_bracket(ctx, &format!("[G_{k}, a_-1]"), &f, &g, &e, Hyp::KillsCanonical, true)
            }
        },
        t,
    )
}

/// Sequences of nonzero modes with |s_i| ≤ bound and length in 1..=len.
fn sequences(bound: i64, len: usize) -> Vec<Vec<i32>> {
    let vals: Vec<i32> = nonzero_modes(bound).map(|x| x as i32).collect();
    let mut out: Vec<Vec<i32>> = vec![];
    let mut layer: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for s in &layer {
            for &v in &vals {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn seq_op(seq: &[i32], c: &ClassPoly, window: i64) -> SmearedOp {
    let mode = seq.iter().map(|&x| x as i64).sum();
    let mut o = SmearedOp::zero(mode, window);
    o.add_normal_ordered(seq, c);
    o
}

fn seq_label(seq: &[i32]) -> String {
    let parts: Vec<String> = seq.iter().map(|s| s.to_string()).collect();
    format!("a[{}]", parts.join(","))
}

fn lem32(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let n = ctx.n;
    let long = sequences(r.m, r.k);
    let short = sequences(r.m.min(2), 2);
    #[derive(Clone)]
    enum Cell {
        Bracket(Vec<i32>, Vec<i32>),
        Deriv(Vec<i32>),
        Swap(Vec<i32>, usize),
    }
    let mut cells = Vec::new();
    let pairs = sequences(r.m, 2.min(r.k));
    for a in &pairs {
        for b in &pairs {
            cells.push(Cell::Bracket(a.clone(), b.clone()));
        }
    }
    for s in &long {
        cells.push(Cell::Deriv(s.clone()));
    }
    for s in &long {
        for j in 0..s.len().saturating_sub(1) {
            cells.push(Cell::Swap(s.clone(), j));
        }
    }
    let explicit_window = ctx.action_window + 6;
    run_cells(
        &cells,
        |c| match c {
            Cell::Bracket(a, b) => {
                // -Σ_t Σ_j a_t δ(a_t, -b_j) (b_<j · a_{≠t} · b_>j)(τ(αβ))
                let rhs = |w: i64| {
                    let mode = a.iter().chain(b.iter()).map(|&x| x as i64).sum();
                    let mut o = SmearedOp::zero(mode, w);
                    for (ti, &at) in a.iter().enumerate() {
                        for (j, &bj) in b.iter().enumerate() {
                            if at != -bj {
                                continue;
                            }
                            let mut seq: Vec<i32> = b[..j].to_vec();
                            seq.extend(a.iter().enumerate().filter(|&(u, _)| u != ti).map(|(_, &x)| x));
                            seq.extend_from_slice(&b[j + 1..]);
                            o.add_normal_ordered(&seq, &ClassPoly::scalar(q(-(at as i64))));
                        }
                    }
                    o
                };
                let label = format!("[{}, {}]", seq_label(a), seq_label(b));
                let lhs = seq_op(a, &ClassPoly::one(), n).commutator(&seq_op(b, &ClassPoly::one(), n))?;
                let want = ctx.mutate(rhs(lhs.window()));
                let bases = pair_products(ring, &ctx.classes, &ctx.classes);
                let mut recs =
                    vec![ctx.record(label.clone(), "terms", bases.len(), instantiate_failure(ring, &difference(&lhs, &want), &bases))];
                if short.contains(a) && short.contains(b) {
                    // basis-level Wick computation, compared term by term
                    let w = explicit_window;
                    let want = ctx.mutate(rhs(w));
                    let mut failure = None;
                    let cls = ctx.action_set(Hyp::None);
                    for (na, x) in &cls {
                        let fa = OperatorSum::from_sequence(ring, a, x, w);
                        for (nb, y) in &cls {
                            let gb = OperatorSum::from_sequence(ring, b, y, w);
                            let got = fa.commutator(ring, &gb)?;
                            let exp = OperatorSum::from_smeared(ring, &want, &ring.multiply(x, y)).truncate(got.window());
                            if let Some((wd, p, q_)) = got.first_difference(&exp) {
                                failure = Some(format!("α={na}, β={nb}: {}", describe_term(ring, &wd, &p, &q_)));
                                break;
                            }
                        }
                        if failure.is_some() {
                            break;
                        }
                    }
                    recs.push(ctx.record(label, "explicit", cls.len() * cls.len(), failure));
                }
                Ok(recs)
            }
            Cell::Deriv(s) => {
                // -Σ_j s_j/2 Σ_{m1+m2=s_j} (… :a_{m1}a_{m2}: …)(τα) - Σ_j s_j(|s_j|-1)/2 a_s(τ(Kα))
                let rhs = |w: i64| {
                    let mode = s.iter().map(|&x| x as i64).sum();
                    let mut o = SmearedOp::zero(mode, w);
                    let bound = (w + s.iter().map(|x| x.abs() as i64).sum::<i64>() + 1) as i32;
                    for (j, &sj) in s.iter().enumerate() {
                        for m1 in -bound..=bound {
                            let m2 = sj - m1;
                            if m1 == 0 || m2 == 0 {
                                continue;
                            }
                            let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
                            let mut seq: Vec<i32> = s[..j].to_vec();
                            seq.push(lo);
                            seq.push(hi);
                            seq.extend_from_slice(&s[j + 1..]);
                            o.add_normal_ordered(&seq, &ClassPoly::scalar(qf(-(sj as i64), 2)));
                        }
                        let k = (sj as i64) * ((sj as i64).abs() - 1);
                        o.add_normal_ordered(s, &ClassPoly::canonical().scale(&qf(-k, 2)));
                    }
                    Ok(o)
                };
                let f = |w: i64| Ok(seq_op(s, &ClassPoly::one(), w));
                let action = s.len() <= 2 && s.iter().all(|x| x.abs() <= 2);
                check_derivative(ctx, &format!("{}'", seq_label(s)), &f, 1, &rhs, Hyp::None, action)
            }
            Cell::Swap(s, j) => {
                let j = *j;
                let mut swapped = s.clone();
                swapped.swap(j, j + 1);
                let rest: Vec<i32> = s.iter().enumerate().filter(|&(u, _)| u != j && u != j + 1).map(|(_, &x)| x).collect();
                let rhs = |w: i64| {
                    let mut o = seq_op(&swapped, &ClassPoly::one(), w);
                    if s[j] == -s[j + 1] {
                        let mode = o.mode();
                        let mut e = SmearedOp::zero(mode, w);
                        e.add_normal_ordered(&rest, &ClassPoly::euler().scale(&q(-(s[j] as i64))));
                        o.add_scaled(&Q::one(), &e);
                    }
                    o
                };
                let label = format!("{} swap {}", seq_label(s), j + 1);
                let lhs = seq_op(s, &ClassPoly::one(), n);
                let want = ctx.mutate(rhs(n));
                let mut recs = vec![ctx.record(
                    label.clone(),
                    "terms",
                    ctx.classes.len(),
                    instantiate_failure(ring, &difference(&lhs, &want), &ctx.classes),
                )];
                // basis level: sequence in the given order minus the swapped order
                let w = explicit_window;
                let mut failure = None;
                let cls = ctx.action_set(Hyp::None);
                for (na, x) in &cls {
                    let got = OperatorSum::from_sequence(ring, s, x, w);
                    let mut exp = OperatorSum::from_sequence(ring, &swapped, x, w);
                    if s[j] == -s[j + 1] || ctx.spec.mutate {
                        let delta = if s[j] == -s[j + 1] { q(-(s[j] as i64)) } else { Q::zero() };
                        let ex = ring.multiply(ring.euler(), x);
                        let mut tail = OperatorSum::from_sequence(ring, &rest, &ex, w).scale(&delta);
                        if ctx.spec.mutate {
                            tail = tail.scale(&Q::zero());
                            tail.add_scaled(ring, &Q::one(), &OperatorSum::from_sequence(ring, &rest, x, w));
                        }
                        if tail.mode() == exp.mode() {
                            exp.add_scaled(ring, &Q::one(), &tail);
                        }
                    }
                    if let Some((wd, p, q_)) = got.first_difference(&exp) {
                        failure = Some(format!("α={na}: {}", describe_term(ring, &wd, &p, &q_)));
                        break;
                    }
                }
                recs.push(ctx.record(label, "explicit", cls.len(), failure));
                Ok(recs)
            }
        },
        t,
    )
}

fn thm42(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let cells: Vec<(usize, i64)> = (0..=r.k).flat_map(|k| nonzero_modes(r.n).map(move |n| (k, n))).collect();
    run_cells(
        &cells,
        |&(k, n)| {
            let f = |w: i64| Ok(walgebra::heisenberg(n, w));
            let e = |w: i64| Ok(walgebra::heisenberg_derivative_closed(k, n, w));
            check_derivative(ctx, &format!("a_{n}^({k})"), &f, k, &e, Hyp::KillsCanonical, true)
        },
        t,
    )
}

fn rmk43(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let mut cells = Vec::new();
    for k in 0..=r.k {
        for n in modes(r.n) {
            for d in [-1, n * n - 2] {
                if !cells.contains(&(k, n, d)) {
                    cells.push((k, n, d));
                }
            }
        }
    }
    run_cells(
        &cells,
        |&(k, n, d)| {
            let f = |w: i64| Ok(walgebra::shifted_sum(k, n, d, w));
            let e = |w: i64| Ok(walgebra::shifted_sum_derivative(k, n, d, w));
            check_derivative(ctx, &format!("k={k} n={n} d={d}"), &f, 1, &e, Hyp::KillsCanonical, true)
        },
        t,
    )
}

fn thm46(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let cells: Vec<usize> = (0..=r.k).collect();
    run_cells(
        &cells,
        |&k| {
            let mut recs = Vec::new();
            // vanishes on the vacuum: no term without annihilators survives
            let g = walgebra::chern(k, ctx.n);
            let mut creation_part = SmearedOp::zero(0, ctx.n);
            for (l, c) in g.iter() {
                if l.positive_total() == 0 {
                    creation_part.add_term(l.clone(), c);
                }
            }
            let creation_part = ctx.mutate(creation_part);
            let mut failure = instantiate_failure(ring, &creation_part, &ctx.kernel);
            if failure.is_none() {
                for (na, a) in &ctx.action_set(Hyp::KillsCanonical) {
                    let mut op = OperatorSum::from_smeared(ring, &g, a);
                    if ctx.spec.mutate {
                        op.add_scaled(ring, &Q::one(), &OperatorSum::identity(&Q::one(), op.window()));
                    }
                    let v = op.apply(ring, &FockVector::vacuum(ctx.spec.cutoff))?;
                    if !v.is_zero() {
                        failure = Some(format!("α={na}: G|0> = {}", v.render(ring)));
                        break;
                    }
                }
            }
            recs.push(ctx.record(format!("G_{k}|0> = 0"), "terms", ctx.kernel.len(), failure));
            let f = |w: i64| Ok(walgebra::chern(k, w));
            let zero = |w: i64| Ok(SmearedOp::zero(0, w));
            recs.extend(check_derivative(ctx, &format!("G_{k}' = 0"), &f, 1, &zero, Hyp::KillsCanonical, true)?);
            let g1 = |w: i64| Ok(walgebra::heisenberg(-1, w));
            let e = |w: i64| {
                Ok(walgebra::derivative_k(&walgebra::heisenberg(-1, w), k)?.scale(&factorial(k as u64).recip()))
            };
            recs.extend(check_bracket(ctx, &format!("[G_{k}, a_-1]"), &f, &g1, &e, Hyp::KillsCanonical, true)?);
            Ok(recs)
        },
        t,
    )
}

fn cor48(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let mut cells = Vec::new();
    for n in 1..=r.points {
        for k in 0..n as usize {
            for (name, a) in &ctx.kernel {
                cells.push((n, k, name.clone(), a.clone()));
            }
        }
    }
    let cutoff = ctx.spec.cutoff.max(r.points);
    run_cells(
        &cells,
        |(n, k, name, a)| {
            let req = ChernClassRequest { k: *k, alpha: a.clone(), n: *n };
            let got = hilbert::chern_class(ring, &req, cutoff)?;
            let mut want = hilbert::chern_class_closed(ring, &req, cutoff)?;
            if ctx.spec.mutate {
                want.add_term(crate::fock::Word::from_slice(&[(-(*n as i32), ring.unit_index())]), &Q::one());
            }
            let failure = (got != want).then(|| format!("operator {} vs closed {}", got.render(ring), want.render(ring)));
            let mut rec = ctx.record(format!("G_{k}({name}, {n})"), "dual", 1, failure);
            rec.value = Some(got.render(ring));
            Ok(vec![rec])
        },
        t,
    )
}

/// Exponent lists (k_1 ≥ … ≥ k_s ≥ 0) with Σ (k_i + 2) = 2n.
pub fn intersection_requests(n: u32) -> Vec<IntersectionRequest> {
    fn rec(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (0..=max.min(left.saturating_sub(2))).rev() {
            if k + 2 <= left {
                cur.push(k);
                rec(left - k - 2, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(2 * n as usize, 2 * n as usize, &mut Vec::new(), &mut out);
    out.into_iter().map(|exponents| IntersectionRequest { exponents, n }).collect()
}

fn rmk410(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    let cells: Vec<IntersectionRequest> = (1..=r.points).flat_map(intersection_requests).collect();
    let cutoff = ctx.spec.cutoff.max(r.points);
    run_cells(
        &cells,
        |req| {
            let got = hilbert::intersection_number(ring, req, cutoff)?;
            let mut oracle = hilbert::intersection_number_closed(req)?;
            if ctx.spec.mutate {
                oracle += Q::one();
            }
            let failure = (got != oracle).then(|| format!("operator {} vs closed {}", fmt_q(&got), fmt_q(&oracle)));
            let mut rec = ctx.record(format!("k={:?} n={}", req.exponents, req.n), "oracle", 1, failure);
            rec.value = Some(fmt_q(&got));
            Ok(vec![rec])
        },
        t,
    )
}

fn def51(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    #[derive(Clone, Copy)]
    enum Cell {
        Zero(i64),
        One(i64),
        ModeZero(usize),
        MinusOne(usize),
    }
    let mut cells = Vec::new();
    for n in modes(r.n) {
        cells.push(Cell::Zero(n));
        cells.push(Cell::One(n));
    }
    for p in 1..=r.p {
        cells.push(Cell::ModeZero(p));
        cells.push(Cell::MinusOne(p));
    }
    let w = ctx.n;
    run_cells(
        &cells,
        |c| {
            Ok(match *c {
                Cell::Zero(n) => check_terms(
                    ctx,
                    &format!("J^0_{n} = -a_{n}"),
                    &walgebra::jay(0, n, w),
                    &walgebra::heisenberg(n, w).scale(&q(-1)),
                    Hyp::None,
                ),
                Cell::One(n) => check_terms(
                    ctx,
                    &format!("J^1_{n} = L_{n}"),
                    &walgebra::jay(1, n, w),
                    &walgebra::virasoro(n, w),
                    Hyp::None,
                ),
                Cell::ModeZero(p) => check_terms(
                    ctx,
                    &format!("J^{p}_0 = {p}! G_{}", p - 1),
                    &walgebra::jay(p, 0, w),
                    &walgebra::chern(p - 1, w).scale(&factorial(p as u64)),
                    Hyp::KillsCanonical,
                ),
                Cell::MinusOne(p) => {
                    let d = walgebra::derivative_k(&walgebra::heisenberg(-1, w), p)?;
                    check_terms(
                        ctx,
                        &format!("J^{p}_-1 = -a_-1^({p})"),
                        &walgebra::jay(p, -1, d.window()),
                        &d.scale(&q(-1)),
                        Hyp::KillsCanonical,
                    )
                }
            })
        },
        t,
    )
}

fn lem52(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let cells: Vec<(usize, i64)> = (0..=r.p).flat_map(|p| nonzero_modes(r.n).map(move |n| (p, n))).collect();
    run_cells(
        &cells,
        |&(p, n)| {
            let f = |w: i64| Ok(walgebra::chern(p, w));
            let g = |w: i64| Ok(walgebra::heisenberg(n, w));
            let e = |w: i64| Ok(walgebra::jay(p, n, w).scale(&(q(n) / factorial(p as u64))));
            let action = p <= 2 && n.abs() <= 2;
            check_bracket(ctx, &format!("[G_{p}, a_{n}]"), &f, &g, &e, Hyp::KillsCanonical, action)
        },
        t,
    )
}

fn lem53(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let cells: Vec<(usize, i64)> = (0..=r.p).flat_map(|p| modes(r.m).map(move |m| (p, m))).collect();
    run_cells(
        &cells,
        |&(p, m)| {
            Ok(check_terms(
                ctx,
                &format!("J^{p}_{m} via fields"),
                &walgebra::jay_via_fields(p, m, ctx.n),
                &walgebra::jay(p, m, ctx.n),
                Hyp::None,
            ))
        },
        t,
    )
}

fn thm55(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let mut cells = Vec::new();
    for p in 0..=r.pq {
        for q_ in 0..=(r.pq - p) {
            for m in modes(r.m) {
                for n in modes(r.n) {
                    cells.push((p, q_, m, n));
                }
            }
        }
    }
    let mut recs = run_cells(
        &cells,
        |&(p, q_, m, n)| {
            let f = |w: i64| Ok(walgebra::jay(p, m, w));
            let g = |w: i64| Ok(walgebra::jay(q_, n, w));
            let e = |w: i64| {
                let mut o = walgebra::jay_bracket(p, q_, m, n, w);
                if ctx.spec.mutate && p + q_ >= 3 && p.min(q_) >= 1 && !(p == 1 && q_ == 1) {
                    // flip the sign of the Ω term
                    let om = walgebra::omega(p as i64, q_ as i64, m, n);
                    let tail = walgebra::jay(p + q_ - 3, m + n, w).mul_class(&ClassPoly::euler());
                    o.add_scaled(&Q::new((om as i64).into(), 6.into()), &tail);
                }
                Ok(o)
            };
            let action = p + q_ <= 4 && m.abs() <= 1 && n.abs() <= 1;
            // the Ω flip above is the mutation for this suite
            check_bracket_raw(ctx, &format!("p={p} q={q_} m={m} n={n}"), &f, &g, &e, action)
        },
        t,
    )?;
    // Ω antisymmetry, an integer identity forced by antisymmetry of the bracket
    let mut failure = None;
    let mut checked = 0;
    for p in 0..=5i64 {
        for q_ in 0..=5i64 {
            for m in -5..=5i64 {
                for n in -5..=5i64 {
                    checked += 1;
                    if walgebra::omega(p, q_, m, n) != -walgebra::omega(q_, p, n, m) && failure.is_none() {
                        failure = Some(format!("p={p} q={q_} m={m} n={n}"));
                    }
                }
            }
        }
    }
    recs.push(ctx.record("Ω antisymmetry".into(), "integer", checked, failure));
    Ok(recs)
}

impl<'a> Ctx<'a> {
    fn shallow(&self) -> Ctx<'a> {
        Ctx {
            spec: self.spec,
            ring: self.ring,
            classes: self.classes.clone(),
            kernel: self.kernel.clone(),
            action_classes: self.action_classes.clone(),
            action_window: self.action_window,
            n: self.n,
        }
    }
}

/// As [`check_bracket`] without the generic mutation (the caller mutates).
fn check_bracket_raw(ctx: &Ctx, label: &str, f: Build, g: Build, e: Build, action: bool) -> Result<Vec<Record>> {
    let mut spec = ctx.spec.clone();
    spec.mutate = false;
    let inner = Ctx { spec: &spec, ..ctx.shallow() };
    let mut recs = check_bracket(&inner, label, f, g, e, Hyp::None, action)?;
    for r in &mut recs {
        r.suite = ctx.spec.suite.to_string();
    }
    Ok(recs)
}

fn rmk56(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let cells: Vec<(usize, i64)> = (0..=r.p).flat_map(|p| modes(r.n).map(move |n| (p, n))).collect();
    run_cells(
        &cells,
        |&(p, n)| {
            let f = |w: i64| Ok(walgebra::jay(p, n, w));
            let e = |w: i64| {
                let mut o = walgebra::jay(p + 1, n, w).scale(&q(-n));
                if p >= 1 {
                    let tail = walgebra::jay(p - 1, n, w).mul_class(&ClassPoly::euler());
                    o.add_scaled(&qf(-(n * n * n - n) * p as i64, 12), &tail);
                }
                Ok(o)
            };
            let action = p <= 2 && n.abs() <= 2;
            check_derivative(ctx, &format!("J^{p}_{n}'"), &f, 1, &e, Hyp::KillsCanonical, action)
        },
        t,
    )
}

fn thm57(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let ring = ctx.ring;
    if !ring.canonical().is_zero() || !ring.euler().is_zero() {
        return Err(Error::Invalid(format!(
            "suite thm57 needs a surface with vanishing canonical and Euler classes; {} has K = {}, e = {}",
            ring.name(),
            ring.render(ring.canonical()),
            ring.render(ring.euler())
        )));
    }
    let mut cells = Vec::new();
    for p in 0..=r.pq {
        for q_ in 0..=(r.pq - p) {
            for m in modes(r.m) {
                for n in modes(r.n) {
                    cells.push((p, q_, m, n));
                }
            }
        }
    }
    let bases = pair_products(ring, &ctx.classes, &ctx.classes);
    run_cells(
        &cells,
        |&(p, q_, m, n)| {
            let lhs = walgebra::jay(p, m, ctx.n).commutator(&walgebra::jay(q_, n, ctx.n))?;
            let w = lhs.window();
            // L^p_m ↦ J^p_m and the central element C ↦ Id, with Tr = -∫
            let rhs = match walgebra::abstract_bracket(p, m, q_, n) {
                AbstractBracket::Term { p, mode, coefficient } => walgebra::jay(p, mode, w).scale(&q(coefficient)),
                AbstractBracket::Central { .. } if m + n != 0 => SmearedOp::zero(m + n, w),
                AbstractBracket::Central { coefficient } => SmearedOp::identity(&ClassPoly::scalar(q(-coefficient)), w),
            };
            let rhs = ctx.mutate(rhs);
            let failure = instantiate_failure(ring, &difference(&lhs, &rhs), &bases);
            Ok(vec![ctx.record(format!("p={p} q={q_} m={m} n={n}"), "terms", bases.len(), failure)])
        },
        t,
    )
}

fn lem61(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let w = ctx.n;
    let binom = |n: i64, k: i64| -> Q {
        if k < 0 || k > n {
            return Q::zero();
        }
        factorial(n as u64) / (factorial(k as u64) * factorial((n - k) as u64))
    };
    // :(∂a)^{d1}(∂²a)^{d2}(∂³a)^{d3} a^{rest}:_m; zero if any count is negative or no factor is left
    let field = |d1: i64, d2: i64, d3: i64, rest: i64, m: i64| -> SmearedOp {
        if d1 < 0 || d2 < 0 || d3 < 0 || rest < 0 {
            return SmearedOp::zero(m, w);
        }
        let mut orders = Vec::new();
        orders.extend(std::iter::repeat_n(1, d1 as usize));
        orders.extend(std::iter::repeat_n(2, d2 as usize));
        orders.extend(std::iter::repeat_n(3, d3 as usize));
        orders.extend(std::iter::repeat_n(0, rest as usize));
        walgebra::fourier(&FourierSpec::new(orders), m, w)
    };
    let weight = |d1: i64, d2: i64, d3: i64, rest: i64| 2 * d1 + 3 * d2 + 4 * d3 + rest;
    let mut cells = Vec::new();
    for part in 1..=5u8 {
        for big_n in 0..=r.k as i64 {
            for m in modes(r.m) {
                cells.push((part, big_n, m));
            }
        }
    }
    run_cells(
        &cells,
        |&(part, nn, m)| {
            let der = |phi: SmearedOp, delta: i64, r_: u32| walgebra::field_derivative(&phi, delta, r_);
            let zero = SmearedOp::zero(m, w);
            let (lhs, rhs, factors) = match part {
                1 => {
                    let l = der(field(0, 0, 0, nn, m), nn, 2);
                    let mut o = field(0, 1, 0, nn - 1, m).scale(&q(nn));
                    o.add_scaled(&q(nn * (nn - 1)), &field(2, 0, 0, nn - 2, m));
                    (l, o, nn)
                }
                2 => {
                    let l = der(field(0, 0, 0, nn, m), nn, 3);
                    let mut o = field(0, 0, 1, nn - 1, m).scale(&q(nn));
                    o.add_scaled(&(q(6) * binom(nn, 2)), &field(1, 1, 0, nn - 2, m));
                    o.add_scaled(&(q(6) * binom(nn, 3)), &field(3, 0, 0, nn - 3, m));
                    (l, o, nn)
                }
                3 => {
                    let l = der(field(0, 1, 0, nn, m), weight(0, 1, 0, nn), 1);
                    let mut o = field(0, 0, 1, nn, m);
                    o.add_scaled(&q(nn), &field(1, 1, 0, nn - 1, m));
                    (l, o, nn + 1)
                }
                4 => {
                    let l = der(field(2, 0, 0, nn, m), weight(2, 0, 0, nn), 1);
                    let mut o = field(1, 1, 0, nn, m).scale(&q(2));
                    o.add_scaled(&q(nn), &field(3, 0, 0, nn - 1, m));
                    (l, o, nn + 2)
                }
                _ => {
                    let l = der(field(0, 0, 0, nn, m), nn, 3);
                    let mut o = if nn >= 1 {
                        der(field(0, 1, 0, nn - 1, m), weight(0, 1, 0, nn - 1), 1).scale(&q(3 * nn))
                    } else {
                        zero.clone()
                    };
                    o.add_scaled(&q(-2 * nn), &field(0, 0, 1, nn - 1, m));
                    o.add_scaled(&(q(6) * binom(nn, 3)), &field(3, 0, 0, nn - 3, m));
                    (l, o, nn)
                }
            };
            if factors < 1 || factors > r.k as i64 {
                return Ok(vec![]);
            }
            let names = ["", "(i)", "(ii)", "(iii)", "(iv)", "(v)"];
            Ok(check_terms(ctx, &format!("{} N={nn} m={m}", names[part as usize]), &lhs, &rhs, Hyp::None))
        },
        t,
    )
}

fn eq22(ctx: &Ctx, r: &Ranges, t: bool) -> Result<Vec<Record>> {
    let mut cells = Vec::new();
    for p in 0..=r.pq {
        for q_ in 0..=(r.pq - p) {
            for m in modes(r.m) {
                for n in modes(r.n) {
                    cells.push((p, q_, m, n));
                }
            }
        }
    }
    run_cells(
        &cells,
        |&(p, q_, m, n)| {
            let got = walgebra::bracket_from_differential_operators(p, m, q_, n)?;
            let mut want = walgebra::abstract_bracket(p, m, q_, n);
            if ctx.spec.mutate {
                want = match want {
                    AbstractBracket::Term { p, mode, coefficient } => AbstractBracket::Term { p, mode, coefficient: coefficient + 1 },
                    AbstractBracket::Central { coefficient } => AbstractBracket::Central { coefficient: coefficient + 1 },
                };
            }
            let failure = (got != want).then(|| format!("differential operators give {got:?}, bracket gives {want:?}"));
            Ok(vec![ctx.record(format!("p={p} q={q_} m={m} n={n}"), "integer", 1, failure)])
        },
        t,
    )
}
