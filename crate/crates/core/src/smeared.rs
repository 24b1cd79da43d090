//! Operators of the form Σ_λ a_λ(τ_*(c_λ·γ)) with a single base class γ.
//!
//! The coefficient c_λ lives in Q[K, e]/(K³, Ke, e²): commutators of such
//! operators only ever multiply cohomology labels together, so a relation
//! computed here holds for every choice of base classes once instantiated.
//! The empty partition stands for the scalar ∫_X(c·γ)·Id.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::partitions::{GenPartition, Parts};
use crate::rational::{fmt_q, q, Q};
use crate::ring::{RingElem, SurfaceRing};

/// c₀ + c₁K + c₂K² + c₃e acting on the base class by cup product.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClassPoly {
    c: [Q; 4],
}

const NAMES: [&str; 4] = ["1", "K", "K^2", "e"];

impl ClassPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Q::one())
    }

    pub fn scalar(c: Q) -> Self {
        let mut p = Self::zero();
        p.c[0] = c;
        p
    }

    pub fn canonical() -> Self {
        let mut p = Self::zero();
        p.c[1] = Q::one();
        p
    }

    pub fn euler() -> Self {
        let mut p = Self::zero();
        p.c[3] = Q::one();
        p
    }

    pub fn coeffs(&self) -> &[Q; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn add_scaled(&mut self, k: &Q, other: &ClassPoly) {
        for i in 0..4 {
            if !other.c[i].is_zero() {
                self.c[i] += k * &other.c[i];
            }
        }
    }

    pub fn scale(&self, k: &Q) -> ClassPoly {
        ClassPoly { c: std::array::from_fn(|i| k * &self.c[i]) }
    }

    pub fn mul(&self, o: &ClassPoly) -> ClassPoly {
        let a = &self.c;
        let b = &o.c;
        let mut out = ClassPoly::zero();
        out.c[0] = &a[0] * &b[0];
        out.c[1] = &a[0] * &b[1] + &a[1] * &b[0];
        out.c[2] = &a[0] * &b[2] + &a[1] * &b[1] + &a[2] * &b[0];
        out.c[3] = &a[0] * &b[3] + &a[3] * &b[0];
        out
    }

    /// e·self (e kills K, K² and e).
    pub fn times_euler(&self) -> ClassPoly {
        let mut out = ClassPoly::zero();
        out.c[3] = self.c[0].clone();
        out
    }

    /// Drops the K and K² components, i.e. reduces modulo K·γ = 0.
    pub fn modulo_canonical(&self) -> ClassPoly {
        let mut out = self.clone();
        out.c[1] = Q::zero();
        out.c[2] = Q::zero();
        out
    }

    /// The concrete class (c₀ + c₁K + c₂K² + c₃e)·γ.
    pub fn instantiate(&self, ring: &SurfaceRing, base: &RingElem) -> RingElem {
        let mut out = base.scale(&self.c[0]);
        if !self.c[1].is_zero() || !self.c[2].is_zero() {
            let kb = ring.multiply(ring.canonical(), base);
            out.add_scaled(&self.c[1], &kb);
            if !self.c[2].is_zero() {
                out.add_scaled(&self.c[2], &ring.multiply(ring.canonical(), &kb));
            }
        }
        if !self.c[3].is_zero() {
            out.add_scaled(&self.c[3], &ring.multiply(ring.euler(), base));
        }
        out
    }
}

impl fmt::Display for ClassPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..4 {
            if self.c[i].is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{}", fmt_q(&self.c[0]))?;
            } else {
                write!(f, "{}*{}", fmt_q(&self.c[i]), NAMES[i])?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Σ_λ a_λ(τ_*(c_λ γ)) truncated to terms whose positive parts total at most
/// `window`; such a truncation acts exactly on every state of weight ≤ window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmearedOp {
    terms: BTreeMap<GenPartition, ClassPoly>,
    mode: i64,
    window: i64,
}

impl SmearedOp {
    pub fn zero(mode: i64, window: i64) -> Self {
        Self { terms: BTreeMap::new(), mode, window }
    }

    /// a_λ(τ_* γ)
    pub fn monomial(lambda: GenPartition, window: i64) -> Self {
        let mut out = Self::zero(lambda.size(), window);
        out.add_term(lambda, &ClassPoly::one());
        out
    }

    /// c·Id, realized as the scalar term ∫(c γ)·Id.
    pub fn identity(c: &ClassPoly, window: i64) -> Self {
        let mut out = Self::zero(0, window);
        out.add_term(GenPartition::empty(), c);
        out
    }

    pub fn mode(&self) -> i64 {
        self.mode
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GenPartition, &ClassPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, lambda: &GenPartition) -> ClassPoly {
        self.terms.get(lambda).cloned().unwrap_or_default()
    }

    /// Adds c·a_λ; silently drops terms outside the window.
    pub fn add_term(&mut self, lambda: GenPartition, c: &ClassPoly) {
        assert_eq!(lambda.size(), self.mode, "term {lambda} does not match mode {}", self.mode);
        if c.is_zero() || lambda.positive_total() > self.window {
            return;
        }
        match self.terms.entry(lambda) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_scaled(&Q::one(), c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_parts(&mut self, parts: Parts, c: &ClassPoly) {
        self.add_term(GenPartition::from_sorted(parts), c)
    }

    /// self + k·other, on the smaller window.
    pub fn add_scaled(&mut self, k: &Q, other: &SmearedOp) {
        assert_eq!(self.mode, other.mode, "adding operators of different modes");
        self.window = self.window.min(other.window);
        self.terms.retain(|l, _| l.positive_total() <= other.window);
        if k.is_zero() {
            return;
        }
        for (l, c) in &other.terms {
            self.add_term(l.clone(), &c.scale(k));
        }
    }

    pub fn plus(&self, k: &Q, other: &SmearedOp) -> SmearedOp {
        let mut out = self.clone();
        out.add_scaled(k, other);
        out
    }

    pub fn scale(&self, k: &Q) -> SmearedOp {
        let mut out = Self::zero(self.mode, self.window);
        for (l, c) in &self.terms {
            out.add_term(l.clone(), &c.scale(k));
        }
        out
    }

    /// Multiplies every label by c (e.g. replaces γ by eγ).
    pub fn mul_class(&self, c: &ClassPoly) -> SmearedOp {
        let mut out = Self::zero(self.mode, self.window);
        for (l, x) in &self.terms {
            out.add_term(l.clone(), &x.mul(c));
        }
        out
    }

    /// The operator under the assumption K·γ = 0.
    pub fn modulo_canonical(&self) -> SmearedOp {
        let mut out = Self::zero(self.mode, self.window);
        for (l, c) in &self.terms {
            out.add_term(l.clone(), &c.modulo_canonical());
        }
        out
    }

    pub fn truncate(&self, window: i64) -> SmearedOp {
        let mut out = self.clone();
        out.window = window.min(self.window);
        let w = out.window;
        out.terms.retain(|l, _| l.positive_total() <= w);
        out
    }

    /// Super commutator, computed by contracting one annihilator of either
    /// side against a matching creator of the other and normal ordering the
    /// rest; the label of the result is the product of the two labels.
    pub fn commutator(&self, other: &SmearedOp) -> Result<SmearedOp> {
        let window = self
            .window
            .min(other.window)
            .min(self.window + other.mode)
            .min(other.window + self.mode);
        if window < 0 {
            return Err(Error::Window(format!(
                "commutator of modes {} and {} has empty window (windows {}, {})",
                self.mode, other.mode, self.window, other.window
            )));
        }
        let mut out = SmearedOp::zero(self.mode + other.mode, window);
        let g_terms: Vec<(&GenPartition, &ClassPoly)> =
            other.terms.iter().filter(|(l, _)| !l.is_empty()).collect();
        let mut by_part: HashMap<i32, Vec<usize>> = HashMap::new();
        for (idx, (l, _)) in g_terms.iter().enumerate() {
            for (v, _) in l.multiplicities() {
                by_part.entry(v).or_default().push(idx);
            }
        }
        for (lam, x) in &self.terms {
            if lam.is_empty() {
                continue;
            }
            for (v, count) in lam.multiplicities() {
                let Some(partners) = by_part.get(&-v) else { continue };
                let rest = lam.without(v);
                let k = q(-(v as i64) * count as i64);
                let xk = x.scale(&k);
                for &idx in partners {
                    let (mu, y) = g_terms[idx];
                    let cls = xk.mul(y);
                    if cls.is_zero() {
                        continue;
                    }
                    let mp = mu.parts();
                    for j in 0..mp.len() {
                        if mp[j] != -v {
                            continue;
                        }
                        let mut seq: Parts = Parts::with_capacity(mp.len() + rest.len());
                        seq.extend_from_slice(&mp[..j]);
                        seq.extend_from_slice(rest.parts());
                        seq.extend_from_slice(&mp[j + 1..]);
                        out.add_normal_ordered(&seq, &cls);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adds a_{s_1}⋯a_{s_k}(τ_*(c γ)) for an arbitrary sequence: the sorted
    /// monomial plus one e-contraction for each pair a_p … a_{-p} with p > 0
    /// standing out of order (further contractions carry e² = 0).
    pub fn add_normal_ordered(&mut self, seq: &[i32], c: &ClassPoly) {
        let mut sorted: Parts = seq.into();
        sorted.sort_unstable();
        self.add_parts(sorted, c);
        let ce = c.times_euler();
        if ce.is_zero() {
            return;
        }
        for i in 0..seq.len() {
            let p = seq[i];
            if p <= 0 {
                continue;
            }
            for k in i + 1..seq.len() {
                if seq[k] == -p {
                    let mut rest: Parts = Parts::with_capacity(seq.len() - 2);
                    for (t, &s) in seq.iter().enumerate() {
                        if t != i && t != k {
                            rest.push(s);
                        }
                    }
                    rest.sort_unstable();
                    self.add_parts(rest, &ce.scale(&q(-(p as i64))));
                }
            }
        }
    }

    /// First term at which `self` and `other` differ on the common window.
    pub fn first_difference(&self, other: &SmearedOp) -> Option<(GenPartition, ClassPoly, ClassPoly)> {
        let w = self.window.min(other.window);
        let keys: std::collections::BTreeSet<&GenPartition> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|l| l.positive_total() <= w)
            .collect();
        for l in keys {
            let a = self.coeff(l);
            let b = other.coeff(l);
            if a != b {
                return Some((l.clone(), a, b));
            }
        }
        None
    }

    /// Instantiates at a base class and returns the first term that does not
    /// vanish: a_λ(τ_* c) = 0 iff c = 0 when λ ≠ ∅, and ∫ c = 0 for the scalar.
    pub fn first_nonvanishing(&self, ring: &SurfaceRing, base: &RingElem) -> Option<(GenPartition, RingElem)> {
        for (l, c) in &self.terms {
            let v = c.instantiate(ring, base);
            let dead = if l.is_empty() { ring.integrate(&v).is_zero() } else { v.is_zero() };
            if !dead {
                return Some((l.clone(), v));
            }
        }
        None
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (l, c) in &self.terms {
            if l.is_empty() {
                parts.push(format!("({c})*Id"));
            } else {
                parts.push(format!("({c})*a[{l}]"));
            }
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(s: &str) -> GenPartition {
        s.parse().unwrap()
    }

    #[test]
    fn heisenberg_relation() {
        for m in -3i32..=3 {
            for n in -3i32..=3 {
                if m == 0 || n == 0 {
                    continue;
                }
                let a = SmearedOp::monomial(GenPartition::new([m]).unwrap(), 8);
                let b = SmearedOp::monomial(GenPartition::new([n]).unwrap(), 8);
                let c = a.commutator(&b).unwrap();
                if m == -n {
                    let want = SmearedOp::identity(&ClassPoly::scalar(q(-(m as i64))), 8);
                    assert_eq!(c.first_difference(&want), None);
                } else {
                    assert!(c.is_zero());
                }
            }
        }
    }

    #[test]
    fn swap_costs_an_euler_term() {
        // a_1 a_{-1}(τ_2 γ) = a_{-1} a_1(τ_2 γ) - ∫(eγ)
        let mut op = SmearedOp::zero(0, 4);
        op.add_normal_ordered(&[1, -1], &ClassPoly::one());
        assert_eq!(op.coeff(&gp("(-1)^1 1^1")), ClassPoly::one());
        assert_eq!(op.coeff(&GenPartition::empty()), ClassPoly::euler().scale(&q(-1)));
    }

    #[test]
    fn class_poly_algebra() {
        let k = ClassPoly::canonical();
        let e = ClassPoly::euler();
        assert!(k.mul(&e).is_zero());
        assert!(e.mul(&e).is_zero());
        assert!(k.mul(&k).mul(&k).is_zero());
        assert_eq!(e.to_string(), "1*e");
        let p2 = SurfaceRing::builtin("p2").unwrap();
        let one = p2.unit();
        // K² = 9[x] and e = 3[x] on the projective plane
        assert_eq!(k.mul(&k).instantiate(&p2, &one), e.scale(&q(3)).instantiate(&p2, &one));
    }

    #[test]
    fn window_of_commutator() {
        let a = SmearedOp::monomial(gp("(-2)^1"), 1);
        let b = SmearedOp::monomial(gp("2^1"), 3);
        let c = a.commutator(&b).unwrap();
        assert_eq!(c.window(), 1);
        let d = SmearedOp::monomial(gp("3^1"), 0);
        assert!(SmearedOp::monomial(gp("(-1)^1"), 0).commutator(&d).is_err());
    }
}
