//! Explicit operators: finite sums of normally ordered Heisenberg monomials
//! with concrete basis labels, acting on Fock vectors. Also the boundary
//! operator 𝔡, defined on vectors by 𝔡|0⟩ = 0 and the Lehn relation
//! [𝔡, a_m(x)] = m L_m(x) - m(|m|-1)/2 · a_m(Kx) for creation modes.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{self, canonicalize, render_state, Factor, FockVector, Word};
use crate::partitions::GenPartition;
use crate::rational::{fmt_q, q, qf, signed_prefix, Q};
use crate::ring::{Basis, RingElem, SurfaceRing};
use crate::smeared::SmearedOp;
use crate::walgebra;

/// annihilating suffix -> (creating prefix, coefficient)
type Groups = Vec<(Word, Vec<(Word, Q)>)>;

/// Σ c_w · a_{w_1}⋯a_{w_k} + scalar·Id with every word normally ordered
/// (modes nondecreasing), valid on states of weight ≤ window.
#[derive(Debug)]
pub struct OperatorSum {
    terms: BTreeMap<Word, Q>,
    scalar: Q,
    mode: i64,
    window: i64,
    // built on first use
    groups: OnceLock<Groups>,
}

impl Clone for OperatorSum {
    fn clone(&self) -> Self {
        Self {
            terms: self.terms.clone(),
            scalar: self.scalar.clone(),
            mode: self.mode,
            window: self.window,
            groups: OnceLock::new(),
        }
    }
}

impl PartialEq for OperatorSum {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.scalar == other.scalar && self.mode == other.mode && self.window == other.window
    }
}

fn annihilation_weight(word: &[Factor]) -> i64 {
    word.iter().filter(|f| f.0 > 0).map(|f| f.0 as i64).sum()
}

fn mode_of(word: &[Factor]) -> i64 {
    word.iter().map(|f| f.0 as i64).sum()
}

impl OperatorSum {
    pub fn zero(mode: i64, window: i64) -> Self {
        Self { terms: BTreeMap::new(), scalar: Q::zero(), mode, window, groups: OnceLock::new() }
    }

    pub fn identity(c: &Q, window: i64) -> Self {
        let mut out = Self::zero(0, window);
        out.scalar = c.clone();
        out
    }

    /// a_n(α); the zero operator for n = 0.
    pub fn heisenberg(ring: &SurfaceRing, n: i64, alpha: &RingElem, window: i64) -> Self {
        let mut out = Self::zero(n, window);
        if n == 0 {
            return out;
        }
        for (x, c) in alpha.iter() {
            out.add_term(ring, &[(n as i32, x)], c);
        }
        out
    }

    /// a_λ(τ_*α)
    pub fn monomial(ring: &SurfaceRing, lambda: &GenPartition, alpha: &RingElem, window: i64) -> Self {
        Self::from_smeared(ring, &SmearedOp::monomial(lambda.clone(), window), alpha)
    }

    /// Expands every a_λ(τ_*(c·α)) into basis tensors, slot t going to the
    /// t-th factor of the increasing-mode product.
    pub fn from_smeared(ring: &SurfaceRing, op: &SmearedOp, alpha: &RingElem) -> Self {
        let mut out = Self::zero(op.mode(), op.window());
        for (lambda, c) in op.iter() {
            let class = c.instantiate(ring, alpha);
            if class.is_zero() {
                continue;
            }
            if lambda.is_empty() {
                out.scalar += ring.integrate(&class);
                continue;
            }
            let tau = ring.diagonal_pushforward(&class, lambda.len()).expect("nonempty partition");
            let mut word: Word = Word::with_capacity(lambda.len());
            for (slots, k) in tau.iter() {
                word.clear();
                word.extend(lambda.parts().iter().zip(slots.iter()).map(|(&m, &x)| (m, x)));
                out.add_term(ring, &word, k);
            }
        }
        out
    }

    /// a_{s_1}⋯a_{s_k}(τ_{k*}α) for an arbitrary sequence of modes, normally
    /// ordered factor by factor with the Heisenberg relation.
    pub fn from_sequence(ring: &SurfaceRing, seq: &[i32], alpha: &RingElem, window: i64) -> Self {
        let mode = seq.iter().map(|&m| m as i64).sum();
        let mut out = Self::zero(mode, window);
        if alpha.is_zero() || seq.contains(&0) {
            return out;
        }
        if seq.is_empty() {
            out.scalar = ring.integrate(alpha);
            return out;
        }
        let tau = ring.diagonal_pushforward(alpha, seq.len()).expect("nonempty sequence");
        let mut word: Word = Word::with_capacity(seq.len());
        for (slots, k) in tau.iter() {
            word.clear();
            word.extend(seq.iter().zip(slots.iter()).map(|(&m, &x)| (m, x)));
            for (w, c) in normal_order(ring, &word) {
                out.add_term(ring, &w, &(k * c));
            }
        }
        out
    }

    /// Adds c·a_{w_1}⋯a_{w_k} for a word whose modes are nondecreasing.
    pub fn add_term(&mut self, ring: &SurfaceRing, word: &[Factor], c: &Q) {
        debug_assert!(word.windows(2).all(|p| p[0].0 <= p[1].0), "word is not normally ordered");
        assert_eq!(mode_of(word), self.mode, "term does not match the operator mode");
        if c.is_zero() || annihilation_weight(word) > self.window {
            return;
        }
        if word.is_empty() {
            self.scalar += c;
            return;
        }
        let Some((w, neg)) = canonicalize(ring, word) else { return };
        self.groups = OnceLock::new();
        let c = if neg { -c.clone() } else { c.clone() };
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn mode(&self) -> i64 {
        self.mode
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn scalar(&self) -> &Q {
        &self.scalar
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.scalar.is_zero()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &[Factor]) -> Q {
        if word.is_empty() {
            return self.scalar.clone();
        }
        self.terms.get(word).cloned().unwrap_or_default()
    }

    /// self + k·other on the smaller window.
    pub fn add_scaled(&mut self, ring: &SurfaceRing, k: &Q, other: &OperatorSum) {
        assert_eq!(self.mode, other.mode, "adding operators of different modes");
        self.window = self.window.min(other.window);
        let w = self.window;
        self.terms.retain(|t, _| annihilation_weight(t) <= w);
        self.groups = OnceLock::new();
        self.scalar += k * &other.scalar;
        for (t, c) in &other.terms {
            self.add_term(ring, t, &(k * c));
        }
    }

    pub fn scale(&self, k: &Q) -> OperatorSum {
        let mut out = Self::zero(self.mode, self.window);
        if k.is_zero() {
            return out;
        }
        out.scalar = k * &self.scalar;
        out.terms = self.terms.iter().map(|(w, c)| (w.clone(), k * c)).collect();
        out
    }

    /// Parity of every term, or `None` for the zero operator.
    pub fn parity(&self, ring: &SurfaceRing) -> Result<Option<u8>> {
        let mut seen = if self.scalar.is_zero() { None } else { Some(0) };
        for w in self.terms.keys() {
            let p = w.iter().fold(0u8, |a, f| a ^ ring.parity(f.1));
            match seen {
                None => seen = Some(p),
                Some(s) if s != p => {
                    return Err(Error::MixedParity(format!("operator mixes parities ({} terms)", self.terms.len())))
                }
                _ => {}
            }
        }
        Ok(seen)
    }

    fn grouped(&self) -> &[(Word, Vec<(Word, Q)>)] {
        self.groups.get_or_init(|| {
            let mut map: BTreeMap<Word, Vec<(Word, Q)>> = BTreeMap::new();
            for (w, c) in &self.terms {
                let split = w.partition_point(|f| f.0 < 0);
                map.entry(w[split..].into()).or_default().push((w[..split].into(), c.clone()));
            }
            map.into_iter().collect()
        })
    }

    /// Applies the operator; every input state must lie in the window.
    pub fn apply(&self, ring: &SurfaceRing, v: &FockVector) -> Result<FockVector> {
        // inputs below the cutoff land below cutoff - mode
        let cutoff = (v.cutoff() as i64).max(v.cutoff() as i64 - self.mode) as u32;
        let Some(top) = v.max_weight() else {
            return Ok(FockVector::zero(cutoff));
        };
        if top > self.window {
            return Err(Error::Window(format!(
                "state of weight {top} outside operator window {}",
                self.window
            )));
        }
        let v = v.clone().with_cutoff(cutoff);
        let mut out = v.scale(&self.scalar);
        for (ann, creators) in self.grouped() {
            let r = fock::apply_word(ring, ann, &v);
            if r.is_zero() {
                continue;
            }
            for (cre, c) in creators {
                out.add_scaled(c, &fock::apply_word(ring, cre, &r));
            }
        }
        Ok(out)
    }

    /// Product self∘other, normally ordered.
    pub fn compose(&self, ring: &SurfaceRing, other: &OperatorSum) -> OperatorSum {
        let window = other.window.min(self.window + other.mode);
        let mut out = Self::zero(self.mode + other.mode, window);
        out.scalar = &self.scalar * &other.scalar;
        for (w, c) in &other.terms {
            if !self.scalar.is_zero() {
                out.add_term(ring, w, &(&self.scalar * c));
            }
        }
        for (w, c) in &self.terms {
            if !other.scalar.is_zero() {
                out.add_term(ring, w, &(&other.scalar * c));
            }
        }
        let mut seq: Word = Word::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                seq.clear();
                seq.extend_from_slice(a);
                seq.extend_from_slice(b);
                let xy = x * y;
                for (w, k) in normal_order(ring, &seq) {
                    if w.is_empty() {
                        out.scalar += &xy * &k;
                    } else {
                        out.add_term(ring, &w, &(&xy * &k));
                    }
                }
            }
        }
        out
    }

    /// Super commutator self∘other - (-1)^{|self||other|} other∘self.
    pub fn commutator(&self, ring: &SurfaceRing, other: &OperatorSum) -> Result<OperatorSum> {
        let window = self
            .window
            .min(other.window)
            .min(self.window + other.mode)
            .min(other.window + self.mode);
        if window < 0 {
            return Err(Error::Window(format!(
                "commutator of modes {} and {} has empty window",
                self.mode, other.mode
            )));
        }
        let sign = match (self.parity(ring)?, other.parity(ring)?) {
            (Some(1), Some(1)) => q(1),
            _ => q(-1),
        };
        let mut out = self.compose(ring, other);
        out.add_scaled(ring, &sign, &other.compose(ring, self));
        Ok(out.truncate(window))
    }

    pub fn truncate(&self, window: i64) -> OperatorSum {
        let mut out = self.clone();
        out.window = window.min(self.window);
        let w = out.window;
        out.terms.retain(|t, _| annihilation_weight(t) <= w);
        out
    }

    /// First word (the empty word standing for the scalar) where the two differ on the common window.
    pub fn first_difference(&self, other: &OperatorSum) -> Option<(Word, Q, Q)> {
        if self.scalar != other.scalar {
            return Some((Word::new(), self.scalar.clone(), other.scalar.clone()));
        }
        let w = self.window.min(other.window);
        let keys: std::collections::BTreeSet<&Word> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|t| annihilation_weight(t) <= w)
            .collect();
        for k in keys {
            let a = self.coeff(k);
            let b = other.coeff(k);
            if a != b {
                return Some((k.clone(), a, b));
            }
        }
        None
    }

    /// "3/2 a(-1;H) a(1;x) + 1/4 Id"
    pub fn render(&self, ring: &SurfaceRing) -> String {
        let mut s = String::new();
        let mut first = true;
        for (w, c) in &self.terms {
            s.push_str(&signed_prefix(c, first));
            first = false;
            for &(m, x) in w {
                s.push_str(&format!(" a({m};{})", ring.basis_name(x)));
            }
        }
        if !self.scalar.is_zero() {
            s.push_str(&signed_prefix(&self.scalar, first));
            s.push_str(" Id");
            first = false;
        }
        if first {
            s.push('0');
        }
        s
    }
}

/// Normal ordering of an arbitrary product of Heisenberg factors by Wick's
/// theorem: each out-of-order pair a_n(x)…a_{-n}(y) with n > 0 may contract
/// to -n∫(xy). Returns normally ordered words (the empty word is the scalar).
pub fn normal_order(ring: &SurfaceRing, seq: &[Factor]) -> Vec<(Word, Q)> {
    let mut acc: HashMap<Word, Q> = HashMap::new();
    let mut stack: Vec<(Word, Q)> = vec![(seq.into(), Q::one())];
    while let Some((w, c)) = stack.pop() {
        // find the first adjacent pair out of mode order and bubble it
        match w.windows(2).position(|p| p[0].0 > p[1].0) {
            None => {
                let e = acc.entry(w).or_insert_with(Q::zero);
                *e += c;
            }
            Some(i) => {
                let (m, x) = w[i];
                let (n, y) = w[i + 1];
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                let koszul = ring.parity(x) & ring.parity(y) == 1;
                stack.push((swapped, if koszul { -c.clone() } else { c.clone() }));
                if m == -n {
                    let g = ring.pairing(x, y);
                    if !g.is_zero() {
                        let mut rest: Word = w[..i].into();
                        rest.extend_from_slice(&w[i + 2..]);
                        stack.push((rest, &c * g * q(-(m as i64))));
                    }
                }
            }
        }
    }
    let mut out: Vec<(Word, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out.sort();
    out
}

/// 𝔡 on vectors of weight ≤ window, by Leibniz recursion over creation
/// monomials: 𝔡(a_m(x) T|0⟩) = a'_m(x) T|0⟩ + a_m(x) 𝔡(T|0⟩).
pub struct Boundary<'a> {
    ring: &'a SurfaceRing,
    window: i64,
    states: Mutex<HashMap<Word, Arc<FockVector>>>,
    lehn: Mutex<HashMap<Factor, Arc<OperatorSum>>>,
}

impl<'a> Boundary<'a> {
    pub fn new(ring: &'a SurfaceRing, window: i64) -> Self {
        Self { ring, window, states: Mutex::new(HashMap::new()), lehn: Mutex::new(HashMap::new()) }
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    /// a'_m(x) = m L_m(x) - m(|m|-1)/2 · a_m(Kx), explicit on the window.
    pub fn lehn_operator(&self, m: i32, x: Basis) -> Arc<OperatorSum> {
        if let Some(op) = self.lehn.lock().expect("lehn cache").get(&(m, x)) {
            return op.clone();
        }
        let ring = self.ring;
        let mi = m as i64;
        let alpha = RingElem::basis(x);
        let mut op = OperatorSum::from_smeared(ring, &walgebra::virasoro(mi, self.window), &alpha).scale(&q(mi));
        let kx = ring.multiply(ring.canonical(), &alpha);
        let kterm = OperatorSum::heisenberg(ring, mi, &kx, self.window);
        op.add_scaled(ring, &qf(-mi * (mi.abs() - 1), 2), &kterm);
        let op = Arc::new(op);
        self.lehn.lock().expect("lehn cache").insert((m, x), op.clone());
        op
    }

    // 𝔡 preserves weight, so every cached image lives below the window
    fn state(&self, word: &Word) -> Result<Arc<FockVector>> {
        let cutoff = self.window as u32;
        if let Some(v) = self.states.lock().expect("state cache").get(word) {
            return Ok(v.clone());
        }
        let ring = self.ring;
        let out = if word.is_empty() {
            FockVector::zero(cutoff)
        } else {
            let (m, x) = word[0];
            let rest: Word = word[1..].into();
            let tail = FockVector::from_state(rest.clone(), cutoff);
            let mut out = self.lehn_operator(m, x).apply(ring, &tail)?;
            let d_rest = self.state(&rest)?;
            out.add_scaled(&Q::one(), &fock::apply_factor(ring, (m, x), &d_rest));
            out
        };
        let out = Arc::new(out);
        self.states.lock().expect("state cache").insert(word.clone(), out.clone());
        Ok(out)
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        let mut out = FockVector::zero(v.cutoff());
        for (w, c) in v.iter() {
            if fock::word_weight(w) > self.window {
                return Err(Error::Window(format!(
                    "boundary operator built for weight ≤ {}, got a state of weight {}",
                    self.window,
                    fock::word_weight(w)
                )));
            }
            let dw = self.state(w)?;
            out.add_scaled(c, &dw);
        }
        Ok(out)
    }

    pub fn apply_power(&self, v: &FockVector, k: usize) -> Result<FockVector> {
        let mut cur = v.clone();
        for _ in 0..k {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// f^{(k)}(v) = Σ_i (-1)^i C(k,i) 𝔡^{k-i}(f(𝔡^i v))
    pub fn derivative_k_apply(&self, f: &OperatorSum, k: usize, v: &FockVector) -> Result<FockVector> {
        let mut out = FockVector::zero(v.cutoff());
        let mut binom = Q::one();
        for i in 0..=k {
            let inner = f.apply(self.ring, &self.apply_power(v, i)?)?;
            let term = self.apply_power(&inner, k - i)?;
            let sign = if i % 2 == 0 { binom.clone() } else { -binom.clone() };
            out.add_scaled(&sign, &term);
            binom = binom * q((k - i) as i64) / q(i as i64 + 1);
        }
        Ok(out)
    }

    /// f'(v) = 𝔡(f v) - f(𝔡 v)
    pub fn derivative_apply(&self, f: &OperatorSum, v: &FockVector) -> Result<FockVector> {
        let fv = f.apply(self.ring, v)?;
        let mut out = self.apply(&fv)?;
        let dv = self.apply(v)?;
        out.add_scaled(&q(-1), &f.apply(self.ring, &dv)?);
        Ok(out)
    }
}

/// A basis state of weight ≤ window on which two actions differ, with both images.
pub type Disagreement = (Word, FockVector, FockVector);

/// Compares two actions on every basis state of weight 0..=window; returns
/// the first disagreement in basis order.
pub fn first_disagreement<F, G>(ring: &SurfaceRing, window: i64, lhs: F, rhs: G) -> Result<Option<Disagreement>>
where
    F: Fn(&FockVector) -> Result<FockVector> + Sync,
    G: Fn(&FockVector) -> Result<FockVector> + Sync,
{
    let mut states: Vec<Word> = Vec::new();
    for w in 0..=window.max(0) as u32 {
        states.extend(fock::basis(ring, w));
    }
    let cutoff = window.max(0) as u32;
    states
        .par_iter()
        .map(|s| -> Result<Option<Disagreement>> {
            let v = FockVector::from_state(s.clone(), cutoff);
            let a = lhs(&v)?;
            let b = rhs(&v)?;
            Ok(if a == b { None } else { Some((s.clone(), a, b)) })
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

/// Human-readable form of a disagreement.
pub fn describe(ring: &SurfaceRing, d: &Disagreement) -> String {
    format!(
        "on {}: got {}, expected {}",
        render_state(ring, &d.0),
        d.1.render(ring),
        d.2.render(ring)
    )
}

/// Rendered coefficient pair for term-level differences.
pub fn describe_term(ring: &SurfaceRing, word: &[Factor], a: &Q, b: &Q) -> String {
    let mut t = String::new();
    for &(m, x) in word {
        t.push_str(&format!("a({m};{}) ", ring.basis_name(x)));
    }
    if word.is_empty() {
        t.push_str("Id ");
    }
    format!("{t}: {} vs {}", fmt_q(a), fmt_q(b))
}
