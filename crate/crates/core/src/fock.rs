//! Truncated Fock space spanned by creation monomials on the vacuum.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::partitions::partitions;
use crate::rational::{factorial, fmt_q, signed_prefix, Q};
use crate::ring::{Basis, SurfaceRing};

/// a_mode(basis class)
pub type Factor = (i32, Basis);
/// A product of Heisenberg factors, read left to right.
pub type Word = SmallVec<[Factor; 8]>;

/// Sorts a word by (mode, class), tracking Koszul signs. Only valid when no
/// swap exchanges a_m and a_{-m}; callers use it on creation-only words or on
/// blocks of equal mode. Returns `None` when an odd factor repeats.
pub fn canonicalize(ring: &SurfaceRing, word: &[Factor]) -> Option<(Word, bool)> {
    let mut w: Word = word.into();
    let mut neg = false;
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            if ring.parity(w[j - 1].1) & ring.parity(w[j].1) == 1 {
                neg = !neg;
            }
            w.swap(j - 1, j);
            j -= 1;
        }
    }
    for pair in w.windows(2) {
        if pair[0] == pair[1] && ring.parity(pair[0].1) == 1 {
            return None;
        }
    }
    Some((w, neg))
}

pub fn word_weight(word: &[Factor]) -> i64 {
    -word.iter().map(|f| f.0 as i64).sum::<i64>()
}

/// Cohomological degree of a creation monomial applied to the vacuum.
pub fn state_degree(ring: &SurfaceRing, word: &[Factor]) -> u32 {
    word.iter()
        .map(|&(m, x)| 2 * ((-m) as u32 - 1) + ring.degree(x) as u32)
        .sum()
}

/// Renders "a(-2;H) a(-1;1) |0>".
pub fn render_state(ring: &SurfaceRing, word: &[Factor]) -> String {
    let mut s = String::new();
    for &(m, x) in word {
        s.push_str(&format!("a({m};{}) ", ring.basis_name(x)));
    }
    s.push_str("|0>");
    s
}

/// A finite combination of creation monomials; states of weight above the
/// cutoff are dropped on insertion. Equality ignores the cutoff.
#[derive(Clone, Debug)]
pub struct FockVector {
    terms: BTreeMap<Word, Q>,
    cutoff: u32,
}

#[derive(Serialize)]
struct TermRecord<'a> {
    coef: String,
    state: String,
    factors: Vec<(i32, &'a str)>,
}

impl PartialEq for FockVector {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for FockVector {}

impl FockVector {
    pub fn zero(cutoff: u32) -> Self {
        Self { terms: BTreeMap::new(), cutoff }
    }

    pub fn vacuum(cutoff: u32) -> Self {
        let mut v = Self::zero(cutoff);
        v.terms.insert(Word::new(), Q::one());
        v
    }

    pub fn from_state(word: Word, cutoff: u32) -> Self {
        let mut v = Self::zero(cutoff);
        v.add_term(word, &Q::one());
        v
    }

    /// a_{-1}(1_X)^n / n! |0>
    pub fn fundamental_class(ring: &SurfaceRing, n: u32, cutoff: u32) -> Result<Self> {
        if n > cutoff {
            return Err(Error::Window(format!("fundamental class of weight {n} exceeds cutoff {cutoff}")));
        }
        let word: Word = std::iter::repeat_n((-1, ring.unit_index()), n as usize).collect();
        let mut v = Self::zero(cutoff);
        v.add_term(word, &factorial(n as u64).recip());
        Ok(v)
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn with_cutoff(mut self, cutoff: u32) -> Self {
        self.cutoff = cutoff;
        self.terms.retain(|w, _| word_weight(w) <= cutoff as i64);
        self
    }

    /// Adds c·state; states above the cutoff are dropped.
    pub fn add_term(&mut self, word: Word, c: &Q) {
        if c.is_zero() || word_weight(&word) > self.cutoff as i64 {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// self + c·other, living in the larger of the two windows.
    pub fn add_scaled(&mut self, c: &Q, other: &FockVector) {
        self.cutoff = self.cutoff.max(other.cutoff);
        for (w, x) in &other.terms {
            self.add_term(w.clone(), &(c * x));
        }
    }

    pub fn scale(&self, c: &Q) -> FockVector {
        let mut out = Self::zero(self.cutoff);
        out.add_scaled(c, self);
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.add_scaled(&-Q::one(), other);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &[Factor]) -> Q {
        let key: Word = word.into();
        self.terms.get(&key).cloned().unwrap_or_else(Q::zero)
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.terms.keys().map(|w| word_weight(w)).max()
    }

    /// (weight, degree) if every state shares it.
    pub fn bidegree(&self, ring: &SurfaceRing) -> Option<(i64, u32)> {
        let mut it = self.terms.keys().map(|w| (word_weight(w), state_degree(ring, w)));
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    pub fn render(&self, ring: &SurfaceRing) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            s.push_str(&signed_prefix(c, k == 0));
            s.push(' ');
            s.push_str(&render_state(ring, w));
        }
        s
    }

    /// One JSON object per state.
    pub fn to_jsonl(&self, ring: &SurfaceRing) -> String {
        let mut out = String::new();
        for (w, c) in &self.terms {
            let rec = TermRecord {
                coef: fmt_q(c),
                state: render_state(ring, w),
                factors: w.iter().map(|&(m, x)| (m, ring.basis_name(x))).collect(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

/// a_n(x) applied to a creation monomial, n > 0.
pub(crate) fn annihilate(ring: &SurfaceRing, n: i32, x: Basis, word: &[Factor]) -> Vec<(Word, Q)> {
    debug_assert!(n > 0);
    let mut out = Vec::new();
    let px = ring.parity(x);
    let mut passed = 0u8;
    for (j, &(m, y)) in word.iter().enumerate() {
        if m == -n {
            let g = ring.pairing(x, y);
            if !g.is_zero() {
                // [a_n(x), a_{-n}(y)] = -n ∫(xy)
                let mut c = g * Q::from_integer((-n).into());
                if px & passed == 1 {
                    c = -c;
                }
                let mut rest: Word = word[..j].into();
                rest.extend_from_slice(&word[j + 1..]);
                out.push((rest, c));
            }
        }
        passed ^= ring.parity(y);
    }
    out
}

/// a_m(x) applied to a creation monomial, m < 0; `None` if it vanishes.
pub(crate) fn create(ring: &SurfaceRing, m: i32, x: Basis, word: &[Factor]) -> Option<(Word, bool)> {
    debug_assert!(m < 0);
    let f = (m, x);
    let pos = word.partition_point(|g| *g < f);
    let px = ring.parity(x);
    if px == 1 && word.get(pos) == Some(&f) {
        return None;
    }
    let passed: u8 = word[..pos].iter().map(|g| ring.parity(g.1)).fold(0, |a, b| a ^ b);
    let mut w: Word = SmallVec::with_capacity(word.len() + 1);
    w.extend_from_slice(&word[..pos]);
    w.push(f);
    w.extend_from_slice(&word[pos..]);
    Some((w, px & passed == 1))
}

/// Applies one Heisenberg factor to a vector.
pub fn apply_factor(ring: &SurfaceRing, f: Factor, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(v.cutoff);
    let (m, x) = f;
    if m == 0 {
        return out;
    }
    for (w, c) in &v.terms {
        if m > 0 {
            for (r, k) in annihilate(ring, m, x, w) {
                out.add_term(r, &(c * k));
            }
        } else if let Some((r, neg)) = create(ring, m, x, w) {
            out.add_term(r, &if neg { -c.clone() } else { c.clone() });
        }
    }
    out
}

/// Applies a word (not necessarily normal ordered), rightmost factor first.
pub fn apply_word(ring: &SurfaceRing, word: &[Factor], v: &FockVector) -> FockVector {
    let mut cur = v.clone();
    for &f in word.iter().rev() {
        if cur.is_zero() {
            break;
        }
        cur = apply_factor(ring, f, &cur);
    }
    cur
}

/// All creation monomials of weight w, in canonical order.
pub fn basis(ring: &SurfaceRing, w: u32) -> Vec<Word> {
    let dim = ring.dim() as Basis;
    // multisets of `count` classes, odd classes at most once
    fn multisets(ring: &SurfaceRing, dim: Basis, count: usize, start: Basis, cur: &mut Vec<Basis>, out: &mut Vec<Vec<Basis>>) {
        if count == 0 {
            out.push(cur.clone());
            return;
        }
        for x in start..dim {
            cur.push(x);
            let next = if ring.parity(x) == 1 { x + 1 } else { x };
            multisets(ring, dim, count - 1, next, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for parts in partitions(w) {
        // blocks of equal parts, largest part first so modes increase
        let mut blocks: Vec<(u32, usize)> = Vec::new();
        for &p in parts.iter().rev() {
            match blocks.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => blocks.push((p, 1)),
            }
        }
        let mut words: Vec<Word> = vec![Word::new()];
        for &(p, c) in &blocks {
            let mut choices = Vec::new();
            multisets(ring, dim, c, 0, &mut Vec::new(), &mut choices);
            let mut next = Vec::with_capacity(words.len() * choices.len());
            for w0 in &words {
                for ch in &choices {
                    let mut w1 = w0.clone();
                    w1.extend(ch.iter().map(|&x| (-(p as i32), x)));
                    next.push(w1);
                }
            }
            words = next;
        }
        out.extend(words);
    }
    out.sort();
    out
}

/// Number of basis states of weight w, without materializing them.
pub fn basis_len(ring: &SurfaceRing, w: u32) -> u128 {
    let even = (0..ring.dim() as Basis).filter(|&x| ring.parity(x) == 0).count() as u128;
    let odd = ring.dim() as u128 - even;
    // multisets of size c: Σ_j C(odd, j) · multichoose(even, c - j)
    let binom = |n: u128, k: u128| -> u128 {
        if k > n {
            return 0;
        }
        let mut acc = 1u128;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    };
    let multi = |n: u128, k: u128| -> u128 {
        if n == 0 {
            return (k == 0) as u128;
        }
        binom(n + k - 1, k)
    };
    let count = |c: u128| -> u128 { (0..=c).map(|j| binom(odd, j) * multi(even, c - j)).sum() };
    let mut total = 0u128;
    for parts in partitions(w) {
        let mut acc = 1u128;
        let mut i = 0;
        while i < parts.len() {
            let mut j = i;
            while j < parts.len() && parts[j] == parts[i] {
                j += 1;
            }
            acc *= count((j - i) as u128);
            i = j;
        }
        total += acc;
    }
    total
}

/// ⟨s, t⟩ for a single state s against a vector: adjoint rule
/// ⟨a_{-n}(x) u, v⟩ = (-1)^n ⟨u, a_n(x) v⟩ with ⟨|0>, |0>⟩ = 1.
fn pair_state(ring: &SurfaceRing, s: &[Factor], v: &FockVector) -> Q {
    let w = word_weight(s);
    let mut cur = FockVector::zero(v.cutoff);
    for (t, c) in &v.terms {
        if word_weight(t) == w {
            cur.add_term(t.clone(), c);
        }
    }
    let mut neg = false;
    for &(m, x) in s {
        if cur.is_zero() {
            return Q::zero();
        }
        cur = apply_factor(ring, (-m, x), &cur);
        if m % 2 != 0 {
            neg = !neg;
        }
    }
    let c = cur.coeff(&[]);
    if neg {
        -c
    } else {
        c
    }
}

pub fn pairing(ring: &SurfaceRing, u: &FockVector, v: &FockVector) -> Q {
    let mut acc = Q::zero();
    for (s, c) in &u.terms {
        let p = pair_state(ring, s, v);
        if !p.is_zero() {
            acc += c * p;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn p2() -> SurfaceRing {
        SurfaceRing::builtin("p2").unwrap()
    }

    fn st(ring: &SurfaceRing, fs: &[(i32, &str)]) -> Word {
        fs.iter().map(|&(m, n)| (m, ring.index_of(n).unwrap())).collect()
    }

    #[test]
    fn vacuum_and_fundamental_class() {
        let r = p2();
        let v = FockVector::vacuum(4);
        assert_eq!(v.bidegree(&r), Some((0, 0)));
        assert_eq!(pairing(&r, &v, &v), q(1));
        assert_eq!(FockVector::fundamental_class(&r, 0, 4).unwrap(), v);
        let f2 = FockVector::fundamental_class(&r, 2, 4).unwrap();
        assert_eq!(f2.coeff(&st(&r, &[(-1, "1"), (-1, "1")])), qf(1, 2));
        assert_eq!(f2.max_weight(), Some(2));
        assert!(FockVector::fundamental_class(&r, 5, 4).is_err());
    }

    #[test]
    fn basis_counts() {
        let r = p2();
        assert_eq!(basis(&r, 1).len(), 3);
        assert_eq!(basis(&r, 2).len(), 9);
        let ab = SurfaceRing::builtin("abelian").unwrap();
        assert_eq!(basis(&ab, 1).len(), 16);
        for ring in [r, ab, SurfaceRing::builtin("p1xp1").unwrap()] {
            for w in 0..=5 {
                assert_eq!(basis(&ring, w).len() as u128, basis_len(&ring, w), "{} w={w}", ring.name());
            }
        }
    }

    /// Independent count for all-even rings: product over blocks of multichoose(dim, mult).
    #[test]
    fn basis_count_brute_force_even() {
        let r = p2();
        for w in 1..=5u32 {
            let mut brute = std::collections::BTreeSet::new();
            // every sequence of (part, class) with parts summing to w, canonicalized
            fn rec(w: u32, dim: u16, cur: &mut Vec<(i32, u16)>, out: &mut std::collections::BTreeSet<Vec<(i32, u16)>>) {
                if w == 0 {
                    let mut s = cur.clone();
                    s.sort();
                    out.insert(s);
                    return;
                }
                for p in 1..=w {
                    for x in 0..dim {
                        cur.push((-(p as i32), x));
                        rec(w - p, dim, cur, out);
                        cur.pop();
                    }
                }
            }
            rec(w, 3, &mut Vec::new(), &mut brute);
            assert_eq!(basis(&r, w).len(), brute.len());
        }
    }

    #[test]
    fn pairing_examples() {
        let r = p2();
        let px = FockVector::from_state(st(&r, &[(-1, "x")]), 4);
        let one = FockVector::from_state(st(&r, &[(-1, "1")]), 4);
        assert_eq!(pairing(&r, &px, &one), q(1));
        let px2 = FockVector::from_state(st(&r, &[(-1, "x"), (-1, "x")]), 4);
        let f2 = FockVector::fundamental_class(&r, 2, 4).unwrap();
        assert_eq!(pairing(&r, &px2, &f2), q(1));
        let a2 = FockVector::from_state(st(&r, &[(-2, "1")]), 4);
        let a11 = FockVector::from_state(st(&r, &[(-1, "1"), (-1, "1")]), 4);
        assert_eq!(pairing(&r, &a2, &a11), q(0));
    }

    #[test]
    fn pairing_supersymmetric() {
        for name in ["p2", "abelian"] {
            let r = SurfaceRing::builtin(name).unwrap();
            for w in 1..=3 {
                let b = basis(&r, w);
                for s in &b {
                    for t in &b {
                        let u = FockVector::from_state(s.clone(), 4);
                        let v = FockVector::from_state(t.clone(), 4);
                        let st = pairing(&r, &u, &v);
                        let ts = pairing(&r, &v, &u);
                        let (ds, dt) = (state_degree(&r, s), state_degree(&r, t));
                        let want = if ds & dt & 1 == 1 { -ts.clone() } else { ts.clone() };
                        assert_eq!(st, want, "{name}");
                        if ds + dt != 4 * w {
                            assert!(st.is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn odd_repeats_vanish() {
        let ab = SurfaceRing::builtin("abelian").unwrap();
        let t1 = ab.index_of("t1").unwrap();
        let v = FockVector::from_state(Word::from_slice(&[(-1, t1)]), 3);
        assert!(apply_factor(&ab, (-1, t1), &v).is_zero());
        let t2 = ab.index_of("t2").unwrap();
        let a = apply_factor(&ab, (-1, t2), &v);
        let b = apply_factor(&ab, (-1, t1), &FockVector::from_state(Word::from_slice(&[(-1, t2)]), 3));
        assert_eq!(a, b.scale(&q(-1)));
    }

    #[test]
    fn rendering() {
        let r = p2();
        let mut v = FockVector::zero(4);
        v.add_term(st(&r, &[(-2, "H"), (-1, "1")]), &qf(3, 2));
        v.add_term(st(&r, &[(-1, "x")]), &q(-1));
        assert_eq!(v.render(&r), "3/2 a(-2;H) a(-1;1) |0> - 1 a(-1;x) |0>");
        assert!(v.to_jsonl(&r).lines().count() == 2);
    }
}
