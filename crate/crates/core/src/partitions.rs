//! Generalized partitions: finite multisets of nonzero integers.

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::{factorial, Q};

pub type Parts = SmallVec<[i32; 8]>;

/// Parts are kept sorted increasingly, so creation modes come first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenPartition {
    parts: Parts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stats {
    pub length: usize,
    pub size: i64,
    pub square_sum: i64,
    pub mult_factorial: Q,
}

impl GenPartition {
    pub fn new(parts: impl IntoIterator<Item = i32>) -> Result<Self> {
        let mut parts: Parts = parts.into_iter().collect();
        if parts.contains(&0) {
            return Err(Error::Invalid("generalized partitions have no zero parts".into()));
        }
        parts.sort_unstable();
        Ok(Self { parts })
    }

    /// Caller guarantees sorted nonzero parts.
    pub(crate) fn from_sorted(parts: Parts) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] <= w[1]) && !parts.contains(&0));
        Self { parts }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[i32] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// ℓ(λ)
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// |λ|
    pub fn size(&self) -> i64 {
        self.parts.iter().map(|&p| p as i64).sum()
    }

    /// s(λ) = Σ i² m_i
    pub fn square_sum(&self) -> i64 {
        self.parts.iter().map(|&p| (p as i64) * (p as i64)).sum()
    }

    /// (part, multiplicity) pairs in increasing part order.
    pub fn multiplicities(&self) -> Vec<(i32, u32)> {
        let mut out: Vec<(i32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// λ^! = Π m_i!
    pub fn mult_factorial(&self) -> Q {
        let mut acc = Q::from_integer(1.into());
        for (_, m) in self.multiplicities() {
            acc *= factorial(m as u64);
        }
        acc
    }

    pub fn stats(&self) -> Stats {
        Stats {
            length: self.len(),
            size: self.size(),
            square_sum: self.square_sum(),
            mult_factorial: self.mult_factorial(),
        }
    }

    pub fn negate(&self) -> Self {
        let mut parts: Parts = self.parts.iter().map(|p| -p).collect();
        parts.reverse();
        Self { parts }
    }

    /// Total of the positive parts (annihilation weight).
    pub fn positive_total(&self) -> i64 {
        self.parts.iter().filter(|&&p| p > 0).map(|&p| p as i64).sum()
    }

    pub fn count(&self, part: i32) -> usize {
        self.parts.iter().filter(|&&p| p == part).count()
    }

    /// Removes one copy of `part`; the caller guarantees presence.
    pub fn without(&self, part: i32) -> Self {
        let mut parts = self.parts.clone();
        let i = parts.iter().position(|&p| p == part).expect("part present");
        parts.remove(i);
        Self { parts }
    }

    pub fn with(&self, part: i32) -> Self {
        assert!(part != 0);
        let mut parts = self.parts.clone();
        let i = parts.partition_point(|&p| p <= part);
        parts.insert(i, part);
        Self { parts }
    }
}

impl fmt::Display for GenPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "()");
        }
        for (k, (p, m)) in self.multiplicities().into_iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            if p < 0 {
                write!(f, "({p})^{m}")?;
            } else {
                write!(f, "{p}^{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for GenPartition {
    type Err = Error;

    /// Accepts the display form, e.g. "(-2)^1 (-1)^2 1^3 4^1"; a bare part means multiplicity 1.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "()" {
            return Ok(Self::empty());
        }
        let bad = || Error::Parse(format!("bad generalized partition {s:?}"));
        let mut parts = Vec::new();
        for tok in t.split_whitespace() {
            let (base, mult) = match tok.split_once('^') {
                Some((b, m)) => (b, m.parse::<u32>().map_err(|_| bad())?),
                None => (tok, 1),
            };
            let base = base.trim_start_matches('(').trim_end_matches(')');
            let p: i32 = base.parse().map_err(|_| bad())?;
            if p == 0 || mult == 0 {
                return Err(bad());
            }
            parts.extend(std::iter::repeat_n(p, mult as usize));
        }
        Self::new(parts)
    }
}

/// Ordinary partitions of n into exactly k parts (each ≥ 1), parts in increasing order.
pub fn partitions_exact(n: u32, k: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, k: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut p = min;
        while p * k <= n {
            cur.push(p);
            rec(n - p, k - 1, p, cur, out);
            cur.pop();
            p += 1;
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, k, 1, &mut Vec::new(), &mut out);
    out
}

/// All ordinary partitions of n, parts in increasing order.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    (0..=n).flat_map(|k| partitions_exact(n, k)).collect()
}

/// Generalized partitions with ℓ(λ) = `length`, |λ| = `size` and positive parts
/// summing to at most `pos_bound`, in lexicographic order.
pub fn enumerate(length: usize, size: i64, pos_bound: i64) -> Vec<GenPartition> {
    let mut out = Vec::new();
    if pos_bound < 0 {
        return out;
    }
    for k in 0..=length {
        let neg = (length - k) as i64;
        for pos_total in (k as i64)..=pos_bound {
            if k == 0 && pos_total > 0 {
                break;
            }
            let neg_total = pos_total - size;
            if neg_total < neg || (neg == 0 && neg_total != 0) {
                continue;
            }
            let positives = partitions_exact(pos_total as u32, k as u32);
            let negatives = partitions_exact(neg_total as u32, neg as u32);
            for nparts in &negatives {
                for pparts in &positives {
                    let parts: Parts = nparts
                        .iter()
                        .rev()
                        .map(|&p| -(p as i32))
                        .chain(pparts.iter().map(|&p| p as i32))
                        .collect();
                    out.push(GenPartition::from_sorted(parts));
                }
            }
        }
    }
    out.sort();
    out
}

/// Ordinary partitions of n ≥ 1 with exactly `length` parts.
pub fn enumerate_ordinary(n: u32, length: usize) -> Vec<GenPartition> {
    let mut out: Vec<GenPartition> = partitions_exact(n, length as u32)
        .into_iter()
        .map(|p| GenPartition::from_sorted(p.into_iter().map(|x| x as i32).collect()))
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn gp(s: &str) -> GenPartition {
        s.parse().unwrap()
    }

    #[test]
    fn stats_examples() {
        let s = gp("(-2)^1 2^1").stats();
        assert_eq!((s.length, s.size, s.square_sum, s.mult_factorial), (2, 0, 8, q(1)));
        let s = gp("1^2").stats();
        assert_eq!((s.length, s.size, s.square_sum, s.mult_factorial), (2, 2, 2, q(2)));
        let s = gp("(-1)^1 1^1 3^1").stats();
        assert_eq!((s.length, s.size, s.square_sum, s.mult_factorial), (3, 3, 11, q(1)));
    }

    #[test]
    fn negate_examples() {
        assert_eq!(gp("(-2)^1 1^3").negate(), gp("(-1)^3 2^1"));
        assert_eq!(gp("1^2").negate(), gp("(-1)^2"));
        let l = gp("(-3)^1 2^1");
        assert_eq!(l.negate().negate(), l);
    }

    #[test]
    fn text_form() {
        let l = GenPartition::new([-2, -1, -1, 1, 1, 1, 4]).unwrap();
        assert_eq!(l.to_string(), "(-2)^1 (-1)^2 1^3 4^1");
        assert_eq!(gp(&l.to_string()), l);
        assert!(GenPartition::new([0, 1]).is_err());
        assert!("1^0".parse::<GenPartition>().is_err());
    }

    #[test]
    fn enumerate_examples() {
        let got = enumerate(2, 0, 3);
        let want = vec![gp("(-3)^1 3^1"), gp("(-2)^1 2^1"), gp("(-1)^1 1^1")];
        assert_eq!(got, want);
        assert_eq!(enumerate(1, -1, 0), vec![gp("(-1)^1")]);
        assert!(enumerate(2, 5, 3).is_empty());
    }

    #[test]
    fn ordinary_examples() {
        assert_eq!(enumerate_ordinary(2, 2), vec![gp("1^2")]);
        assert_eq!(enumerate_ordinary(3, 2), vec![gp("1^1 2^1")]);
        assert_eq!(enumerate_ordinary(1, 1), vec![gp("1^1")]);
    }

    /// Brute force over parts in [-r, r] \ {0}.
    fn brute(length: usize, size: i64, pos_bound: i64, r: i32) -> Vec<GenPartition> {
        let values: Vec<i32> = (-r..=r).filter(|&v| v != 0).collect();
        let mut out = Vec::new();
        fn rec(vals: &[i32], start: usize, left: usize, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..vals.len() {
                cur.push(vals[i]);
                rec(vals, i, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        rec(&values, 0, length, &mut Vec::new(), &mut all);
        for parts in all {
            let l = GenPartition::new(parts).unwrap();
            if l.size() == size && l.positive_total() <= pos_bound {
                out.push(l);
            }
        }
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn enumerate_matches_brute_force(length in 1usize..4, size in -4i64..5, pos_bound in 0i64..5) {
            // parts are bounded by pos_bound + |size| + pos_bound in absolute value
            let r = (2 * pos_bound + size.abs()) as i32 + 1;
            prop_assert_eq!(enumerate(length, size, pos_bound), brute(length, size, pos_bound, r));
        }

        #[test]
        fn negate_preserves_stats(parts in proptest::collection::vec(prop_oneof![-6i32..0, 1i32..7], 0..6)) {
            let l = GenPartition::new(parts).unwrap();
            let n = l.negate();
            prop_assert_eq!(n.size(), -l.size());
            prop_assert_eq!(n.len(), l.len());
            prop_assert_eq!(n.square_sum(), l.square_sum());
            prop_assert_eq!(n.mult_factorial(), l.mult_factorial());
            prop_assert_eq!(n.negate(), l);
        }
    }
}
