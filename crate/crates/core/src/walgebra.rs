//! Named operators as smeared sums: Virasoro L_n, Chern character G_k,
//! the W-generators J^p_n, Fourier components of normally ordered fields,
//! the Ω polynomial and the bracket of the abstract W algebra.
//!
//! Every constructor returns a [`SmearedOp`] over an implicit base class α;
//! a factor of e in a label means the term is smeared over eα.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::partitions::{enumerate, GenPartition};
use crate::rational::{factorial, q, qf, Q};
use crate::smeared::{ClassPoly, SmearedOp};

/// a_n(α); a_0 = 0.
pub fn heisenberg(n: i64, window: i64) -> SmearedOp {
    if n == 0 {
        return SmearedOp::zero(0, window);
    }
    SmearedOp::monomial(GenPartition::new([n as i32]).expect("nonzero"), window)
}

/// Σ_{ℓ(λ)=len, |λ|=n} coef(λ)/λ^! · a_λ(τ_*(label·α))
fn partition_sum(len: usize, n: i64, window: i64, label: &ClassPoly, coef: impl Fn(&GenPartition) -> Q) -> SmearedOp {
    let mut out = SmearedOp::zero(n, window);
    if len == 0 {
        // the empty partition never contributes to these sums
        return out;
    }
    for l in enumerate(len, n, window) {
        let c = coef(&l) / l.mult_factorial();
        out.add_term(l, &label.scale(&c));
    }
    out
}

/// L_n(α) = -½ Σ_m :a_m a_{n-m}:(τ_{2*}α) = -Σ_{ℓ(λ)=2, |λ|=n} a_λ(τ_*α)/λ^!
pub fn virasoro(n: i64, window: i64) -> SmearedOp {
    partition_sum(2, n, window, &ClassPoly::one(), |_| -Q::one())
}

/// The Chern character operator G_k(α), valid for K·α = 0:
/// -Σ_{ℓ=k+2,|λ|=0} a_λ(τα)/λ^! + Σ_{ℓ=k,|λ|=0} (s(λ)-2)/(24λ^!) a_λ(τ(eα)).
pub fn chern(k: usize, window: i64) -> SmearedOp {
    let mut out = partition_sum(k + 2, 0, window, &ClassPoly::one(), |_| -Q::one());
    let e_part = partition_sum(k, 0, window, &ClassPoly::euler(), |l| qf(l.square_sum() - 2, 24));
    out.add_scaled(&Q::one(), &e_part);
    out
}

/// J^p_n(α) = p!(-Σ_{ℓ=p+1,|λ|=n} a_λ(τα)/λ^! + Σ_{ℓ=p-1,|λ|=n} (s(λ)+n²-2)/(24λ^!) a_λ(τ(eα))).
pub fn jay(p: usize, n: i64, window: i64) -> SmearedOp {
    let pf = factorial(p as u64);
    let mut out = partition_sum(p + 1, n, window, &ClassPoly::one(), |_| -pf.clone());
    if p >= 1 {
        let e_part = partition_sum(p - 1, n, window, &ClassPoly::euler(), |l| {
            &pf * qf(l.square_sum() + n * n - 2, 24)
        });
        out.add_scaled(&Q::one(), &e_part);
    }
    out
}

/// The boundary operator 𝔡 as a smeared sum over the base class 1_X:
/// -Σ_{ℓ(λ)=3,|λ|=0} a_λ(τ_*1_X)/λ^! - Σ_{k>0} (k-1)/2 · a_{-k}a_k(τ_{2*}K).
pub fn boundary(window: i64) -> SmearedOp {
    let mut out = partition_sum(3, 0, window, &ClassPoly::one(), |_| -Q::one());
    for k in 2..=window.max(0) {
        let l = GenPartition::new([-(k as i32), k as i32]).expect("nonzero");
        out.add_term(l, &ClassPoly::canonical().scale(&qf(-(k - 1), 2)));
    }
    out
}

/// f' = [𝔡, f], on the window of f.
pub fn derivative(f: &SmearedOp) -> Result<SmearedOp> {
    let d = boundary(f.window() + (-f.mode()).max(0));
    d.commutator(f)
}

pub fn derivative_k(f: &SmearedOp, k: usize) -> Result<SmearedOp> {
    let mut cur = f.clone();
    for _ in 0..k {
        cur = derivative(&cur)?;
    }
    Ok(cur)
}

/// Closed form of the k-th derivative of a_n(α) for K·α = 0:
/// (-n)^k k! (Σ_{ℓ=k+1,|λ|=n} a_λ(τα)/λ^! - Σ_{ℓ=k-1,|λ|=n} (s(λ)-1)/(24λ^!) a_λ(τ(eα))).
pub fn heisenberg_derivative_closed(k: usize, n: i64, window: i64) -> SmearedOp {
    let pre = pow(-n, k) * factorial(k as u64);
    let mut out = partition_sum(k + 1, n, window, &ClassPoly::one(), |_| pre.clone());
    if k >= 1 {
        let e_part = partition_sum(k - 1, n, window, &ClassPoly::euler(), |l| -&pre * qf(l.square_sum() - 1, 24));
        out.add_scaled(&Q::one(), &e_part);
    }
    out
}

fn pow(base: i64, k: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..k {
        acc *= q(base);
    }
    acc
}

/// Σ_{ℓ=k+1,|λ|=n} a_λ(τα)/λ^! - Σ_{ℓ=k-1,|λ|=n} (s(λ)+d)/(24λ^!) a_λ(τ(eα)).
pub fn shifted_sum(k: usize, n: i64, d: i64, window: i64) -> SmearedOp {
    let mut out = partition_sum(k + 1, n, window, &ClassPoly::one(), |_| Q::one());
    if k >= 1 {
        let e_part = partition_sum(k - 1, n, window, &ClassPoly::euler(), |l| -qf(l.square_sum() + d, 24));
        out.add_scaled(&Q::one(), &e_part);
    }
    out
}

/// Predicted derivative of [`shifted_sum`]:
/// -n(k+1)·(shifted_sum at k+1) - n(d+1)/12 · Σ_{ℓ=k,|λ|=n} a_λ(τ(eα))/λ^!.
pub fn shifted_sum_derivative(k: usize, n: i64, d: i64, window: i64) -> SmearedOp {
    let mut out = shifted_sum(k + 1, n, d, window).scale(&q(-n * (k as i64 + 1)));
    let tail = partition_sum(k, n, window, &ClassPoly::euler(), |_| Q::one());
    out.add_scaled(&qf(-n * (d + 1), 12), &tail);
    out
}

/// Derivative orders (r_1, …, r_k) of the field :(∂^{r_1}a)⋯(∂^{r_k}a):(τ_*α).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierSpec {
    pub orders: Vec<u32>,
}

impl FourierSpec {
    pub fn new(orders: Vec<u32>) -> Self {
        Self { orders }
    }

    /// :a^k:
    pub fn power(k: usize) -> Self {
        Self { orders: vec![0; k] }
    }

    pub fn arity(&self) -> usize {
        self.orders.len()
    }

    /// Conformal weight Σ (1 + r_t).
    pub fn conformal_weight(&self) -> i64 {
        self.orders.iter().map(|&r| 1 + r as i64).sum()
    }
}

/// Coefficient of a_i in the derivative field ∂^r a: Π_{s=1}^{r} (-i-s).
pub fn derivative_coefficient(r: u32, i: i64) -> Q {
    let mut acc = Q::one();
    for s in 1..=r as i64 {
        acc *= q(-i - s);
    }
    acc
}

/// m-th Fourier component: Σ_{i_1+…+i_k=m} Π_t c_{r_t}(i_t) :a_{i_1}⋯a_{i_k}:(τ_*α).
/// A field with no factors is taken to be zero.
pub fn fourier(spec: &FourierSpec, m: i64, window: i64) -> SmearedOp {
    let mut out = SmearedOp::zero(m, window);
    let k = spec.arity();
    if k == 0 {
        return out;
    }
    for l in enumerate(k, m, window) {
        let c = permutation_sum(l.parts(), &spec.orders);
        out.add_term(l, &ClassPoly::scalar(c));
    }
    out
}

/// Σ over distinct orderings (i_1..i_k) of the multiset `parts` of Π c_{r_t}(i_t).
fn permutation_sum(parts: &[i32], orders: &[u32]) -> Q {
    fn rec(counts: &mut Vec<(i32, usize)>, orders: &[u32], t: usize, acc: &Q, total: &mut Q) {
        if t == orders.len() {
            *total += acc;
            return;
        }
        for idx in 0..counts.len() {
            if counts[idx].1 == 0 {
                continue;
            }
            let v = counts[idx].0;
            let c = derivative_coefficient(orders[t], v as i64);
            if c.is_zero() {
                continue;
            }
            counts[idx].1 -= 1;
            rec(counts, orders, t + 1, &(acc * c), total);
            counts[idx].1 += 1;
        }
    }
    let mut counts: Vec<(i32, usize)> = Vec::new();
    for &p in parts {
        match counts.last_mut() {
            Some((v, c)) if *v == p => *c += 1,
            _ => counts.push((p, 1)),
        }
    }
    let mut total = Q::zero();
    rec(&mut counts, orders, 0, &Q::one(), &mut total);
    total
}

/// Fourier component of the r-th derivative of a field of conformal weight Δ:
/// (∂^r φ)_m = Π_{s=0}^{r-1} (-m-Δ-s) · φ_m.
pub fn field_derivative(phi_m: &SmearedOp, delta: i64, r: u32) -> SmearedOp {
    let m = phi_m.mode();
    let mut c = Q::one();
    for s in 0..r as i64 {
        c *= q(-m - delta - s);
    }
    phi_m.scale(&c)
}

/// J^p_m(α) written through fields:
/// -1/(p+1) :a^{p+1}:_m(τα) + p(m²-3m-2p)/24 :a^{p-1}:_m(τ(eα)) + p(p-1)/24 :(∂²a)a^{p-2}:_m(τ(eα)).
pub fn jay_via_fields(p: usize, m: i64, window: i64) -> SmearedOp {
    let pi = p as i64;
    let mut out = fourier(&FourierSpec::power(p + 1), m, window).scale(&qf(-1, pi + 1));
    if p >= 1 {
        let second = fourier(&FourierSpec::power(p - 1), m, window).mul_class(&ClassPoly::euler());
        out.add_scaled(&qf(pi * (m * m - 3 * m - 2 * pi), 24), &second);
    }
    if p >= 2 {
        let mut orders = vec![2];
        orders.extend(std::iter::repeat_n(0, p - 2));
        let third = fourier(&FourierSpec::new(orders), m, window).mul_class(&ClassPoly::euler());
        out.add_scaled(&qf(pi * (pi - 1), 24), &third);
    }
    out
}

/// The integer Ω^{p,q}_{m,n}.
pub fn omega(p: i64, q: i64, m: i64, n: i64) -> i128 {
    let (p, q, m, n) = (p as i128, q as i128, m as i128, n as i128);
    m * p.pow(3) * n.pow(2) + 3 * m * p.pow(2) * n.pow(2) * q - p.pow(2) * n * q + p.pow(2) * q * n.pow(3)
        - 3 * m * p.pow(2) * n.pow(2)
        + p * n * q
        + 3 * m.pow(2) * p * n * q
        - 3 * m * p * n.pow(2) * q
        - m.pow(3) * q.pow(2) * p
        - p * q * n.pow(3)
        - m * p * q
        + m.pow(3) * p * q
        + m * p * q.pow(2)
        + 2 * m * p * n.pow(2)
        - 3 * m.pow(2) * p * n * q.pow(2)
        - 2 * m.pow(2) * n * q
        + 3 * m.pow(2) * n * q.pow(2)
        - m.pow(2) * n * q.pow(3)
}

/// Right-hand side of [J^p_m(α), J^q_n(β)] over the base class αβ.
pub fn jay_bracket(p: usize, q_: usize, m: i64, n: i64, window: i64) -> SmearedOp {
    let (pi, qi) = (p as i64, q_ as i64);
    let delta = |a: i64, b: i64| if a == -b { 1 } else { 0 };
    let central = |c: Q| SmearedOp::identity(&ClassPoly::euler().scale(&c), window);
    let unordered = (p.min(q_), p.max(q_));
    let mode = m + n;
    let swapped = p < q_;
    match unordered {
        (0, 0) if delta(m, n) == 1 => SmearedOp::identity(&ClassPoly::scalar(q(-m)), window),
        (0, 0) => SmearedOp::zero(mode, window),
        (0, 1) => {
            // [J^1_m, J^0_n] = -n J^0_{m+n}; the swapped order follows by antisymmetry
            if swapped {
                jay(0, mode, window).scale(&q(m))
            } else {
                jay(0, mode, window).scale(&q(-n))
            }
        }
        (0, 2) => {
            if swapped {
                // [J^0_m, J^2_n] = -[J^2_n, J^0_m]
                let mut out = jay(1, mode, window).scale(&q(2 * m));
                if delta(m, n) == 1 {
                    out.add_scaled(&Q::one(), &central(-qf(n * n * n - n, 6)));
                }
                out
            } else {
                let mut out = jay(1, mode, window).scale(&q(-2 * n));
                if delta(m, n) == 1 {
                    out.add_scaled(&Q::one(), &central(qf(m * m * m - m, 6)));
                }
                out
            }
        }
        (1, 1) => {
            let mut out = jay(1, mode, window).scale(&q(m - n));
            if delta(m, n) == 1 {
                out.add_scaled(&Q::one(), &central(qf(m * m * m - m, 12)));
            }
            out
        }
        _ => {
            let mut out = jay(p + q_ - 1, mode, window).scale(&q(qi * m - pi * n));
            if p + q_ >= 3 {
                let om = omega(pi, qi, m, n);
                let tail = jay(p + q_ - 3, mode, window).mul_class(&ClassPoly::euler());
                out.add_scaled(&-Q::new((om as i64).into(), 12.into()), &tail);
            }
            out
        }
    }
}

/// A structure constant of the abstract W algebra:
/// [L^p_m(α), L^q_n(β)] = coefficient · L^{p+q-1}_{m+n}(αβ), or a multiple of Tr(αβ)·C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractBracket {
    /// coefficient of L^{p}_{mode}(αβ)
    Term { p: usize, mode: i64, coefficient: i64 },
    /// coefficient of Tr(αβ)·C
    Central { coefficient: i64 },
}

pub fn abstract_bracket(p: usize, m: i64, q_: usize, n: i64) -> AbstractBracket {
    if p == 0 && q_ == 0 {
        AbstractBracket::Central { coefficient: if m == -n { m } else { 0 } }
    } else {
        AbstractBracket::Term {
            p: p + q_ - 1,
            mode: m + n,
            coefficient: q_ as i64 * m - p as i64 * n,
        }
    }
}

/// Integer polynomial in D, lowest degree first.
pub type DPoly = Vec<i128>;

fn poly_mul(a: &DPoly, b: &DPoly) -> DPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// (D + s)^p
fn shifted_power(s: i64, p: usize) -> DPoly {
    let mut acc: DPoly = vec![1];
    for _ in 0..p {
        acc = poly_mul(&acc, &vec![s as i128, 1]);
    }
    acc
}

/// [t^m D^p, t^n D^q] = t^{m+n}((D+n)^p D^q - D^p (D+m)^q) in the algebra of
/// differential operators on the circle; returns the polynomial in D.
pub fn differential_bracket(p: usize, m: i64, q_: usize, n: i64) -> DPoly {
    let left = poly_mul(&shifted_power(n, p), &shifted_power(0, q_));
    let right = poly_mul(&shifted_power(0, p), &shifted_power(m, q_));
    let len = left.len().max(right.len());
    let mut out = vec![0i128; len];
    for (i, x) in left.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in right.iter().enumerate() {
        out[i] -= x;
    }
    out
}

/// The leading structure constant read off from [`differential_bracket`],
/// with L^p_k = -t^k D^p: the bracket of two such basis elements is
/// t^{m+n}(…) and its D^{p+q-1} coefficient c gives -c·L^{p+q-1}_{m+n}.
pub fn bracket_from_differential_operators(p: usize, m: i64, q_: usize, n: i64) -> Result<AbstractBracket> {
    let poly = differential_bracket(p, m, q_, n);
    let top = p + q_;
    if poly.get(top).copied().unwrap_or(0) != 0 {
        return Err(Error::Invalid("degree p+q term of the bracket does not cancel".into()));
    }
    if p == 0 && q_ == 0 {
        // t^m and t^n commute; the central term is the cocycle of the extension
        return Ok(AbstractBracket::Central { coefficient: if m == -n { m } else { 0 } });
    }
    let c = poly.get(top - 1).copied().unwrap_or(0);
    Ok(AbstractBracket::Term { p: top - 1, mode: m + n, coefficient: -(c as i64) })
}

/// An operator addressed by name: "a(-1;x)", "L(2;1)", "G(1;x)", "J(2,-1;x)" or "d".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedOperator {
    pub kind: NamedKind,
    /// basis-class expression; `None` for the boundary operator
    pub class: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedKind {
    Heisenberg(i64),
    Virasoro(i64),
    Chern(usize),
    Jay(usize, i64),
    Boundary,
}

impl NamedOperator {
    /// Universal term list, exact on weights ≤ window.
    pub fn terms(&self, window: i64) -> SmearedOp {
        match self.kind {
            NamedKind::Heisenberg(n) => heisenberg(n, window),
            NamedKind::Virasoro(n) => virasoro(n, window),
            NamedKind::Chern(k) => chern(k, window),
            NamedKind::Jay(p, n) => jay(p, n, window),
            NamedKind::Boundary => boundary(window),
        }
    }

    /// Whether the closed form needs K·α = 0.
    pub fn needs_kills_canonical(&self) -> bool {
        matches!(self.kind, NamedKind::Chern(_))
    }
}

impl std::str::FromStr for NamedOperator {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("operator {text:?}: expected a(n;α), L(n;α), G(k;α), J(p,n;α) or d"));
        let t = text.trim();
        if t == "d" {
            return Ok(Self { kind: NamedKind::Boundary, class: None });
        }
        let open = t.find('(').ok_or_else(bad)?;
        let inner = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let (args, class) = inner.split_once(';').ok_or_else(bad)?;
        let nums: Vec<i64> = args
            .split(',')
            .map(|a| a.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let natural = |x: i64| usize::try_from(x).map_err(|_| bad());
        let kind = match (&t[..open], nums.as_slice()) {
            ("a", [n]) => NamedKind::Heisenberg(*n),
            ("L", [n]) => NamedKind::Virasoro(*n),
            ("G", [k]) => NamedKind::Chern(natural(*k)?),
            ("J", [p, n]) => NamedKind::Jay(natural(*p)?, *n),
            _ => return Err(bad()),
        };
        let class = class.trim();
        if class.is_empty() {
            return Err(bad());
        }
        Ok(Self { kind, class: Some(class.to_string()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_names() {
        let j: NamedOperator = "J(2,-1;x)".parse().unwrap();
        assert_eq!(j.kind, NamedKind::Jay(2, -1));
        assert_eq!(j.class.as_deref(), Some("x"));
        assert_eq!("d".parse::<NamedOperator>().unwrap().kind, NamedKind::Boundary);
        assert_eq!("L(-2; 1)".parse::<NamedOperator>().unwrap().kind, NamedKind::Virasoro(-2));
        for bad in ["J(2;x)", "G(-1;x)", "a(1)", "Q(1;x)", "a(1;)"] {
            assert!(bad.parse::<NamedOperator>().is_err(), "{bad}");
        }
    }

    #[test]
    fn omega_vanishing_patterns() {
        for p in 0..6 {
            for q_ in 0..6 {
                assert_eq!(omega(p, q_, 0, 0), 0);
            }
        }
        for m in -5..=5 {
            for n in -5..=5 {
                assert_eq!(omega(0, 0, m, n), 0);
            }
        }
    }

    #[test]
    fn omega_antisymmetry() {
        for p in 0..=5 {
            for q_ in 0..=5 {
                for m in -5..=5 {
                    for n in -5..=5 {
                        assert_eq!(omega(p, q_, m, n), -omega(q_, p, n, m), "{p} {q_} {m} {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn omega_sample_value() {
        // direct evaluation of the 18 monomials at p=q=2, m=1, n=-1
        let terms: [i128; 18] = [8, 24, 8, -8, -12, -4, -12, -12, -8, 4, -4, 4, 8, 4, 24, 4, -12, 8];
        assert_eq!(omega(2, 2, 1, -1), terms.iter().sum::<i128>());
    }

    #[test]
    fn derivative_field_coefficients() {
        assert_eq!(derivative_coefficient(0, 5), q(1));
        assert_eq!(derivative_coefficient(1, 2), q(-3));
        assert_eq!(derivative_coefficient(2, -1), q(0));
        assert_eq!(derivative_coefficient(2, 1), q(6));
    }

    #[test]
    fn jay_low_cases() {
        for n in -3..=3i64 {
            if n != 0 {
                assert_eq!(jay(0, n, 6).first_difference(&heisenberg(n, 6).scale(&q(-1))), None);
            }
            assert_eq!(jay(1, n, 6).first_difference(&virasoro(n, 6)), None);
        }
    }

    #[test]
    fn abstract_bracket_examples() {
        assert_eq!(abstract_bracket(0, 2, 0, -2), AbstractBracket::Central { coefficient: 2 });
        assert_eq!(abstract_bracket(0, 2, 0, 1), AbstractBracket::Central { coefficient: 0 });
        assert_eq!(
            abstract_bracket(1, 2, 1, -1),
            AbstractBracket::Term { p: 1, mode: 1, coefficient: 3 }
        );
    }

    #[test]
    fn differential_operator_oracle_agrees() {
        for p in 0..=4 {
            for q_ in 0..=4 {
                for m in -3..=3 {
                    for n in -3..=3 {
                        assert_eq!(
                            bracket_from_differential_operators(p, m, q_, n).unwrap(),
                            abstract_bracket(p, m, q_, n)
                        );
                    }
                }
            }
        }
    }
}
