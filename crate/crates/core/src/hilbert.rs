//! Classes on the Hilbert schemes X^[n]: components G_k(α, n) of the Chern
//! character of the universal family, their cup products, and intersection
//! numbers of point-class generators.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::{self, canonicalize, FockVector, Word};
use crate::operators::OperatorSum;
use crate::partitions::enumerate_ordinary;
use crate::rational::{factorial, q, qf, Q};
use crate::ring::{RingElem, SurfaceRing};
use crate::walgebra;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernClassRequest {
    pub k: usize,
    pub alpha: RingElem,
    pub n: u32,
}

/// ∫ Π_i G_{k_i}([x], n) over X^[n]; requires Σ (k_i + 2) = 2n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionRequest {
    pub exponents: Vec<usize>,
    pub n: u32,
}

impl IntersectionRequest {
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.exponents.iter().map(|k| k + 2).sum();
        if total != 2 * self.n as usize {
            return Err(Error::Invalid(format!(
                "exponents {:?} give total degree {total}, need 2n = {}",
                self.exponents,
                2 * self.n
            )));
        }
        Ok(())
    }
}

fn require_kills_canonical(ring: &SurfaceRing, alpha: &RingElem) -> Result<()> {
    if ring.kills_canonical(alpha) {
        Ok(())
    } else {
        Err(Error::CanonicalNotOrthogonal(ring.render(alpha)))
    }
}

fn require_cutoff(n: u32, cutoff: u32) -> Result<()> {
    if n > cutoff {
        return Err(Error::Window(format!("n = {n} exceeds cutoff {cutoff}")));
    }
    Ok(())
}

/// 𝔊_k(α) as an explicit operator exact on weights ≤ n.
pub fn chern_operator(ring: &SurfaceRing, k: usize, alpha: &RingElem, n: u32) -> Result<OperatorSum> {
    require_kills_canonical(ring, alpha)?;
    Ok(OperatorSum::from_smeared(ring, &walgebra::chern(k, n as i64), alpha))
}

/// G_k(α, n) = 𝔊_k(α) 1_{X^[n]}.
pub fn chern_class(ring: &SurfaceRing, req: &ChernClassRequest, cutoff: u32) -> Result<FockVector> {
    require_cutoff(req.n, cutoff)?;
    let op = chern_operator(ring, req.k, &req.alpha, req.n)?;
    op.apply(ring, &FockVector::fundamental_class(ring, req.n, cutoff)?)
}

/// a_{-λ_1}⋯a_{-λ_ℓ}(τ_{ℓ*} class)|0⟩ for an ordinary partition λ.
fn creation_state(ring: &SurfaceRing, parts: &[i32], class: &RingElem, cutoff: u32) -> FockVector {
    let mut out = FockVector::zero(cutoff);
    if class.is_zero() {
        return out;
    }
    let tau = ring.diagonal_pushforward(class, parts.len()).expect("nonempty partition");
    for (slots, c) in tau.iter() {
        let word: Word = parts.iter().zip(slots.iter()).map(|(&p, &x)| (-p, x)).collect();
        if let Some((w, neg)) = canonicalize(ring, &word) {
            out.add_term(w, &if neg { -c.clone() } else { c.clone() });
        }
    }
    out
}

/// a_{-1}(1_X)^r / r! applied to v.
fn fundamental_factor(ring: &SurfaceRing, r: u32, v: &FockVector) -> FockVector {
    let mut cur = v.clone();
    for _ in 0..r {
        cur = fock::apply_factor(ring, (-1, ring.unit_index()), &cur);
    }
    cur.scale(&factorial(r as u64).recip())
}

/// The closed expansion of G_k(α, n) for K·α = 0:
/// Σ_j Σ_{λ⊢j+1, ℓ=k-j+1} (-1)^{|λ|-1}/(λ^!|λ|!) 1_{-(n-j-1)} a_{-λ}(τα)|0⟩
/// + Σ_j Σ_{λ⊢j+1, ℓ=k-j-1} (-1)^{|λ|}/(λ^!|λ|!) (|λ|+s(λ)-2)/24 1_{-(n-j-1)} a_{-λ}(τ(eα))|0⟩.
pub fn chern_class_closed(ring: &SurfaceRing, req: &ChernClassRequest, cutoff: u32) -> Result<FockVector> {
    require_cutoff(req.n, cutoff)?;
    require_kills_canonical(ring, &req.alpha)?;
    let (k, n) = (req.k, req.n as usize);
    let e_alpha = ring.multiply(ring.euler(), &req.alpha);
    let mut out = FockVector::zero(cutoff);
    for j in 0..=k {
        if j + 1 > n {
            break;
        }
        let size = (j + 1) as u32;
        let rest = (n - j - 1) as u32;
        let sign = if j % 2 == 0 { q(1) } else { q(-1) };
        let norm = |l: &crate::partitions::GenPartition| l.mult_factorial() * factorial(size as u64);
        for l in enumerate_ordinary(size, k - j + 1) {
            let c = &sign / norm(&l);
            let v = creation_state(ring, l.parts(), &req.alpha, cutoff);
            out.add_scaled(&c, &fundamental_factor(ring, rest, &v));
        }
        if k >= j + 2 {
            for l in enumerate_ordinary(size, k - j - 1) {
                let c = -&sign / norm(&l) * qf(size as i64 + l.square_sum() - 2, 24);
                let v = creation_state(ring, l.parts(), &e_alpha, cutoff);
                out.add_scaled(&c, &fundamental_factor(ring, rest, &v));
            }
        }
    }
    Ok(out)
}

/// G_{k_1}(α_1, n)⋯G_{k_s}(α_s, n) = 𝔊_{k_1}(α_1)⋯𝔊_{k_s}(α_s) 1_{X^[n]}.
pub fn cup_product(ring: &SurfaceRing, factors: &[(usize, RingElem)], n: u32, cutoff: u32) -> Result<FockVector> {
    require_cutoff(n, cutoff)?;
    let ops = factors
        .iter()
        .map(|(k, a)| chern_operator(ring, *k, a, n))
        .collect::<Result<Vec<_>>>()?;
    let mut v = FockVector::fundamental_class(ring, n, cutoff)?;
    for op in ops.iter().rev() {
        v = op.apply(ring, &v)?;
    }
    Ok(v)
}

/// ∫_{X^[n]} of a top-degree class, normalized so the point class integrates to 1.
pub fn integrate(ring: &SurfaceRing, v: &FockVector, n: u32) -> Result<Q> {
    Ok(fock::pairing(ring, v, &FockVector::fundamental_class(ring, n, v.cutoff().max(n))?))
}

pub fn intersection_number(ring: &SurfaceRing, req: &IntersectionRequest, cutoff: u32) -> Result<Q> {
    req.validate()?;
    let x = ring.point_class();
    let factors: Vec<(usize, RingElem)> = req.exponents.iter().map(|&k| (k, x.clone())).collect();
    let v = cup_product(ring, &factors, req.n, cutoff)?;
    integrate(ring, &v, req.n)
}

/// Σ_{0≤j_i≤k_i, Σ(j_i+1)=n} Π_i Σ_{λ_i⊢j_i+1, ℓ(λ_i)=k_i-j_i+1} (-1)^{|λ_i|-1}/(λ_i^! |λ_i|!)
pub fn intersection_number_closed(req: &IntersectionRequest) -> Result<Q> {
    req.validate()?;
    // inner[i][j] = Σ over λ ⊢ j+1 with ℓ(λ) = k_i - j + 1
    let inner: Vec<Vec<Q>> = req
        .exponents
        .iter()
        .map(|&k| {
            (0..=k)
                .map(|j| {
                    let size = (j + 1) as u32;
                    let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
                    enumerate_ordinary(size, k - j + 1)
                        .iter()
                        .map(|l| &sign / (l.mult_factorial() * factorial(size as u64)))
                        .fold(Q::zero(), |a, b| a + b)
                })
                .collect()
        })
        .collect();
    fn rec(inner: &[Vec<Q>], left: i64, acc: &Q) -> Q {
        match inner.split_first() {
            None => {
                if left == 0 {
                    acc.clone()
                } else {
                    Q::zero()
                }
            }
            Some((row, rest)) => {
                let mut total = Q::zero();
                for (j, c) in row.iter().enumerate() {
                    let used = j as i64 + 1;
                    if used > left {
                        break;
                    }
                    if !c.is_zero() {
                        total += rec(rest, left - used, &(acc * c));
                    }
                }
                total
            }
        }
    }
    Ok(rec(&inner, req.n as i64, &Q::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(name: &str) -> SurfaceRing {
        SurfaceRing::builtin(name).unwrap()
    }

    fn req(ks: &[usize], n: u32) -> IntersectionRequest {
        IntersectionRequest { exponents: ks.to_vec(), n }
    }

    #[test]
    fn closed_intersection_values() {
        assert_eq!(intersection_number_closed(&req(&[0], 1)).unwrap(), q(1));
        assert_eq!(intersection_number_closed(&req(&[2], 2)).unwrap(), qf(-1, 4));
        assert_eq!(intersection_number_closed(&req(&[0, 0], 2)).unwrap(), q(1));
        assert!(intersection_number_closed(&req(&[1], 2)).is_err());
    }

    #[test]
    fn operator_route_matches_closed_sum() {
        for name in ["p2", "k3"] {
            let r = ring(name);
            for (ks, n) in [(vec![0], 1), (vec![2], 2), (vec![0, 0], 2), (vec![1, 1], 3), (vec![4], 3)] {
                let rq = req(&ks, n);
                assert_eq!(
                    intersection_number(&r, &rq, 4).unwrap(),
                    intersection_number_closed(&rq).unwrap(),
                    "{name} {ks:?}"
                );
            }
        }
    }

    #[test]
    fn chern_class_low_cases() {
        let r = ring("k3");
        let u1 = r.parse_elem("u1").unwrap();
        let g = chern_class(&r, &ChernClassRequest { k: 0, alpha: u1.clone(), n: 1 }, 4).unwrap();
        let want = FockVector::from_state(Word::from_slice(&[(-1, r.index_of("u1").unwrap())]), 4);
        assert_eq!(g, want);
        let rq = ChernClassRequest { k: 1, alpha: r.unit(), n: 2 };
        assert_eq!(chern_class(&r, &rq, 4).unwrap(), chern_class_closed(&r, &rq, 4).unwrap());
    }

    #[test]
    fn canonical_class_gate() {
        let r = ring("p2");
        let rq = ChernClassRequest { k: 1, alpha: r.unit(), n: 2 };
        assert!(matches!(chern_class(&r, &rq, 4), Err(Error::CanonicalNotOrthogonal(_))));
        let rq = ChernClassRequest { k: 1, alpha: r.point_class(), n: 2 };
        assert!(chern_class(&r, &rq, 4).is_ok());
    }
}
