//! Graded super-commutative Frobenius algebras modelling H*(X) of a surface,
//! with the canonical class, the Euler class and the diagonal pushforwards.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, q, Q};

pub type Basis = u16;
pub type Slots = SmallVec<[Basis; 8]>;

/// Sparse linear combination of basis classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem {
    coeffs: BTreeMap<Basis, Q>,
}

impl RingElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(i: Basis) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, Q::one());
        Self { coeffs }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Basis, Q)>) -> Self {
        let mut out = Self::zero();
        for (i, c) in terms {
            out.add_term(i, &c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: Basis) -> Q {
        self.coeffs.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Basis, &Q)> {
        self.coeffs.iter().map(|(i, c)| (*i, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, i: Basis, c: &Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(i).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &RingElem) {
        for (i, x) in other.iter() {
            self.add_term(i, &(c * x));
        }
    }

    pub fn add(&self, other: &RingElem) -> RingElem {
        let mut out = self.clone();
        out.add_scaled(&Q::one(), other);
        out
    }

    pub fn sub(&self, other: &RingElem) -> RingElem {
        let mut out = self.clone();
        out.add_scaled(&-Q::one(), other);
        out
    }

    pub fn scale(&self, c: &Q) -> RingElem {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(i, x)| (*i, x * c)).collect(),
        }
    }
}

/// Element of H*(X)^{⊗k}: coefficient per ordered tuple of basis classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSum {
    arity: usize,
    terms: BTreeMap<Slots, Q>,
}

impl TensorSum {
    pub fn new(arity: usize) -> Self {
        Self {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn add_term(&mut self, slots: Slots, c: &Q) {
        debug_assert_eq!(slots.len(), self.arity);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(slots) {
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

    pub fn iter(&self) -> impl Iterator<Item = (&Slots, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDef {
    pub name: String,
    pub degree: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductDef {
    pub i: String,
    pub j: String,
    pub result: BTreeMap<String, String>,
}

/// Serialized ring definition. Sparse vectors map basis names to "p/q" strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDef {
    pub name: String,
    pub basis: Vec<BasisDef>,
    #[serde(default)]
    pub products: Vec<ProductDef>,
    pub integral: BTreeMap<String, String>,
    #[serde(rename = "K")]
    pub canonical: BTreeMap<String, String>,
    #[serde(rename = "e")]
    pub euler: BTreeMap<String, String>,
}

pub struct SurfaceRing {
    name: String,
    names: Vec<String>,
    degrees: Vec<u8>,
    table: Vec<Vec<RingElem>>,
    unit: Basis,
    top: Basis,
    canonical: RingElem,
    euler: RingElem,
    integral: Vec<Q>,
    gram: Vec<Vec<Q>>,
    tau2: Vec<TensorSum>,
    tau_cache: RwLock<HashMap<(Basis, usize), Arc<TensorSum>>>,
}

impl std::fmt::Debug for SurfaceRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceRing")
            .field("name", &self.name)
            .field("dim", &self.names.len())
            .finish()
    }
}

impl PartialEq for SurfaceRing {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.names == other.names
            && self.degrees == other.degrees
            && self.table == other.table
            && self.unit == other.unit
            && self.canonical == other.canonical
            && self.euler == other.euler
            && self.integral == other.integral
    }
}

fn koszul(p: u8, q: u8) -> bool {
    p & q & 1 == 1
}

impl SurfaceRing {
    pub fn from_def(def: &RingDef) -> Result<Self> {
        let bad = |m: String| Error::InvalidRing(m);
        if def.basis.is_empty() {
            return Err(bad("empty basis".into()));
        }
        if def.basis.len() > Basis::MAX as usize {
            return Err(bad("basis too large".into()));
        }
        let names: Vec<String> = def.basis.iter().map(|b| b.name.clone()).collect();
        let degrees: Vec<u8> = def.basis.iter().map(|b| b.degree).collect();
        let mut index = HashMap::new();
        for (i, b) in def.basis.iter().enumerate() {
            if b.name.is_empty() || b.name.contains(|c: char| c.is_whitespace() || "+-*/;(),".contains(c)) {
                return Err(bad(format!("invalid basis name {:?}", b.name)));
            }
            if b.degree > 4 {
                return Err(bad(format!("basis class {} has degree {} > 4", b.name, b.degree)));
            }
            if index.insert(b.name.clone(), i as Basis).is_some() {
                return Err(bad(format!("duplicate basis name {}", b.name)));
            }
        }
        let units: Vec<usize> = (0..names.len()).filter(|&i| degrees[i] == 0).collect();
        if units.len() != 1 {
            return Err(bad(format!("expected one degree-0 class, found {}", units.len())));
        }
        let tops: Vec<usize> = (0..names.len()).filter(|&i| degrees[i] == 4).collect();
        if tops.len() != 1 {
            return Err(bad(format!("expected one degree-4 class, found {}", tops.len())));
        }
        let unit = units[0] as Basis;
        let top = tops[0] as Basis;
        let dim = names.len();

        let parse_vec = |field: &str, v: &BTreeMap<String, String>| -> Result<RingElem> {
            let mut out = RingElem::zero();
            for (k, s) in v {
                let i = *index
                    .get(k)
                    .ok_or_else(|| bad(format!("{field}: unknown basis class {k:?}")))?;
                out.add_term(i, &parse_q(s)?);
            }
            Ok(out)
        };

        let integral_elem = parse_vec("integral", &def.integral)?;
        for (i, _) in integral_elem.iter() {
            if i != top {
                return Err(bad(format!(
                    "integral is nonzero on {} which is not of degree 4",
                    names[i as usize]
                )));
            }
        }
        if integral_elem.coeff(top).is_zero() {
            return Err(bad("integral vanishes on the degree-4 class".into()));
        }
        let integral: Vec<Q> = (0..dim).map(|i| integral_elem.coeff(i as Basis)).collect();

        let mut table = vec![vec![RingElem::zero(); dim]; dim];
        let mut given = vec![vec![false; dim]; dim];
        for j in 0..dim {
            table[unit as usize][j] = RingElem::basis(j as Basis);
            table[j][unit as usize] = RingElem::basis(j as Basis);
        }
        for p in &def.products {
            let i = *index
                .get(&p.i)
                .ok_or_else(|| bad(format!("product: unknown basis class {:?}", p.i)))?
                as usize;
            let j = *index
                .get(&p.j)
                .ok_or_else(|| bad(format!("product: unknown basis class {:?}", p.j)))?
                as usize;
            if given[i][j] {
                return Err(bad(format!("product ({}, {}) listed twice", p.i, p.j)));
            }
            let r = parse_vec("product", &p.result)?;
            let d = degrees[i] + degrees[j];
            for (k, _) in r.iter() {
                if degrees[k as usize] != d {
                    return Err(bad(format!(
                        "product ({}, {}) has a component on {} of the wrong degree",
                        p.i, p.j, names[k as usize]
                    )));
                }
            }
            if (i == unit as usize || j == unit as usize) && r != table[i][j] {
                return Err(bad(format!("product ({}, {}) contradicts the unit", p.i, p.j)));
            }
            table[i][j] = r;
            given[i][j] = true;
        }
        for i in 0..dim {
            for j in 0..dim {
                if given[i][j] && !given[j][i] && i != unit as usize && j != unit as usize {
                    let sign = if koszul(degrees[i], degrees[j]) { -q(1) } else { q(1) };
                    table[j][i] = table[i][j].scale(&sign);
                }
            }
        }

        let integrate = |a: &RingElem| -> Q {
            let mut acc = Q::zero();
            for (i, c) in a.iter() {
                acc += c * &integral[i as usize];
            }
            acc
        };
        let gram: Vec<Vec<Q>> = (0..dim)
            .map(|i| (0..dim).map(|j| integrate(&table[i][j])).collect())
            .collect();
        for i in 0..dim {
            for j in 0..i {
                let sign = if koszul(degrees[i], degrees[j]) { -q(1) } else { q(1) };
                if gram[i][j] != &sign * &gram[j][i] {
                    return Err(bad(format!(
                        "pairing is not (super)symmetric at ({}, {})",
                        names[i], names[j]
                    )));
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let sign = if koszul(degrees[i], degrees[j]) { -q(1) } else { q(1) };
                if table[i][j] != table[j][i].scale(&sign) {
                    return Err(bad(format!(
                        "product is not super-commutative at ({}, {})",
                        names[i], names[j]
                    )));
                }
            }
        }
        let mul = |a: &RingElem, b: &RingElem| -> RingElem {
            let mut out = RingElem::zero();
            for (i, x) in a.iter() {
                for (j, y) in b.iter() {
                    out.add_scaled(&(x * y), &table[i as usize][j as usize]);
                }
            }
            out
        };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let left = mul(&table[i][j], &RingElem::basis(k as Basis));
                    let right = mul(&RingElem::basis(i as Basis), &table[j][k]);
                    if left != right {
                        return Err(bad(format!(
                            "product is not associative at ({}, {}, {})",
                            names[i], names[j], names[k]
                        )));
                    }
                }
            }
        }
        let gram_inv = invert(&gram).ok_or(Error::SingularPairing)?;

        let canonical = parse_vec("K", &def.canonical)?;
        for (i, _) in canonical.iter() {
            if degrees[i as usize] != 2 {
                return Err(bad(format!("K has a component on {} which is not of degree 2", names[i as usize])));
            }
        }
        let euler = parse_vec("e", &def.euler)?;
        for (i, _) in euler.iter() {
            if degrees[i as usize] != 4 {
                return Err(bad(format!("e has a component on {} which is not of degree 4", names[i as usize])));
            }
        }
        if !mul(&euler, &euler).is_zero() {
            return Err(bad("e * e is nonzero".into()));
        }

        let mut ring = SurfaceRing {
            name: def.name.clone(),
            names,
            degrees,
            table,
            unit,
            top,
            canonical,
            euler,
            integral,
            gram,
            tau2: Vec::new(),
            tau_cache: RwLock::new(HashMap::new()),
        };
        ring.tau2 = (0..dim).map(|a| ring.solve_tau2(a as Basis, &gram_inv)).collect();
        Ok(ring)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let def: RingDef = serde_json::from_str(text)?;
        Self::from_def(&def)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Serializable definition; reloading it yields an equal ring.
    pub fn to_def(&self) -> RingDef {
        let vec = |a: &RingElem| -> BTreeMap<String, String> {
            a.iter().map(|(i, c)| (self.names[i as usize].clone(), fmt_q(c))).collect()
        };
        let mut products = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i == self.unit as usize || j == self.unit as usize {
                    continue;
                }
                if self.table[i][j].is_zero() {
                    continue;
                }
                products.push(ProductDef {
                    i: self.names[i].clone(),
                    j: self.names[j].clone(),
                    result: vec(&self.table[i][j]),
                });
            }
        }
        RingDef {
            name: self.name.clone(),
            basis: self
                .names
                .iter()
                .zip(&self.degrees)
                .map(|(n, d)| BasisDef { name: n.clone(), degree: *d })
                .collect(),
            products,
            integral: self
                .integral
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (self.names[i].clone(), fmt_q(c)))
                .collect(),
            canonical: vec(&self.canonical),
            euler: vec(&self.euler),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_def()).expect("ring definitions serialize")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn basis_name(&self, i: Basis) -> &str {
        &self.names[i as usize]
    }

    pub fn basis_names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<Basis> {
        self.names.iter().position(|n| n == name).map(|i| i as Basis)
    }

    pub fn degree(&self, i: Basis) -> u8 {
        self.degrees[i as usize]
    }

    pub fn parity(&self, i: Basis) -> u8 {
        self.degrees[i as usize] & 1
    }

    /// Degree of a homogeneous element, `None` for zero or mixed degree.
    pub fn degree_of(&self, a: &RingElem) -> Option<u8> {
        let ds: BTreeSet<u8> = a.iter().map(|(i, _)| self.degree(i)).collect();
        if ds.len() == 1 {
            ds.into_iter().next()
        } else {
            None
        }
    }

    /// Parity of an element whose components all have the same parity.
    pub fn parity_of(&self, a: &RingElem) -> Option<u8> {
        let ps: BTreeSet<u8> = a.iter().map(|(i, _)| self.parity(i)).collect();
        match ps.len() {
            0 => Some(0),
            1 => ps.into_iter().next(),
            _ => None,
        }
    }

    pub fn unit_index(&self) -> Basis {
        self.unit
    }

    pub fn unit(&self) -> RingElem {
        RingElem::basis(self.unit)
    }

    pub fn top_index(&self) -> Basis {
        self.top
    }

    /// The class of a point: the degree-4 class normalized to integral 1.
    pub fn point_class(&self) -> RingElem {
        let c = &self.integral[self.top as usize];
        RingElem::basis(self.top).scale(&c.recip())
    }

    pub fn canonical(&self) -> &RingElem {
        &self.canonical
    }

    pub fn euler(&self) -> &RingElem {
        &self.euler
    }

    pub fn product_of_basis(&self, i: Basis, j: Basis) -> &RingElem {
        &self.table[i as usize][j as usize]
    }

    pub fn multiply(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let mut out = RingElem::zero();
        for (i, x) in a.iter() {
            for (j, y) in b.iter() {
                out.add_scaled(&(x * y), &self.table[i as usize][j as usize]);
            }
        }
        out
    }

    pub fn integrate(&self, a: &RingElem) -> Q {
        let mut acc = Q::zero();
        for (i, c) in a.iter() {
            acc += c * &self.integral[i as usize];
        }
        acc
    }

    /// ∫ b_i b_j.
    pub fn pairing(&self, i: Basis, j: Basis) -> &Q {
        &self.gram[i as usize][j as usize]
    }

    /// Whether K·α = 0.
    pub fn kills_canonical(&self, a: &RingElem) -> bool {
        self.multiply(&self.canonical, a).is_zero()
    }

    fn solve_tau2(&self, a: Basis, gram_inv: &[Vec<Q>]) -> TensorSum {
        let dim = self.dim();
        // r[b][c] = (-1)^{|b||c|} ∫(b c a)
        let mut r = vec![vec![Q::zero(); dim]; dim];
        for b in 0..dim {
            for c in 0..dim {
                let bc = &self.table[b][c];
                let v = self.integrate(&self.multiply(bc, &RingElem::basis(a)));
                r[b][c] = if koszul(self.degrees[b], self.degrees[c]) { -v } else { v };
            }
        }
        // coefficients = G^{-1} r G^{-T}
        let mut tmp = vec![vec![Q::zero(); dim]; dim];
        for i in 0..dim {
            for c in 0..dim {
                let mut acc = Q::zero();
                for b in 0..dim {
                    if !gram_inv[i][b].is_zero() && !r[b][c].is_zero() {
                        acc += &gram_inv[i][b] * &r[b][c];
                    }
                }
                tmp[i][c] = acc;
            }
        }
        let mut out = TensorSum::new(2);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Q::zero();
                for c in 0..dim {
                    if !tmp[i][c].is_zero() && !gram_inv[j][c].is_zero() {
                        acc += &tmp[i][c] * &gram_inv[j][c];
                    }
                }
                if !acc.is_zero() {
                    out.add_term(Slots::from_slice(&[i as Basis, j as Basis]), &acc);
                }
            }
        }
        out
    }

    /// τ_{k*} of a basis class, cached.
    pub fn tau_basis(&self, a: Basis, k: usize) -> Arc<TensorSum> {
        assert!(k >= 1, "tau_basis needs k >= 1");
        if let Some(t) = self.tau_cache.read().expect("tau cache poisoned").get(&(a, k)) {
            return t.clone();
        }
        let t = if k == 1 {
            let mut t = TensorSum::new(1);
            t.add_term(Slots::from_slice(&[a]), &Q::one());
            t
        } else if k == 2 {
            self.tau2[a as usize].clone()
        } else {
            // τ_k = (τ_{k-1} ⊗ id) ∘ τ_2
            let mut t = TensorSum::new(k);
            for (slots, c) in self.tau2[a as usize].iter() {
                let head = self.tau_basis(slots[0], k - 1);
                for (hs, hc) in head.iter() {
                    let mut s = hs.clone();
                    s.push(slots[1]);
                    t.add_term(s, &(c * hc));
                }
            }
            t
        };
        let t = Arc::new(t);
        self.tau_cache
            .write()
            .expect("tau cache poisoned")
            .insert((a, k), t.clone());
        t
    }

    /// τ_{k*}(a) for k ≥ 1.
    pub fn diagonal_pushforward(&self, a: &RingElem, k: usize) -> Result<TensorSum> {
        if k == 0 {
            return Err(Error::Invalid("diagonal pushforward needs k >= 1".into()));
        }
        let mut out = TensorSum::new(k);
        for (i, c) in a.iter() {
            for (s, x) in self.tau_basis(i, k).iter() {
                out.add_term(s.clone(), &(c * x));
            }
        }
        Ok(out)
    }

    /// Multiplies the slots of a tensor together (in slot order).
    pub fn contract(&self, t: &TensorSum) -> RingElem {
        let mut out = RingElem::zero();
        for (slots, c) in t.iter() {
            let mut acc = RingElem::basis(slots[0]);
            for &s in &slots[1..] {
                acc = self.multiply(&acc, &RingElem::basis(s));
            }
            out.add_scaled(c, &acc);
        }
        out
    }

    /// Parses "x", "3*H", "H - 1/2*x", "-u1 + v1".
    pub fn parse_elem(&self, text: &str) -> Result<RingElem> {
        let mut out = RingElem::zero();
        let normalized = text.replace('-', "+-");
        let mut any = false;
        for raw in normalized.split('+') {
            let term = raw.trim();
            if term.is_empty() {
                continue;
            }
            any = true;
            let (coef, name) = match term.rsplit_once('*') {
                Some((c, n)) => (parse_q(&c.replace(char::is_whitespace, ""))?, n.trim()),
                None => {
                    if let Some(rest) = term.strip_prefix('-') {
                        (-q(1), rest.trim())
                    } else {
                        (q(1), term)
                    }
                }
            };
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::Parse(format!("unknown class {name:?} in {text:?}")))?;
            out.add_term(i, &coef);
        }
        if !any {
            return Err(Error::Parse(format!("empty class expression {text:?}")));
        }
        Ok(out)
    }

    pub fn render(&self, a: &RingElem) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (i, c)) in a.iter().enumerate() {
            let name = &self.names[i as usize];
            if k > 0 {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            } else if c.is_negative() {
                s.push('-');
            }
            let mag = c.abs();
            if mag.is_one() {
                s.push_str(name);
            } else {
                let _ = write!(s, "{}*{}", fmt_q(&mag), name);
            }
        }
        s
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let def = match name.to_ascii_lowercase().as_str() {
            "p2" => p2_def(),
            "p1xp1" => p1xp1_def(),
            "k3" => k3_def(),
            "abelian" => abelian_def(),
            _ => return None,
        };
        Some(Self::from_def(&def).expect("built-in rings are valid"))
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["p2", "p1xp1", "k3", "abelian"]
    }
}

/// Exact Gauss-Jordan inverse; `None` if singular.
pub(crate) fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip();
        for j in 0..n {
            a[col][j] *= &p;
            inv[col][j] *= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

fn sv(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn bd(name: &str, degree: u8) -> BasisDef {
    BasisDef { name: name.into(), degree }
}

fn prod(i: &str, j: &str, result: &[(&str, &str)]) -> ProductDef {
    ProductDef { i: i.into(), j: j.into(), result: sv(result) }
}

fn p2_def() -> RingDef {
    RingDef {
        name: "p2".into(),
        basis: vec![bd("1", 0), bd("H", 2), bd("x", 4)],
        products: vec![prod("H", "H", &[("x", "1")])],
        integral: sv(&[("x", "1")]),
        canonical: sv(&[("H", "-3")]),
        euler: sv(&[("x", "3")]),
    }
}

fn p1xp1_def() -> RingDef {
    RingDef {
        name: "p1xp1".into(),
        basis: vec![bd("1", 0), bd("f1", 2), bd("f2", 2), bd("x", 4)],
        products: vec![prod("f1", "f2", &[("x", "1")])],
        integral: sv(&[("x", "1")]),
        canonical: sv(&[("f1", "-2"), ("f2", "-2")]),
        euler: sv(&[("x", "4")]),
    }
}

fn k3_def() -> RingDef {
    let mut basis = vec![bd("1", 0)];
    let mut products = Vec::new();
    for i in 1..=11 {
        basis.push(bd(&format!("u{i}"), 2));
        basis.push(bd(&format!("v{i}"), 2));
        products.push(prod(&format!("u{i}"), &format!("v{i}"), &[("x", "1")]));
    }
    basis.push(bd("x", 4));
    RingDef {
        name: "k3".into(),
        basis,
        products,
        integral: sv(&[("x", "1")]),
        canonical: BTreeMap::new(),
        euler: sv(&[("x", "24")]),
    }
}

fn abelian_def() -> RingDef {
    // exterior algebra on t1..t4; subsets named by their sorted indices
    let mut subsets: Vec<Vec<u8>> = (0u8..16)
        .map(|m| (0..4).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let name = |s: &[u8]| -> String {
        if s.is_empty() {
            "1".into()
        } else {
            let digits: String = s.iter().map(|d| char::from(b'0' + d)).collect();
            format!("t{digits}")
        }
    };
    let basis = subsets.iter().map(|s| bd(&name(s), s.len() as u8)).collect();
    let mut products = Vec::new();
    for a in &subsets {
        for b in &subsets {
            if a.is_empty() || b.is_empty() || a.iter().any(|x| b.contains(x)) {
                continue;
            }
            // sign of the shuffle sorting a ++ b
            let inversions = a.iter().map(|x| b.iter().filter(|y| *y < x).count()).sum::<usize>();
            let mut merged: Vec<u8> = a.iter().chain(b).copied().collect();
            merged.sort();
            let coef = if inversions % 2 == 0 { "1" } else { "-1" };
            products.push(prod(&name(a), &name(b), &[(&name(&merged), coef)]));
        }
    }
    RingDef {
        name: "abelian".into(),
        basis,
        products,
        integral: sv(&[("t1234", "1")]),
        canonical: BTreeMap::new(),
        euler: BTreeMap::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<SurfaceRing> {
        SurfaceRing::builtin_names()
            .iter()
            .map(|n| SurfaceRing::builtin(n).unwrap())
            .collect()
    }

    #[test]
    fn builtin_examples() {
        let p2 = SurfaceRing::builtin("p2").unwrap();
        let h = p2.parse_elem("H").unwrap();
        assert_eq!(p2.multiply(&h, &h), p2.parse_elem("x").unwrap());
        assert_eq!(p2.integrate(&p2.parse_elem("x").unwrap()), q(1));
        assert_eq!(p2.integrate(&h), q(0));
        let k3 = SurfaceRing::builtin("K3").unwrap();
        assert_eq!(k3.dim(), 24);
        assert!(k3.canonical().is_zero());
        assert_eq!(k3.integrate(k3.euler()), q(24));
        assert!(k3.multiply(k3.euler(), k3.euler()).is_zero());
        let ab = SurfaceRing::builtin("abelian").unwrap();
        assert_eq!(ab.dim(), 16);
        assert!(ab.euler().is_zero() && ab.canonical().is_zero());
        let t1 = ab.parse_elem("t1").unwrap();
        let t2 = ab.parse_elem("t2").unwrap();
        assert_eq!(ab.multiply(&t1, &t2), ab.parse_elem("t12").unwrap());
        assert_eq!(ab.multiply(&t2, &t1), ab.parse_elem("-t12").unwrap());
    }

    #[test]
    fn unit_law() {
        for r in all() {
            for i in 0..r.dim() as Basis {
                assert_eq!(r.multiply(&r.unit(), &RingElem::basis(i)), RingElem::basis(i));
            }
        }
    }

    #[test]
    fn tau2_of_unit_on_p2() {
        let p2 = SurfaceRing::builtin("p2").unwrap();
        let t = p2.diagonal_pushforward(&p2.unit(), 2).unwrap();
        let want: Vec<(Vec<&str>, Q)> = vec![
            (vec!["1", "x"], q(1)),
            (vec!["H", "H"], q(1)),
            (vec!["x", "1"], q(1)),
        ];
        assert_eq!(t.len(), 3);
        for (names, c) in want {
            let slots: Slots = names.iter().map(|n| p2.index_of(n).unwrap()).collect();
            assert_eq!(t.terms.get(&slots), Some(&c));
        }
    }

    #[test]
    fn slot_product_is_euler_times_class() {
        for r in all() {
            for a in 0..r.dim() as Basis {
                let t = r.diagonal_pushforward(&RingElem::basis(a), 2).unwrap();
                let want = r.multiply(r.euler(), &RingElem::basis(a));
                assert_eq!(r.contract(&t), want, "{} {}", r.name(), r.basis_name(a));
            }
        }
    }

    /// ∫^{⊗k}((β_1 ⊗ … ⊗ β_k) · τ_k α) = ∫(β_1 ⋯ β_k α), Koszul signs included.
    #[test]
    fn adjointness_arity_three() {
        for r in all() {
            let dim = r.dim() as Basis;
            for a in 0..dim {
                let t = r.diagonal_pushforward(&RingElem::basis(a), 3).unwrap();
                for b1 in 0..dim {
                    for b2 in 0..dim {
                        for b3 in 0..dim {
                            if r.degree(b1) + r.degree(b2) + r.degree(b3) + r.degree(a) != 8 {
                                continue;
                            }
                            let mut lhs = Q::zero();
                            for (s, c) in t.iter() {
                                let (p1, p2, p3) = (r.parity(b1), r.parity(b2), r.parity(b3));
                                let (x1, x2) = (r.parity(s[0]), r.parity(s[1]));
                                let flips = p2 * x1 + p3 * (x1 + x2);
                                let _ = p1;
                                let v = c
                                    * r.pairing(b1, s[0])
                                    * r.pairing(b2, s[1])
                                    * r.pairing(b3, s[2]);
                                if flips % 2 == 1 {
                                    lhs -= v;
                                } else {
                                    lhs += v;
                                }
                            }
                            let prod = r.multiply(
                                &r.multiply(&r.multiply(&RingElem::basis(b1), &RingElem::basis(b2)), &RingElem::basis(b3)),
                                &RingElem::basis(a),
                            );
                            assert_eq!(lhs, r.integrate(&prod), "{} a={a} b=({b1},{b2},{b3})", r.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coassociative_and_supersymmetric() {
        for r in all() {
            for a in 0..r.dim() as Basis {
                let t2 = r.tau_basis(a, 2);
                // (id ⊗ τ_2) ∘ τ_2
                let mut right = TensorSum::new(3);
                for (s, c) in t2.iter() {
                    for (s2, c2) in r.tau_basis(s[1], 2).iter() {
                        right.add_term(Slots::from_slice(&[s[0], s2[0], s2[1]]), &(c * c2));
                    }
                }
                assert_eq!(*r.tau_basis(a, 3), right, "{}", r.name());
                let mut swapped = TensorSum::new(2);
                for (s, c) in t2.iter() {
                    let sign = if koszul(r.degree(s[0]), r.degree(s[1])) { -c.clone() } else { c.clone() };
                    swapped.add_term(Slots::from_slice(&[s[1], s[0]]), &sign);
                }
                assert_eq!(*t2, swapped);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for r in all() {
            let back = SurfaceRing::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn validation_errors() {
        let mut def = p2_def();
        def.products.push(prod("H", "H", &[("x", "2")]));
        assert!(SurfaceRing::from_def(&def).is_err());

        let mut def = p1xp1_def();
        def.products.push(prod("f2", "f1", &[("x", "2")]));
        let err = SurfaceRing::from_def(&def).unwrap_err().to_string();
        assert!(err.contains("symmetric"), "{err}");

        let mut def = p2_def();
        def.products.clear();
        assert!(matches!(SurfaceRing::from_def(&def), Err(Error::SingularPairing)));

        let mut def = p2_def();
        def.integral = sv(&[("H", "1"), ("x", "1")]);
        assert!(SurfaceRing::from_def(&def).is_err());

        let mut def = p2_def();
        def.canonical = sv(&[("x", "1")]);
        assert!(SurfaceRing::from_def(&def).is_err());
    }

    #[test]
    fn parse_and_render() {
        let p2 = SurfaceRing::builtin("p2").unwrap();
        let a = p2.parse_elem("H - 1/2*x").unwrap();
        assert_eq!(p2.render(&a), "H - 1/2*x");
        assert_eq!(p2.render(p2.canonical()), "-3*H");
        assert!(p2.parse_elem("y").is_err());
    }
}
