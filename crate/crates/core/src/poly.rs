//! Differential polynomials in jet variables.
//!
//! A [`DiffRing`] declares the dependent variables `x_1, ..., x_l` together
//! with their base weights; the jet symbols `x_i^(n)` (formal n-th
//! t-derivatives) exist for every `n >= 0` and carry weight
//! `weight(x_i) + n`. A [`DiffPoly`] is a finite rational linear combination
//! of monomials in jet symbols, stored in a canonical graded-lexicographic
//! order, so equality is structural equality and rendering is deterministic.
//!
//! The derivation [`DiffPoly::dt`] sends `x_i^(n)` to `x_i^(n+1)` and extends
//! by the Leibniz rule; it raises the weight of every monomial by exactly 1.

use crate::par;
use crate::rational::{self, Rat};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A ring of differential polynomials: variable names plus base weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffRing {
    vars: Vec<String>,
    weights: Vec<i64>,
}

impl DiffRing {
    pub fn new(vars: &[(&str, i64)]) -> Self {
        DiffRing {
            vars: vars.iter().map(|(n, _)| n.to_string()).collect(),
            weights: vars.iter().map(|(_, w)| *w).collect(),
        }
    }

    /// Variables `base1, ..., basek` (or just `base` when k = 1), all of the
    /// given weight.
    pub fn indexed(base: &str, count: usize, weight: i64) -> Self {
        let vars: Vec<String> = if count == 1 {
            vec![base.to_string()]
        } else {
            (1..=count).map(|i| format!("{base}{i}")).collect()
        };
        DiffRing {
            weights: vec![weight; vars.len()],
            vars,
        }
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.vars[var]
    }

    pub fn names(&self) -> &[String] {
        &self.vars
    }

    pub fn base_weight(&self, var: usize) -> i64 {
        self.weights[var]
    }

    pub fn jet_weight(&self, var: usize, order: u32) -> i64 {
        self.weights[var] + order as i64
    }

    /// The jet symbol `x_var^(order)` as a polynomial.
    pub fn jet(&self, var: usize, order: u32) -> DiffPoly {
        assert!(var < self.vars.len(), "unknown variable index {var}");
        let m = Monomial {
            factors: vec![JetFactor {
                var: var as u32,
                order,
                power: 1,
            }],
            weight: self.jet_weight(var, order),
        };
        DiffPoly::single(m, Rat::one())
    }

    pub fn constant(&self, c: Rat) -> DiffPoly {
        DiffPoly::constant(c)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

/// One jet symbol raised to a power inside a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetFactor {
    pub var: u32,
    pub order: u32,
    pub power: u32,
}

/// A monomial: a sorted multiset of jet symbols with its cached total weight.
///
/// The canonical order used everywhere (map keys, rendering, serialization)
/// is graded lexicographic: first by total weight, then by the factor list
/// compared lexicographically on `(var, order, power)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: Vec<JetFactor>,
    weight: i64,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            factors: Vec::new(),
            weight: 0,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[JetFactor] {
        &self.factors
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn total_degree(&self) -> u32 {
        self.factors.iter().map(|f| f.power).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, b) = (self.factors[i], other.factors[j]);
            match (a.var, a.order).cmp(&(b.var, b.order)) {
                std::cmp::Ordering::Less => {
                    factors.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    factors.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    factors.push(JetFactor {
                        var: a.var,
                        order: a.order,
                        power: a.power + b.power,
                    });
                    i += 1;
                    j += 1;
                }
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        Monomial {
            factors,
            weight: self.weight + other.weight,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight
            .cmp(&other.weight)
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

/// A differential polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored; the zero polynomial has an empty term
/// map, so `==` is the canonical structural equality.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        DiffPoly { terms }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    fn single(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&Monomial::unit())
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// The rational value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out.add_assign_ref(other);
        out
    }

    /// In-place `self += other` (the accumulation primitive; avoids cloning
    /// the accumulator).
    pub fn add_assign_ref(&mut self, other: &DiffPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// Product; dispatches to the rayon path for large operands when the
    /// `parallel` feature is enabled.
    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        #[cfg(feature = "parallel")]
        {
            if self.terms.len() * other.terms.len() >= par::POLY_MUL_PAR_THRESHOLD {
                return self.mul_par(other);
            }
        }
        self.mul_seq(other)
    }

    /// Sequential product (always available; the benchmark baseline).
    ///
    /// Accumulates over a common denominator so the rational reduction
    /// happens once per output term rather than once per term pair.
    pub fn mul_seq(&self, other: &DiffPoly) -> DiffPoly {
        let (av, da) = self.integer_view();
        let (bv, db) = other.integer_view();
        let mut acc: BTreeMap<Monomial, num::BigInt> = BTreeMap::new();
        for (m1, c1) in &av {
            for (m2, c2) in &bv {
                *acc.entry(m1.mul(m2)).or_default() += c1 * c2;
            }
        }
        Self::from_integer_terms(acc, da * db)
    }

    /// Numerators over the lcm of all denominators.
    fn integer_view(&self) -> (Vec<(&Monomial, num::BigInt)>, num::BigInt) {
        use num::Integer;
        let mut den = num::BigInt::from(1);
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let v = self
            .terms
            .iter()
            .map(|(m, c)| (m, c.numer() * (&den / c.denom())))
            .collect();
        (v, den)
    }

    fn from_integer_terms(acc: BTreeMap<Monomial, num::BigInt>, den: num::BigInt) -> DiffPoly {
        let terms = acc
            .into_iter()
            .filter(|(_, n)| !n.is_zero())
            .map(|(m, n)| (m, Rat::new(n, den.clone())))
            .collect();
        DiffPoly { terms }
    }

    #[cfg(feature = "parallel")]
    fn mul_par(&self, other: &DiffPoly) -> DiffPoly {
        use rayon::prelude::*;
        let (av, da) = self.integer_view();
        let (bv, db) = other.integer_view();
        let chunk = av.len().div_ceil(rayon::current_num_threads().max(1));
        let acc = av
            .par_chunks(chunk.max(1))
            .map(|part| {
                let mut acc: BTreeMap<Monomial, num::BigInt> = BTreeMap::new();
                for (m1, c1) in part {
                    for (m2, c2) in &bv {
                        *acc.entry(m1.mul(m2)).or_default() += c1 * c2;
                    }
                }
                acc
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (m, c) in b {
                    *a.entry(m).or_default() += c;
                }
                a
            });
        Self::from_integer_terms(acc, da * db)
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The formal derivation: `x_i^(n) -> x_i^(n+1)` extended by Leibniz.
    pub fn dt(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for idx in 0..m.factors.len() {
                let f = m.factors[idx];
                let mut factors: Vec<JetFactor> = Vec::with_capacity(m.factors.len() + 1);
                for (k, g) in m.factors.iter().enumerate() {
                    if k == idx {
                        if g.power > 1 {
                            factors.push(JetFactor {
                                power: g.power - 1,
                                ..*g
                            });
                        }
                    } else {
                        factors.push(*g);
                    }
                }
                // insert the raised jet, merging with an existing factor
                let raised = JetFactor {
                    var: f.var,
                    order: f.order + 1,
                    power: 1,
                };
                match factors.binary_search_by_key(&(raised.var, raised.order), |g| (g.var, g.order))
                {
                    Ok(pos) => factors[pos].power += 1,
                    Err(pos) => factors.insert(pos, raised),
                }
                let mono = Monomial {
                    factors,
                    weight: m.weight + 1,
                };
                out.add_term(mono, c * Rat::from_integer(f.power.into()));
            }
        }
        out
    }

    /// n-th formal derivative.
    pub fn dt_n(&self, n: u32) -> DiffPoly {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.dt();
        }
        out
    }

    /// Partial derivative with respect to the jet symbol `x_var^(order)`.
    pub fn partial(&self, ring: &DiffRing, var: u32, order: u32) -> DiffPoly {
        let jet_weight = ring.jet_weight(var as usize, order);
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if let Ok(idx) = m
                .factors
                .binary_search_by_key(&(var, order), |g| (g.var, g.order))
            {
                let f = m.factors[idx];
                let mut factors = m.factors.clone();
                if f.power > 1 {
                    factors[idx].power -= 1;
                } else {
                    factors.remove(idx);
                }
                let mono = Monomial {
                    factors,
                    weight: m.weight - jet_weight,
                };
                out.add_term(mono, c * Rat::from_integer(f.power.into()));
            }
        }
        out
    }

    /// All jet symbols occurring in the polynomial as `(var, order)` pairs.
    pub fn support(&self) -> Vec<(u32, u32)> {
        let mut s: Vec<(u32, u32)> = self
            .terms
            .keys()
            .flat_map(|m| m.factors.iter().map(|f| (f.var, f.order)))
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Substitute `x_i^(n) -> d^n(images[i])/dt^n` for every variable.
    ///
    /// The caller is responsible for interpreting the result in the ring the
    /// images live in.
    pub fn substitute(&self, images: &[DiffPoly]) -> DiffPoly {
        let mut max_order: Vec<u32> = vec![0; images.len()];
        for (v, o) in self.support() {
            let v = v as usize;
            assert!(v < images.len(), "substitute: missing image for variable {v}");
            max_order[v] = max_order[v].max(o);
        }
        let mut derivs: Vec<Vec<DiffPoly>> = Vec::with_capacity(images.len());
        for (v, img) in images.iter().enumerate() {
            let mut chain = vec![img.clone()];
            for _ in 0..max_order[v] {
                let next = chain.last().unwrap().dt();
                chain.push(next);
            }
            derivs.push(chain);
        }
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut term = DiffPoly::constant(c.clone());
            for f in &m.factors {
                let img = &derivs[f.var as usize][f.order as usize];
                term = term.mul(&img.pow(f.power));
            }
            out = out.add(&term);
        }
        out
    }

    /// The common weight of all monomials, if the polynomial is homogeneous.
    /// The zero polynomial is homogeneous of every weight (returns `None`).
    pub fn homogeneous_weight(&self) -> Option<i64> {
        let mut it = self.terms.keys();
        let w = it.next()?.weight();
        it.all(|m| m.weight() == w).then_some(w)
    }

    pub fn is_homogeneous_of_weight(&self, w: i64) -> bool {
        self.terms.keys().all(|m| m.weight() == w)
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.weight()).max()
    }

    /// Deterministic plain-text rendering in the canonical monomial order,
    /// e.g. `3/2 v v' - 1/4 v'''`. This rendering is the serialization
    /// contract used by the other modules.
    pub fn render(&self, ring: &DiffRing) -> String {
        self.render_with(ring, false)
    }

    /// LaTeX rendering with `\frac` coefficients and parenthesized orders
    /// above 3.
    pub fn render_latex(&self, ring: &DiffRing) -> String {
        self.render_with(ring, true)
    }

    fn render_with(&self, ring: &DiffRing, latex: bool) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push_str("-");
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coeff = if latex {
                if mag.denom().is_one() {
                    format!("{}", mag.numer())
                } else {
                    format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
                }
            } else {
                rational::render_pretty(&mag)
            };
            let show_coeff = !mag.is_one() || m.is_unit();
            if show_coeff {
                out.push_str(&coeff);
            }
            for (k, f) in m.factors.iter().enumerate() {
                if show_coeff || k > 0 {
                    out.push(' ');
                }
                out.push_str(ring.name(f.var as usize));
                if f.order > 0 && f.order <= 3 {
                    for _ in 0..f.order {
                        out.push('\'');
                    }
                } else if f.order > 3 {
                    out.push_str(&format!("^({})", f.order));
                }
                if f.power > 1 {
                    if latex {
                        out.push_str(&format!("^{{{}}}", f.power));
                    } else {
                        out.push_str(&format!("^{}", f.power));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for DiffPoly {
    /// Ring-less display used in debugging; variables print as `x<i>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let factors: Vec<String> = m
                    .factors
                    .iter()
                    .map(|ft| format!("x{}^({}){}", ft.var, ft.order, if ft.power > 1 { format!("^{}", ft.power) } else { String::new() }))
                    .collect();
                format!("{} {}", c, factors.join(" "))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl std::ops::Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::add(self, rhs)
    }
}

impl std::ops::Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::sub(self, rhs)
    }
}

impl std::ops::Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::mul(self, rhs)
    }
}

impl std::ops::Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn ring() -> DiffRing {
        DiffRing::new(&[("u", 1)])
    }

    #[test]
    fn jet_derivation() {
        let r = ring();
        // v1^(0) -> v1^(1)
        assert_eq!(r.jet(0, 0).dt(), r.jet(0, 1));
        // constants are killed
        assert_eq!(DiffPoly::constant(rat(3, 2)).dt(), DiffPoly::zero());
        // Leibniz: (u^(0))^2 -> 2 u^(0) u^(1)
        let sq = r.jet(0, 0).pow(2);
        let expect = r.jet(0, 0).mul(&r.jet(0, 1)).scale(&rat_int(2));
        assert_eq!(sq.dt(), expect);
    }

    #[test]
    fn weight_bookkeeping() {
        let r = ring();
        let p = r.jet(0, 2).mul(&r.jet(0, 0).pow(3)); // weight 3 + 3
        assert_eq!(p.homogeneous_weight(), Some(6));
        assert!(p.dt().is_homogeneous_of_weight(7));
    }

    #[test]
    fn canonical_order_rendering() {
        let r = DiffRing::new(&[("v", 2)]);
        // 3/2 v v' - 1/4 v'''
        let p = r
            .jet(0, 0)
            .mul(&r.jet(0, 1))
            .scale(&rat(3, 2))
            .add(&r.jet(0, 3).scale(&rat(-1, 4)));
        assert_eq!(p.render(&r), "3/2 v v' - 1/4 v'''");
        assert_eq!(p.render_latex(&r), "\\frac{3}{2} v v' - \\frac{1}{4} v'''");
    }

    #[test]
    fn partial_derivative() {
        let r = ring();
        let p = r.jet(0, 0).pow(2).mul(&r.jet(0, 1)); // u^2 u'
        let pu = p.partial(&r, 0, 0);
        assert_eq!(pu, r.jet(0, 0).mul(&r.jet(0, 1)).scale(&rat_int(2)));
        let pu1 = p.partial(&r, 0, 1);
        assert_eq!(pu1, r.jet(0, 0).pow(2));
        assert_eq!(p.partial(&r, 0, 5), DiffPoly::zero());
    }

    #[test]
    fn substitution_chain_rule() {
        let r = ring();
        // p = u', image u -> u^2 : p|_(u -> u^2) = 2 u u'
        let p = r.jet(0, 1);
        let img = r.jet(0, 0).pow(2);
        assert_eq!(
            p.substitute(&[img]),
            r.jet(0, 0).mul(&r.jet(0, 1)).scale(&rat_int(2))
        );
    }

    #[test]
    fn mul_matches_seq() {
        let r = ring();
        let mut a = DiffPoly::one();
        for k in 0..4 {
            a = a.add(&r.jet(0, k).pow(k + 1));
        }
        let b = a.mul(&a).add(&r.jet(0, 2));
        assert_eq!(a.mul(&b), a.mul_seq(&b));
    }
}
