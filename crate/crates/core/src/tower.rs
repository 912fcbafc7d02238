//! Chow ring arithmetic for the tower of iterated projectivized focal-plane
//! bundles over the projective plane.
//!
//! A class is a polynomial with rational coefficients in `h`, the pullback of
//! the plane hyperplane class, and the fiber classes `phi1, .., phin`, one per
//! tower level. Level n carries the relations `h^3 = 0` and, for each k,
//! `phik^2 + c1(k-1) phik + c2(k-1) = 0`, where `c1` and `c2` are the Chern
//! classes of the focal-plane sheaves. Reduction drives every class to a
//! normal form whose `h` exponent is at most 2 and whose `phi` exponents are
//! at most 1; the degree map reads off the coefficient of `h^2 phi1 .. phin`.
//!
//! Two alias generators are accepted on input and used for reporting: `hdual`
//! (the dual-plane hyperplane class, equal to `phi1 + 2h`) and `ik` (the
//! divisor-at-infinity classes, `ik = phik - phik-1` with `i2 = phi2 - phi1`).

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::RingError;
use crate::matrix::RatMatrix;

/// Exponent vector of a monomial. Index 0 is the `h` exponent, index k is
/// the `phik` exponent. Trailing zeros are trimmed so keys are canonical.
pub type Exponents = Vec<u8>;

fn trimmed(mut e: Exponents) -> Exponents {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn expo_degree(e: &Exponents) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

fn expo_mul(a: &Exponents, b: &Exponents) -> Exponents {
    let len = a.len().max(b.len());
    let mut out = Vec::with_capacity(len);
    for idx in 0..len {
        let x = a.get(idx).copied().unwrap_or(0);
        let y = b.get(idx).copied().unwrap_or(0);
        out.push(x + y);
    }
    trimmed(out)
}

fn one_rat() -> BigRational {
    BigRational::one()
}

/// Polynomial in `h` and the `phi` generators. Values of this type are plain
/// polynomials; they acquire meaning modulo the tower relations through
/// [`Tower`] methods, which return normal forms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChowClass {
    terms: BTreeMap<Exponents, BigRational>,
}

impl ChowClass {
    pub fn zero() -> Self {
        ChowClass::default()
    }

    pub fn one() -> Self {
        ChowClass::constant(one_rat())
    }

    pub fn constant(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Vec::new(), q);
        }
        ChowClass { terms }
    }

    pub fn monomial(expo: Exponents, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(trimmed(expo), coeff);
        }
        ChowClass { terms }
    }

    pub fn h() -> Self {
        ChowClass::monomial(vec![1], one_rat())
    }

    /// Fiber class of level k, for k at least 1.
    pub fn phi(k: u32) -> Self {
        assert!(k >= 1, "phi index starts at 1");
        let mut expo = vec![0u8; k as usize + 1];
        expo[k as usize] = 1;
        ChowClass::monomial(expo, one_rat())
    }

    /// Dual-plane hyperplane class, `phi1 + 2h`.
    pub fn hdual() -> Self {
        ChowClass::phi(1).add(&ChowClass::h().scale(&BigRational::from_integer(BigInt::from(2))))
    }

    /// Divisor-at-infinity class `ik = phik - phik-1`, defined for k >= 2.
    pub fn i(k: u32) -> Self {
        assert!(k >= 2, "divisor at infinity classes start at i2");
        ChowClass::phi(k).sub(&ChowClass::phi(k - 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, expo: &Exponents) -> BigRational {
        self.terms
            .get(expo)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Highest `phi` index appearing, or 0 when the class lies in the image
    /// of the plane.
    pub fn max_generator(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.len().saturating_sub(1) as u32)
            .max()
            .unwrap_or(0)
    }

    /// Set of codimensions of the nonzero terms.
    pub fn codimensions(&self) -> Vec<u32> {
        let mut degs: Vec<u32> = self.terms.keys().map(expo_degree).collect();
        degs.sort_unstable();
        degs.dedup();
        degs
    }

    pub fn add(&self, other: &ChowClass) -> ChowClass {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn sub(&self, other: &ChowClass) -> ChowClass {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ChowClass {
        ChowClass {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> ChowClass {
        if q.is_zero() {
            return ChowClass::zero();
        }
        ChowClass {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
        }
    }

    /// Product in the ambient polynomial ring, without reduction.
    pub fn mul_raw(&self, other: &ChowClass) -> ChowClass {
        let mut out = ChowClass::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = expo_mul(ea, eb);
                let c = ca * cb;
                let entry = out.terms.entry(e.clone()).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    out.terms.remove(&e);
                }
            }
        }
        out
    }

    pub fn pow_raw(&self, n: u32) -> ChowClass {
        let mut out = ChowClass::one();
        for _ in 0..n {
            out = out.mul_raw(self);
        }
        out
    }

    /// Parses the canonical text form: terms like `3*h^2*phi1`, joined by
    /// `+` or `-`, with rational coefficients `p/q` and the alias generators
    /// `hdual` and `i2, i3, ..`.
    pub fn parse(input: &str) -> Result<ChowClass, RingError> {
        Parser::new(input).parse()
    }
}

fn display_order(terms: &BTreeMap<Exponents, BigRational>) -> Vec<(&Exponents, &BigRational)> {
    let mut entries: Vec<_> = terms.iter().collect();
    entries.sort_by(|a, b| {
        expo_degree(a.0)
            .cmp(&expo_degree(b.0))
            .then_with(|| b.0.cmp(a.0))
    });
    entries
}

fn monomial_text(expo: &Exponents) -> String {
    let mut parts = Vec::new();
    for (idx, &e) in expo.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = if idx == 0 {
            "h".to_string()
        } else {
            format!("phi{idx}")
        };
        if e == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{name}^{e}"));
        }
    }
    parts.join("*")
}

impl fmt::Display for ChowClass {
    /// Graded ordering, constants first; within a codimension the `h` power
    /// dominates, then lower `phi` indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (expo, coeff) in display_order(&self.terms) {
            let sign = if coeff.is_negative() { "-" } else { "+" };
            let mag = coeff.abs();
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let mono = monomial_text(expo);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> RingError {
        RingError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn take_integer(&mut self) -> Result<BigInt, RingError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<BigInt>().map_err(|e| self.err(e.to_string()))
    }

    fn take_name(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let mut end = self.pos;
        while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
            end += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..end])
            .unwrap()
            .to_string();
        self.pos = end;
        text
    }

    fn factor(&mut self) -> Result<ChowClass, RingError> {
        let c = self.peek().ok_or_else(|| self.err("expected a factor"))?;
        let base = if c.is_ascii_digit() {
            let numer = self.take_integer()?;
            if self.peek() == Some(b'/') {
                self.pos += 1;
                let denom = self.take_integer()?;
                if denom.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                ChowClass::constant(BigRational::new(numer, denom))
            } else {
                ChowClass::constant(BigRational::from_integer(numer))
            }
        } else if c == b'(' {
            self.pos += 1;
            let inner = self.sum()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected a closing parenthesis"));
            }
            self.pos += 1;
            inner
        } else {
            let name = self.take_name();
            match name.as_str() {
                "h" => ChowClass::h(),
                "hdual" => ChowClass::hdual(),
                _ => {
                    if let Some(rest) = name.strip_prefix("phi") {
                        let k: u32 = rest.parse().map_err(|_| self.err("bad phi index"))?;
                        if k == 0 {
                            return Err(self.err("phi index starts at 1"));
                        }
                        ChowClass::phi(k)
                    } else if let Some(rest) = name.strip_prefix('i') {
                        let k: u32 = rest.parse().map_err(|_| self.err("bad i index"))?;
                        if k < 2 {
                            return Err(self.err("divisor classes start at i2"));
                        }
                        ChowClass::i(k)
                    } else {
                        return Err(self.err(format!("unknown generator {name:?}")));
                    }
                }
            }
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.take_integer()?;
            let e: u32 = e
                .try_into()
                .map_err(|_| self.err("exponent out of range"))?;
            if e > 64 {
                return Err(self.err("exponent out of range"));
            }
            return Ok(base.pow_raw(e));
        }
        Ok(base)
    }

    fn product(&mut self) -> Result<ChowClass, RingError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul_raw(&self.factor()?);
        }
        Ok(acc)
    }

    fn sum(&mut self) -> Result<ChowClass, RingError> {
        let mut acc = ChowClass::zero();
        let mut sign = one_rat();
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
            }
            Some(b'-') => {
                self.pos += 1;
                sign = -sign;
            }
            _ => {}
        }
        loop {
            let term = self.product()?;
            acc = acc.add(&term.scale(&sign));
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = one_rat();
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -one_rat();
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse(mut self) -> Result<ChowClass, RingError> {
        let out = self.sum()?;
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(out)
    }
}

/// Duality data at one level: the codimension n+1 classes dual to the
/// displayed codimension 1 list, with reporting labels for the columns.
#[derive(Debug, Clone)]
pub struct GeometricBasis {
    pub level: u32,
    /// Normal forms of codimension n+1 classes. Entry c pairs to 1 against
    /// `dual_list[c]` and to 0 against the rest.
    pub codim_basis: Vec<ChowClass>,
    /// `h`, `hdual`, then `(j+1)*hdual + j*i2 + .. + 3*i(j-1) + ij`.
    pub dual_list: Vec<ChowClass>,
    pub column_labels: Vec<String>,
}

/// Integer pairing table of the divisor generators against the geometric
/// basis of complementary codimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingMatrix {
    pub level: u32,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub entries: Vec<Vec<BigInt>>,
}

/// Presentation of the Chow ring at a fixed level: Chern class data for the
/// focal-plane sheaves and the induced rewrite rules.
#[derive(Debug, Clone)]
pub struct Tower {
    level: u32,
    chern1: Vec<ChowClass>,
    chern2: Vec<ChowClass>,
    /// Entry k-1 is the normal form of `phik^2`, used as a rewrite target.
    square_rules: Vec<ChowClass>,
}

/// Builds the level n tower presentation. The sheaf data starts from
/// `c1 = 3h`, `c2 = 3h^2` on the plane and climbs by
/// `c1(k) = c1(k-1) + phik`, `c2(k) = 2*c2(k-1) + c1(k-1)*phik`.
pub fn build_tower(level: u32) -> Tower {
    let three = BigRational::from_integer(BigInt::from(3));
    let two = BigRational::from_integer(BigInt::from(2));
    let mut chern1 = vec![ChowClass::h().scale(&three)];
    let mut chern2 = vec![ChowClass::monomial(vec![2], three)];
    let mut square_rules = Vec::new();
    for k in 1..=level {
        let prev1 = chern1[(k - 1) as usize].clone();
        let prev2 = chern2[(k - 1) as usize].clone();
        let phik = ChowClass::phi(k);
        square_rules.push(prev1.mul_raw(&phik).add(&prev2).neg());
        chern1.push(prev1.add(&phik));
        chern2.push(
            prev2
                .scale(&two)
                .add(&chern1[(k - 1) as usize].mul_raw(&phik)),
        );
    }
    Tower {
        level,
        chern1,
        chern2,
        square_rules,
    }
}

impl Tower {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// First Chern class of the focal-plane sheaf at level k, for k < n.
    /// Closed form `3h + phi1 + .. + phik`.
    pub fn chern1(&self, k: u32) -> &ChowClass {
        &self.chern1[k as usize]
    }

    pub fn chern2(&self, k: u32) -> &ChowClass {
        &self.chern2[k as usize]
    }

    fn check_generators(&self, c: &ChowClass) -> Result<(), RingError> {
        let max = c.max_generator();
        if max > self.level {
            return Err(RingError::GeneratorOutsideTower {
                index: max,
                level: self.level,
            });
        }
        Ok(())
    }

    /// Reduces a class to normal form: `h` exponent at most 2, each `phi`
    /// exponent at most 1.
    ///
    /// Rewriting proceeds in rounds over whole classes so that like
    /// monomials produced along different reduction paths merge (and often
    /// cancel) before they are expanded further.
    pub fn normal_form(&self, c: &ChowClass) -> Result<ChowClass, RingError> {
        self.check_generators(c)?;
        let mut current = c.terms.clone();
        let mut out = ChowClass::zero();
        while !current.is_empty() {
            let mut next: BTreeMap<Exponents, BigRational> = BTreeMap::new();
            for (expo, coeff) in current {
                if coeff.is_zero() {
                    continue;
                }
                if expo.first().copied().unwrap_or(0) >= 3 {
                    continue;
                }
                let offender = expo
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .find(|(_, &e)| e >= 2)
                    .map(|(idx, _)| idx);
                match offender {
                    None => {
                        let entry = out
                            .terms
                            .entry(expo.clone())
                            .or_insert_with(BigRational::zero);
                        *entry += coeff;
                        if entry.is_zero() {
                            out.terms.remove(&expo);
                        }
                    }
                    Some(idx) => {
                        let mut rest = expo.clone();
                        rest[idx] -= 2;
                        let rest = trimmed(rest);
                        for (re, rc) in &self.square_rules[idx - 1].terms {
                            let entry = next
                                .entry(expo_mul(&rest, re))
                                .or_insert_with(BigRational::zero);
                            *entry += &coeff * rc;
                        }
                    }
                }
            }
            next.retain(|_, q| !q.is_zero());
            current = next;
        }
        Ok(out)
    }

    /// Product modulo the tower relations, in normal form.
    pub fn multiply(&self, a: &ChowClass, b: &ChowClass) -> Result<ChowClass, RingError> {
        self.check_generators(a)?;
        self.check_generators(b)?;
        self.normal_form(&a.mul_raw(b))
    }

    /// Degree map: the coefficient of `h^2 phi1 .. phin`.
    ///
    /// The input must be homogeneous. Codimension above the top reduces to
    /// zero and integrates to zero; codimension strictly below the top is an
    /// error.
    pub fn integrate(&self, c: &ChowClass) -> Result<BigRational, RingError> {
        let nf = self.normal_form(c)?;
        if nf.is_zero() {
            let degs = c.codimensions();
            if degs.len() > 1 {
                return Err(RingError::NotHomogeneous { found: degs });
            }
            if let [d] = degs[..] {
                if d < self.level + 2 {
                    return Err(RingError::CodimensionBelowTop {
                        found: d,
                        top: self.level + 2,
                    });
                }
            }
            return Ok(BigRational::zero());
        }
        let degs = nf.codimensions();
        if degs.len() > 1 {
            return Err(RingError::NotHomogeneous { found: degs });
        }
        let top = self.level + 2;
        let d = degs[0];
        if d < top {
            return Err(RingError::CodimensionBelowTop { found: d, top });
        }
        let mut full = vec![1u8; self.level as usize + 1];
        full[0] = 2;
        Ok(nf.coefficient(&trimmed(full)))
    }

    /// Normal-form monomials of one codimension, in deterministic order.
    pub fn codim_monomials(&self, codim: u32) -> Vec<ChowClass> {
        let n = self.level as usize;
        let mut out = Vec::new();
        for h_exp in 0..=2u32 {
            if h_exp > codim {
                continue;
            }
            let picks = (codim - h_exp) as usize;
            if picks > n {
                continue;
            }
            for subset in subsets_of_size(n, picks) {
                let mut expo = vec![0u8; n + 1];
                expo[0] = h_exp as u8;
                for k in subset {
                    expo[k] = 1;
                }
                out.push(ChowClass::monomial(expo, one_rat()));
            }
        }
        out.sort_by(|a, b| {
            a.terms
                .keys()
                .next()
                .unwrap()
                .cmp(b.terms.keys().next().unwrap())
        });
        out
    }

    /// The displayed codimension 1 list whose duals form the geometric basis.
    pub fn dual_generator_list(&self) -> Vec<ChowClass> {
        let mut list = vec![ChowClass::h(), ChowClass::hdual()];
        for j in 2..=self.level {
            let mut d = ChowClass::hdual().scale(&BigRational::from_integer(BigInt::from(j + 1)));
            for m in 2..j {
                let coeff = BigRational::from_integer(BigInt::from(j + 2 - m));
                d = d.add(&ChowClass::i(m).scale(&coeff));
            }
            d = d.add(&ChowClass::i(j));
            list.push(d);
        }
        list
    }

    /// Solves the duality system: returns the codimension n+1 classes that
    /// pair as the identity against the displayed codimension 1 list.
    pub fn dual_basis(&self) -> Result<GeometricBasis, RingError> {
        let n = self.level;
        assert!(n >= 1, "dual basis needs level at least 1");
        let monomials = self.codim_monomials(n + 1);
        let duals = self.dual_generator_list();
        let size = n as usize + 1;
        debug_assert_eq!(monomials.len(), size);
        let mut pairing = RatMatrix::zero(size, size);
        for (r, d) in duals.iter().enumerate() {
            for (m, mono) in monomials.iter().enumerate() {
                pairing.set(r, m, self.integrate(&d.mul_raw(mono))?);
            }
        }
        let inv = pairing
            .inverse()
            .ok_or(RingError::SingularPairing { level: n })?;
        let mut basis = Vec::with_capacity(size);
        for c in 0..size {
            let mut class = ChowClass::zero();
            for (m, mono) in monomials.iter().enumerate() {
                class = class.add(&mono.scale(inv.at(m, c)));
            }
            basis.push(class);
        }
        Ok(GeometricBasis {
            level: n,
            codim_basis: basis,
            dual_list: duals,
            column_labels: column_labels(n),
        })
    }

    /// Integer table pairing `h, hdual, i2, .., in` against the geometric
    /// basis of codimension n+1.
    pub fn pairing_matrix(&self) -> Result<PairingMatrix, RingError> {
        let basis = self.dual_basis()?;
        let mut generators = vec![ChowClass::h(), ChowClass::hdual()];
        let mut row_labels = vec!["h".to_string(), "hdual".to_string()];
        for k in 2..=self.level {
            generators.push(ChowClass::i(k));
            row_labels.push(format!("i{k}"));
        }
        let mut entries = Vec::new();
        for (r, g) in generators.iter().enumerate() {
            let mut row = Vec::new();
            for (c, b) in basis.codim_basis.iter().enumerate() {
                let v = self.integrate(&g.mul_raw(b))?;
                if !v.is_integer() {
                    return Err(RingError::NonIntegralPairing {
                        row: row_labels[r].clone(),
                        column: basis.column_labels[c].clone(),
                        value: v.to_string(),
                    });
                }
                row.push(v.to_integer());
            }
            entries.push(row);
        }
        Ok(PairingMatrix {
            level: self.level,
            row_labels,
            column_labels: basis.column_labels,
            entries,
        })
    }

    /// The section class on the second level: the unique `a*h + b*hdual +
    /// c*i2` that meets the incidence pairings and is annihilated by `i2`.
    pub fn solve_z2(&self) -> Result<ChowClass, RingError> {
        if self.level != 2 {
            return Err(RingError::WrongLevel {
                expected: 2,
                found: self.level,
            });
        }
        let gens = [ChowClass::h(), ChowClass::hdual(), ChowClass::i(2)];
        let h2 = ChowClass::h().pow_raw(2);
        let hd = ChowClass::hdual();
        let conditions = [
            (h2.mul_raw(&hd), one_rat()),
            (ChowClass::h().mul_raw(&hd.pow_raw(2)), one_rat()),
            (h2.mul_raw(&ChowClass::i(2)), BigRational::zero()),
        ];
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (test_class, target) in &conditions {
            let row: Result<Vec<_>, _> = gens
                .iter()
                .map(|g| self.integrate(&g.mul_raw(test_class)))
                .collect();
            rows.push(row?);
            rhs.push(target.clone());
        }
        // The annihilation property i2 * z2 = 0 closes the system; without it
        // the h coefficient is free because h^3 kills every test above.
        let products: Vec<ChowClass> = gens
            .iter()
            .map(|g| self.normal_form(&g.mul_raw(&ChowClass::i(2))))
            .collect::<Result<_, _>>()?;
        let mut keys: Vec<Exponents> = Vec::new();
        for p in &products {
            for e in p.terms.keys() {
                if !keys.contains(e) {
                    keys.push(e.clone());
                }
            }
        }
        keys.sort();
        for key in keys {
            rows.push(products.iter().map(|p| p.coefficient(&key)).collect());
            rhs.push(BigRational::zero());
        }
        let matrix = RatMatrix::from_rows(rows);
        let solution = matrix
            .solve_unique(&rhs)
            .ok_or(RingError::BadZ2System("inconsistent or underdetermined"))?;
        let mut z = ChowClass::zero();
        for (g, c) in gens.iter().zip(&solution) {
            z = z.add(&g.scale(c));
        }
        let check = self.multiply(&z, &ChowClass::i(2))?;
        if !check.is_zero() {
            return Err(RingError::BadZ2System("solution fails annihilation"));
        }
        Ok(z)
    }

    /// Verifies the self-intersection relation of the k-th divisor at
    /// infinity against the stated ladder of coefficients.
    pub fn theorem1_check(&self, k: u32) -> Result<bool, RingError> {
        assert!((2..=self.level).contains(&k), "relation index out of range");
        let ik = ChowClass::i(k);
        let lhs = self.multiply(&ik, &ik)?;
        let mut inner = ChowClass::h()
            .scale(&BigRational::from_integer(BigInt::from(2 * k as i64 - 1)))
            .sub(&ChowClass::hdual().scale(&BigRational::from_integer(BigInt::from(k as i64 + 1))));
        for m in 2..k {
            let coeff = BigRational::from_integer(BigInt::from((k + 2 - m) as i64));
            inner = inner.sub(&ChowClass::i(m).scale(&coeff));
        }
        let rhs = self.multiply(&inner, &ik)?;
        Ok(lhs == rhs)
    }
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == size {
            out.push(acc.clone());
            return;
        }
        for k in start..=n {
            if n - k + 1 + acc.len() < size {
                break;
            }
            acc.push(k);
            go(k + 1, n, size, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        go(1, n, size, &mut Vec::new(), &mut out);
    }
    out
}

fn column_labels(n: u32) -> Vec<String> {
    let i_run = |from: u32| -> String { (from..=n).map(|k| format!("*i{k}")).collect::<String>() };
    let mut labels = Vec::new();
    if n >= 2 {
        labels.push(format!("hdual^2*z{n}"));
    } else {
        labels.push("hdual^2".to_string());
    }
    labels.push(format!("h^2{}", i_run(2)));
    for c in 2..=n {
        let z_part = if c >= 3 {
            format!("*z{}", c - 1)
        } else {
            String::new()
        };
        labels.push(format!("h^2*hdual{}{}", z_part, i_run(c + 1)));
    }
    labels
}
