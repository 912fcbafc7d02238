//! Contact modules attached to plane curves and their products.
//!
//! For a curve with degree d, class number ď, and cusp counts κⱼ, the
//! weight-n module collects the coefficients that the curve contributes to
//! an order-(n+1) contact count: d on the point factor Λₙ, ď on the
//! direction factor Πₙ, and a ladder value (k+1)ď + Σⱼ(k+2−j)κⱼ + κₖ on each
//! divisor factor Γᵏₙ. Products of modules expand distributively into
//! monomials whose factors are tagged by weight and kind; a canonical key
//! written "L2.P2.G2_3" identifies each monomial independently of factor
//! order, so numeric characteristics of a family can be attached to keys and
//! evaluated against any expansion.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Zero};

use crate::error::ContactError;
use crate::tower::{ChowClass, GeometricBasis};

/// Enumerative invariants of a plane curve used by the contact calculus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveCharacteristics {
    /// Degree of the curve.
    pub degree: u64,
    /// Class number: the number of tangent lines through a general point.
    pub class_number: u64,
    /// Cusp counts indexed by order j >= 2.
    pub cusps: BTreeMap<u32, u64>,
    /// Some branch meets two or more divisors at infinity in its lift.
    pub has_profound_cusp: bool,
    /// Some branch lift is tangent to a divisor at infinity.
    pub has_flat_cusp: bool,
}

impl CurveCharacteristics {
    pub fn nonsingular(degree: u64) -> Self {
        CurveCharacteristics {
            degree,
            class_number: degree * degree.saturating_sub(1),
            cusps: BTreeMap::new(),
            has_profound_cusp: false,
            has_flat_cusp: false,
        }
    }

    fn kappa(&self, j: u32) -> u64 {
        self.cusps.get(&j).copied().unwrap_or(0)
    }

    /// Ladder coefficient for the divisor factor of superscript k.
    pub fn gamma_coefficient(&self, k: u32) -> BigInt {
        let mut total = BigInt::from(self.class_number) * BigInt::from(k + 1);
        for j in 2..k {
            total += BigInt::from(self.kappa(j)) * BigInt::from(k + 2 - j);
        }
        if k >= 2 {
            total += BigInt::from(self.kappa(k));
        }
        total
    }
}

/// Kind of a contact-monomial factor; the ordering drives canonical keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorKind {
    Lambda,
    Pi,
    Gamma(u32),
}

impl FactorKind {
    fn rank(self) -> (u8, u32) {
        match self {
            FactorKind::Lambda => (0, 0),
            FactorKind::Pi => (1, 0),
            FactorKind::Gamma(k) => (2, k),
        }
    }
}

/// One factor of a contact monomial: a kind at a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorTag {
    pub weight: u32,
    pub kind: FactorKind,
}

impl FactorTag {
    pub fn code(&self) -> String {
        match self.kind {
            FactorKind::Lambda => format!("L{}", self.weight),
            FactorKind::Pi => format!("P{}", self.weight),
            FactorKind::Gamma(k) => format!("G{}_{}", k, self.weight),
        }
    }

    fn sort_key(&self) -> (u32, u8, u32) {
        let (r, k) = self.kind.rank();
        (self.weight, r, k)
    }

    /// Parses a single code such as "P2" or "G2_3".
    pub fn parse(code: &str) -> Result<Self, ContactError> {
        let bad = |message: &str| ContactError::BadKey {
            key: code.to_string(),
            message: message.to_string(),
        };
        let mut chars = code.chars();
        let head = chars.next().ok_or_else(|| bad("empty factor code"))?;
        let rest: &str = &code[head.len_utf8()..];
        match head {
            'L' | 'P' => {
                let weight: u32 = rest.parse().map_err(|_| bad("expected a weight"))?;
                let kind = if head == 'L' {
                    FactorKind::Lambda
                } else {
                    FactorKind::Pi
                };
                if kind == FactorKind::Pi && weight == 0 {
                    return Err(bad("a weight-0 module has no direction factor"));
                }
                Ok(FactorTag { weight, kind })
            }
            'G' => {
                let (k_str, w_str) = rest
                    .split_once('_')
                    .ok_or_else(|| bad("expected G<k>_<weight>"))?;
                let k: u32 = k_str.parse().map_err(|_| bad("expected a superscript"))?;
                let weight: u32 = w_str.parse().map_err(|_| bad("expected a weight"))?;
                if k < 2 || k > weight {
                    return Err(bad("superscript must satisfy 2 <= k <= weight"));
                }
                Ok(FactorTag {
                    weight,
                    kind: FactorKind::Gamma(k),
                })
            }
            _ => Err(bad("factor codes start with L, P, or G")),
        }
    }
}

/// Product of factors in curve order. The canonical key forgets the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactMonomial {
    pub factors: Vec<FactorTag>,
}

impl ContactMonomial {
    pub fn new(factors: Vec<FactorTag>) -> Self {
        ContactMonomial { factors }
    }

    pub fn total_weight(&self) -> u32 {
        self.factors.iter().map(|f| f.weight).sum()
    }

    /// Factors sorted by weight, then kind, then superscript.
    pub fn sorted_factors(&self) -> Vec<FactorTag> {
        let mut fs = self.factors.clone();
        fs.sort_by_key(|f| f.sort_key());
        fs
    }

    /// Canonical key over all factors, e.g. "L2.P2.G2_3".
    pub fn canonical_key(&self) -> String {
        let codes: Vec<String> = self.sorted_factors().iter().map(|f| f.code()).collect();
        codes.join(".")
    }

    fn lambda0_count(&self) -> u32 {
        self.factors
            .iter()
            .filter(|f| f.weight == 0 && f.kind == FactorKind::Lambda)
            .count() as u32
    }

    /// Canonical key of the positive-weight factors; empty when none remain.
    fn reduced_key(&self) -> String {
        let codes: Vec<String> = self
            .sorted_factors()
            .iter()
            .filter(|f| f.weight > 0)
            .map(|f| f.code())
            .collect();
        codes.join(".")
    }
}

impl fmt::Display for ContactMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_key())
    }
}

/// Weight-n contact module of a curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactModule {
    pub weight: u32,
    pub coeff_lambda: BigInt,
    pub coeff_pi: BigInt,
    pub coeff_gamma: BTreeMap<u32, BigInt>,
}

impl ContactModule {
    /// Structural terms in display order: the point factor, then the
    /// direction factor (weight >= 1), then divisor factors ascending.
    pub fn terms(&self) -> Vec<(FactorKind, BigInt)> {
        let mut out = vec![(FactorKind::Lambda, self.coeff_lambda.clone())];
        if self.weight >= 1 {
            out.push((FactorKind::Pi, self.coeff_pi.clone()));
        }
        for (&k, c) in &self.coeff_gamma {
            out.push((FactorKind::Gamma(k), c.clone()));
        }
        out
    }
}

impl fmt::Display for ContactModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (kind, coeff) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let tag = FactorTag {
                weight: self.weight,
                kind,
            };
            write!(f, "{}*{}", coeff, tag.code())?;
        }
        Ok(())
    }
}

/// Builds the weight-n module of a curve from its characteristics.
pub fn curve_module(curve: &CurveCharacteristics, weight: u32) -> ContactModule {
    let mut coeff_gamma = BTreeMap::new();
    for k in 2..=weight {
        coeff_gamma.insert(k, curve.gamma_coefficient(k));
    }
    ContactModule {
        weight,
        coeff_lambda: BigInt::from(curve.degree),
        coeff_pi: BigInt::from(curve.class_number),
        coeff_gamma,
    }
}

/// Module of a nonsingular curve of the given degree: every ladder value
/// collapses to (k+1)·d·(d−1).
pub fn nonsingular_module(degree: u64, weight: u32) -> ContactModule {
    curve_module(&CurveCharacteristics::nonsingular(degree), weight)
}

/// Distributive expansion of a product of modules. Every ordered choice of
/// one structural term per module contributes an entry, including choices
/// whose coefficient happens to vanish.
pub fn multiply_modules(
    modules: &[ContactModule],
) -> Result<Vec<(ContactMonomial, BigInt)>, ContactError> {
    if modules.is_empty() {
        return Err(ContactError::EmptyProduct);
    }
    let term_lists: Vec<Vec<(FactorKind, BigInt)>> = modules.iter().map(|m| m.terms()).collect();
    let mut expansion = Vec::new();
    let mut choice = vec![0usize; modules.len()];
    loop {
        let mut factors = Vec::with_capacity(modules.len());
        let mut coeff = BigInt::one();
        for (pos, &c) in choice.iter().enumerate() {
            let (kind, ref value) = term_lists[pos][c];
            factors.push(FactorTag {
                weight: modules[pos].weight,
                kind,
            });
            coeff *= value;
        }
        expansion.push((ContactMonomial::new(factors), coeff));
        // Odometer step, last position fastest.
        let mut pos = modules.len();
        loop {
            if pos == 0 {
                return Ok(expansion);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < term_lists[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Numeric characteristics of a family of curves: how many members satisfy
/// each canonical combination of point, direction, and divisor conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCharacteristics {
    /// Dimension of the family.
    pub parameter_count: u32,
    /// Degree of a general member.
    pub member_degree: u64,
    /// Characteristic numbers keyed by canonical monomial key.
    pub values: BTreeMap<String, BigInt>,
}

impl FamilyCharacteristics {
    /// Validates and canonicalizes the key set: every key must parse, have
    /// total weight equal to the family dimension, and contain no
    /// weight-0 factors.
    pub fn new(
        parameter_count: u32,
        member_degree: u64,
        values: BTreeMap<String, BigInt>,
    ) -> Result<Self, ContactError> {
        let mut canonical = BTreeMap::new();
        for (key, value) in values {
            let mut tags = Vec::new();
            for code in key.split('.') {
                let tag = FactorTag::parse(code)?;
                if tag.weight == 0 {
                    return Err(ContactError::BadKey {
                        key: key.clone(),
                        message: "weight-0 factors carry no condition".to_string(),
                    });
                }
                tags.push(tag);
            }
            let monomial = ContactMonomial::new(tags);
            let weight = monomial.total_weight();
            if weight != parameter_count {
                return Err(ContactError::WeightMismatch {
                    key,
                    weight,
                    expected: parameter_count,
                });
            }
            canonical.insert(monomial.canonical_key(), value);
        }
        Ok(FamilyCharacteristics {
            parameter_count,
            member_degree,
            values: canonical,
        })
    }
}

/// Result of evaluating an expansion against a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoContactResult {
    /// Sum of coefficient times characteristic value over the expansion.
    pub total: BigInt,
    /// (monomial, module coefficient, characteristic value) triples.
    pub expansion: Vec<(ContactMonomial, BigInt, BigInt)>,
    /// Notes on unmet hypotheses and defaulted inputs. Warnings never make
    /// an evaluation fail.
    pub hypothesis_warnings: Vec<String>,
}

/// Pairs every expansion entry with its characteristic value: weight-0
/// point factors contribute a factor of member degree each, and the
/// remaining factors look up the family value of their canonical key. The
/// empty combination has value 1.
pub fn evaluate(
    expansion: &[(ContactMonomial, BigInt)],
    family: &FamilyCharacteristics,
) -> Result<ProtoContactResult, ContactError> {
    let degree = BigInt::from(family.member_degree);
    let mut total = BigInt::zero();
    let mut detailed = Vec::with_capacity(expansion.len());
    for (monomial, coeff) in expansion {
        let positive_weight = monomial.total_weight();
        if positive_weight != family.parameter_count {
            return Err(ContactError::WeightMismatch {
                key: monomial.canonical_key(),
                weight: positive_weight,
                expected: family.parameter_count,
            });
        }
        let key = monomial.reduced_key();
        let base = if key.is_empty() {
            BigInt::one()
        } else {
            family
                .values
                .get(&key)
                .cloned()
                .ok_or(ContactError::MissingValue { key })?
        };
        let mut value = base;
        for _ in 0..monomial.lambda0_count() {
            value *= &degree;
        }
        total += coeff * &value;
        detailed.push((monomial.clone(), coeff.clone(), value));
    }
    Ok(ProtoContactResult {
        total,
        expansion: detailed,
        hypothesis_warnings: Vec::new(),
    })
}

/// Computes the proto-contact count of a family with p curves at the given
/// contact orders: the product of the weight-(oᵢ−1) modules evaluated
/// against the family characteristics.
pub fn proto_contact(
    curves: &[CurveCharacteristics],
    orders: &[u32],
    family: &FamilyCharacteristics,
) -> Result<ProtoContactResult, ContactError> {
    if curves.len() != orders.len() {
        return Err(ContactError::LengthMismatch {
            curves: curves.len(),
            orders: orders.len(),
        });
    }
    if curves.is_empty() {
        return Err(ContactError::EmptyProduct);
    }
    let mut warnings = Vec::new();
    let mut order_sum: u64 = 0;
    let mut weight_sum: u32 = 0;
    for &o in orders {
        if o == 0 {
            return Err(ContactError::OrderTooSmall(o));
        }
        order_sum += u64::from(o);
        weight_sum += o - 1;
    }
    if weight_sum != family.parameter_count {
        return Err(ContactError::ParameterCountMismatch {
            sum: weight_sum,
            expected: family.parameter_count,
        });
    }
    if family.member_degree + 1 < order_sum {
        warnings.push(format!(
            "orders sum to {} but members have degree {}; the count needs degree + 1 >= total order",
            order_sum, family.member_degree
        ));
    }
    let mut modules = Vec::with_capacity(curves.len());
    for (idx, (curve, &order)) in curves.iter().zip(orders).enumerate() {
        let weight = order - 1;
        let mut defaulted: Vec<u32> = Vec::new();
        for j in 2..=weight {
            if !curve.cusps.contains_key(&j) {
                defaulted.push(j);
            }
        }
        if !defaulted.is_empty() {
            let names: Vec<String> = defaulted.iter().map(|j| format!("kappa{j}")).collect();
            warnings.push(format!("curve {}: {} read as 0", idx + 1, names.join(", ")));
        }
        if curve.has_profound_cusp {
            warnings.push(format!(
                "curve {}: a profound cusp violates the count's hypotheses",
                idx + 1
            ));
        }
        if curve.has_flat_cusp {
            warnings.push(format!(
                "curve {}: a flat cusp violates the count's hypotheses",
                idx + 1
            ));
        }
        modules.push(curve_module(curve, weight));
    }
    let expansion = multiply_modules(&modules)?;
    let mut result = evaluate(&expansion, family)?;
    result.hypothesis_warnings = warnings;
    Ok(result)
}

/// Class of the lifted curve in the geometric basis of the same level:
/// degree on the point dual, class number on the direction dual, and the
/// ladder values on the divisor duals.
pub fn lift_class(
    curve: &CurveCharacteristics,
    level: u32,
    basis: &GeometricBasis,
) -> Result<ChowClass, ContactError> {
    if basis.level != level || level < 1 {
        return Err(ContactError::BasisLevelMismatch {
            basis_level: basis.level,
            requested: level,
        });
    }
    let module = curve_module(curve, level);
    let rat = |b: &BigInt| num::BigRational::from_integer(b.clone());
    let mut class = basis.codim_basis[0].scale(&rat(&module.coeff_lambda));
    class = class.add(&basis.codim_basis[1].scale(&rat(&module.coeff_pi)));
    for k in 2..=level {
        class = class.add(&basis.codim_basis[k as usize].scale(&rat(&module.coeff_gamma[&k])));
    }
    Ok(class)
}

/// Merges an expansion by canonical key, summing coefficients.
pub fn collect_by_key(expansion: &[(ContactMonomial, BigInt)]) -> BTreeMap<String, BigInt> {
    let mut merged: BTreeMap<String, BigInt> = BTreeMap::new();
    for (monomial, coeff) in expansion {
        let entry = merged
            .entry(monomial.canonical_key())
            .or_insert_with(BigInt::zero);
        *entry += coeff;
    }
    merged.retain(|_, v| !v.is_zero());
    merged
}
