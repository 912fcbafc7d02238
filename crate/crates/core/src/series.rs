//! Truncated formal power series with exact rational coefficients.
//!
//! A series carries a precision bound: coefficients are exact for every
//! exponent strictly below `prec`, and unknown from `prec` on. Arithmetic
//! propagates the bound pessimistically, and valuation queries distinguish
//! "known to start at e" from "no nonzero coefficient within the known
//! range". Operations never guess: when an answer would depend on unknown
//! coefficients, they fail with the precision that would have been needed.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Zero};

/// Outcome of a valuation query on a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    /// Lowest exponent with a nonzero coefficient.
    Exact(u32),
    /// All known coefficients vanish; the true valuation is at least this.
    AtLeast(u32),
}

impl Valuation {
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

/// Failure modes of series arithmetic that consume precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesFailure {
    /// The divisor has no known nonzero coefficient, so its valuation (and
    /// hence the quotient) is undetermined.
    DivisorUndetermined { precision: u32 },
    /// The quotient would contain negative exponents.
    NegativeValuation { numerator: u32, divisor: u32 },
}

/// Power series known exactly below `prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    terms: BTreeMap<u32, BigRational>,
    prec: u32,
}

impl TruncatedSeries {
    pub fn zero(prec: u32) -> Self {
        TruncatedSeries {
            terms: BTreeMap::new(),
            prec,
        }
    }

    pub fn monomial(exp: u32, coeff: BigRational, prec: u32) -> Self {
        let mut s = TruncatedSeries::zero(prec);
        if exp < prec && !coeff.is_zero() {
            s.terms.insert(exp, coeff);
        }
        s
    }

    /// Builds a series from (exponent, coefficient) pairs; terms at or above
    /// the precision bound are unknown territory and must not be supplied.
    pub fn from_terms<I>(pairs: I, prec: u32) -> Self
    where
        I: IntoIterator<Item = (u32, BigRational)>,
    {
        let mut terms = BTreeMap::new();
        for (e, c) in pairs {
            debug_assert!(e < prec, "term beyond the precision bound");
            if c.is_zero() || e >= prec {
                continue;
            }
            let entry = terms.entry(e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(&e);
            }
        }
        TruncatedSeries { terms, prec }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &BigRational)> {
        self.terms.iter()
    }

    /// Coefficient at an exponent, or None when the exponent is outside the
    /// known range.
    pub fn coefficient(&self, exp: u32) -> Option<BigRational> {
        if exp >= self.prec {
            return None;
        }
        Some(
            self.terms
                .get(&exp)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        )
    }

    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(&e) => Valuation::Exact(e),
            None => Valuation::AtLeast(self.prec),
        }
    }

    pub fn is_known_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn truncate_to(&mut self, prec: u32) {
        self.prec = prec;
        self.terms.retain(|&e, _| e < prec);
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let mut out = self.clone();
        out.truncate_to(prec);
        for (&e, c) in &other.terms {
            if e >= prec {
                continue;
            }
            let entry = out.terms.entry(e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(&e);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return TruncatedSeries::zero(self.prec);
        }
        TruncatedSeries {
            terms: self.terms.iter().map(|(&e, c)| (e, c * q)).collect(),
            prec: self.prec,
        }
    }

    /// Product; the result is exact below
    /// `min(prec_a + val_b, prec_b + val_a)` using valuation lower bounds.
    pub fn mul(&self, other: &Self) -> Self {
        let va = self.valuation().lower_bound();
        let vb = other.valuation().lower_bound();
        let prec = (self.prec.saturating_add(vb)).min(other.prec.saturating_add(va));
        let mut terms: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &other.terms {
                let e = ea + eb;
                if e >= prec {
                    continue;
                }
                let entry = terms.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
                if entry.is_zero() {
                    terms.remove(&e);
                }
            }
        }
        TruncatedSeries { terms, prec }
    }

    /// Termwise derivative with respect to the parameter; one order of
    /// precision is spent.
    pub fn derivative(&self) -> Self {
        let prec = self.prec.saturating_sub(1);
        let mut terms = BTreeMap::new();
        for (&e, c) in &self.terms {
            if e == 0 || e > prec {
                continue;
            }
            terms.insert(e - 1, c * BigRational::from_integer(e.into()));
        }
        TruncatedSeries { terms, prec }
    }

    /// Exact division. The divisor's valuation must be determined. A
    /// numerator with no known nonzero coefficient divides to a zero series
    /// of reduced precision.
    pub fn div(&self, divisor: &Self) -> Result<Self, SeriesFailure> {
        let vd = match divisor.valuation() {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(p) => {
                return Err(SeriesFailure::DivisorUndetermined { precision: p })
            }
        };
        let vn = match self.valuation() {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(p) => {
                return Ok(TruncatedSeries::zero(p.saturating_sub(vd)));
            }
        };
        if vn < vd {
            return Err(SeriesFailure::NegativeValuation {
                numerator: vn,
                divisor: vd,
            });
        }
        // Shift both operands down by the divisor valuation and run unit
        // long division; the quotient is exact below
        // (vn - vd) + min(prec_n - vn, prec_d - vd).
        let len = (self.prec - vd).min(divisor.prec + vn - 2 * vd);
        let mut quotient = TruncatedSeries::zero(len);
        let lead = divisor.terms.get(&vd).expect("exact valuation").clone();
        let mut remainder: BTreeMap<u32, BigRational> = self
            .terms
            .iter()
            .filter(|&(&e, _)| e - vd < len)
            .map(|(&e, c)| (e - vd, c.clone()))
            .collect();
        while let Some((&e, _)) = remainder.iter().next() {
            let coeff = remainder.remove(&e).unwrap() / &lead;
            quotient.terms.insert(e, coeff.clone());
            for (&ed, cd) in divisor.terms.range(vd + 1..) {
                let target = e + (ed - vd);
                if target >= len {
                    break;
                }
                let entry = remainder.entry(target).or_insert_with(BigRational::zero);
                *entry -= &coeff * cd;
                if entry.is_zero() {
                    remainder.remove(&target);
                }
            }
        }
        Ok(quotient)
    }

    /// Substitutes another series for the parameter. The inner series must
    /// have valuation at least 1; precision of the result is the minimum of
    /// the two precisions.
    pub fn compose(&self, inner: &Self) -> Self {
        assert!(
            inner.valuation().lower_bound() >= 1,
            "composition needs a parameter change of positive valuation"
        );
        let prec = self.prec.min(inner.prec);
        let mut result = TruncatedSeries::zero(prec);
        // Horner evaluation over descending exponents.
        let mut exps: Vec<u32> = self.terms.keys().copied().collect();
        exps.sort_unstable_by(|a, b| b.cmp(a));
        if exps.is_empty() {
            return result;
        }
        let mut acc = TruncatedSeries::zero(prec);
        let mut last_exp = exps[0];
        acc = acc.add(&TruncatedSeries::monomial(
            0,
            self.terms[&last_exp].clone(),
            prec,
        ));
        for &e in &exps[1..] {
            for _ in 0..(last_exp - e) {
                acc = acc.mul(inner);
                acc.truncate_to(prec.min(acc.prec));
            }
            acc = acc.add(&TruncatedSeries::monomial(0, self.terms[&e].clone(), prec));
            last_exp = e;
        }
        for _ in 0..last_exp {
            acc = acc.mul(inner);
            acc.truncate_to(prec.min(acc.prec));
        }
        result = result.add(&acc);
        result.truncate_to(prec);
        result
    }

    /// True when the two series agree on every coefficient both know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let prec = self.prec.min(other.prec);
        for e in 0..prec {
            if self.coefficient(e) != other.coefficient(e) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{e}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.prec)
    }
}
