//! Jet-chart polynomial calculus: the derivation operators, defining
//! sequences of lifted curves, annihilation checks on monomial jets, and
//! exact universal matrices for incidence systems.
//!
//! A chart at level n is either primary, with variables x, y, y', ...,
//! y^(n), or secondary of index j, with variables x, y, y', ..., y^(j-1),
//! x', ..., x^(n-j+1). On a secondary chart the operator P differentiates
//! along the curve direction and Q differentiates in the chart parameter;
//! both truncate at the chart's top variable, which is exactly the behavior
//! the annihilation statements are phrased in.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::JetError;
use crate::matrix::RatMatrix;

/// Which atlas member a chart belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetChartKind {
    Primary,
    Secondary { j: u32 },
}

/// A chart on the level-n bundle together with its variable layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartSpec {
    level: u32,
    kind: JetChartKind,
}

impl ChartSpec {
    pub fn primary(level: u32) -> Result<Self, JetError> {
        if level < 1 {
            return Err(JetError::ParamsOutOfRange(
                "a primary chart needs level >= 1".to_string(),
            ));
        }
        Ok(ChartSpec {
            level,
            kind: JetChartKind::Primary,
        })
    }

    pub fn secondary(level: u32, j: u32) -> Result<Self, JetError> {
        if j < 2 || j > level {
            return Err(JetError::ParamsOutOfRange(format!(
                "a secondary chart needs 2 <= j <= level, got j = {j} at level {level}"
            )));
        }
        Ok(ChartSpec {
            level,
            kind: JetChartKind::Secondary { j },
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn kind(&self) -> JetChartKind {
        self.kind
    }

    /// Number of chart variables: level + 2.
    pub fn arity(&self) -> usize {
        self.level as usize + 2
    }

    /// Index of y^(t), when the chart contains it.
    pub fn y_index(&self, t: u32) -> Option<usize> {
        let top = match self.kind {
            JetChartKind::Primary => self.level,
            JetChartKind::Secondary { j } => j - 1,
        };
        (t <= top).then(|| 1 + t as usize)
    }

    /// Index of x^(t), when the chart contains it; x itself is index 0.
    pub fn x_index(&self, t: u32) -> Option<usize> {
        if t == 0 {
            return Some(0);
        }
        match self.kind {
            JetChartKind::Primary => None,
            JetChartKind::Secondary { j } => (t <= self.level - j + 1).then(|| (j + t) as usize),
        }
    }

    pub fn var_label(&self, index: usize) -> String {
        let describe = |base: &str, t: u32| match t {
            0 => base.to_string(),
            1 => format!("{base}'"),
            2 => format!("{base}''"),
            t => format!("{base}^({t})"),
        };
        match self.kind {
            JetChartKind::Primary => {
                if index == 0 {
                    "x".to_string()
                } else {
                    describe("y", index as u32 - 1)
                }
            }
            JetChartKind::Secondary { j } => {
                if index == 0 {
                    "x".to_string()
                } else if index <= j as usize {
                    describe("y", index as u32 - 1)
                } else {
                    describe("x", index as u32 - j)
                }
            }
        }
    }

    /// Applies the along-the-curve derivation: d/dx plus each jet variable
    /// times the partial with respect to the previous one, truncated at the
    /// chart's top y-variable.
    pub fn apply_p(&self, p: &JetPolynomial) -> JetPolynomial {
        let top = match self.kind {
            JetChartKind::Primary => self.level,
            JetChartKind::Secondary { j } => j - 1,
        };
        let mut out = p.partial(0);
        for i in 1..=top {
            let term = p
                .partial(i as usize)
                .mul(&JetPolynomial::var(1 + i as usize, self.arity()));
            out = out.add(&term);
        }
        out
    }

    /// Applies the chart-parameter derivation x'·P + d/dy^(j-1) plus each
    /// higher x-variable times the partial with respect to the previous one.
    /// Defined on secondary charts only.
    pub fn apply_q(&self, p: &JetPolynomial) -> Result<JetPolynomial, JetError> {
        let j = match self.kind {
            JetChartKind::Primary => return Err(JetError::QOnPrimaryChart),
            JetChartKind::Secondary { j } => j,
        };
        let tail = self.level - j + 1;
        let x_prime = JetPolynomial::var((j + 1) as usize, self.arity());
        let mut out = self.apply_p(p).mul(&x_prime);
        out = out.add(&p.partial(j as usize));
        for i in 1..tail {
            let next = JetPolynomial::var((j + i + 1) as usize, self.arity());
            out = out.add(&p.partial((j + i) as usize).mul(&next));
        }
        Ok(out)
    }
}

/// Exact polynomial in the variables of one chart, exponent-vector keyed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetPolynomial {
    arity: usize,
    terms: BTreeMap<Vec<u16>, BigRational>,
}

impl JetPolynomial {
    pub fn zero(arity: usize) -> Self {
        JetPolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(value: BigRational, arity: usize) -> Self {
        let mut p = JetPolynomial::zero(arity);
        if !value.is_zero() {
            p.terms.insert(vec![0; arity], value);
        }
        p
    }

    pub fn one(arity: usize) -> Self {
        JetPolynomial::constant(BigRational::one(), arity)
    }

    pub fn var(index: usize, arity: usize) -> Self {
        assert!(index < arity, "variable index within arity");
        let mut exps = vec![0u16; arity];
        exps[index] = 1;
        let mut p = JetPolynomial::zero(arity);
        p.terms.insert(exps, BigRational::one());
        p
    }

    pub fn monomial(exps: Vec<u16>, coeff: BigRational) -> Self {
        let arity = exps.len();
        let mut p = JetPolynomial::zero(arity);
        if !coeff.is_zero() {
            p.terms.insert(exps, coeff);
        }
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.arity, other.arity);
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

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return JetPolynomial::zero(self.arity);
        }
        JetPolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.arity, other.arity);
        let mut terms: BTreeMap<Vec<u16>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = terms.entry(exps).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        JetPolynomial {
            arity: self.arity,
            terms,
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut out = JetPolynomial::one(self.arity);
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to one variable.
    pub fn partial(&self, index: usize) -> Self {
        let mut terms: BTreeMap<Vec<u16>, BigRational> = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[index] -= 1;
            let coeff = c * BigRational::from_integer(BigInt::from(e[index]));
            let entry = terms.entry(exps).or_insert_with(BigRational::zero);
            *entry += coeff;
        }
        terms.retain(|_, c| !c.is_zero());
        JetPolynomial {
            arity: self.arity,
            terms,
        }
    }

    /// Sets one variable to zero, dropping every term that involves it.
    pub fn substitute_zero(&self, index: usize) -> Self {
        JetPolynomial {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[index] == 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational, JetError> {
        if point.len() != self.arity {
            return Err(JetError::PointArityMismatch {
                expected: self.arity,
                found: point.len(),
            });
        }
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut value = c.clone();
            for (idx, &exp) in e.iter().enumerate() {
                for _ in 0..exp {
                    value *= &point[idx];
                }
            }
            total += value;
        }
        Ok(total)
    }

    /// Renders one exponent vector with the chart's variable names.
    fn monomial_label(exps: &[u16], chart: &ChartSpec) -> String {
        let mut out = String::new();
        for (idx, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('*');
            }
            let _ = write!(out, "{}", chart.var_label(idx));
            if e > 1 {
                let _ = write!(out, "^{e}");
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }

    pub fn to_display(&self, chart: &ChartSpec) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (e, c) in &self.terms {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            let _ = write!(out, "{}*{}", c, Self::monomial_label(e, chart));
        }
        out
    }
}

/// Defining sequence of the lift of { f = 0 } in a chart: the primary chart
/// iterates the along-the-curve derivation; a secondary chart switches to
/// the chart-parameter derivation after j-1 steps.
pub fn defining_sequence(
    f: &JetPolynomial,
    chart: &ChartSpec,
) -> Result<Vec<JetPolynomial>, JetError> {
    for (e, _) in f.terms() {
        for (idx, &exp) in e.iter().enumerate() {
            if idx >= 2 && exp > 0 {
                return Err(JetError::VariableOutsideChart {
                    index: idx,
                    arity: chart.arity(),
                });
            }
        }
    }
    debug_assert_eq!(f.arity(), chart.arity());
    let mut seq = vec![f.clone()];
    match chart.kind {
        JetChartKind::Primary => {
            for _ in 0..chart.level {
                let next = chart.apply_p(seq.last().expect("nonempty"));
                seq.push(next);
            }
        }
        JetChartKind::Secondary { j } => {
            for _ in 0..j - 1 {
                let next = chart.apply_p(seq.last().expect("nonempty"));
                seq.push(next);
            }
            for _ in 0..chart.level - j + 1 {
                let next = chart.apply_q(seq.last().expect("nonempty"))?;
                seq.push(next);
            }
        }
    }
    Ok(seq)
}

/// Gradings on chart polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingKind {
    /// x^(t) has weight 2 - t; defined on polynomials in x-variables only.
    Simple,
    /// x^(t) has bidegree (2-t, 1) and y^(t) has (2(j-t)-1, j-1-t).
    Bigraded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradedWeight {
    Simple(i64),
    Bigraded(i64, i64),
}

/// Weight of a homogeneous polynomial under the chosen grading. The zero
/// polynomial reports weight 0.
pub fn weight_of(
    p: &JetPolynomial,
    chart: &ChartSpec,
    grading: GradingKind,
) -> Result<GradedWeight, JetError> {
    let j = match chart.kind {
        JetChartKind::Secondary { j } => j,
        JetChartKind::Primary => {
            return Err(JetError::ParamsOutOfRange(
                "jet gradings are declared on secondary charts".to_string(),
            ));
        }
    };
    let var_degree = |idx: usize| -> (i64, i64, bool) {
        // Returns (first, second, is_y).
        if idx == 0 {
            (2, 1, false)
        } else if idx <= j as usize {
            let t = idx as i64 - 1;
            let j = i64::from(j);
            (2 * (j - t) - 1, j - 1 - t, true)
        } else {
            let t = idx as i64 - i64::from(j);
            (2 - t, 1, false)
        }
    };
    let mut weights: Vec<GradedWeight> = Vec::new();
    let mut offending: Vec<String> = Vec::new();
    for (e, _) in p.terms() {
        let mut first: i64 = 0;
        let mut second: i64 = 0;
        let mut uses_y = false;
        for (idx, &exp) in e.iter().enumerate() {
            if exp == 0 {
                continue;
            }
            let (a, b, is_y) = var_degree(idx);
            first += a * i64::from(exp);
            second += b * i64::from(exp);
            uses_y |= is_y;
        }
        if grading == GradingKind::Simple && uses_y {
            offending.push(JetPolynomial::monomial_label(e, chart));
            continue;
        }
        weights.push(match grading {
            GradingKind::Simple => GradedWeight::Simple(first),
            GradingKind::Bigraded => GradedWeight::Bigraded(first, second),
        });
    }
    if !offending.is_empty() {
        return Err(JetError::MixedVariables {
            monomials: offending,
        });
    }
    weights.dedup();
    match weights.len() {
        0 => Ok(match grading {
            GradingKind::Simple => GradedWeight::Simple(0),
            GradingKind::Bigraded => GradedWeight::Bigraded(0, 0),
        }),
        1 => Ok(weights[0]),
        _ => Err(JetError::Inhomogeneous {
            grading: match grading {
                GradingKind::Simple => "simple",
                GradingKind::Bigraded => "bigraded",
            },
            monomials: p
                .terms()
                .map(|(e, _)| JetPolynomial::monomial_label(e, chart))
                .collect(),
        }),
    }
}

/// The annihilation and recursion statements checked on monomial jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaStatement {
    /// Q^i P^(j-1)(x^k) mod (x, x') vanishes below threshold 2(k-j+1) and is
    /// a positive multiple of (x'')^(k-j+1) at it.
    PowerAnnihilation { k: u32, i: u32 },
    /// Evaluation at x = 0 of Q^i(x^m) satisfies a first-order recursion.
    SubstitutionRecursion { i: u32, m: u32 },
    /// Q^i(y^(h)) minus its jet-coefficient expansion uses x-variables only.
    JetCoefficientRemainder { h: u32, i: u32 },
    /// Q^i P^h(y) minus its expansion vanishes below 2(j-1-h)+1.
    DerivedAnnihilation { h: u32, i: u32 },
    /// Multiplying the argument by x shifts Q^i P^h by a binomial sum.
    ProductShift {
        h: u32,
        i: u32,
        alpha: u32,
        beta: u32,
    },
    /// Q^i P^h(x^k y) minus its expansion vanishes below 2(k+j-1-h)+1.
    MixedAnnihilation { k: u32, h: u32, i: u32 },
    /// The h = j-1 case: threshold 2k+1 and power (x'')^k.
    TopMixedAnnihilation { k: u32, i: u32 },
}

impl LemmaStatement {
    pub fn label(&self) -> String {
        match *self {
            LemmaStatement::PowerAnnihilation { k, i } => {
                format!("power-annihilation k={k} i={i}")
            }
            LemmaStatement::SubstitutionRecursion { i, m } => {
                format!("substitution-recursion i={i} m={m}")
            }
            LemmaStatement::JetCoefficientRemainder { h, i } => {
                format!("jet-coefficient-remainder h={h} i={i}")
            }
            LemmaStatement::DerivedAnnihilation { h, i } => {
                format!("derived-annihilation h={h} i={i}")
            }
            LemmaStatement::ProductShift { h, i, alpha, beta } => {
                format!("product-shift h={h} i={i} phi=x^{alpha}y^{beta}")
            }
            LemmaStatement::MixedAnnihilation { k, h, i } => {
                format!("mixed-annihilation k={k} h={h} i={i}")
            }
            LemmaStatement::TopMixedAnnihilation { k, i } => {
                format!("top-mixed-annihilation k={k} i={i}")
            }
        }
    }
}

/// Verdict of one statement check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaOutcome {
    pub holds: bool,
    /// The strictly positive coefficient extracted in an equality case.
    pub positive_witness: Option<BigRational>,
}

/// Memoizing evaluator for iterated P and Q on monomials of one secondary
/// chart.
pub struct JetCalculator {
    chart: ChartSpec,
    j: u32,
    tail: u32,
    monomials: HashMap<(u32, u32, u32, u32), JetPolynomial>,
    jets: HashMap<(u32, u32), JetPolynomial>,
}

impl JetCalculator {
    pub fn new(chart: ChartSpec) -> Result<Self, JetError> {
        let j = match chart.kind {
            JetChartKind::Secondary { j } => j,
            JetChartKind::Primary => return Err(JetError::QOnPrimaryChart),
        };
        Ok(JetCalculator {
            chart,
            j,
            tail: chart.level - j + 1,
            monomials: HashMap::new(),
            jets: HashMap::new(),
        })
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    /// Q^a P^h (x^alpha y^beta).
    fn mono(&mut self, alpha: u32, beta: u32, h: u32, a: u32) -> JetPolynomial {
        let key = (alpha, beta, h, a);
        if let Some(p) = self.monomials.get(&key) {
            return p.clone();
        }
        let result = if a > 0 {
            let prev = self.mono(alpha, beta, h, a - 1);
            self.chart.apply_q(&prev).expect("secondary chart")
        } else if h > 0 {
            let prev = self.mono(alpha, beta, h - 1, 0);
            self.chart.apply_p(&prev)
        } else {
            let arity = self.chart.arity();
            let mut exps = vec![0u16; arity];
            exps[0] = alpha as u16;
            exps[1] = beta as u16;
            JetPolynomial::monomial(exps, BigRational::one())
        };
        self.monomials.insert(key, result.clone());
        result
    }

    /// Q^i (y^(h)).
    fn jet(&mut self, h: u32, i: u32) -> JetPolynomial {
        let key = (h, i);
        if let Some(p) = self.jets.get(&key) {
            return p.clone();
        }
        let result = if i > 0 {
            let prev = self.jet(h, i - 1);
            self.chart.apply_q(&prev).expect("secondary chart")
        } else {
            JetPolynomial::var(
                self.chart.y_index(h).expect("h below the chart top"),
                self.chart.arity(),
            )
        };
        self.jets.insert(key, result.clone());
        result
    }

    fn reduce(&self, p: &JetPolynomial) -> JetPolynomial {
        let x_prime = self.chart.x_index(1).expect("secondary chart has x'");
        p.substitute_zero(0).substitute_zero(x_prime)
    }

    /// Recognizes c·(x'')^power with nothing else; power 0 means a constant.
    fn positive_multiple(
        &self,
        reduced: &JetPolynomial,
        power: u32,
    ) -> (bool, Option<BigRational>) {
        let Some(x2) = self.chart.x_index(2) else {
            return (false, None);
        };
        let mut expected = vec![0u16; self.chart.arity()];
        if power > 0 {
            expected[x2] = power as u16;
        }
        let mut coeff = None;
        for (e, c) in reduced.terms() {
            if *e == expected && coeff.is_none() {
                coeff = Some(c.clone());
            } else {
                return (false, None);
            }
        }
        match coeff {
            Some(c) => (c.is_positive(), Some(c)),
            None => (false, None),
        }
    }

    fn constant_multiple(&self, reduced: &JetPolynomial) -> (bool, Option<BigRational>) {
        let expected = vec![0u16; self.chart.arity()];
        let mut coeff = None;
        for (e, c) in reduced.terms() {
            if *e == expected && coeff.is_none() {
                coeff = Some(c.clone());
            } else {
                return (false, None);
            }
        }
        match coeff {
            Some(c) => (c.is_positive(), Some(c)),
            None => (false, None),
        }
    }

    fn out_of_range(message: String) -> JetError {
        JetError::ParamsOutOfRange(message)
    }

    fn threshold_case(
        &mut self,
        difference: JetPolynomial,
        i: u32,
        threshold: u32,
        power: u32,
    ) -> LemmaOutcome {
        let reduced = self.reduce(&difference);
        if i < threshold {
            LemmaOutcome {
                holds: reduced.is_zero(),
                positive_witness: None,
            }
        } else {
            let (holds, witness) = if power == 0 {
                self.constant_multiple(&reduced)
            } else {
                self.positive_multiple(&reduced, power)
            };
            LemmaOutcome {
                holds,
                positive_witness: witness,
            }
        }
    }

    fn y_jet_poly(&self, b: u32) -> JetPolynomial {
        JetPolynomial::var(
            self.chart.y_index(b).expect("b below the chart top"),
            self.chart.arity(),
        )
    }

    /// Q^i P^h (x^k y) minus its jet-coefficient expansion, judged against
    /// the threshold 2(k+j-1-h)+1.
    fn mixed_case(&mut self, k: u32, h: u32, i: u32) -> Result<LemmaOutcome, JetError> {
        let j = self.j;
        if h > j - 1 {
            return Err(Self::out_of_range(format!(
                "h must be at most j-1 = {}, got {h}",
                j - 1
            )));
        }
        let threshold = 2 * (k + j - 1 - h) + 1;
        let power = k + j - 1 - h;
        if i > threshold {
            return Err(Self::out_of_range(format!(
                "i must be at most the threshold {threshold}, got {i}"
            )));
        }
        if i == threshold && power >= 1 && self.tail < 2 {
            return Err(Self::out_of_range(
                "the equality case needs x'' in the chart".to_string(),
            ));
        }
        let mut diff = self.mono(k, 1, h, i);
        for b in 0..=j - 1 {
            let coeff = BigRational::new(BigInt::one(), factorial(b));
            let term = self
                .y_jet_poly(b)
                .mul(&self.mono(k + b, 0, h, i))
                .scale(&coeff);
            diff = diff.sub(&term);
        }
        Ok(self.threshold_case(diff, i, threshold, power))
    }

    /// Checks one statement; parameters outside a statement's range (or an
    /// equality case not expressible in this chart) report an error rather
    /// than a verdict.
    pub fn check(&mut self, statement: &LemmaStatement) -> Result<LemmaOutcome, JetError> {
        let j = self.j;
        match *statement {
            LemmaStatement::PowerAnnihilation { k, i } => {
                if k < j {
                    return Err(Self::out_of_range(format!(
                        "k must be at least j = {j}, got {k}"
                    )));
                }
                let threshold = 2 * (k - j + 1);
                if i > threshold {
                    return Err(Self::out_of_range(format!(
                        "i must be at most the threshold {threshold}, got {i}"
                    )));
                }
                if i == threshold && self.tail < 2 {
                    return Err(Self::out_of_range(
                        "the equality case needs x'' in the chart".to_string(),
                    ));
                }
                let value = self.mono(k, 0, j - 1, i);
                Ok(self.threshold_case(value, i, threshold, k - j + 1))
            }
            LemmaStatement::SubstitutionRecursion { i, m } => {
                if i < 1 || m < 1 {
                    return Err(Self::out_of_range(
                        "the recursion needs i >= 1 and m >= 1".to_string(),
                    ));
                }
                let lhs = self.mono(m, 0, 0, i).substitute_zero(0);
                let prev = self.mono(m, 0, 0, i - 1).substitute_zero(0);
                let mut rhs = self.chart.apply_q(&prev)?;
                let x_prime =
                    JetPolynomial::var(self.chart.x_index(1).expect("x'"), self.chart.arity());
                let lower = self.mono(m - 1, 0, 0, i - 1).substitute_zero(0);
                rhs = rhs.add(
                    &x_prime
                        .mul(&lower)
                        .scale(&BigRational::from_integer(BigInt::from(m))),
                );
                Ok(LemmaOutcome {
                    holds: lhs == rhs,
                    positive_witness: None,
                })
            }
            LemmaStatement::JetCoefficientRemainder { h, i } => {
                if h > j - 1 {
                    return Err(Self::out_of_range(format!(
                        "h must be at most j-1 = {}, got {h}",
                        j - 1
                    )));
                }
                let mut diff = self.jet(h, i);
                for b in h..=j - 1 {
                    let coeff = BigRational::new(BigInt::one(), factorial(b - h));
                    let evaluated = self.mono(b - h, 0, 0, i).substitute_zero(0);
                    let term = self.y_jet_poly(b).mul(&evaluated).scale(&coeff);
                    diff = diff.sub(&term);
                }
                let y_free = diff
                    .terms()
                    .all(|(e, _)| (1..=j as usize).all(|idx| e[idx] == 0));
                Ok(LemmaOutcome {
                    holds: y_free,
                    positive_witness: None,
                })
            }
            LemmaStatement::DerivedAnnihilation { h, i } => self.mixed_case(0, h, i),
            LemmaStatement::ProductShift { h, i, alpha, beta } => {
                if h < 1 || i < 2 {
                    return Err(Self::out_of_range(
                        "the shift needs h >= 1 and i >= 2".to_string(),
                    ));
                }
                let lhs = self.mono(alpha + 1, beta, h, i);
                let mut rhs = self
                    .mono(alpha, beta, h - 1, i)
                    .scale(&BigRational::from_integer(BigInt::from(h)));
                for a in 0..=i.saturating_sub(2) {
                    let order = i - a;
                    let Some(idx) = self.chart.x_index(order) else {
                        continue;
                    };
                    let x_var = JetPolynomial::var(idx, self.chart.arity());
                    let coeff = BigRational::from_integer(binomial(i, a));
                    rhs = rhs.add(&self.mono(alpha, beta, h, a).mul(&x_var).scale(&coeff));
                }
                let reduced = self.reduce(&lhs.sub(&rhs));
                Ok(LemmaOutcome {
                    holds: reduced.is_zero(),
                    positive_witness: None,
                })
            }
            LemmaStatement::MixedAnnihilation { k, h, i } => self.mixed_case(k, h, i),
            LemmaStatement::TopMixedAnnihilation { k, i } => self.mixed_case(k, j - 1, i),
        }
    }
}

fn factorial(n: u32) -> BigInt {
    let mut out = BigInt::one();
    for v in 2..=n {
        out *= BigInt::from(v);
    }
    out
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut out = BigInt::one();
    for v in 0..k.min(n - k) {
        out = out * BigInt::from(n - v) / BigInt::from(v + 1);
    }
    out
}

/// One checked case of the sweep.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub j: u32,
    pub tail: u32,
    pub statement: LemmaStatement,
    pub outcome: LemmaOutcome,
}

/// Runs every statement over every secondary chart with j <= max_j and
/// trailing x-variable count <= max_tail, powers up to max_k, and iteration
/// counts up to each statement's own threshold (max_i where the statement
/// has no threshold). Cases whose equality form needs a variable the chart
/// lacks are skipped.
pub fn lemma_b_sweep(
    max_j: u32,
    max_tail: u32,
    max_k: u32,
    max_i: u32,
) -> Result<Vec<SweepCase>, JetError> {
    let mut cases = Vec::new();
    for j in 2..=max_j {
        for tail in 1..=max_tail {
            let level = j - 1 + tail;
            let chart = ChartSpec::secondary(level, j)?;
            let mut calc = JetCalculator::new(chart)?;
            let mut statements: Vec<LemmaStatement> = Vec::new();
            for k in j..=max_k.max(j) {
                let threshold = 2 * (k - j + 1);
                let top = if tail < 2 { threshold - 1 } else { threshold };
                for i in 0..=top {
                    statements.push(LemmaStatement::PowerAnnihilation { k, i });
                }
            }
            for i in 1..=max_i {
                for m in 1..=max_k {
                    statements.push(LemmaStatement::SubstitutionRecursion { i, m });
                }
            }
            for h in 0..=j - 1 {
                for i in 0..=max_i {
                    statements.push(LemmaStatement::JetCoefficientRemainder { h, i });
                }
            }
            for h in 0..=j - 1 {
                let threshold = 2 * (j - 1 - h) + 1;
                let power = j - 1 - h;
                let top = if power >= 1 && tail < 2 {
                    threshold - 1
                } else {
                    threshold
                };
                for i in 0..=top {
                    statements.push(LemmaStatement::DerivedAnnihilation { h, i });
                }
            }
            for h in 1..=j - 1 {
                for i in 2..=max_i {
                    for alpha in 0..=3u32 {
                        for beta in 0..=3u32 - alpha {
                            statements.push(LemmaStatement::ProductShift { h, i, alpha, beta });
                        }
                    }
                }
            }
            for k in 0..=max_k {
                for h in 0..=j - 1 {
                    let threshold = 2 * (k + j - 1 - h) + 1;
                    let power = k + j - 1 - h;
                    let top = if power >= 1 && tail < 2 {
                        threshold - 1
                    } else {
                        threshold
                    };
                    for i in 0..=top {
                        statements.push(LemmaStatement::MixedAnnihilation { k, h, i });
                    }
                }
            }
            for k in 0..=max_k {
                let threshold = 2 * k + 1;
                let top = if k >= 1 && tail < 2 {
                    threshold - 1
                } else {
                    threshold
                };
                for i in 0..=top {
                    statements.push(LemmaStatement::TopMixedAnnihilation { k, i });
                }
            }
            for statement in statements {
                let outcome = calc.check(&statement)?;
                cases.push(SweepCase {
                    j,
                    tail,
                    statement,
                    outcome,
                });
            }
        }
    }
    Ok(cases)
}

/// Matrix of a defining sequence applied to every curve-equation monomial,
/// evaluated at a point of the chart.
#[derive(Debug, Clone)]
pub struct UniversalMatrix {
    pub matrix: RatMatrix,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
}

impl UniversalMatrix {
    /// Extracts the square submatrix of the named columns, preserving row
    /// order.
    pub fn submatrix(&self, labels: &[&str]) -> Result<RatMatrix, JetError> {
        let mut indices = Vec::with_capacity(labels.len());
        for &label in labels {
            let idx = self
                .column_labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| JetError::NoSuchColumn {
                    label: label.to_string(),
                })?;
            indices.push(idx);
        }
        let mut out = RatMatrix::zero(self.matrix.rows(), indices.len());
        for r in 0..self.matrix.rows() {
            for (c_out, &c_in) in indices.iter().enumerate() {
                out.set(r, c_out, self.matrix.at(r, c_in).clone());
            }
        }
        Ok(out)
    }
}

/// Exact rank of the assembled matrix.
pub fn exact_rank(m: &UniversalMatrix) -> usize {
    m.matrix.rank()
}

fn curve_columns(degree: u32) -> Vec<(u32, u32)> {
    let mut cols = Vec::new();
    for total in 0..=degree {
        for u in (0..=total).rev() {
            cols.push((u, total - u));
        }
    }
    cols
}

fn column_label(u: u32, v: u32) -> String {
    format!("a_{u}_{v}")
}

fn sequence_row_labels(chart: &ChartSpec, tag: &str) -> Vec<String> {
    let mut labels = vec![tag.to_string()];
    match chart.kind {
        JetChartKind::Primary => {
            for r in 1..=chart.level {
                labels.push(format!("D^{r} {tag}"));
            }
        }
        JetChartKind::Secondary { j } => {
            for r in 1..=j - 1 {
                labels.push(format!("P^{r} {tag}"));
            }
            for s in 1..=chart.level - j + 1 {
                labels.push(format!("Q^{s} P^{} {tag}", j - 1));
            }
        }
    }
    labels
}

/// How a curve-equation monomial reads in a factor's plane chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialPlacement {
    /// The finite chart: the monomial is x^u y^v.
    Standard,
    /// The chart at infinity along the y-axis: the monomial is
    /// x^u y^(d-u-v).
    InfinityYAxis,
}

fn plane_monomial(
    u: u32,
    v: u32,
    degree: u32,
    placement: MonomialPlacement,
    swap_plane: bool,
    arity: usize,
) -> JetPolynomial {
    let (ex, ey) = match placement {
        MonomialPlacement::Standard => (u, v),
        MonomialPlacement::InfinityYAxis => (u, degree - u - v),
    };
    let mut exps = vec![0u16; arity];
    if swap_plane {
        exps[0] = ey as u16;
        exps[1] = ex as u16;
    } else {
        exps[0] = ex as u16;
        exps[1] = ey as u16;
    }
    JetPolynomial::monomial(exps, BigRational::one())
}

/// Builds the universal incidence matrix of one chart at one point: one
/// column per curve-equation coefficient, one row per defining-sequence
/// entry, optionally extended by the partial derivative in y for curves
/// required to be singular at the point.
pub fn universal_matrix(
    chart: &ChartSpec,
    degree: u32,
    point: &[BigRational],
    with_singular_row: bool,
) -> Result<UniversalMatrix, JetError> {
    if degree < chart.level {
        return Err(JetError::DegreeTooSmall {
            degree,
            required: chart.level,
        });
    }
    if point.len() != chart.arity() {
        return Err(JetError::PointArityMismatch {
            expected: chart.arity(),
            found: point.len(),
        });
    }
    let cols = curve_columns(degree);
    let mut row_labels = sequence_row_labels(chart, "f");
    if with_singular_row {
        row_labels.push("df/dy".to_string());
    }
    let rows = row_labels.len();
    let mut matrix = RatMatrix::zero(rows, cols.len());
    for (c, &(u, v)) in cols.iter().enumerate() {
        let g = plane_monomial(
            u,
            v,
            degree,
            MonomialPlacement::Standard,
            false,
            chart.arity(),
        );
        let seq = defining_sequence(&g, chart)?;
        for (r, entry) in seq.iter().enumerate() {
            matrix.set(r, c, entry.evaluate(point)?);
        }
        if with_singular_row {
            matrix.set(rows - 1, c, g.partial(1).evaluate(point)?);
        }
    }
    Ok(UniversalMatrix {
        matrix,
        row_labels,
        column_labels: cols.iter().map(|&(u, v)| column_label(u, v)).collect(),
    })
}

/// One factor of a simultaneous-contact system: a lifted point at its own
/// level and chart, with the placement of the shared curve equation in that
/// factor's plane chart.
#[derive(Debug, Clone)]
pub struct FiberFactor {
    pub level: u32,
    pub kind: JetChartKind,
    pub placement: MonomialPlacement,
    /// The factor's chart reads the plane coordinates in the other order.
    pub swap_plane: bool,
    pub point: Vec<BigRational>,
}

/// Stacks the defining-sequence rows of several factors over a shared set
/// of curve-equation columns. With `first_factor_singular`, the first
/// factor also contributes the partial derivative in its own y-coordinate.
pub fn fiber_system(
    factors: &[FiberFactor],
    degree: u32,
    first_factor_singular: bool,
) -> Result<UniversalMatrix, JetError> {
    if factors.is_empty() {
        return Err(JetError::EmptyFiberSystem);
    }
    let mut required = factors.len() as u32 - 1;
    for f in factors {
        if f.level < 1 {
            return Err(JetError::ParamsOutOfRange(
                "fiber factors live at level >= 1".to_string(),
            ));
        }
        required += f.level;
    }
    if degree < required {
        return Err(JetError::DegreeTooSmall { degree, required });
    }
    let cols = curve_columns(degree);
    let column_labels: Vec<String> = cols.iter().map(|&(u, v)| column_label(u, v)).collect();
    let mut row_labels: Vec<String> = Vec::new();
    let mut row_data: Vec<Vec<BigRational>> = Vec::new();
    for (idx, factor) in factors.iter().enumerate() {
        let chart = match factor.kind {
            JetChartKind::Primary => ChartSpec::primary(factor.level)?,
            JetChartKind::Secondary { j } => ChartSpec::secondary(factor.level, j)?,
        };
        if factor.point.len() != chart.arity() {
            return Err(JetError::PointArityMismatch {
                expected: chart.arity(),
                found: factor.point.len(),
            });
        }
        let tag = format!("f{}", idx + 1);
        let labels = sequence_row_labels(&chart, &tag);
        let block_rows = labels.len();
        let mut block: Vec<Vec<BigRational>> = vec![Vec::with_capacity(cols.len()); block_rows];
        let mut singular: Vec<BigRational> = Vec::new();
        for &(u, v) in &cols {
            let g = plane_monomial(
                u,
                v,
                degree,
                factor.placement,
                factor.swap_plane,
                chart.arity(),
            );
            let seq = defining_sequence(&g, &chart)?;
            for (r, entry) in seq.iter().enumerate() {
                block[r].push(entry.evaluate(&factor.point)?);
            }
            if idx == 0 && first_factor_singular {
                let y_role = if factor.swap_plane { 0 } else { 1 };
                singular.push(g.partial(y_role).evaluate(&factor.point)?);
            }
        }
        row_labels.extend(labels);
        row_data.extend(block);
        if idx == 0 && first_factor_singular {
            row_labels.push("df1/dy1".to_string());
            row_data.push(singular);
        }
    }
    let matrix = RatMatrix::from_rows(row_data);
    Ok(UniversalMatrix {
        matrix,
        row_labels,
        column_labels,
    })
}
