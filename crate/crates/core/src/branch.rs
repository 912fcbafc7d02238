//! Lifting parametrized branches through the bundle tower.
//!
//! A branch is a pair of exact truncated series (x(t), y(t)) centered at the
//! origin. Each lift step adjoins the derivative of the dependent coordinate
//! with respect to the independent one. When that derivative blows up, the
//! roles invert instead: the step records a crossing of the divisor at
//! infinity for that level, with multiplicity equal to the valuation of the
//! inverted ratio. The first crossing lands in a secondary chart; a second
//! crossing leaves the atlas covered here, so its multiplicity cannot be
//! attributed to a single level and is reported as unresolved.
//!
//! Every decision is made against valuation lower bounds, so the engine
//! either answers exactly or fails with the input truncation that would have
//! been enough.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, Zero};

use crate::contact::CurveCharacteristics;
use crate::error::BranchError;
use crate::series::{SeriesFailure, TruncatedSeries, Valuation};

/// Validated branch input: both series centered, jointly primitive, with all
/// supplied terms below the truncation bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchSeries {
    x: TruncatedSeries,
    y: TruncatedSeries,
    truncation: u32,
}

impl BranchSeries {
    /// Checks centering, primitivity, and the truncation bound. Primitivity
    /// is judged on the known support: the supplied terms must already have
    /// exponent gcd 1.
    pub fn new(
        x_terms: Vec<(u32, BigRational)>,
        y_terms: Vec<(u32, BigRational)>,
        truncation: u32,
    ) -> Result<Self, BranchError> {
        for &(e, ref c) in x_terms.iter().chain(y_terms.iter()) {
            if !c.is_zero() && e >= truncation {
                return Err(BranchError::BeyondTruncation {
                    exponent: e,
                    truncation,
                });
            }
        }
        let x = TruncatedSeries::from_terms(x_terms, truncation);
        let y = TruncatedSeries::from_terms(y_terms, truncation);
        for (series, name) in [(&x, "x"), (&y, "y")] {
            if let Some(c) = series.coefficient(0) {
                if !c.is_zero() {
                    return Err(BranchError::NotCentered { coordinate: name });
                }
            }
        }
        let mut gcd: u32 = 0;
        for (&e, _) in x.terms().chain(y.terms()) {
            gcd = num::integer::gcd(gcd, e);
        }
        if gcd == 0 {
            return Err(BranchError::ZeroBranch);
        }
        if gcd > 1 {
            return Err(BranchError::NonPrimitive { gcd });
        }
        Ok(BranchSeries { x, y, truncation })
    }

    pub fn x(&self) -> &TruncatedSeries {
        &self.x
    }

    pub fn y(&self) -> &TruncatedSeries {
        &self.y
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }
}

/// Chart holding the lifted point after a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChartKind {
    /// Derivatives taken with respect to the first plane coordinate.
    Primary,
    /// The start was vertical, so the plane roles are exchanged once.
    PrimaryReversed,
    /// One crossing of a divisor at infinity, at the recorded level.
    Secondary { entered_at: u32 },
    /// Two or more crossings; the point has left the charted region.
    OffAtlas { entered_at: Vec<u32> },
}

/// One step of the lift, for audit output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub level: u32,
    pub chart: ChartKind,
    /// Exact valuation of the coordinate added at this level, when known.
    pub valuation: Option<u32>,
    /// Crossing multiplicity when this step inverted the derivative.
    pub hit_multiplicity: Option<u64>,
}

/// Everything the lift of one branch determines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftReport {
    /// Resolved crossing multiplicities by level.
    pub kappa: BTreeMap<u32, u64>,
    /// Levels whose divisor at infinity the lifted point meets.
    pub infinity_hits: BTreeSet<u32>,
    /// The lift crosses divisors at infinity at two or more levels.
    pub profound: bool,
    /// After the first crossing the next derivative also vanishes.
    pub flat: bool,
    /// The branch is immersed at the origin, so no crossing can occur.
    pub smooth: bool,
    pub trace: Vec<TraceEntry>,
}

/// A report together with the chart coordinates of every level.
#[derive(Debug, Clone)]
pub struct LiftedBranch {
    pub report: LiftReport,
    /// Coordinate series in order: the two plane coordinates in chart order,
    /// then one per level.
    pub coordinates: Vec<TruncatedSeries>,
}

#[derive(Clone)]
struct Engine {
    level: u32,
    chart: ChartKind,
    indep: TruncatedSeries,
    dep: TruncatedSeries,
    coords: Vec<TruncatedSeries>,
    hits: Vec<(u32, u64)>,
    trace: Vec<TraceEntry>,
    truncation: u32,
    start_valuation: u32,
}

impl Engine {
    fn new(branch: &BranchSeries) -> Self {
        let vx = branch.x.valuation();
        let vy = branch.y.valuation();
        let reversed = match (vx, vy) {
            (Valuation::Exact(a), Valuation::Exact(b)) => b < a,
            (Valuation::AtLeast(_), Valuation::Exact(_)) => true,
            _ => false,
        };
        let (indep, dep) = if reversed {
            (branch.y.clone(), branch.x.clone())
        } else {
            (branch.x.clone(), branch.y.clone())
        };
        let chart = if reversed {
            ChartKind::PrimaryReversed
        } else {
            ChartKind::Primary
        };
        let start_valuation = indep
            .valuation()
            .exact()
            .expect("a validated branch has a coordinate of known valuation");
        let coords = vec![indep.clone(), dep.clone()];
        let trace = vec![TraceEntry {
            level: 0,
            chart: chart.clone(),
            valuation: Some(start_valuation),
            hit_multiplicity: None,
        }];
        Engine {
            level: 0,
            chart,
            indep,
            dep,
            coords,
            hits: Vec::new(),
            trace,
            truncation: branch.truncation,
            start_valuation,
        }
    }

    fn step(&mut self) -> Result<(), BranchError> {
        let level = self.level + 1;
        let du = self.indep.derivative();
        let dv = self.dep.derivative();
        let vu = match du.valuation() {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(_) => {
                return Err(BranchError::PrecisionExhausted {
                    level,
                    required: self.truncation + 1,
                });
            }
        };
        let inverts = match dv.valuation() {
            Valuation::Exact(v) if v < vu => true,
            Valuation::Exact(_) => false,
            Valuation::AtLeast(known) if known >= vu => false,
            Valuation::AtLeast(known) => {
                return Err(BranchError::PrecisionExhausted {
                    level,
                    required: self.truncation + (vu - known),
                });
            }
        };
        let (new_coord, hit) = if inverts {
            let e = dv.valuation().exact().expect("checked exact");
            let multiplicity = u64::from(vu - e);
            let inverted = du.div(&dv).map_err(|f| self.precision_failure(level, f))?;
            self.chart = match std::mem::replace(&mut self.chart, ChartKind::Primary) {
                ChartKind::Primary | ChartKind::PrimaryReversed => {
                    ChartKind::Secondary { entered_at: level }
                }
                ChartKind::Secondary { entered_at } => ChartKind::OffAtlas {
                    entered_at: vec![entered_at, level],
                },
                ChartKind::OffAtlas { mut entered_at } => {
                    entered_at.push(level);
                    ChartKind::OffAtlas { entered_at }
                }
            };
            self.hits.push((level, multiplicity));
            self.indep = std::mem::replace(&mut self.dep, TruncatedSeries::zero(0));
            (inverted, Some(multiplicity))
        } else {
            let quotient = dv.div(&du).map_err(|f| self.precision_failure(level, f))?;
            (quotient, None)
        };
        self.dep = new_coord.clone();
        self.coords.push(new_coord.clone());
        self.trace.push(TraceEntry {
            level,
            chart: self.chart.clone(),
            valuation: new_coord.valuation().exact(),
            hit_multiplicity: hit,
        });
        self.level = level;
        Ok(())
    }

    fn precision_failure(&self, level: u32, failure: SeriesFailure) -> BranchError {
        match failure {
            SeriesFailure::DivisorUndetermined { .. } => BranchError::PrecisionExhausted {
                level,
                required: self.truncation + 1,
            },
            SeriesFailure::NegativeValuation { .. } => {
                unreachable!("the inversion rule keeps quotient valuations nonnegative")
            }
        }
    }
}

/// Lifts a branch through the given number of levels and reports crossings,
/// flags, and per-level coordinates.
pub fn lift_with_coordinates(
    branch: &BranchSeries,
    max_level: u32,
) -> Result<LiftedBranch, BranchError> {
    let mut engine = Engine::new(branch);
    for _ in 0..max_level {
        engine.step()?;
    }
    let smooth = engine.start_valuation == 1;
    let profound = engine.hits.len() >= 2;
    let flat = match engine.hits.first().copied() {
        None => false,
        Some((first_level, _)) => {
            let (next_constant, next_inverts) = if first_level < max_level {
                (
                    engine.coords[(first_level + 2) as usize].coefficient(0),
                    engine.hits.iter().any(|&(l, _)| l == first_level + 1),
                )
            } else {
                // The first crossing sits at the last analyzed level; take
                // one extra probe step just to settle the tangency test.
                let mut probe = engine.clone();
                probe.step()?;
                (
                    probe.coords.last().expect("stepped").coefficient(0),
                    probe.hits.len() > engine.hits.len(),
                )
            };
            if next_inverts {
                false
            } else {
                match next_constant {
                    Some(c) => c.is_zero(),
                    None => {
                        return Err(BranchError::PrecisionExhausted {
                            level: first_level + 1,
                            required: branch.truncation + 1,
                        });
                    }
                }
            }
        }
    };
    let mut kappa = BTreeMap::new();
    let mut infinity_hits = BTreeSet::new();
    for (idx, &(level, multiplicity)) in engine.hits.iter().enumerate() {
        infinity_hits.insert(level);
        if idx == 0 {
            kappa.insert(level, multiplicity);
        }
    }
    Ok(LiftedBranch {
        report: LiftReport {
            kappa,
            infinity_hits,
            profound,
            flat,
            smooth,
            trace: engine.trace,
        },
        coordinates: engine.coords,
    })
}

/// Lifts a branch and reports crossing data and singularity flags.
pub fn analyze_branch(branch: &BranchSeries, max_level: u32) -> Result<LiftReport, BranchError> {
    lift_with_coordinates(branch, max_level).map(|lifted| lifted.report)
}

/// Smallest level whose lift is immersed, certified hit-free beyond it up
/// to the cap.
pub fn desingularization_level(branch: &BranchSeries, cap: u32) -> Result<u32, BranchError> {
    let mut engine = Engine::new(branch);
    let mut immersion: Option<u32> = None;
    let coordinate_is_immersive =
        |s: &TruncatedSeries| -> Option<bool> { s.coefficient(1).map(|c| !c.is_zero()) };
    for initial in &engine.coords {
        match coordinate_is_immersive(initial) {
            Some(true) => {
                immersion = Some(0);
            }
            Some(false) => {}
            None => {
                return Err(BranchError::PrecisionExhausted {
                    level: 0,
                    required: branch.truncation + 2 - initial.precision(),
                });
            }
        }
    }
    for level in 1..=cap {
        engine.step()?;
        if immersion.is_none() {
            match coordinate_is_immersive(engine.coords.last().expect("stepped")) {
                Some(true) => immersion = Some(level),
                Some(false) => {}
                None => {
                    let prec = engine.coords.last().expect("stepped").precision();
                    return Err(BranchError::PrecisionExhausted {
                        level,
                        required: branch.truncation + 2 - prec.min(1),
                    });
                }
            }
        }
    }
    let immersion = immersion.ok_or(BranchError::CapExceeded { cap })?;
    let last_hit = engine.hits.last().map(|&(l, _)| l).unwrap_or(0);
    Ok(immersion.max(last_hit))
}

/// Aggregates branch reports into curve characteristics. The class number
/// must be supplied whenever branches are listed; an empty branch list
/// asserts a nonsingular curve, whose class number is d(d−1).
pub fn curve_characteristics(
    branches: &[BranchSeries],
    degree: u64,
    class_number: Option<u64>,
    max_level: u32,
) -> Result<CurveCharacteristics, BranchError> {
    let class_number = match class_number {
        Some(c) => c,
        None if branches.is_empty() => degree * degree.saturating_sub(1),
        None => return Err(BranchError::ClassNumberRequired),
    };
    let mut cusps: BTreeMap<u32, u64> = BTreeMap::new();
    let mut has_profound_cusp = false;
    let mut has_flat_cusp = false;
    for branch in branches {
        let report = analyze_branch(branch, max_level)?;
        for &level in &report.infinity_hits {
            if !report.kappa.contains_key(&level) {
                return Err(BranchError::UnresolvedKappa { level });
            }
        }
        for (&level, &multiplicity) in &report.kappa {
            *cusps.entry(level).or_insert(0) += multiplicity;
        }
        has_profound_cusp |= report.profound;
        has_flat_cusp |= report.flat;
    }
    Ok(CurveCharacteristics {
        degree,
        class_number,
        cusps,
        has_profound_cusp,
        has_flat_cusp,
    })
}
