//! Symbolic expansion of contact-module products.
//!
//! Instead of numeric coefficients, each curve contributes named atoms:
//! d (degree), dcheck (class number), and a parenthesized ladder per divisor
//! factor. The expansion is grouped by canonical monomial and rendered both
//! as plain text and as LaTeX, with a deterministic term order: groups are
//! sorted by their canonical factor multiset, summands inside a group by the
//! per-curve kind sequence, and atoms inside a product by kind then curve.

use crate::contact::{FactorKind, FactorTag};
use crate::error::ContactError;

/// A named curve whose invariants stay symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCurve {
    pub label: String,
}

/// Rendered expansion in both output syntaxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaTexts {
    pub plain: String,
    pub latex: String,
}

#[derive(Clone)]
struct Atom {
    rank: (u8, u32),
    curve_position: usize,
    plain: String,
    latex: String,
}

fn lambda_atom(label: &str, position: usize) -> Atom {
    Atom {
        rank: (0, 0),
        curve_position: position,
        plain: format!("d_{label}"),
        latex: format!("d_{{{label}}}"),
    }
}

fn pi_atom(label: &str, position: usize) -> Atom {
    Atom {
        rank: (1, 0),
        curve_position: position,
        plain: format!("dcheck_{label}"),
        latex: format!("\\check{{d}}_{{{label}}}"),
    }
}

fn gamma_atom(label: &str, position: usize, k: u32) -> Atom {
    let mut plain = format!("({}*dcheck_{label}", k + 1);
    let mut latex = format!("\\left({} \\check{{d}}_{{{label}}}", k + 1);
    for j in 2..k {
        plain.push_str(&format!(" + {}*kappa{j}_{label}", k + 2 - j));
        latex.push_str(&format!(" + {} \\kappa_{{{j},{label}}}", k + 2 - j));
    }
    plain.push_str(&format!(" + kappa{k}_{label})"));
    latex.push_str(&format!(" + \\kappa_{{{k},{label}}}\\right)"));
    Atom {
        rank: (2, k),
        curve_position: position,
        plain,
        latex,
    }
}

fn factor_symbol_plain(tag: &FactorTag) -> String {
    match tag.kind {
        FactorKind::Lambda => format!("lambda_{}", tag.weight),
        FactorKind::Pi => format!("pi_{}", tag.weight),
        FactorKind::Gamma(k) => format!("gamma{}_{}", k, tag.weight),
    }
}

fn factor_symbol_latex(tag: &FactorTag) -> (String, bool) {
    match tag.kind {
        FactorKind::Lambda => (format!("\\lambda_{}", tag.weight), false),
        FactorKind::Pi => (format!("\\pi_{}", tag.weight), false),
        FactorKind::Gamma(k) => (format!("\\gamma_{}^{}", tag.weight, k), true),
    }
}

fn monomial_plain(sorted: &[FactorTag]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut idx = 0;
    while idx < sorted.len() {
        let mut run = 1;
        while idx + run < sorted.len() && sorted[idx + run] == sorted[idx] {
            run += 1;
        }
        let symbol = factor_symbol_plain(&sorted[idx]);
        if run == 1 {
            parts.push(symbol);
        } else {
            parts.push(format!("{symbol}^{run}"));
        }
        idx += run;
    }
    parts.join("*")
}

fn monomial_latex(sorted: &[FactorTag]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut idx = 0;
    while idx < sorted.len() {
        let mut run = 1;
        while idx + run < sorted.len() && sorted[idx + run] == sorted[idx] {
            run += 1;
        }
        let (symbol, needs_parens) = factor_symbol_latex(&sorted[idx]);
        if run == 1 {
            parts.push(symbol);
        } else if needs_parens {
            parts.push(format!("\\left({symbol}\\right)^{run}"));
        } else {
            parts.push(format!("{symbol}^{run}"));
        }
        idx += run;
    }
    parts.join(" ")
}

fn product_texts(atoms: &[Atom]) -> (String, String) {
    let mut ordered: Vec<&Atom> = atoms.iter().collect();
    ordered.sort_by_key(|a| (a.rank, a.curve_position));
    let plain: Vec<&str> = ordered.iter().map(|a| a.plain.as_str()).collect();
    let latex: Vec<&str> = ordered.iter().map(|a| a.latex.as_str()).collect();
    (plain.join("*"), latex.join(" "))
}

/// Expands the product of symbolic modules for the given contact orders.
pub fn emit_formula(
    curves: &[SymbolicCurve],
    orders: &[u32],
) -> Result<FormulaTexts, ContactError> {
    if curves.len() != orders.len() {
        return Err(ContactError::LengthMismatch {
            curves: curves.len(),
            orders: orders.len(),
        });
    }
    if curves.is_empty() {
        return Err(ContactError::EmptyProduct);
    }
    for &o in orders {
        if o == 0 {
            return Err(ContactError::OrderTooSmall(o));
        }
    }
    // Structural terms per curve: (tag, atom).
    let mut term_lists: Vec<Vec<(FactorTag, Atom)>> = Vec::new();
    for (position, (curve, &order)) in curves.iter().zip(orders).enumerate() {
        let weight = order - 1;
        let label = curve.label.as_str();
        let mut terms = vec![(
            FactorTag {
                weight,
                kind: FactorKind::Lambda,
            },
            lambda_atom(label, position),
        )];
        if weight >= 1 {
            terms.push((
                FactorTag {
                    weight,
                    kind: FactorKind::Pi,
                },
                pi_atom(label, position),
            ));
        }
        for k in 2..=weight {
            terms.push((
                FactorTag {
                    weight,
                    kind: FactorKind::Gamma(k),
                },
                gamma_atom(label, position, k),
            ));
        }
        term_lists.push(terms);
    }
    // Full expansion, grouped by the sorted factor multiset.
    type GroupKey = Vec<(u32, u8, u32)>;
    let mut groups: Vec<(GroupKey, Vec<FactorTag>, Vec<Vec<Atom>>)> = Vec::new();
    let mut choice = vec![0usize; term_lists.len()];
    'outer: loop {
        let mut tags = Vec::with_capacity(choice.len());
        let mut atoms = Vec::with_capacity(choice.len());
        for (pos, &c) in choice.iter().enumerate() {
            let (tag, atom) = &term_lists[pos][c];
            tags.push(*tag);
            atoms.push(atom.clone());
        }
        let mut sorted = tags.clone();
        sorted.sort_by_key(|t| {
            let (r, k) = match t.kind {
                FactorKind::Lambda => (0u8, 0u32),
                FactorKind::Pi => (1, 0),
                FactorKind::Gamma(k) => (2, k),
            };
            (t.weight, r, k)
        });
        let key: GroupKey = sorted
            .iter()
            .map(|t| {
                let (r, k) = match t.kind {
                    FactorKind::Lambda => (0u8, 0u32),
                    FactorKind::Pi => (1, 0),
                    FactorKind::Gamma(k) => (2, k),
                };
                (t.weight, r, k)
            })
            .collect();
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, _, tuples)) => tuples.push(atoms),
            None => groups.push((key, sorted, vec![atoms])),
        }
        let mut pos = term_lists.len();
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < term_lists[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let mut plain_terms = Vec::new();
    let mut latex_terms = Vec::new();
    for (_, sorted_tags, mut tuples) in groups {
        tuples.sort_by_key(|atoms| atoms.iter().map(|a| a.rank).collect::<Vec<_>>());
        let rendered: Vec<(String, String)> =
            tuples.iter().map(|atoms| product_texts(atoms)).collect();
        let coeff_plain;
        let coeff_latex;
        if rendered.len() == 1 {
            coeff_plain = rendered[0].0.clone();
            coeff_latex = rendered[0].1.clone();
        } else {
            let ps: Vec<&str> = rendered.iter().map(|(p, _)| p.as_str()).collect();
            let ls: Vec<&str> = rendered.iter().map(|(_, l)| l.as_str()).collect();
            coeff_plain = format!("({})", ps.join(" + "));
            coeff_latex = format!("\\left({}\\right)", ls.join(" + "));
        }
        plain_terms.push(format!("{}*{}", coeff_plain, monomial_plain(&sorted_tags)));
        latex_terms.push(format!("{} {}", coeff_latex, monomial_latex(&sorted_tags)));
    }
    Ok(FormulaTexts {
        plain: plain_terms.join(" + "),
        latex: latex_terms.join(" + "),
    })
}
