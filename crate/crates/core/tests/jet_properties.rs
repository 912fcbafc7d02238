//! Operator laws on jet charts: both derivations obey the Leibniz rule, the
//! chain rule links the jet variables, and the gradings shift by fixed
//! amounts.

use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semple_core::{
    defining_sequence, weight_of, ChartSpec, GradedWeight, GradingKind, JetPolynomial, DEFAULT_SEED,
};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(DEFAULT_SEED)
}

fn random_poly(rng: &mut ChaCha8Rng, arity: usize) -> JetPolynomial {
    let mut p = JetPolynomial::zero(arity);
    for _ in 0..rng.random_range(1..=3usize) {
        let exps: Vec<u16> = (0..arity).map(|_| rng.random_range(0..=2u16)).collect();
        let coeff = BigRational::new(
            BigInt::from(rng.random_range(-9..=9i64)),
            BigInt::from(rng.random_range(1..=9i64)),
        );
        p = p.add(&JetPolynomial::monomial(exps, coeff));
    }
    p
}

fn all_charts() -> Vec<ChartSpec> {
    let mut charts = Vec::new();
    for n in 1..=5u32 {
        charts.push(ChartSpec::primary(n).unwrap());
        for j in 2..=n {
            charts.push(ChartSpec::secondary(n, j).unwrap());
        }
    }
    charts
}

#[test]
fn both_derivations_obey_the_leibniz_rule() {
    let mut rng = rng();
    for chart in all_charts() {
        for _ in 0..20 {
            let f = random_poly(&mut rng, chart.arity());
            let g = random_poly(&mut rng, chart.arity());
            let product = f.mul(&g);
            let left = chart.apply_p(&product);
            let right = chart.apply_p(&f).mul(&g).add(&f.mul(&chart.apply_p(&g)));
            assert_eq!(left, right, "P Leibniz on {chart:?}");
            if chart.apply_q(&f).is_ok() {
                let left = chart.apply_q(&product).unwrap();
                let right = chart
                    .apply_q(&f)
                    .unwrap()
                    .mul(&g)
                    .add(&f.mul(&chart.apply_q(&g).unwrap()));
                assert_eq!(left, right, "Q Leibniz on {chart:?}");
            }
        }
    }
}

#[test]
fn chain_rule_connects_the_jet_variables() {
    for n in 2..=5u32 {
        for j in 2..=n {
            let chart = ChartSpec::secondary(n, j).unwrap();
            let arity = chart.arity();
            let var = |idx: usize| JetPolynomial::var(idx, arity);
            let x_prime = var(chart.x_index(1).unwrap());
            // Q steps each jet variable up, multiplied by x'.
            for i in 0..j - 1 {
                let y_i = var(chart.y_index(i).unwrap());
                let expected = var(chart.y_index(i + 1).unwrap()).mul(&x_prime);
                let got = chart.apply_q(&y_i).unwrap();
                assert_eq!(got, expected, "Q on y^({i}) in chart ({n}, {j})");
            }
            // The top jet variable flattens to 1, x moves to x', and the
            // x-chain shifts with a zero top.
            let y_top = var(chart.y_index(j - 1).unwrap());
            assert_eq!(
                chart.apply_q(&y_top).unwrap(),
                JetPolynomial::one(arity),
                "top jet variable in chart ({n}, {j})"
            );
            assert_eq!(chart.apply_q(&var(0)).unwrap(), x_prime);
            let tail = n - j + 1;
            for t in 1..tail {
                let got = chart.apply_q(&var(chart.x_index(t).unwrap())).unwrap();
                assert_eq!(got, var(chart.x_index(t + 1).unwrap()));
            }
            assert!(chart
                .apply_q(&var(chart.x_index(tail).unwrap()))
                .unwrap()
                .is_zero());
            // P ends the y-chain at zero.
            assert!(chart.apply_p(&y_top).is_zero());
            for i in 0..j - 1 {
                let y_i = var(chart.y_index(i).unwrap());
                assert_eq!(
                    chart.apply_p(&y_i),
                    var(chart.y_index(i + 1).unwrap()),
                    "P on y^({i}) in chart ({n}, {j})"
                );
            }
        }
    }
}

#[test]
fn q_shifts_the_gradings_by_fixed_degrees() {
    let mut rng = rng();
    for n in 2..=5u32 {
        for j in 2..=n {
            let chart = ChartSpec::secondary(n, j).unwrap();
            let arity = chart.arity();
            for _ in 0..40 {
                // A random monomial in the x-variables only.
                let mut exps = vec![0u16; arity];
                exps[0] = rng.random_range(0..=2);
                for t in 1..=n - j + 1 {
                    exps[chart.x_index(t).unwrap()] = rng.random_range(0..=2);
                }
                let mono = JetPolynomial::monomial(
                    exps,
                    BigRational::new(BigInt::from(rng.random_range(1..=9i64)), BigInt::from(1)),
                );
                let weight = weight_of(&mono, &chart, GradingKind::Simple).unwrap();
                let moved = chart.apply_q(&mono).unwrap();
                if !moved.is_zero() {
                    let after = weight_of(&moved, &chart, GradingKind::Simple).unwrap();
                    let (GradedWeight::Simple(w0), GradedWeight::Simple(w1)) = (weight, after)
                    else {
                        panic!("simple weights expected");
                    };
                    assert_eq!(w1, w0 - 1, "Q drops the simple weight by one");
                }
                // A random monomial over all variables for the bigrading.
                let mut exps = vec![0u16; arity];
                for slot in exps.iter_mut() {
                    *slot = rng.random_range(0..=1);
                }
                let mono = JetPolynomial::monomial(
                    exps,
                    BigRational::new(BigInt::from(rng.random_range(1..=9i64)), BigInt::from(1)),
                );
                let GradedWeight::Bigraded(a0, b0) =
                    weight_of(&mono, &chart, GradingKind::Bigraded).unwrap()
                else {
                    panic!("bigraded weight expected");
                };
                let moved = chart.apply_q(&mono).unwrap();
                if !moved.is_zero() {
                    let after = weight_of(&moved, &chart, GradingKind::Bigraded).unwrap();
                    assert_eq!(
                        after,
                        GradedWeight::Bigraded(a0 - 1, b0),
                        "Q has bidegree (-1, 0)"
                    );
                }
            }
        }
    }
}

#[test]
fn defining_sequences_have_one_entry_per_level_plus_one() {
    let mut rng = rng();
    for chart in all_charts() {
        for _ in 0..10 {
            // Random plane equation: a polynomial in x and y alone.
            let mut f = JetPolynomial::zero(chart.arity());
            for _ in 0..rng.random_range(1..=4usize) {
                let mut exps = vec![0u16; chart.arity()];
                exps[0] = rng.random_range(0..=3);
                exps[1] = rng.random_range(0..=3);
                f = f.add(&JetPolynomial::monomial(
                    exps,
                    BigRational::new(
                        BigInt::from(rng.random_range(-9..=9i64)),
                        BigInt::from(rng.random_range(1..=9i64)),
                    ),
                ));
            }
            let seq = defining_sequence(&f, &chart).unwrap();
            assert_eq!(seq.len(), chart.level() as usize + 1);
            assert_eq!(seq[0], f);
        }
    }
}
