//! Property tests: structural invariants of every module, checked against
//! naive oracles written independently of the production code paths.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use sumprod::claims::{evaluate_claim, registry, EvalOptions, FamilySpec, GenSet, Input, Verdict};
use sumprod::energies::{
    convolution, correlation, energy, energy_forms, gowers_bruteforce, gowers_norm, mixed_energy, Group,
};
use sumprod::field::FpSet;
use sumprod::fplab::{shift_intersection_max, subgroup};
use sumprod::incidence::{
    collinear_triples_with, cross_ratio_correction, cross_ratio_count, project, q_lambda, triples_via_energies,
    TripleAlgorithm,
};
use sumprod::rational::Rational;
use sumprod::sets::{affine_image, all_fibers, fiber, iterated_sumset, setop, RSet, SetOpKind};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

/// Small rationals; one draw in eight is scaled by 2^70 so that the wide
/// integer lanes get exercised too.
fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=6, 0u8..8).prop_map(|(n, d, big)| {
        let r = q(n, d);
        if big == 0 {
            r * Rational::from(BigInt::from(1u8) << 70)
        } else {
            r
        }
    })
}

fn rset(max: usize) -> impl Strategy<Value = RSet> {
    prop::collection::vec(rational(), 1..=max).prop_map(RSet::new)
}

fn nonzero_rset(max: usize) -> impl Strategy<Value = RSet> {
    rset(max).prop_filter_map("empty after removing 0", |s| {
        let s = s.without_zero();
        (!s.is_empty()).then_some(s)
    })
}

fn integer_set(max: usize, range: i64) -> impl Strategy<Value = RSet> {
    prop::collection::btree_set(-range..=range, 1..=max).prop_map(RSet::from_ints)
}

fn pair_oracle(kind: SetOpKind, a: &RSet, b: &RSet) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            match kind {
                SetOpKind::Sum => out.insert(x + y),
                SetOpKind::Difference => out.insert(x - y),
                SetOpKind::Product => out.insert(x * y),
                SetOpKind::Quotient if !y.is_zero() => out.insert(x / y),
                SetOpKind::Quotient => false,
            };
        }
    }
    out
}

fn counts<I: IntoIterator<Item = Rational>>(it: I) -> BTreeMap<Rational, u64> {
    let mut m = BTreeMap::new();
    for v in it {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

/// `#{(a₁,a₂,b₁,b₂) : a₁ ∘ b₁ = a₂ ∘ b₂}` by quadruple enumeration.
fn energy_oracle(a: &RSet, b: &RSet, group: Group) -> BigUint {
    let op = |x: &Rational, y: &Rational| match group {
        Group::Additive => x + y,
        Group::Multiplicative => x * y,
    };
    let mut n = 0u64;
    for a1 in a {
        for a2 in a {
            for b1 in b {
                for b2 in b {
                    if op(a1, b1) == op(a2, b2) {
                        n += 1;
                    }
                }
            }
        }
    }
    BigUint::from(n)
}

fn big(n: u128) -> BigUint {
    BigUint::from(n)
}

fn ratio_pow(base: &BigUint, e: u32) -> Rational {
    Rational::from(BigInt::from(base.pow(e)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn setops_match_pair_enumeration(a in rset(6), b in rset(6), k in 0usize..4) {
        let kind = [SetOpKind::Sum, SetOpKind::Difference, SetOpKind::Product, SetOpKind::Quotient][k];
        let expect = pair_oracle(kind, &a, &b);
        match setop(kind, &a, &b) {
            Ok(s) => prop_assert_eq!(s.elements().to_vec(), expect.into_iter().collect::<Vec<_>>()),
            // Only a quotient by {0} has no pairs at all.
            Err(_) => prop_assert!(kind == SetOpKind::Quotient && expect.is_empty()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fibers_pair_up_and_partition_the_square(a in nonzero_rset(10)) {
        let fibers = all_fibers(&a).unwrap();
        let total: usize = fibers.iter().map(|(_, f)| f.len()).sum();
        prop_assert_eq!(total, a.len() * a.len());
        for (lam, f) in &fibers {
            prop_assert_eq!(&fiber(&a, lam).unwrap(), f);
            prop_assert_eq!(fiber(&a, &lam.recip().unwrap()).unwrap().len(), f.len());
        }
    }

    #[test]
    fn neutral_elements_and_affine_inverse(a in rset(10), u in rational(), v in rational()) {
        prop_assert_eq!(&setop(SetOpKind::Sum, &a, &RSet::from_ints([0])).unwrap(), &a);
        prop_assert_eq!(&setop(SetOpKind::Product, &a, &RSet::from_ints([1])).unwrap(), &a);
        prop_assume!(!u.is_zero());
        let img = affine_image(&a, &u, &v).unwrap();
        let inv = u.recip().unwrap();
        let back = affine_image(&img, &inv, &-(&v * &inv)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn sums_and_differences_dominate_their_summands(a in rset(8), b in rset(8)) {
        for kind in [SetOpKind::Sum, SetOpKind::Difference] {
            let s = setop(kind, &a, &b).unwrap().len();
            prop_assert!(s >= a.len().max(b.len()));
            prop_assert!(s <= a.len() * b.len());
        }
    }

    #[test]
    fn iterated_sumsets_compose(a in rset(5), j in 1u32..3, k in 1u32..3) {
        let lhs = iterated_sumset(&a, j + k).unwrap();
        let rhs = setop(SetOpKind::Sum, &iterated_sumset(&a, j).unwrap(), &iterated_sumset(&a, k).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn correlation_mass_is_conserved(a in nonzero_rset(10), b in nonzero_rset(10), mult in any::<bool>()) {
        let g = if mult { Group::Multiplicative } else { Group::Additive };
        let ab = (a.len() * b.len()) as u128;
        prop_assert_eq!(correlation(&a, &b, g).unwrap().total_mass(), ab);
        prop_assert_eq!(convolution(&a, &b, g).unwrap().total_mass(), ab);
    }

    #[test]
    fn energy_forms_agree_with_quadruples(a in nonzero_rset(12), b in nonzero_rset(12), mult in any::<bool>()) {
        let g = if mult { Group::Multiplicative } else { Group::Additive };
        let forms = energy_forms(&a, &b, g).unwrap();
        prop_assert!(forms.agree());
        prop_assert_eq!(&forms.convolution, &energy_oracle(&a, &b, g));
        prop_assert_eq!(&mixed_energy(&a, &b, g).unwrap().value, &forms.convolution);
        prop_assert_eq!(energy(&a, 2, g).unwrap().value, energy_oracle(&a, &a, g));
    }

    #[test]
    fn cauchy_schwarz_bounds(a in rset(12), b in rset(12)) {
        let e = mixed_energy(&a, &b, Group::Additive).unwrap().value;
        let (x, y) = (a.len() as u128, b.len() as u128);
        prop_assert!(e <= big(x * x * y) && e <= big(y * y * x));
        // E ≤ (|A||B|)^{3/2} ⟺ E² ≤ (|A||B|)³.
        prop_assert!(&e * &e <= big(x * y).pow(3));
    }

    #[test]
    fn multiplicative_energy_from_fibers(a in nonzero_rset(12)) {
        let e = energy(&a, 2, Group::Multiplicative).unwrap().value;
        let fibers = all_fibers(&a).unwrap();
        let sq: u128 = fibers.iter().map(|(_, f)| (f.len() as u128).pow(2)).sum();
        prop_assert_eq!(&e, &big(sq));
        // E×(A)·|A/A| ≥ |A|⁴.
        prop_assert!(&e * big(fibers.len() as u128) >= big((a.len() as u128).pow(4)));
    }

    #[test]
    fn gowers_norms(a in nonzero_rset(8)) {
        let n = a.len() as u128;
        let e = energy(&a, 2, Group::Multiplicative).unwrap().value;
        let mut prev = big(n * n);
        for k in 2..=4u32 {
            let g = gowers_norm(&a, k).unwrap().value;
            if k <= 3 {
                prop_assert_eq!(&g, &gowers_bruteforce(&a, k).unwrap());
            }
            prop_assert!(g >= prev);
            // ‖A‖_{U^k} ≥ E^{2^k−k−1} |A|^{−(3·2^k−4k−4)}
            let e_pow = (1u32 << k) - k - 1;
            let n_pow = 3 * (1u32 << k) - 4 * k - 4;
            prop_assert!(ratio_pow(&g, 1) * ratio_pow(&big(n), n_pow) >= ratio_pow(&e, e_pow));
            prev = g;
        }
    }

    #[test]
    fn energies_are_affinely_invariant(a in nonzero_rset(10), u in rational(), v in rational()) {
        prop_assume!(!u.is_zero());
        let dil = affine_image(&a, &u, &Rational::zero()).unwrap();
        let moved = affine_image(&a, &u, &v).unwrap();
        for k in 2..=3 {
            prop_assert_eq!(energy(&dil, k, Group::Multiplicative).unwrap().value,
                energy(&a, k, Group::Multiplicative).unwrap().value);
            prop_assert_eq!(energy(&moved, k, Group::Additive).unwrap().value,
                energy(&a, k, Group::Additive).unwrap().value);
        }
        prop_assert_eq!(gowers_norm(&dil, 3).unwrap(), gowers_norm(&a, 3).unwrap());
    }

    #[test]
    fn triple_counts_agree(a in integer_set(6, 12), b in integer_set(6, 12)) {
        let det = collinear_triples_with(&a, &b, &b, TripleAlgorithm::Determinant, 12).unwrap();
        prop_assert_eq!(&triples_via_energies(&a, &b).unwrap(), &det);
        for algo in [TripleAlgorithm::EnergyForm, TripleAlgorithm::SlopeSort] {
            prop_assert_eq!(&collinear_triples_with(&a, &b, &b, algo, 128).unwrap(), &det);
        }
    }

    #[test]
    fn triple_counts_agree_over_rationals(a in rset(5), b in rset(5), c in rset(5)) {
        let det = collinear_triples_with(&a, &b, &c, TripleAlgorithm::Determinant, 12).unwrap();
        for algo in [TripleAlgorithm::EnergyForm, TripleAlgorithm::SlopeSort] {
            prop_assert_eq!(&collinear_triples_with(&a, &b, &c, algo, 128).unwrap(), &det);
        }
        let cr = cross_ratio_count(&a, &b, &c).unwrap();
        prop_assert_eq!(cr + cross_ratio_correction(&a, &b, &c), det);
    }

    #[test]
    fn projections_land_in_the_difference_set(a in nonzero_rset(7)) {
        let diff = setop(SetOpKind::Difference, &a, &a).unwrap();
        for (lam, _) in all_fibers(&a).unwrap() {
            let ql = q_lambda(&a, &lam).unwrap();
            prop_assert!(ql.lambda_in_quotient_set);
            prop_assert!(project(&lam, &ql.points).is_subset(&diff));
        }
    }

    #[test]
    fn subgroups_are_closed(idx in 0usize..6) {
        let (p, d) = [(7, 3), (13, 4), (31, 5), (97, 8), (101, 10), (257, 16)][idx];
        let h = subgroup(p, d).unwrap();
        prop_assert_eq!(h.len() as u64, d);
        prop_assert_eq!(&h.product_set(&h).unwrap(), &h);
        prop_assert_eq!(&h.quotient_set(&h).unwrap(), &h);
    }

    #[test]
    fn shifts_are_symmetric(elems in prop::collection::btree_set(0u64..61, 1..20), x in 0u64..61) {
        let a = FpSet::new(61, elems).unwrap();
        let plus = a.intersection_size(&a.translate(x));
        let minus = a.intersection_size(&a.translate((61 - x) % 61));
        prop_assert_eq!(plus, minus);
        let m = shift_intersection_max(&a);
        let brute = (1..61).map(|y| a.intersection_size(&a.translate(y))).max().unwrap();
        prop_assert_eq!(m.value, brute);
        prop_assert_eq!(a.intersection_size(&a.translate(m.argmax)), brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Inputs containing zero violate the multiplicative preconditions; the
    /// affected claims must skip rather than fail.
    #[test]
    fn violated_preconditions_never_fail(a in rset(8), b in rset(8)) {
        let with_zero = |s: &RSet| s.union(&RSet::from_ints([0]));
        let (a, b) = (with_zero(&a), with_zero(&b));
        let input = Input {
            family: FamilySpec::parse("random:40:6", 0).unwrap(),
            n: a.len(),
            a: GenSet::Rational(a),
            c: GenSet::Rational(b.clone()),
            b: GenSet::Rational(b),
        };
        for claim in registry() {
            let r = evaluate_claim(claim, &input, &EvalOptions::default());
            prop_assert!(r.verdict != Verdict::Fails, "{} fails: {:?}", claim.id, r);
        }
    }
}

#[test]
fn correlation_counts_match_pairs() {
    let a = RSet::new([q(1, 2), q(1, 1), q(3, 1), q(-2, 3)]);
    let b = RSet::new([q(2, 1), q(5, 7), q(-1, 1)]);
    let oracle = counts(a.iter().flat_map(|x| b.iter().map(move |y| y - x)));
    let cm = correlation(&a, &b, Group::Additive).unwrap();
    for (k, v) in &oracle {
        assert_eq!(cm.get(k), *v, "difference {k}");
    }
    assert_eq!(cm.len(), oracle.len());
}
