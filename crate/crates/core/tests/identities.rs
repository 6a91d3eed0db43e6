mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use cocond::compound::{
    conditional_constituents, conjunction, disjunction, distributed_signed, indicator, inclusion_exclusion,
    linear_combination, negation, quasi_conjunction, signed_conjunction, signed_conjunction_direct, signed_prevision,
    ConjunctionPoly,
};
use cocond::event_algebra::gn_includes;
use cocond::{
    AffineValue, Ambient, ConditionalEvent, ConditionalRQ, ConstraintSet, EventExpr, IndexSet, PrevisionSymbol,
    Rational, SignedSubset, Universe,
};
use common::{a, coherent_conjunctions, independent, r, rng, shared_consequent};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn sum(parts: &[ConditionalRQ]) -> ConditionalRQ {
    let refs: Vec<(Rational, &ConditionalRQ)> = parts.iter().map(|x| (Rational::one(), x)).collect();
    linear_combination(&refs).unwrap()
}

fn all_ones(x: &ConditionalRQ) -> bool {
    x.values().iter().all(|v| *v == AffineValue::one()) && *x.prevision() == AffineValue::one()
}

#[test]
fn three_signed_constructions_agree() {
    for n in 2..=4 {
        let amb = independent(n);
        for k in 1..=n {
            for s in SignedSubset::all_over(IndexSet::full(k)) {
                let sum_form = signed_conjunction(&amb, s).unwrap();
                let direct = signed_conjunction_direct(&amb, s).unwrap();
                let poly = distributed_signed(s).to_crq(&amb).unwrap();
                assert!(sum_form.table_eq(&direct), "n={n} s={s}");
                assert!(sum_form.table_eq(&poly), "n={n} s={s}");
            }
        }
    }
}

#[test]
fn decomposition_on_the_next_event() {
    for n in 2..=4 {
        let amb = independent(n);
        for k in 0..n {
            for s in SignedSubset::all_over(IndexSet::full(k)) {
                let whole = signed_conjunction(&amb, s).unwrap();
                let kept = signed_conjunction_direct(&amb, s.extend(k, false)).unwrap();
                let dropped = signed_conjunction_direct(&amb, s.extend(k, true)).unwrap();
                assert!(whole.table_eq(&kept.plus(&dropped).unwrap()), "n={n} s={s} k={k}");
            }
        }
    }
}

#[test]
fn decomposition_reproduces_the_two_event_table() {
    let amb = independent(2);
    let c1 = conjunction(&amb, IndexSet::singleton(0)).unwrap();
    let c12 = conjunction(&amb, IndexSet::full(2)).unwrap();
    let c1_not2 = signed_conjunction(&amb, SignedSubset::new(IndexSet::singleton(0), IndexSet::singleton(1))).unwrap();
    assert!(c1.table_eq(&c12.plus(&c1_not2).unwrap()));
    let x1 = AffineValue::symbol(PrevisionSymbol::x([0]));
    let x2 = AffineValue::symbol(PrevisionSymbol::x([1]));
    let x12 = AffineValue::symbol(PrevisionSymbol::x([0, 1]));
    // rows TT TF TV FT FF FV VT VF VV
    let expected = [
        AffineValue::zero(),
        AffineValue::one(),
        AffineValue::one() - x2,
        AffineValue::zero(),
        AffineValue::zero(),
        AffineValue::zero(),
        AffineValue::zero(),
        x1.clone(),
        &x1 - &x12,
    ];
    assert_eq!(c1_not2.values(), &expected);
}

#[test]
fn partition_of_unity() {
    for n in 2..=4 {
        let amb = independent(n);
        for k in 1..=n {
            let parts: Vec<ConditionalRQ> = SignedSubset::all_over(IndexSet::full(k))
                .into_iter()
                .map(|s| signed_conjunction(&amb, s).unwrap())
                .collect();
            assert!(all_ones(&sum(&parts)), "n={n} k={k}");
        }
        let constituents = conditional_constituents(&amb).unwrap();
        assert_eq!(constituents.len(), 1 << n);
    }
}

/// The conjunction of two conditional constituents, built as a single
/// conjunction over the `2n` conditional events they are made of.
fn product_family(amb: &Ambient, s: SignedSubset, t: SignedSubset) -> Arc<Ambient> {
    let mut family = Vec::new();
    for sign in [s, t] {
        for (i, ce) in amb.family().iter().enumerate() {
            family.push(if sign.negatives.contains(i) { ce.negated() } else { ce.clone() });
        }
    }
    Ambient::new(amb.universe().clone(), family).unwrap()
}

#[test]
fn distinct_conditional_constituents_are_incompatible() {
    for n in 2..=4 {
        let amb = independent(n);
        let all = SignedSubset::all_over(amb.full());
        for (i, &s) in all.iter().enumerate() {
            for &t in &all[i + 1..] {
                let fam = product_family(&amb, s, t);
                let product = conjunction(&fam, fam.full()).unwrap();
                assert!(product.is_zero(), "n={n} {s} and {t}");
                assert_eq!(*product.prevision(), AffineValue::zero());
            }
        }
    }
}

#[test]
fn a_constituent_conjoined_with_itself_is_itself() {
    let amb = independent(2);
    for s in SignedSubset::all_over(amb.full()) {
        let fam = product_family(&amb, s, s);
        let product = conjunction(&fam, fam.full()).unwrap();
        let single = conjunction(&fam, IndexSet::full(2)).unwrap();
        // the copies carry their own symbols; identify them with the originals
        let same: BTreeMap<PrevisionSymbol, AffineValue> = (0..2)
            .map(|i| (PrevisionSymbol::x([i + 2]), AffineValue::symbol(PrevisionSymbol::x([i]))))
            .collect();
        for row in 0..fam.row_count() {
            if product.conditioning()[row] {
                assert_eq!(product.value(row).substitute_all(&same), *single.value(row), "{s}");
            }
        }
    }
}

#[test]
fn inclusion_exclusion_matches_the_disjunction() {
    for n in 1..=4 {
        let amb = independent(n);
        for s in IndexSet::nonempty_subsets(n) {
            let direct = disjunction(&amb, s).unwrap();
            let expanded = inclusion_exclusion(&amb, s).unwrap();
            assert!(direct.table_eq(&expanded), "n={n} S={s}");
        }
    }
    let amb = independent(1);
    assert!(disjunction(&amb, IndexSet::full(1))
        .unwrap()
        .table_eq(&indicator(&amb, 0).unwrap()));
}

#[test]
fn de_morgan() {
    for n in 2..=4 {
        let amb = independent(n);
        for s in IndexSet::nonempty_subsets(n) {
            let d = disjunction(&amb, s).unwrap();
            let none = signed_conjunction(&amb, SignedSubset::new(IndexSet::EMPTY, s)).unwrap();
            assert!(all_ones(&d.plus(&none).unwrap()), "n={n} S={s}");
            assert!(d.table_eq(&negation(&none)), "n={n} S={s}");
        }
    }
}

#[test]
fn distributing_the_negations() {
    for n in 2..=4 {
        let amb = independent(n);
        let product = (0..n).fold(ConjunctionPoly::one(), |acc, i| acc.and(&ConjunctionPoly::negated_event(i)));
        for t in IndexSet::full(n).subsets() {
            let sign = if t.len() % 2 == 0 { 1 } else { -1 };
            assert_eq!(product.coefficient(t), Rational::from_integer(sign.into()));
        }
        let all_negated = SignedSubset::new(IndexSet::EMPTY, amb.full());
        assert!(product
            .to_crq(&amb)
            .unwrap()
            .table_eq(&signed_conjunction_direct(&amb, all_negated).unwrap()));
    }
}

#[test]
fn conjunction_previsions_add_up_from_signed_ones() {
    for n in 2..=4 {
        let amb = independent(n);
        for s in IndexSet::nonempty_subsets(n) {
            let mut total = AffineValue::zero();
            for p in SignedSubset::all_over(amb.full()) {
                if s.is_subset(p.positives) {
                    total += signed_prevision(&amb, p);
                }
            }
            assert_eq!(total, AffineValue::symbol(PrevisionSymbol::Conj(s)), "n={n} S={s}");
        }
    }
}

#[test]
fn degenerate_members_are_absorbed() {
    let u = Universe::new(
        ["E1", "H1", "E2", "H2", "E3", "H3"],
        ConstraintSet::new()
            .with(!(a("E3") & a("H3")))
            .with(!a("H2") | a("E2")),
    )
    .unwrap();
    let family = vec![
        ConditionalEvent::new(a("E1"), a("H1")),
        ConditionalEvent::new(a("E2"), a("H2")),
        ConditionalEvent::new(a("E3"), a("H3")),
    ];
    let amb = Ambient::new(u, family).unwrap();
    let impossible = conjunction(&amb, IndexSet::from_indices([0, 2])).unwrap();
    assert!(impossible.is_zero());
    assert_eq!(*impossible.prevision(), AffineValue::zero());
    let certain = conjunction(&amb, IndexSet::from_indices([0, 1])).unwrap();
    assert!(certain.table_eq(&indicator(&amb, 0).unwrap()));
    assert!(indicator(&amb, 1).unwrap().is_identically(&Rational::one()));
}

#[test]
fn goodman_nguyen_inclusion_collapses_the_conjunction() {
    let exprs = [
        a("A"),
        a("B"),
        a("A") & a("B"),
        a("A") | a("B"),
        !a("A"),
        a("A") & !a("C"),
        a("C"),
        a("B") | a("C"),
        EventExpr::True,
    ];
    let u = Universe::new(["A", "B", "C"], ConstraintSet::new()).unwrap();
    let mut collapsed = 0;
    for e1 in &exprs {
        for h1 in &exprs {
            for e2 in &exprs {
                for h2 in &exprs {
                    let c1 = ConditionalEvent::new(e1.clone(), h1.clone());
                    let c2 = ConditionalEvent::new(e2.clone(), h2.clone());
                    if !gn_includes(&c1, &c2, &u).unwrap() {
                        continue;
                    }
                    let amb = Ambient::new(u.clone(), vec![c1.clone(), c2.clone()]).unwrap();
                    let both = conjunction(&amb, amb.full()).unwrap();
                    let first = indicator(&amb, 0).unwrap();
                    if gn_includes(&c2, &c1, &u).unwrap() {
                        // equivalent conditionals: either symbol names the prevision
                        assert!(both.coincides(&first), "{c1} in {c2}");
                        assert!(
                            both.prevision() == first.prevision()
                                || *both.prevision() == AffineValue::symbol(PrevisionSymbol::x([1]))
                        );
                    } else {
                        assert!(both.table_eq(&first), "{c1} in {c2}");
                    }
                    collapsed += 1;
                }
            }
        }
    }
    assert!(collapsed > 100, "only {collapsed} included pairs");
}

#[test]
fn chaining_nested_events() {
    let u = Universe::new(
        ["A", "B", "C"],
        ConstraintSet::new().with(!a("A") | a("B")).with(!a("B") | a("C")),
    )
    .unwrap();
    let family = vec![
        ConditionalEvent::new(a("A"), a("B")),
        ConditionalEvent::new(a("B"), a("C")),
        ConditionalEvent::new(a("A"), a("C")),
    ];
    let amb = Ambient::new(u, family).unwrap();
    let chained = conjunction(&amb, IndexSet::from_indices([0, 1])).unwrap();
    assert!(chained.coincides(&indicator(&amb, 2).unwrap()));
}

#[test]
fn contradictory_pair_yields_two_constituents() {
    let u = Universe::new(["E", "H"], ConstraintSet::new()).unwrap();
    let family = vec![
        ConditionalEvent::new(a("E"), a("H")),
        ConditionalEvent::new(!a("E"), a("H")),
    ];
    let amb = Ambient::new(u, family).unwrap();
    let found: Vec<String> = conditional_constituents(&amb)
        .unwrap()
        .iter()
        .map(|(s, _)| s.to_string())
        .collect();
    assert_eq!(found, ["1~2", "~12"]);
}

#[test]
fn signed_prevision_with_disjoint_antecedents_is_a_product() {
    let amb = shared_consequent("A", true);
    let (x, y) = (r(1, 2), r(1, 3));
    let mut m = cocond::Assessment::new();
    m.insert(PrevisionSymbol::x([0]), x.clone());
    m.insert(PrevisionSymbol::x([1]), y.clone());
    m.insert(PrevisionSymbol::x([0, 1]), &x * &y);
    let s = SignedSubset::new(IndexSet::singleton(0), IndexSet::singleton(1));
    assert_eq!(signed_prevision(&amb, s).eval(&m).unwrap(), &x * (Rational::one() - &y));
    let t = SignedSubset::new(IndexSet::singleton(1), IndexSet::singleton(0));
    assert_eq!(signed_prevision(&amb, t).eval(&m).unwrap(), (Rational::one() - &x) * &y);
    let c = conjunction(&amb, amb.full()).unwrap();
    let ys = AffineValue::symbol(PrevisionSymbol::x([1]));
    let xs = AffineValue::symbol(PrevisionSymbol::x([0]));
    // rows A H !K, !A H !K, A !H K, !A !H K, !H !K
    let expected = vec![ys, AffineValue::zero(), xs, AffineValue::zero(), AffineValue::symbol(PrevisionSymbol::x([0, 1]))];
    assert_eq!(c.values(), &expected[..]);
}

#[test]
fn negation_is_an_involution() {
    let amb = independent(3);
    for s in IndexSet::nonempty_subsets(3) {
        let c = conjunction(&amb, s).unwrap();
        assert!(negation(&negation(&c)).table_eq(&c));
    }
    let one = ConditionalRQ::constant(&amb, Rational::one());
    assert!(negation(&one).table_eq(&ConditionalRQ::constant(&amb, Rational::zero())));
}

#[test]
fn negated_indicator_is_the_negated_conditional() {
    let u = Universe::new(["E", "H"], ConstraintSet::new()).unwrap();
    let family = vec![
        ConditionalEvent::new(a("E"), a("H")),
        ConditionalEvent::new(!a("E"), a("H")),
    ];
    let amb = Ambient::new(u, family).unwrap();
    assert!(negation(&indicator(&amb, 0).unwrap()).coincides(&indicator(&amb, 1).unwrap()));
}

fn rational_strategy() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=12).prop_map(|(p, q)| r(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_combination_is_pointwise(a in rational_strategy(), b in rational_strategy(), s in 1u32..8, t in 1u32..8) {
        let amb = independent(3);
        let x = conjunction(&amb, IndexSet::from_bits(s)).unwrap();
        let y = conjunction(&amb, IndexSet::from_bits(t)).unwrap();
        let combo = linear_combination(&[(a.clone(), &x), (b.clone(), &y)]).unwrap();
        let sx = x.scaled(&a);
        let sy = y.scaled(&b);
        for row in 0..amb.row_count() {
            let inside = x.conditioning()[row] || y.conditioning()[row];
            prop_assert_eq!(combo.conditioning()[row], inside);
            prop_assert_eq!(combo.value(row), &(sx.value(row) + sy.value(row)));
        }
        prop_assert_eq!(combo.prevision(), &(sx.prevision() + sy.prevision()));
    }

    #[test]
    fn longer_conjunctions_are_smaller(seed in any::<u64>()) {
        let mut g = rng(seed);
        let amb = independent(4);
        let m = coherent_conjunctions(&mut g, 4);
        let mut previous: Option<Vec<Rational>> = None;
        for k in 1..=4 {
            let values = conjunction(&amb, IndexSet::full(k)).unwrap().evaluate(&m).unwrap();
            prop_assert!(values.iter().all(|v| *v >= Rational::zero() && *v <= Rational::one()));
            if let Some(p) = &previous {
                for (now, before) in values.iter().zip(p) {
                    prop_assert!(now <= before);
                }
            }
            previous = Some(values);
        }
    }

    #[test]
    fn quasi_conjunction_dominates_on_the_antecedents(seed in any::<u64>()) {
        let mut g = rng(seed);
        let amb = independent(2);
        let m = coherent_conjunctions(&mut g, 2);
        let c = conjunction(&amb, amb.full()).unwrap();
        let q = quasi_conjunction(&amb, amb.full()).unwrap();
        let cv = c.evaluate(&m).unwrap();
        for row in 0..amb.row_count() {
            if q.conditioning()[row] {
                let qv = q.value(row).as_constant().expect("quasi values are 0 or 1 inside");
                prop_assert!(&cv[row] <= qv);
            }
        }
    }
}
