//! The twelve acceptance criteria, each reported on one line.

mod common;

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use cocond::bounds::{bounds_n3, qc_bounds};
use cocond::coherence::{
    assess_conjunctions, assessment_from_simplex, check_coherence, check_coherence_fast, constituent_previsions,
    extension_bounds, verify_qh_coherence,
};
use cocond::compound::{
    atoms_chain, conjunction, disjunction, distributed_signed, inclusion_exclusion, linear_combination,
    quasi_conjunction, signed_conjunction, signed_conjunction_direct, ConjunctionPoly,
};
use cocond::{
    AffineValue, Ambient, Assessment, ConstraintSet, EventExpr, IndexSet, PrevisionSymbol, Rational, Sign,
    SignedSubset, Universe,
};
use common::{
    a, all_subfamilies_solvable, assessed_pair, clamp_unit, coherent_conjunctions, in_tetrahedron, independent, r,
    rng, shared_consequent, simplex_point, unit_rational,
};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn sym(indices: &[usize]) -> PrevisionSymbol {
    PrevisionSymbol::x(indices.iter().copied())
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let amb = independent(2);
    let target = conjunction(&amb, amb.full()).unwrap();
    let mut g = rng(101);
    for _ in 0..100 {
        let (x1, x2) = (unit_rational(&mut g, 40), unit_rational(&mut g, 40));
        let (items, m) = assessed_pair(&amb, &x1, &x2);
        let b = extension_bounds(&items, &m, &target).map_err(|e| e.to_string())?;
        let lower = (&x1 + &x2 - Rational::one()).max(Rational::zero());
        let upper = x1.clone().min(x2.clone());
        ensure(b.lower == lower && b.upper == upper, || {
            format!("({x1}, {x2}): got [{}, {}], want [{lower}, {upper}]", b.lower, b.upper)
        })?;
    }
    within(start.elapsed(), 5)?;
    Ok("100 pairs".into())
}

fn criterion2() -> Outcome {
    let start = Instant::now();
    let amb = independent(2);
    let mut g = rng(102);
    let mut inside = 0;
    for _ in 0..500 {
        let v: Vec<Rational> = (0..3).map(|_| unit_rational(&mut g, 6)).collect();
        let m = cocond::coherence::conjunction_assessment(2, &v).unwrap();
        let verdict = check_coherence_fast(&amb, &m).map_err(|e| e.to_string())?;
        let oracle = in_tetrahedron([&v[0], &v[1], &v[2]]);
        ensure(verdict.coherent == oracle, || format!("{v:?}: fast {} oracle {oracle}", verdict.coherent))?;
        inside += oracle as usize;
    }
    within(start.elapsed(), 2)?;
    ensure(inside > 0 && inside < 500, || "sample hit only one side".into())?;
    Ok(format!("500 triples, {inside} inside"))
}

fn criterion3() -> Outcome {
    let start = Instant::now();
    let amb = independent(3);
    let target = conjunction(&amb, amb.full()).unwrap();
    let mut g = rng(103);
    for _ in 0..100 {
        let mut m = coherent_conjunctions(&mut g, 3);
        m.remove(&sym(&[0, 1, 2]));
        let items = assess_conjunctions(&amb, &m).unwrap();
        let lp = extension_bounds(&items, &m, &target).map_err(|e| e.to_string())?;
        let get = |s: &[usize]| m[&sym(s)].clone();
        let closed = bounds_n3(&get(&[0]), &get(&[1]), &get(&[2]), &get(&[0, 1]), &get(&[0, 2]), &get(&[1, 2]))
            .map_err(|e| e.to_string())?;
        ensure(closed.lower == lp.lower && closed.upper == lp.upper, || {
            format!("closed {closed} vs lp [{}, {}]", lp.lower, lp.upper)
        })?;
    }
    within(start.elapsed(), 30)?;
    Ok("100 sub-assessments".into())
}

fn criterion4() -> Outcome {
    let start = Instant::now();
    let amb = shared_consequent("E", true);
    for i in 0..=20 {
        for j in 0..=20 {
            let (x, y) = (r(i, 20), r(j, 20));
            let (items, m) = assessed_pair(&amb, &x, &y);
            let v = check_coherence(&items, &m).map_err(|e| e.to_string())?;
            ensure(v.coherent, || format!("({x}, {y}) judged incoherent"))?;
            ensure(v.verify(&items, &m).unwrap(), || format!("({x}, {y}) witness fails"))?;
        }
    }
    within(start.elapsed(), 10)?;
    Ok("441 grid points".into())
}

fn criterion5() -> Outcome {
    let disjoint = shared_consequent("A", true);
    let joint = shared_consequent("A", false);
    let t3 = conjunction(&disjoint, disjoint.full()).unwrap();
    let t4 = conjunction(&joint, joint.full()).unwrap();
    let mut g = rng(105);
    for _ in 0..50 {
        let (x, y) = (unit_rational(&mut g, 30), unit_rational(&mut g, 30));
        let xy = &x * &y;
        let (items, m) = assessed_pair(&disjoint, &x, &y);
        let b = extension_bounds(&items, &m, &t3).map_err(|e| e.to_string())?;
        ensure(b.lower == xy && b.upper == xy, || format!("disjoint antecedents ({x}, {y}): [{}, {}]", b.lower, b.upper))?;
        let (items, m) = assessed_pair(&joint, &x, &y);
        let b = extension_bounds(&items, &m, &t4).map_err(|e| e.to_string())?;
        let upper = x.clone().min(y.clone());
        ensure(b.lower == xy && b.upper == upper, || format!("overlapping antecedents ({x}, {y}): [{}, {}]", b.lower, b.upper))?;
    }
    Ok("50 pairs on each example".into())
}

fn criterion6() -> Outcome {
    let upper = qc_bounds(&r(1, 2), &r(1, 2)).map_err(|e| e.to_string())?.upper;
    ensure(upper == r(2, 3), || format!("upper {upper}"))?;
    let amb = independent(2);
    let c = conjunction(&amb, amb.full()).unwrap();
    let q = quasi_conjunction(&amb, amb.full()).unwrap();
    let mut g = rng(106);
    for _ in 0..50 {
        let m = coherent_conjunctions(&mut g, 2);
        let items = assess_conjunctions(&amb, &m).unwrap();
        let b = extension_bounds(&items, &m, &q).map_err(|e| e.to_string())?;
        let (z, certified) = if g.gen_bool(0.5) {
            (b.lower.clone(), b.lower_certified)
        } else {
            (b.upper.clone(), b.upper_certified)
        };
        ensure(certified, || format!("z = {z} not certified"))?;
        let mut full = m.clone();
        full.insert(PrevisionSymbol::Quasi(amb.full()), z);
        let cv = c.evaluate(&full).unwrap();
        let qv = q.evaluate(&full).unwrap();
        for (row, (cq, qq)) in cv.iter().zip(&qv).enumerate() {
            ensure(qq >= cq, || format!("row {row}: quasi {qq} < conjunction {cq}"))?;
        }
    }
    Ok("2/3 and 50 assessments".into())
}

fn identities(n: usize) -> Result<(), String> {
    let amb = independent(n);
    let fail = |what: &str| format!("n={n}: {what}");
    for k in 0..n {
        for s in SignedSubset::all_over(IndexSet::full(k)) {
            let whole = signed_conjunction(&amb, s).unwrap();
            let split = signed_conjunction_direct(&amb, s.extend(k, false))
                .unwrap()
                .plus(&signed_conjunction_direct(&amb, s.extend(k, true)).unwrap())
                .unwrap();
            ensure(whole.table_eq(&split), || fail(&format!("decomposition of {s} on {}", k + 1)))?;
        }
    }
    for k in 1..=n {
        let parts: Vec<_> = SignedSubset::all_over(IndexSet::full(k))
            .into_iter()
            .map(|s| signed_conjunction(&amb, s).unwrap())
            .collect();
        let refs: Vec<(Rational, &cocond::ConditionalRQ)> = parts.iter().map(|p| (Rational::one(), p)).collect();
        let total = linear_combination(&refs).unwrap();
        ensure(
            total.values().iter().all(|v| *v == AffineValue::one()) && *total.prevision() == AffineValue::one(),
            || fail(&format!("partition of unity over {k}")),
        )?;
    }
    let all = SignedSubset::all_over(amb.full());
    for (i, &s) in all.iter().enumerate() {
        for &t in &all[i + 1..] {
            let mut family = Vec::new();
            for sign in [s, t] {
                for (j, ce) in amb.family().iter().enumerate() {
                    family.push(if sign.negatives.contains(j) { ce.negated() } else { ce.clone() });
                }
            }
            let fam = Ambient::new(amb.universe().clone(), family).unwrap();
            let product = conjunction(&fam, fam.full()).unwrap();
            ensure(product.is_zero() && product.prevision().is_zero(), || fail(&format!("{s} and {t}")))?;
        }
    }
    for s in IndexSet::nonempty_subsets(n) {
        let d = disjunction(&amb, s).unwrap();
        ensure(d.table_eq(&inclusion_exclusion(&amb, s).unwrap()), || fail(&format!("inclusion-exclusion {s}")))?;
        let none = signed_conjunction(&amb, SignedSubset::new(IndexSet::EMPTY, s)).unwrap();
        let sum = d.plus(&none).unwrap();
        ensure(
            sum.values().iter().all(|v| *v == AffineValue::one()) && *sum.prevision() == AffineValue::one(),
            || fail(&format!("De Morgan {s}")),
        )?;
    }
    let chain = (0..n).fold(ConjunctionPoly::one(), |acc, i| acc.and(&ConjunctionPoly::negated_event(i)));
    let none = SignedSubset::new(IndexSet::EMPTY, amb.full());
    ensure(
        chain.to_crq(&amb).unwrap().table_eq(&signed_conjunction_direct(&amb, none).unwrap()),
        || fail("product of negations"),
    )?;
    for s in all {
        let poly = distributed_signed(s).to_crq(&amb).unwrap();
        ensure(poly.table_eq(&signed_conjunction_direct(&amb, s).unwrap()), || fail(&format!("distributivity {s}")))?;
    }
    Ok(())
}

fn criterion7() -> Outcome {
    let mut times = Vec::new();
    for n in 2..=4 {
        let start = Instant::now();
        identities(n)?;
        times.push(start.elapsed());
    }
    within(times[2], 60)?;
    Ok(format!("n=4 in {:.2}s", times[2].as_secs_f64()))
}

fn random_full_assessment(g: &mut ChaCha8Rng, n: usize) -> Assessment {
    let mut m = coherent_conjunctions(g, n);
    if g.gen_bool(0.5) {
        let subsets = IndexSet::nonempty_subsets(n);
        let s = subsets[g.gen_range(0..subsets.len())];
        let v = clamp_unit(&m[&PrevisionSymbol::Conj(s)] + r(g.gen_range(-3..=3), 10));
        m.insert(PrevisionSymbol::Conj(s), v);
    }
    m
}

fn criterion8() -> Outcome {
    let mut g = rng(108);
    let mut counts = Vec::new();
    for n in 2..=3 {
        let amb = independent(n);
        let mut coherent = 0;
        for _ in 0..200 {
            let m = random_full_assessment(&mut g, n);
            let items = assess_conjunctions(&amb, &m).unwrap();
            let general = check_coherence(&items, &m).map_err(|e| e.to_string())?;
            let fast = check_coherence_fast(&amb, &m).map_err(|e| e.to_string())?;
            ensure(general.coherent == fast.coherent, || format!("n={n} {m:?}"))?;
            if n == 2 {
                let oracle = all_subfamilies_solvable(&items, &m);
                ensure(oracle == fast.coherent, || format!("subfamily oracle disagrees on {m:?}"))?;
            }
            coherent += fast.coherent as usize;
        }
        counts.push(coherent);
    }
    Ok(format!("coherent {}/200 (n=2), {}/200 (n=3)", counts[0], counts[1]))
}

fn criterion9() -> Outcome {
    let amb = independent(3);
    let mut g = rng(109);
    for _ in 0..100 {
        let v = simplex_point(&mut g, 8);
        let (m, p) = assessment_from_simplex(&v, 3).map_err(|e| e.to_string())?;
        ensure(check_coherence_fast(&amb, &m).map_err(|e| e.to_string())?.coherent, || format!("{v:?}"))?;
        let back = constituent_previsions(&m, 3).map_err(|e| e.to_string())?;
        ensure(back == p && back.values().cloned().collect::<Vec<_>>() == v, || format!("{v:?}"))?;
    }
    Ok("100 simplex points".into())
}

fn criterion10() -> Outcome {
    let amb = independent(3);
    let mut g = rng(110);
    for _ in 0..20 {
        let m = coherent_conjunctions(&mut g, 3);
        let report = verify_qh_coherence(&amb, &m).map_err(|e| e.to_string())?;
        ensure(report.len() == 26, || format!("{} points", report.len()))?;
        if let Some((id, _)) = report.iter().find(|(_, v)| !v.coherent) {
            return Err(format!("Q{id} incoherent for {m:?}"));
        }
    }
    Ok("20 assessments, 26 points each".into())
}

fn chain_case(n: usize, probs: &[Rational]) -> Result<(), String> {
    let names: Vec<String> = (1..=n).map(|i| format!("H{i}")).collect();
    let mut constraints = ConstraintSet::new();
    for i in 0..n {
        for j in i + 1..n {
            constraints = constraints.with(!(a(&names[i]) & a(&names[j])));
        }
    }
    let universe = Universe::new(names.clone(), constraints).unwrap();
    let partition: Vec<EventExpr> = names.iter().map(|h| a(h)).collect();
    let (chain, prevision) = atoms_chain(universe, &partition, probs).map_err(|e| e.to_string())?;
    let product: Rational = probs.iter().product();
    let tail: Rational = probs[1..].iter().product();
    ensure(prevision == product, || format!("{probs:?}: prevision {prevision}, want {product}"))?;
    let amb = chain.ambient().clone();
    for row in 0..amb.row_count() {
        let want = if amb.sign(row, 0) == Sign::True { tail.clone() } else { Rational::zero() };
        let got = chain.value(row).as_constant().cloned();
        ensure(got.as_ref() == Some(&want), || format!("{probs:?}: row {row} {:?}, want {want}", got))?;
    }
    Ok(())
}

fn criterion11() -> Outcome {
    let mut g = rng(111);
    let mut cases = 0;
    for n in 2..=4 {
        for _ in 0..10 {
            let probs: Vec<Rational> = (0..n).map(|_| unit_rational(&mut g, 9)).collect();
            chain_case(n, &probs)?;
            cases += 1;
        }
    }
    chain_case(3, &[r(1, 2), r(1, 3), r(1, 4)])?;
    chain_case(4, &[r(1, 2), Rational::zero(), r(1, 4), r(1, 5)])?;
    Ok(format!("{} chains", cases + 2))
}

fn criterion12() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let two = dir.join("two_conditionals.cc").display().to_string();
    let bin = env!("CARGO_BIN_EXE_cocond");
    let run = |args: &[&str]| Command::new(bin).args(args).output().map_err(|e| e.to_string());
    for (golden, targets) in [
        ("table_conjunction.txt", vec!["X", "Y", "X ^ Y"]),
        ("table_quasi.txt", vec!["X", "Y", "X ^ Y", "Q(X, Y)"]),
    ] {
        let mut args = vec!["table", two.as_str()];
        for t in &targets {
            args.extend(["--target", t]);
        }
        let out = run(&args)?;
        let want = std::fs::read(dir.join(golden)).map_err(|e| e.to_string())?;
        ensure(out.stdout == want, || format!("{golden} differs"))?;
    }
    let incompatible = dir.join("incompatible_antecedents.cc").display().to_string();
    ensure(run(&["check", &incompatible])?.status.code() == Some(0), || "coherent file must exit 0".into())?;
    let bad = "atoms E1, H1, E2, H2; ce X := E1 | H1; ce Y := E2 | H2;
               assess P(X) = 1/2; assess P(Y) = 1/2; assess P(X ^ Y) = 2/3;";
    let mut child = Command::new(bin)
        .args(["check", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    std::io::Write::write_all(&mut child.stdin.take().unwrap(), bad.as_bytes()).map_err(|e| e.to_string())?;
    let code = child.wait().map_err(|e| e.to_string())?.code();
    ensure(code == Some(1), || format!("incoherent file exited {code:?}"))?;
    let code = Command::new(bin)
        .args(["check", "/nonexistent.cc"])
        .stderr(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?
        .code();
    ensure(code == Some(2), || format!("missing file exited {code:?}"))?;
    Ok("2 goldens, exit codes 0/1/2".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Frechet-Hoeffding bounds, n=2", criterion1),
        ("coherence region, n=2", criterion2),
        ("closed-form triple bounds, n=3", criterion3),
        ("disjoint antecedents grid", criterion4),
        ("shared consequent extensions", criterion5),
        ("quasi conjunction", criterion6),
        ("symbolic identities, n=2..4", criterion7),
        ("general vs fast checker", criterion8),
        ("simplex round trip, n=3", criterion9),
        ("points Q_h are coherent", criterion10),
        ("chain of incompatible events", criterion11),
        ("CLI goldens and exit codes", criterion12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(note) => println!("criterion {:>2} PASS  {name} ({note}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
