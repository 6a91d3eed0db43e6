#![allow(dead_code)]

use std::sync::Arc;

use cocond::coherence::{assessment_from_simplex, Assessed};
use cocond::compound::indicator;
use cocond::{Ambient, Assessment, ConditionalEvent, ConstraintSet, EventExpr, PrevisionSymbol, Rational, Universe};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn a(name: &str) -> EventExpr {
    EventExpr::atom(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `E1|H1, ..., En|Hn` over free atoms.
pub fn independent(n: usize) -> Arc<Ambient> {
    let mut atoms = Vec::new();
    let mut family = Vec::new();
    for i in 1..=n {
        atoms.push(format!("E{i}"));
        atoms.push(format!("H{i}"));
        family.push(ConditionalEvent::new(a(&format!("E{i}")), a(&format!("H{i}"))));
    }
    Ambient::new(Universe::new(atoms, ConstraintSet::new()).unwrap(), family).unwrap()
}

/// `{consequent|H, consequent|K}` over atoms `consequent, H, K`, with `HK`
/// impossible when `disjoint`.
pub fn shared_consequent(consequent: &str, disjoint: bool) -> Arc<Ambient> {
    let constraints = if disjoint {
        ConstraintSet::new().with(!(a("H") & a("K")))
    } else {
        ConstraintSet::new()
    };
    let u = Universe::new([consequent, "H", "K"], constraints).unwrap();
    let family = vec![
        ConditionalEvent::new(a(consequent), a("H")),
        ConditionalEvent::new(a(consequent), a("K")),
    ];
    Ambient::new(u, family).unwrap()
}

/// The two basic conditional events assessed at `x` and `y`.
pub fn assessed_pair(amb: &Arc<Ambient>, x: &Rational, y: &Rational) -> (Vec<Assessed>, Assessment) {
    let mut m = Assessment::new();
    m.insert(PrevisionSymbol::x([0]), x.clone());
    m.insert(PrevisionSymbol::x([1]), y.clone());
    let items = vec![
        Assessed::new(indicator(amb, 0).unwrap(), x.clone()),
        Assessed::new(indicator(amb, 1).unwrap(), y.clone()),
    ];
    (items, m)
}

/// A rational in `[0, 1]` with denominator at most `max_den`.
pub fn unit_rational(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    r(rng.gen_range(0..=den), den)
}

/// A point of the simplex with `size` coordinates; roughly one coordinate
/// in four is zero so that boundary cases come up.
pub fn simplex_point(rng: &mut ChaCha8Rng, size: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..size)
            .map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=20) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|k| r(k, total)).collect();
        }
    }
}

/// A coherent assessment on every conjunction of `n` independent
/// conditional events, from a random simplex point.
pub fn coherent_conjunctions(rng: &mut ChaCha8Rng, n: usize) -> Assessment {
    let v = simplex_point(rng, 1 << n);
    assessment_from_simplex(&v, n).unwrap().0
}

pub fn clamp_unit(x: Rational) -> Rational {
    if x.is_zero() || x < Rational::zero() {
        Rational::zero()
    } else if x > Rational::from_integer(1.into()) {
        Rational::from_integer(1.into())
    } else {
        x
    }
}

/// Coherence by solvability of `Σ_J` for every nonempty subfamily `J`.
pub fn all_subfamilies_solvable(items: &[Assessed], m: &Assessment) -> bool {
    use cocond::coherence::{build_points, solve_sigma};
    cocond::IndexSet::nonempty_subsets(items.len()).into_iter().all(|j| {
        let points = build_points(items, j, m).unwrap();
        let mu: Vec<Rational> = j.iter().map(|i| items[i].prevision.clone()).collect();
        solve_sigma(&points, &mu).unwrap().is_feasible()
    })
}

fn det3(a: [&Rational; 3], b: [&Rational; 3], c: [&Rational; 3]) -> Rational {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn orient(p: [&Rational; 3], q: [&Rational; 3], s: [&Rational; 3], t: [&Rational; 3]) -> Rational {
    let d = |u: [&Rational; 3]| [u[0] - p[0], u[1] - p[1], u[2] - p[2]];
    let (a, b, c) = (d(q), d(s), d(t));
    det3([&a[0], &a[1], &a[2]], [&b[0], &b[1], &b[2]], [&c[0], &c[1], &c[2]])
}

/// Membership of `p` in the tetrahedron with vertices (1,1,1), (1,0,0),
/// (0,1,0), (0,0,0): `p` must lie on the closed inner side of every face.
pub fn in_tetrahedron(p: [&Rational; 3]) -> bool {
    let (z, o) = (Rational::zero(), Rational::from_integer(1.into()));
    let v = [[&o, &o, &o], [&o, &z, &z], [&z, &o, &z], [&z, &z, &z]];
    (0..4).all(|skip| {
        let f: Vec<[&Rational; 3]> = (0..4).filter(|&k| k != skip).map(|k| v[k]).collect();
        let inner = orient(f[0], f[1], f[2], v[skip]);
        let here = orient(f[0], f[1], f[2], p);
        (&inner * &here) >= Rational::zero()
    })
}
