//! Text and JSON reports.

use serde::Serialize;

use crate::affine::{AffineValue, Assessment, PrevisionSymbol};
use crate::coherence::{BoundsMethod, ExtensionBounds, Verdict, Witness};
use crate::compound::{
    disjunction, inclusion_exclusion, signed_conjunction, signed_conjunction_direct, ConditionalRQ,
};
use crate::dsl::Target;
use crate::event_algebra::{EventExpr, Sign};
use crate::index_set::{IndexSet, SignedSubset};
use crate::rational::{serde_rational, Rational};

use super::{json, CliError, Format, Method, Model};

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Left-aligned columns separated by two spaces, without trailing blanks.
fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            line.extend(std::iter::repeat(' ').take(widths[c] - cell.chars().count()));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn item_names(model: &Model, indices: IndexSet) -> String {
    let names: Vec<String> = indices.iter().map(|i| model.items[i].0.to_string()).collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join(", ")
    }
}

pub(super) fn verdict_text(model: Option<&Model>, v: &Verdict, method: Option<Method>) -> String {
    let mut s = format!("verdict: {}\n", if v.coherent { "coherent" } else { "incoherent" });
    if let Some(m) = method {
        let label = match m {
            Method::Fast => "fast (conditional-constituent previsions)",
            Method::General => "general (linear system with zero-mass recursion)",
        };
        s.push_str(&format!("method: {label}\n"));
    }
    match &v.witness {
        Witness::Recursion { levels } => {
            for level in levels {
                let (quantities, zero) = match model {
                    Some(m) => (item_names(m, level.indices), item_names(m, level.i0)),
                    None => (level.indices.to_string(), level.i0.to_string()),
                };
                s.push_str(&format!("level {}: quantities {quantities}; zero mass {zero}\n", level.level));
                let weights: Vec<Vec<String>> = level
                    .constituents
                    .iter()
                    .zip(&level.lambda)
                    .map(|(c, l)| vec![format!("  C{c}"), l.to_string()])
                    .collect();
                s.push_str(&columns(&weights));
            }
        }
        Witness::Simplex { weights } => {
            let rows: Vec<Vec<String>> = weights
                .iter()
                .map(|w| vec![format!("  x{}", w.constituent), w.value.to_string()])
                .collect();
            s.push_str(&columns(&rows));
        }
    }
    if let Some(f) = &v.failure {
        s.push_str(&format!("reason: {f}\n"));
    }
    s
}

#[derive(Serialize)]
pub(super) struct IncoherentReport<'a> {
    pub coherent: bool,
    pub verdict: &'a Verdict,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    coherent: bool,
    method: Method,
    verdict: &'a Verdict,
}

pub(super) fn check(model: &Model, method: Method, v: &Verdict, fmt: Format) -> String {
    match fmt {
        Format::Text => verdict_text(Some(model), v, Some(method)),
        Format::Json => json(&CheckReport {
            coherent: v.coherent,
            method,
            verdict: v,
        }),
    }
}

#[derive(Serialize)]
struct BoundsReport<'a> {
    target: String,
    #[serde(flatten)]
    bounds: &'a ExtensionBounds,
    point: bool,
}

pub(super) fn bounds(t: &Target, b: &ExtensionBounds, fmt: Format) -> String {
    match fmt {
        Format::Json => json(&BoundsReport {
            target: t.to_string(),
            bounds: b,
            point: b.is_point(),
        }),
        Format::Text => {
            let mut s = format!("target: {t}\nbounds: [{}, {}]", b.lower, b.upper);
            if b.is_point() {
                s.push_str(" (point)");
            }
            s.push('\n');
            match b.method {
                BoundsMethod::Simplex => {
                    s.push_str("method: simplex of conditional-constituent previsions\n");
                    s.push_str("certified: every point of the interval\n");
                }
                BoundsMethod::Hull => {
                    s.push_str("method: hull of the constituent points\n");
                    s.push_str(&format!(
                        "certified: lower {}, upper {}, midpoint {}; other interior points are hull-derived\n",
                        yes(b.lower_certified),
                        yes(b.upper_certified),
                        yes(b.midpoint_certified)
                    ));
                }
            }
            s
        }
    }
}

/// What each prevision symbol in a table stands for.
fn legend(model: &Model, values: &[&AffineValue]) -> Vec<(String, String)> {
    let name = |i: usize| model.file.conditionals[i].0.clone();
    let joined = |s: IndexSet, sep: &str| s.iter().map(name).collect::<Vec<_>>().join(sep);
    let mut symbols: Vec<&PrevisionSymbol> = values.iter().flat_map(|v| v.symbols()).collect();
    symbols.sort();
    symbols.dedup();
    symbols
        .into_iter()
        .map(|sym| {
            let meaning = match sym {
                PrevisionSymbol::Conj(s) => format!("P({})", joined(*s, " ^ ")),
                PrevisionSymbol::Disj(s) => format!("P({})", joined(*s, " v ")),
                PrevisionSymbol::Quasi(s) => format!("P(Q({}))", joined(*s, ", ")),
                PrevisionSymbol::Signed(s) => format!("P({s})"),
                PrevisionSymbol::Named(n) => n.clone(),
            };
            (sym.to_string(), meaning)
        })
        .collect()
}

#[derive(Serialize)]
struct TableReport {
    columns: Vec<String>,
    rows: Vec<TableRowReport>,
    legend: Vec<(String, String)>,
}

#[derive(Serialize)]
struct TableRowReport {
    constituent: usize,
    signs: String,
    values: Vec<AffineValue>,
}

pub(super) fn table(model: &Model, crqs: &[ConditionalRQ], fmt: Format) -> String {
    let amb = &model.ambient;
    let all: Vec<&AffineValue> = crqs.iter().flat_map(|c| c.values().iter()).collect();
    let legend = legend(model, &all);
    match fmt {
        Format::Json => json(&TableReport {
            columns: crqs.iter().map(|c| c.label().to_string()).collect(),
            rows: amb
                .rows()
                .iter()
                .enumerate()
                .map(|(r, c)| TableRowReport {
                    constituent: c.id,
                    signs: c.sign_string(),
                    values: crqs.iter().map(|x| x.value(r).clone()).collect(),
                })
                .collect(),
            legend,
        }),
        Format::Text => {
            let mut rows = vec![["C_h".to_string(), "signs".to_string()]
                .into_iter()
                .chain(crqs.iter().map(|c| c.label().to_string()))
                .collect::<Vec<_>>()];
            for (r, c) in amb.rows().iter().enumerate() {
                rows.push(
                    [format!("C{}", c.id), c.sign_string()]
                        .into_iter()
                        .chain(crqs.iter().map(|x| x.value(r).to_string()))
                        .collect(),
                );
            }
            let mut s = columns(&rows);
            if !legend.is_empty() {
                s.push_str("where\n");
                let lines: Vec<Vec<String>> = legend
                    .into_iter()
                    .map(|(k, v)| vec![format!("  {k}"), format!("= {v}")])
                    .collect();
                s.push_str(&columns(&lines));
            }
            s
        }
    }
}

fn flatten_and(e: &EventExpr, out: &mut Vec<EventExpr>) {
    match e {
        EventExpr::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        EventExpr::True => {}
        other => {
            if !out.contains(other) {
                out.push(other.clone());
            }
        }
    }
}

fn describe(model: &Model, signs: &[Sign]) -> String {
    let mut parts = Vec::new();
    for (ce, sign) in model.ambient.family().iter().zip(signs) {
        let e = match sign {
            Sign::True => ce.true_event(),
            Sign::False => ce.false_event(),
            Sign::Void => ce.void_event(),
        };
        flatten_and(&e, &mut parts);
    }
    if parts.is_empty() {
        return "true".into();
    }
    EventExpr::all(parts).to_string()
}

#[derive(Serialize)]
struct ConstituentReport {
    id: usize,
    signs: String,
    event: String,
}

pub(super) fn constituents(model: &Model, fmt: Format) -> String {
    let items: Vec<ConstituentReport> = model
        .ambient
        .rows()
        .iter()
        .map(|c| ConstituentReport {
            id: c.id,
            signs: c.sign_string(),
            event: describe(model, &c.signs),
        })
        .collect();
    match fmt {
        Format::Json => json(&items),
        Format::Text => {
            let names: Vec<&str> = model.file.conditionals.iter().map(|(n, _)| n.as_str()).collect();
            let mut s = format!("signs over {}\n", names.join(", "));
            let rows: Vec<Vec<String>> = items
                .into_iter()
                .map(|c| vec![format!("C{}", c.id), c.signs, c.event])
                .collect();
            s.push_str(&columns(&rows));
            s
        }
    }
}

#[derive(Serialize)]
struct ExpandReport {
    target: String,
    terms: Vec<(String, String)>,
    expansion: String,
    prevision: AffineValue,
    #[serde(skip_serializing_if = "Option::is_none", with = "option_rational")]
    value: Option<Rational>,
    tables_agree: bool,
}

mod option_rational {
    use super::{serde_rational, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => serde_rational::serialize(v, s),
            None => s.serialize_none(),
        }
    }
}

fn conj_name(model: &Model, s: IndexSet) -> String {
    if s.is_empty() {
        return "1".into();
    }
    s.iter()
        .map(|i| model.file.conditionals[i].0.clone())
        .collect::<Vec<_>>()
        .join(" ^ ")
}

pub(super) fn expand(model: &Model, t: &Target, fmt: Format) -> Result<String, CliError> {
    let amb = &model.ambient;
    let mut terms: Vec<(bool, IndexSet)> = Vec::new();
    let (expanded, agree) = match model.key(t) {
        PrevisionSymbol::Disj(s) => {
            let mut subs: Vec<IndexSet> = s.subsets().filter(|x| !x.is_empty()).collect();
            subs.sort();
            terms.extend(subs.into_iter().map(|x| (x.len() % 2 == 1, x)));
            let ie = inclusion_exclusion(amb, s)?;
            let agree = ie.table_eq(&disjunction(amb, s)?);
            (ie, agree)
        }
        PrevisionSymbol::Signed(s) => {
            let mut subs: Vec<IndexSet> = s.negatives.subsets().collect();
            subs.sort();
            terms.extend(subs.into_iter().map(|j| (j.len() % 2 == 0, s.positives.union(j))));
            let alt = signed_conjunction(amb, s)?;
            let agree = alt.table_eq(&signed_conjunction_direct(amb, s)?);
            (alt, agree)
        }
        _ => {
            return Err(CliError::Input(
                "expand applies to disjunctions and to conjunctions with negated members".into(),
            ))
        }
    };
    let mut expansion = String::new();
    for (k, (positive, s)) in terms.iter().enumerate() {
        match (k, positive) {
            (0, true) => {}
            (0, false) => expansion.push('-'),
            (_, true) => expansion.push_str(" + "),
            (_, false) => expansion.push_str(" - "),
        }
        expansion.push_str(&conj_name(model, *s));
    }
    let prevision = expanded.prevision().clone();
    let value = prevision.eval(&model.assessment).ok();
    let report = ExpandReport {
        target: t.to_string(),
        terms: terms
            .iter()
            .map(|(p, s)| ((if *p { "+" } else { "-" }).to_string(), conj_name(model, *s)))
            .collect(),
        expansion,
        prevision,
        value,
        tables_agree: agree,
    };
    Ok(match fmt {
        Format::Json => json(&report),
        Format::Text => {
            let mut s = format!(
                "{} = {}\nprevision: {}\n",
                report.target, report.expansion, report.prevision
            );
            if let Some(v) = &report.value {
                s.push_str(&format!("value: {v}\n"));
            }
            s.push_str(&format!("tables agree: {}\n", yes(report.tables_agree)));
            s
        }
    })
}

#[derive(Serialize)]
struct SampleReport<'a> {
    events: usize,
    seed: u64,
    simplex: Vec<(SignedSubset, String)>,
    assessment: Vec<(String, String)>,
    coherent: bool,
    verdict: &'a Verdict,
}

pub(super) fn sample(n: usize, seed: u64, v: &[Rational], m: &Assessment, verdict: &Verdict, fmt: Format) -> String {
    let patterns = SignedSubset::all_over(IndexSet::full(n));
    let name = |s: IndexSet| s.iter().map(|i| format!("C{}", i + 1)).collect::<Vec<_>>().join(" ^ ");
    match fmt {
        Format::Json => json(&SampleReport {
            events: n,
            seed,
            simplex: patterns.iter().copied().zip(v.iter().map(|x| x.to_string())).collect(),
            assessment: m.iter().map(|(k, x)| (k.to_string(), x.to_string())).collect(),
            coherent: verdict.coherent,
            verdict,
        }),
        Format::Text => {
            let mut s = format!("# simplex point drawn with seed {seed}\n");
            let rows: Vec<Vec<String>> = patterns
                .iter()
                .zip(v)
                .map(|(p, x)| vec![format!("#   x{p}"), format!("= {x}")])
                .collect();
            s.push_str(&columns(&rows));
            let problem = super::independent_problem(n);
            s.push_str(&problem.to_string());
            for set in IndexSet::nonempty_subsets(n) {
                let x = &m[&PrevisionSymbol::Conj(set)];
                s.push_str(&format!("assess P({}) = {x};\n", name(set)));
            }
            s.push_str("query coherent;\n");
            s.push_str(&format!(
                "# verdict: {}\n",
                if verdict.coherent { "coherent" } else { "incoherent" }
            ));
            s
        }
    }
}
