//! Report assembly: comparison of recomputed values against published
//! references, and deterministic text / JSON rendering.

use jetcalc::{Bundle, CanonReport, CrossValidateReport, Expr};
use serde_json::{json, Value};

/// Result of comparing a recomputed expression with a published one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Exact,
    /// Equal after an overall sign flip (orientation convention).
    Sign,
    Mismatch,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Exact => "exact",
            Status::Sign => "sign",
            Status::Mismatch => "mismatch",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub key: String,
    pub published: Expr,
    pub computed: Expr,
    pub status: Status,
}

pub fn compare(key: &str, published: &Expr, computed: &Expr) -> Comparison {
    let status = if published == computed {
        Status::Exact
    } else if published.neg() == *computed {
        Status::Sign
    } else {
        Status::Mismatch
    };
    Comparison {
        key: key.to_string(),
        published: published.clone(),
        computed: computed.clone(),
        status,
    }
}

/// Non-exact comparisons as the machine-readable `paper_mismatch` list.
pub fn paper_mismatch_json(bundle: &Bundle, comparisons: &[Comparison]) -> Value {
    Value::Array(
        comparisons
            .iter()
            .filter(|c| c.status != Status::Exact)
            .map(|c| {
                json!({
                    "key": c.key,
                    "published": c.published.render(bundle),
                    "computed": c.computed.render(bundle),
                    "status": c.status.name(),
                })
            })
            .collect(),
    )
}

pub fn paper_mismatch_text(bundle: &Bundle, comparisons: &[Comparison], out: &mut String) {
    let entries: Vec<&Comparison> = comparisons
        .iter()
        .filter(|c| c.status != Status::Exact)
        .collect();
    if entries.is_empty() {
        out.push_str("paper_mismatch: none\n");
        return;
    }
    out.push_str("paper_mismatch:\n");
    for c in entries {
        out.push_str(&format!(
            "  {}: published {} ; computed {} ({})\n",
            c.key,
            c.published.render(bundle),
            c.computed.render(bundle),
            c.status.name()
        ));
    }
}

pub fn orientation_name(orientation: Option<i8>) -> &'static str {
    match orientation {
        Some(1) => "+",
        Some(-1) => "-",
        _ => "unknown",
    }
}

pub fn conditions_json(bundle: &Bundle, report: &CanonReport) -> Value {
    Value::Array(
        report
            .conditions
            .iter()
            .map(|c| {
                json!({
                    "label": c.label,
                    "residual": c.residual.render(bundle),
                    "satisfied": c.satisfied,
                })
            })
            .collect(),
    )
}

pub fn cross_validation_json(bundle: &Bundle, cv: &CrossValidateReport) -> Value {
    json!({
        "samples": cv.samples,
        "preserved": cv.preserved,
        "counterexample": cv.counterexample.as_ref().map(|(p, q)| {
            json!({ "p": p.render(bundle), "q": q.render(bundle) })
        }),
    })
}

/// Deterministic JSON rendering: `serde_json`'s map keeps keys sorted,
/// so equal reports are byte-identical.
pub fn render_json(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("valid json");
    out.push('\n');
    out
}
