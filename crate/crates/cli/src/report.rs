//! Command reports: one structure rendered either as text or as JSON.
//!
//! JSON keys are stable. Text output prints every number with 17 significant
//! digits so that it carries the same `f64` as the JSON.

use std::fmt::Write as _;

use serde::Serialize;
use webgeom::coframe::{Interval, Invariants, OdeSystem, Slot};
use webgeom::equivalence::{EquivVerdict, ScalarSolution, SymmetryEstimate};
use webgeom::{Env, Expr};

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub system: Vec<SystemEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torsion: Option<Vec<Entry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<NormalizerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coframe: Option<Vec<Entry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<Vec<Entry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_dimension: Option<SymdimReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<ScalarReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemEcho {
    pub vars: Vec<String>,
    pub rhs: Vec<String>,
    #[serde(rename = "box")]
    pub bbox: Vec<[f64; 2]>,
}

impl SystemEcho {
    pub fn new(sys: &OdeSystem) -> SystemEcho {
        SystemEcho {
            vars: sys.vars().iter().map(|v| v.to_string()).collect(),
            rhs: sys.rhs().iter().map(Expr::to_string).collect(),
            bbox: sys.bbox().iter().map(|iv| [iv.lo, iv.hi]).collect(),
        }
    }
}

/// A labelled expression and its value at the report point (`null` when it
/// cannot be evaluated there).
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub label: String,
    pub expr: String,
    pub value: Option<f64>,
}

impl Entry {
    fn new(label: String, e: &Expr, env: &impl Env) -> Entry {
        Entry {
            label,
            expr: e.to_string(),
            value: e.eval(env).ok(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizerReport {
    pub label: String,
    /// 1-based `(p, q)`.
    pub pair: [usize; 2],
    pub expr: String,
    /// Whether a pair other than `(1, 2)` was needed.
    pub fallback: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_invariant_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_overlap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub invariant: String,
    pub index: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

impl VerdictReport {
    pub fn new(v: &EquivVerdict) -> VerdictReport {
        let mut r = VerdictReport {
            kind: v.kind().to_string(),
            witness: None,
            max_residual: None,
            max_invariant_error: None,
            samples: None,
            constant: None,
            min_overlap: None,
        };
        match v {
            EquivVerdict::RefutedByInvariant(w) => {
                r.witness = Some(WitnessReport {
                    invariant: w.invariant.clone(),
                    index: w.index,
                    a: [w.a.0, w.a.1],
                    b: [w.b.0, w.b.1],
                    gap: w.gap(),
                    point: w.point.clone(),
                })
            }
            EquivVerdict::NotRefuted(s) => {
                r.samples = Some(vec![s.samples.0, s.samples.1]);
                r.constant = Some(s.constant);
                r.min_overlap = Some(s.min_overlap);
            }
            EquivVerdict::VerifiedByMap {
                max_residual,
                max_invariant_error,
                samples,
            } => {
                r.max_residual = Some(*max_residual);
                r.max_invariant_error = Some(*max_invariant_error);
                r.samples = Some(vec![*samples]);
            }
        }
        r
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymdimReport {
    pub dimension: usize,
    pub rank: usize,
    pub bound: usize,
    pub probes_requested: usize,
    pub probes_used: usize,
    pub singular_values: Vec<Vec<f64>>,
}

impl SymdimReport {
    pub fn new(e: &SymmetryEstimate) -> SymdimReport {
        SymdimReport {
            dimension: e.dimension,
            rank: e.rank,
            bound: e.n + 1,
            probes_requested: e.probes_requested,
            probes_used: e.probes.len(),
            singular_values: e.singular_values.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarReport {
    pub anchor: [f64; 2],
    pub range: [f64; 2],
    pub points: usize,
    pub max_residual: f64,
    pub passes: bool,
}

impl ScalarReport {
    pub fn new(s: &ScalarSolution, anchor: (f64, f64), range: Interval) -> ScalarReport {
        ScalarReport {
            anchor: [anchor.0, anchor.1],
            range: [range.lo, range.hi],
            points: s.grid.len(),
            max_residual: s.max_residual,
            passes: s.passes(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub stage: String,
    pub message: String,
}

/// Torsion, normalizer, coframe and structure sections at `p`.
pub fn invariant_sections(report: &mut Report, sys: &OdeSystem, inv: &Invariants, p: &impl Env) {
    let n = sys.n();
    let mut torsion = Vec::new();
    for (i, j, e) in inv.torsion.iter() {
        torsion.push(Entry::new(format!("l{}{}", i + 1, j + 1), e, p));
    }
    report.torsion = Some(torsion);
    let choice = inv.normalizer();
    report.normalizer = Some(NormalizerReport {
        label: choice.label(),
        pair: [choice.pair.0 + 1, choice.pair.1 + 1],
        expr: choice.value.to_string(),
        fallback: choice.pair != (0, 1),
    });
    report.coframe = Some(
        inv.coframe
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, s)| Entry::new(format!("theta^{k}"), s, p))
            .collect(),
    );
    report.structure = Some(
        Slot::invariant_slots(n)
            .into_iter()
            .map(|s| Entry::new(s.label(), &inv.structure.slot(s), p))
            .collect(),
    );
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "undefined".into())
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.system.iter().enumerate() {
            let tag = if self.system.len() > 1 {
                format!("system {}", ["A", "B"].get(k).unwrap_or(&"?"))
            } else {
                "system".into()
            };
            let _ = writeln!(out, "{tag}:");
            for (i, (v, f)) in s.vars.iter().zip(&s.rhs).enumerate() {
                let _ = writeln!(
                    out,
                    "  d{v}/dt = {f}    {v} in [{}, {}]",
                    num(s.bbox[i][0]),
                    num(s.bbox[i][1])
                );
            }
        }
        if let Some(p) = &self.point {
            let vals: Vec<String> = p.iter().map(|&v| num(v)).collect();
            let _ = writeln!(out, "point: ({})", vals.join(", "));
        }
        let section = |out: &mut String, title: &str, entries: &Option<Vec<Entry>>| {
            if let Some(entries) = entries {
                let _ = writeln!(out, "{title}:");
                for e in entries {
                    let _ = writeln!(out, "  {} = {}    [{}]", e.label, e.expr, opt_num(e.value));
                }
            }
        };
        section(&mut out, "torsion", &self.torsion);
        if let Some(nz) = &self.normalizer {
            let note = if nz.fallback { " (fallback)" } else { "" };
            let _ = writeln!(
                out,
                "normalizer: {} = {}, pair ({},{}){note}",
                nz.label, nz.expr, nz.pair[0], nz.pair[1]
            );
        }
        section(&mut out, "coframe", &self.coframe);
        section(&mut out, "structure", &self.structure);
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "verdict: {}", v.kind);
            if let Some(w) = &v.witness {
                let _ = writeln!(
                    out,
                    "  witness {} (index {}): A in [{}, {}], B in [{}, {}], gap {}",
                    w.invariant,
                    w.index,
                    num(w.a[0]),
                    num(w.a[1]),
                    num(w.b[0]),
                    num(w.b[1]),
                    num(w.gap)
                );
                if let Some(p) = &w.point {
                    let vals: Vec<String> = p.iter().map(|&v| num(v)).collect();
                    let _ = writeln!(out, "  at x = ({})", vals.join(", "));
                }
            }
            if let Some(r) = v.max_residual {
                let _ = writeln!(out, "  max residual {}", num(r));
            }
            if let Some(r) = v.max_invariant_error {
                let _ = writeln!(out, "  max invariant error {}", num(r));
            }
            if let Some(s) = &v.samples {
                let s: Vec<String> = s.iter().map(usize::to_string).collect();
                let _ = writeln!(out, "  samples {}", s.join(" + "));
            }
            if let Some(c) = v.constant {
                let _ = writeln!(out, "  constant invariants: {c}");
            }
            if let Some(m) = v.min_overlap {
                let _ = writeln!(out, "  min overlap {}", num(m));
            }
            if v.kind == "NotRefuted" {
                let _ = writeln!(
                    out,
                    "  (no invariant separates the systems; this does not prove equivalence)"
                );
            }
        }
        if let Some(s) = &self.symmetry_dimension {
            let _ = writeln!(
                out,
                "symmetry dimension: {} (bound {})",
                s.dimension, s.bound
            );
            let _ = writeln!(out, "  rank {}", s.rank);
            let _ = writeln!(out, "  probes {} of {}", s.probes_used, s.probes_requested);
            for sv in &s.singular_values {
                let sv: Vec<String> = sv.iter().map(|&v| num(v)).collect();
                let _ = writeln!(out, "  singular values [{}]", sv.join(", "));
            }
        }
        if let Some(s) = &self.scalar {
            let _ = writeln!(
                out,
                "scalar map: anchor ({}, {}), range [{}, {}], {} points",
                num(s.anchor[0]),
                num(s.anchor[1]),
                num(s.range[0]),
                num(s.range[1]),
                s.points
            );
            let _ = writeln!(out, "  max residual {}", num(s.max_residual));
            let _ = writeln!(out, "  passes: {}", s.passes);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error in {}: {}", e.stage, e.message);
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        out
    }
}
