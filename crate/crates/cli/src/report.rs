//! Output records. Each command's JSON is one of these, and parses back
//! into the same value.

use std::fmt::Write;

use fexlab::representation::RefinementReport;
use fexlab::shift::TtVerdict;
use fexlab::transitivity::{DensityReport, Orbit, PreimageTree, PttReport};
use fexlab::{Digit, EndKind, Interval, MapKind, Monotonicity, Scalar, Word, WordStatus};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Encode(EncodeReport),
    Decode(DecodeReport),
    Validity(ValidityReport),
    Orbit(OrbitReport),
    Preimages(PreimagesReport),
    ShiftCheck(ShiftReport),
    MapInfo(MapInfoReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeSample {
    pub x: Scalar,
    pub word: Word,
    /// `F^{k−1}(x)` for each step, including the point that left the domain.
    pub iterates: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub map: Value,
    pub n: usize,
    pub seed: Option<u64>,
    pub samples: Vec<EncodeSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub map: Value,
    pub word: Vec<Digit>,
    pub hull: Interval,
    pub midpoint: Scalar,
    pub length: Scalar,
    /// The nested evaluation started from 0 and from 1.
    pub seeds: [Scalar; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub map: Value,
    pub n_max: usize,
    pub report: RefinementReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub orbit: Orbit,
    pub density: DensityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub map: Value,
    pub n: usize,
    pub eps: Scalar,
    pub seed: Option<u64>,
    pub samples: Vec<OrbitSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimagesReport {
    pub map: Value,
    pub tree: PreimageTree,
    pub density: Option<PttReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// The SFT or map spec the language came from.
    pub source: Value,
    pub max_len: usize,
    pub digit_cap: Option<Digit>,
    pub verdict: TtVerdict,
    /// Words of the requested length, when asked for.
    pub words: Option<Vec<Vec<i64>>>,
    pub words_truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellInfo {
    pub digit: Digit,
    pub domain: Interval,
    pub image: Interval,
    pub monotonicity: Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapInfoReport {
    pub map: Value,
    pub kind: MapKind,
    pub well_ordered: bool,
    pub surjective_hint: bool,
    pub finite: bool,
    pub digit_cap: Digit,
    pub truncated: bool,
    pub cells: Vec<CellInfo>,
}

impl Report {
    /// Whether a budget ran out; `--strict` turns this into exit code 4.
    pub fn budget_exhausted(&self) -> bool {
        match self {
            Report::Validity(v) => v.report.budget_exhausted,
            Report::Preimages(p) => p.tree.budget_exhausted,
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Encode(r) => encode_csv(&mut out, r),
            Report::Decode(r) => {
                out.push_str("word,lo,hi,lo_kind,hi_kind,midpoint,length,seed0,seed1\n");
                let h = &r.hull;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    join(&r.word, " "),
                    h.lo(),
                    h.hi(),
                    kind(h.lo_kind()),
                    kind(h.hi_kind()),
                    r.midpoint,
                    r.length,
                    r.seeds[0],
                    r.seeds[1]
                );
            }
            Report::Validity(r) => {
                let rep = &r.report;
                out.push_str("n,sup_length,cylinders,widest\n");
                for l in &rep.levels {
                    let _ = writeln!(out, "{},{},{},{}", l.n, l.sup_length, l.cylinders, join(&l.widest, " "));
                }
                let _ = writeln!(
                    out,
                    "# exact_levels={} nodes_visited={} node_budget={} digit_cap={} digit_truncated={} budget_exhausted={}",
                    rep.exact_levels, rep.nodes_visited, rep.node_budget, rep.digit_cap, rep.digit_truncated, rep.budget_exhausted
                );
                let verdict = serde_json::to_value(&rep.verdict).expect("verdict serializes");
                let _ = writeln!(out, "# verdict {verdict}");
            }
            Report::Orbit(r) => orbit_csv(&mut out, r),
            Report::Preimages(r) => {
                let t = &r.tree;
                out.push_str(&t.to_csv());
                let _ = writeln!(
                    out,
                    "# depth={} digit_cap={} node_budget={} nodes={} digit_truncated={} budget_exhausted={}",
                    t.depth,
                    t.digit_cap,
                    t.node_budget,
                    t.node_count(),
                    t.digit_truncated,
                    t.budget_exhausted
                );
                if let Some(p) = &r.density {
                    density_line(&mut out, "backward", &p.density);
                    density_line(&mut out, "chain", &p.chain_density);
                }
            }
            Report::ShiftCheck(r) => {
                let _ = writeln!(out, "{}", verdict_line(&r.verdict));
                if let Some(words) = &r.words {
                    for w in words {
                        let _ = writeln!(out, "{}", join(w, " "));
                    }
                    if r.words_truncated {
                        out.push_str("# words truncated at the digit cap\n");
                    }
                }
            }
            Report::MapInfo(r) => {
                out.push_str("digit,lo,hi,lo_kind,hi_kind,monotonicity,image_lo,image_hi\n");
                for c in &r.cells {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        c.digit,
                        c.domain.lo(),
                        c.domain.hi(),
                        kind(c.domain.lo_kind()),
                        kind(c.domain.hi_kind()),
                        c.monotonicity.label(),
                        c.image.lo(),
                        c.image.hi()
                    );
                }
                let _ = writeln!(
                    out,
                    "# kind={} type={:?} well_ordered={} surjective_hint={} finite={} digit_cap={} truncated={}",
                    r.map.get("kind").and_then(Value::as_str).unwrap_or("?"),
                    r.kind,
                    r.well_ordered,
                    r.surjective_hint,
                    r.finite,
                    r.digit_cap,
                    r.truncated
                );
            }
        }
        out
    }
}

fn encode_csv(out: &mut String, r: &EncodeReport) {
    let many = r.samples.len() > 1;
    out.push_str(if many { "sample,step,digit,iterate\n" } else { "step,digit,iterate\n" });
    for (i, s) in r.samples.iter().enumerate() {
        let prefix = if many { format!("{i},") } else { String::new() };
        for (k, d) in s.word.digits.iter().enumerate() {
            let _ = writeln!(out, "{prefix}{},{d},{}", k + 1, s.iterates[k]);
        }
        if let WordStatus::Terminated { step } = s.word.status {
            let _ = writeln!(out, "{prefix}TERMINATED,{step},{}", s.iterates[step - 1]);
        }
    }
}

fn orbit_csv(out: &mut String, r: &OrbitReport) {
    let many = r.samples.len() > 1;
    out.push_str(if many { "sample,step,value,digit\n" } else { "step,value,digit\n" });
    for (i, s) in r.samples.iter().enumerate() {
        let prefix = if many { format!("{i},") } else { String::new() };
        for (k, p) in s.orbit.points.iter().enumerate() {
            let d = s.orbit.digits.get(k).map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{prefix}{k},{p},{d}");
        }
    }
    for (i, s) in r.samples.iter().enumerate() {
        let label = if many { format!("sample {i}") } else { "forward".to_string() };
        density_line(out, &label, &s.density);
    }
}

fn density_line(out: &mut String, label: &str, d: &DensityReport) {
    let _ = writeln!(
        out,
        "# {label} eps={} covered={}/{} dense={} gaps={}",
        d.eps,
        d.covered_cells,
        d.total_cells,
        d.dense,
        join(&d.witness_gaps, " ")
    );
}

/// `TRUE`, `FALSE witness v=… w=…` or `UNKNOWN up to …`.
pub fn verdict_line(v: &TtVerdict) -> String {
    match v {
        TtVerdict::True => "TRUE".to_string(),
        TtVerdict::FalseWitness { v, w } => format!("FALSE witness v={} w={}", join(v, ","), join(w, ",")),
        TtVerdict::UnknownUpTo { max_len, unconnected } => {
            let mut s = format!("UNKNOWN up to max_len={max_len}");
            match unconnected {
                Some((v, w)) => {
                    let _ = write!(s, " unconnected v={} w={}", join(v, ","), join(w, ","));
                }
                None => s.push_str(" (every pair connected)"),
            }
            s
        }
    }
}

fn kind(k: EndKind) -> &'static str {
    match k {
        EndKind::Closed => "closed",
        EndKind::Open => "open",
    }
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}
