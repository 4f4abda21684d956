//! File formats: scored-prediction CSV, point CSV, curve and hull JSON,
//! prediction CSV and plot TSV.
//!
//! JSON artifacts store full-precision numbers so they reload bit for bit.
//! Text meant for people or plotting tools uses 12 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decision::{self, slope_serde, OperatingConditions, SlopeRange};
use crate::error::{Error, Result};
use crate::hull::{HullVertex, Provenance, RocchHull};
use crate::hybrid::Classification;
use crate::roc::{ClassLabel, RocCurve, RocPoint, ScoredExample, Threshold};

pub const SCORE_HEADER: [&str; 4] = ["classifier", "example", "label", "score"];
pub const POINT_HEADER: [&str; 3] = ["classifier", "fp", "tp"];
pub const HULL_SCHEMA_VERSION: u32 = 1;

/// Formats like C's `%.12g`.
pub fn fmt12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row of a scored-prediction file. The score's original text is kept
/// so rewriting the file never merges or splits tie groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub line: u64,
    pub classifier_id: String,
    pub example_id: String,
    pub label: ClassLabel,
    pub score: f64,
    pub score_text: String,
    pub weight: Option<f64>,
    pub weight_text: Option<String>,
}

impl ScoreRow {
    pub fn to_example(&self) -> ScoredExample {
        ScoredExample {
            example_id: self.example_id.clone(),
            label: self.label,
            score: self.score,
            weight: self.weight.unwrap_or(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub has_weight: bool,
    pub rows: Vec<ScoreRow>,
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn read_header(rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(csv_error)?;
    Ok(h.iter().map(|s| s.to_ascii_lowercase()).collect())
}

fn parse_f64(line: u64, what: &str, text: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{what} `{text}` is not a number"),
    })
}

impl ScoreFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv_reader(text);
        let header = read_header(&mut rdr)?;
        let has_weight = header.len() == 5 && header[4] == "weight";
        let known = header.len() >= 4 && header[..4] == SCORE_HEADER;
        if !known || !(header.len() == 4 || has_weight) {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "header must be `classifier,example,label,score[,weight]`, got `{}`",
                    header.join(",")
                ),
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            let want = if has_weight { 5 } else { 4 };
            if rec.len() != want {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {want} columns, found {}", rec.len()),
                });
            }
            let fail = |message: String| Error::Parse { line, message };
            let classifier_id = rec[0].to_string();
            let example_id = rec[1].to_string();
            if classifier_id.is_empty() || example_id.is_empty() {
                return Err(fail("empty classifier or example id".into()));
            }
            let label: ClassLabel = rec[2]
                .parse()
                .map_err(|_| fail(format!("label must be `p` or `n`, got `{}`", &rec[2])))?;
            let score_text = rec[3].to_string();
            let score = parse_f64(line, "score", &score_text)?;
            if !score.is_finite() {
                return Err(fail(format!("score `{score_text}` is not finite")));
            }
            let (weight, weight_text) = if has_weight {
                let t = rec[4].to_string();
                let w = parse_f64(line, "weight", &t)?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(fail(format!("weight must be finite and > 0, got `{t}`")));
                }
                (Some(w), Some(t))
            } else {
                (None, None)
            };
            rows.push(ScoreRow {
                line,
                classifier_id,
                example_id,
                label,
                score,
                score_text,
                weight,
                weight_text,
            });
        }
        Ok(ScoreFile { has_weight, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = SCORE_HEADER.to_vec();
        if self.has_weight {
            header.push("weight");
        }
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![
                r.classifier_id.as_str(),
                r.example_id.as_str(),
                r.label.as_str(),
                r.score_text.as_str(),
            ];
            if self.has_weight {
                rec.push(r.weight_text.as_deref().unwrap_or("1"));
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Examples grouped by classifier, in file order within each group.
    pub fn grouped(&self) -> BTreeMap<String, Vec<ScoredExample>> {
        let mut out: BTreeMap<String, Vec<ScoredExample>> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.classifier_id.clone())
                .or_default()
                .push(r.to_example());
        }
        out
    }

    /// Scores per example, with examples in order of first appearance.
    pub fn by_example(&self) -> Vec<(String, BTreeMap<String, f64>)> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut out: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
        for r in &self.rows {
            let i = *index.entry(r.example_id.as_str()).or_insert_with(|| {
                out.push((r.example_id.clone(), BTreeMap::new()));
                out.len() - 1
            });
            out[i].1.insert(r.classifier_id.clone(), r.score);
        }
        out
    }
}

pub fn parse_scores(text: &str) -> Result<BTreeMap<String, Vec<ScoredExample>>> {
    Ok(ScoreFile::parse(text)?.grouped())
}

/// Reads bare classifier points (`classifier,fp,tp`).
pub fn parse_points(text: &str) -> Result<Vec<HullVertex>> {
    let mut rdr = csv_reader(text);
    let header = read_header(&mut rdr)?;
    if header != POINT_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be `classifier,fp,tp`, got `{}`",
                header.join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 columns, found {}", rec.len()),
            });
        }
        let fp = parse_f64(line, "fp", &rec[1])?;
        let tp = parse_f64(line, "tp", &rec[2])?;
        let point = RocPoint::new(fp, tp).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(HullVertex::classifier(&rec[0], point, None));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvesFile {
    pub curves: Vec<RocCurve>,
}

impl CurvesFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curves serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CurvesFile = serde_json::from_str(text)?;
        for c in &f.curves {
            c.validate()?;
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degenerate {
    NeverAlarm,
    AlwaysAlarm,
}

/// One stored hull point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub fp: f64,
    pub tp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Degenerate>,
}

impl VertexRecord {
    fn from_vertex(v: &HullVertex) -> Self {
        let (classifier_id, threshold, degenerate) = match &v.provenance {
            Provenance::NeverAlarm => (None, None, Some(Degenerate::NeverAlarm)),
            Provenance::AlwaysAlarm => (None, None, Some(Degenerate::AlwaysAlarm)),
            Provenance::Classifier {
                classifier_id,
                threshold,
            } => (Some(classifier_id.clone()), *threshold, None),
        };
        VertexRecord {
            fp: v.point.fp,
            tp: v.point.tp,
            classifier_id,
            threshold,
            degenerate,
        }
    }

    fn to_vertex(&self) -> Result<HullVertex> {
        let point = RocPoint::new(self.fp, self.tp)?;
        let provenance = match (&self.degenerate, &self.classifier_id) {
            (Some(Degenerate::NeverAlarm), None) => Provenance::NeverAlarm,
            (Some(Degenerate::AlwaysAlarm), None) => Provenance::AlwaysAlarm,
            (None, Some(id)) => Provenance::Classifier {
                classifier_id: id.clone(),
                threshold: self.threshold,
            },
            _ => {
                return Err(Error::InvalidHull(
                    "each vertex needs exactly one of `classifier_id` or `degenerate`".into(),
                ))
            }
        };
        Ok(HullVertex { point, provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFile {
    pub schema_version: u32,
    pub vertices: Vec<VertexRecord>,
    pub auxiliary: Vec<VertexRecord>,
    #[serde(with = "slope_list")]
    pub slopes: Vec<f64>,
}

mod slope_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::slope_serde;

    #[derive(Serialize, Deserialize)]
    struct Slope(#[serde(with = "slope_serde")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| Slope(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Slope>::deserialize(d)?
            .into_iter()
            .map(|s| s.0)
            .collect())
    }
}

impl HullFile {
    pub fn from_hull(hull: &RocchHull) -> Self {
        HullFile {
            schema_version: HULL_SCHEMA_VERSION,
            vertices: hull
                .vertices()
                .iter()
                .map(VertexRecord::from_vertex)
                .collect(),
            auxiliary: hull
                .auxiliary()
                .iter()
                .map(VertexRecord::from_vertex)
                .collect(),
            slopes: hull.slopes().to_vec(),
        }
    }

    /// Rebuilds the hull, checking every invariant and the stored slopes.
    pub fn to_hull(&self) -> Result<RocchHull> {
        if self.schema_version != HULL_SCHEMA_VERSION {
            return Err(Error::InvalidHull(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let vertices = self
            .vertices
            .iter()
            .map(VertexRecord::to_vertex)
            .collect::<Result<Vec<_>>>()?;
        let auxiliary = self
            .auxiliary
            .iter()
            .map(VertexRecord::to_vertex)
            .collect::<Result<Vec<_>>>()?;
        let hull = RocchHull::from_parts(vertices, auxiliary)?;
        let slopes = hull.slopes();
        let agree = slopes.len() == self.slopes.len()
            && slopes
                .iter()
                .zip(&self.slopes)
                .all(|(a, b)| a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        if !agree {
            return Err(Error::InvalidHull(
                "stored slopes disagree with the vertices".into(),
            ));
        }
        Ok(hull)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hull serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save_hull(hull: &RocchHull) -> String {
    HullFile::from_hull(hull).to_json()
}

pub fn load_hull(text: &str) -> Result<RocchHull> {
    HullFile::from_json(text)?.to_hull()
}

/// What a loaded input file turned out to be.
#[derive(Debug, Clone)]
pub enum Artifact {
    Scores(ScoreFile),
    Points(Vec<HullVertex>),
    Curves(CurvesFile),
    Hull(RocchHull),
}

/// Sniffs the format: JSON objects with `vertices` are hulls, with
/// `curves` are curve files; CSV with a `classifier,fp,tp` header is a
/// point list, anything else CSV is a score file.
pub fn load_artifact(text: &str) -> Result<Artifact> {
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("vertices").is_some() {
            return Ok(Artifact::Hull(load_hull(text)?));
        }
        if v.get("curves").is_some() {
            return Ok(Artifact::Curves(CurvesFile::from_json(text)?));
        }
        return Err(Error::InvalidInput(
            "JSON input is neither a curve file nor a hull file".into(),
        ));
    }
    let first = text.lines().next().unwrap_or_default();
    let cols: Vec<String> = first
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    if cols == POINT_HEADER {
        Ok(Artifact::Points(parse_points(text)?))
    } else {
        Ok(Artifact::Scores(ScoreFile::parse(text)?))
    }
}

/// Prediction file of a batch hybrid run.
pub fn predictions_csv(rows: &[(String, Classification)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["example_id", "prediction", "component_used", "coin_outcome"])
        .expect("in-memory write");
    for (id, c) in rows {
        w.write_record([
            id.as_str(),
            &c.prediction.to_string(),
            &c.component,
            &c.coin.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Table-style dominator listing, grouped by classifier.
pub fn dominators_text(hull: &RocchHull) -> String {
    let table = decision::dominator_table(hull);
    let mut out = String::from("slope range\tclassifier\tvertices\n");
    for g in table.by_classifier() {
        let mut vs: Vec<&HullVertex> = g.vertices.iter().collect();
        vs.sort_by(|a, b| a.point.fp.total_cmp(&b.point.fp));
        let verts: Vec<String> = vs
            .iter()
            .map(|v| format!("({}, {})", fmt12(v.point.fp), fmt12(v.point.tp)))
            .collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            fmt_range(&g.range),
            g.classifier_id.as_deref().unwrap_or("trivial"),
            verts.join(" ")
        );
    }
    out
}

pub fn dominators_csv(hull: &RocchHull) -> String {
    let table = decision::dominator_table(hull);
    let mut out = String::from("slope_lo,slope_hi,classifier,fp,tp,threshold\n");
    for row in &table.rows {
        let v = &row.vertex;
        let (id, thr) = match &v.provenance {
            Provenance::Classifier {
                classifier_id,
                threshold,
            } => (
                classifier_id.clone(),
                threshold.map(fmt_threshold).unwrap_or_default(),
            ),
            p => (p.label(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt12(row.range.lo),
            fmt12(row.range.hi),
            id,
            fmt12(v.point.fp),
            fmt12(v.point.tp),
            thr
        );
    }
    out
}

/// `[lo, hi]`, or `[lo, inf)` when unbounded, with 12 significant digits.
pub fn fmt_range(r: &SlopeRange) -> String {
    if r.hi.is_infinite() {
        format!("[{}, inf)", fmt12(r.lo))
    } else {
        format!("[{}, {}]", fmt12(r.lo), fmt12(r.hi))
    }
}

pub fn fmt_threshold(t: Threshold) -> String {
    match t {
        Threshold::Score(s) => fmt12(s),
        other => other.to_string(),
    }
}

/// Plot data: one series per curve, the hull, and an iso-performance line
/// through the optimal vertex for each set of conditions, clipped to the
/// unit square.
pub fn plot_tsv(
    curves: &[RocCurve],
    hull: Option<&RocchHull>,
    conditions: &[OperatingConditions],
) -> String {
    let mut out = String::from("series\tfp\ttp\n");
    let mut row = |series: &str, p: RocPoint| {
        let _ = writeln!(out, "{series}\t{}\t{}", fmt12(p.fp), fmt12(p.tp));
    };
    for c in curves {
        for p in c.rates() {
            row(&c.classifier_id, p);
        }
    }
    if let Some(h) = hull {
        for p in h.vertex_points() {
            row("hull", p);
        }
        for cond in conditions {
            let m = cond.iso_slope();
            let through = decision::select_min_cost(h, cond).point;
            let name = format!("iso m={}", fmt12(m));
            for p in iso_segment(through, m) {
                row(&name, p);
            }
        }
    }
    out
}

/// The part of the line through `p` with slope `m` inside the unit square.
fn iso_segment(p: RocPoint, m: f64) -> [RocPoint; 2] {
    let at = |fp: f64| p.tp + m * (fp - p.fp);
    let inv = |tp: f64| p.fp + (tp - p.tp) / m;
    let lo_fp = if at(0.0) >= 0.0 { 0.0 } else { inv(0.0) };
    let hi_fp = if at(1.0) <= 1.0 { 1.0 } else { inv(1.0) };
    [
        RocPoint {
            fp: lo_fp,
            tp: at(lo_fp).clamp(0.0, 1.0),
        },
        RocPoint {
            fp: hi_fp,
            tp: at(hi_fp).clamp(0.0, 1.0),
        },
    ]
}
