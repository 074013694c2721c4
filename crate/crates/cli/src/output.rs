//! JSON and CSV renderings of the command reports.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that repeated runs produce identical bytes.

use bi_core::connection::{ConnectionMatrix, Path};
use bi_core::linalg::format_rational;
use bi_core::relations::{PairResult, PairStatus, RelationReport};
use bi_core::spectral::{EigenBasis, TridiagonalAction};
use bi_core::SubsetLabel;
use nalgebra::DMatrix;
use serde::ser::Serializer;
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// A rendered report: one JSON document and one CSV table.
pub struct Report {
    json: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Clone, Copy)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn fmt(x: f64) -> String {
    // -0.0 and 0.0 print the same
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<Num>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| Num(m[(r, c)])).collect())
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn strings<I: IntoIterator<Item = T>, T: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

#[derive(Serialize)]
#[serde(untagged)]
enum StatusJson {
    Zero(&'static str),
    Violation {
        level: usize,
        entry: (usize, usize, String),
    },
}

#[derive(Serialize)]
struct PairJson {
    #[serde(rename = "A")]
    a: SubsetLabel,
    #[serde(rename = "B")]
    b: SubsetLabel,
    status: StatusJson,
}

impl From<&PairResult> for PairJson {
    fn from(p: &PairResult) -> Self {
        let status = match &p.status {
            PairStatus::Zero => StatusJson::Zero("zero"),
            PairStatus::Violation {
                level,
                row,
                col,
                value,
            } => StatusJson::Violation {
                level: *level,
                entry: (*row, *col, format_rational(value)),
            },
        };
        PairJson {
            a: p.a,
            b: p.b,
            status,
        }
    }
}

#[derive(Serialize)]
struct VerifyJson {
    n: usize,
    max_level: usize,
    pairs: Vec<PairJson>,
    centrality: Vec<PairJson>,
    all_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

#[derive(Serialize)]
struct StateJson {
    labels: Vec<Num>,
    vector: Vec<Num>,
}

#[derive(Serialize)]
struct SpectrumJson {
    chain: Vec<SubsetLabel>,
    permutation: Vec<usize>,
    level: usize,
    dimension: usize,
    sign_convention: &'static str,
    states: Vec<StateJson>,
}

#[derive(Serialize)]
struct TriBlockJson {
    common_labels: Vec<Num>,
    indices: Vec<usize>,
    keys: Vec<Num>,
    diagonal: Vec<Num>,
    upper: Vec<Num>,
    lower: Vec<Num>,
}

#[derive(Serialize)]
struct TridiagJson {
    chain: Vec<usize>,
    level: usize,
    op: SubsetLabel,
    sort_key: SubsetLabel,
    off_band_residual: Num,
    norm: Num,
    blocks: Vec<TriBlockJson>,
}

#[derive(Serialize)]
struct StepJson {
    position: usize,
    before: Vec<usize>,
    after: Vec<usize>,
    change: Option<(SubsetLabel, SubsetLabel)>,
}

#[derive(Serialize)]
struct CcBlockJson {
    common_labels: Vec<Num>,
    source_indices: Vec<usize>,
    target_indices: Vec<usize>,
    matrix: Vec<Vec<Num>>,
}

#[derive(Serialize)]
struct CcJson {
    source: Vec<usize>,
    target: Vec<usize>,
    level: usize,
    steps: Vec<StepJson>,
    orthogonality_residual: Num,
    off_block_residual: Num,
    recurrence_residual: Num,
    composition_residual: Num,
    blocks: Vec<CcBlockJson>,
    matrix: Vec<Vec<Num>>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json.clone(),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
            }
        }
    }

    pub fn error(msg: &str) -> Self {
        #[derive(Serialize)]
        struct ErrorJson<'a> {
            error: &'a str,
        }
        Report {
            json: to_json(&ErrorJson { error: msg }),
            header: vec!["error".into()],
            rows: vec![vec![msg.into()]],
        }
    }

    pub fn verify(report: &RelationReport, timing: bool) -> Self {
        let json = VerifyJson {
            n: report.n,
            max_level: report.max_level,
            pairs: report.pairs.iter().map(PairJson::from).collect(),
            centrality: report.centrality.iter().map(PairJson::from).collect(),
            all_zero: report.passes(),
            elapsed_ms: timing.then_some(report.elapsed.as_millis()),
        };
        let row = |kind: &str, p: &PairResult| {
            let mut r = vec![kind.to_string(), p.a.to_string(), p.b.to_string()];
            match &p.status {
                PairStatus::Zero => r.extend(strings(["zero", "", "", "", ""])),
                PairStatus::Violation {
                    level,
                    row,
                    col,
                    value,
                } => r.extend([
                    "violation".to_string(),
                    level.to_string(),
                    row.to_string(),
                    col.to_string(),
                    format_rational(value),
                ]),
            }
            r
        };
        let rows = report
            .pairs
            .iter()
            .map(|p| row("relation", p))
            .chain(report.centrality.iter().map(|p| row("centrality", p)))
            .collect();
        Report {
            json: to_json(&json),
            header: strings(["kind", "A", "B", "status", "level", "row", "col", "value"]),
            rows,
        }
    }

    pub fn spectrum(basis: &EigenBasis) -> Self {
        let subsets = basis.label_subsets();
        let states: Vec<StateJson> = (0..basis.dim())
            .map(|k| StateJson {
                labels: nums(&basis.labels[k]),
                vector: basis.vectors.column(k).iter().copied().map(Num).collect(),
            })
            .collect();
        let json = SpectrumJson {
            chain: subsets.clone(),
            permutation: basis.chain.perm().to_vec(),
            level: basis.level,
            dimension: basis.dim(),
            sign_convention: "largest_coordinate_positive",
            states,
        };
        let mut header = vec!["index".to_string()];
        header.extend(subsets.iter().map(|a| format!("Gamma{a}")));
        header.extend((0..basis.dim()).map(|i| format!("v{i}")));
        let rows = (0..basis.dim())
            .map(|k| {
                let mut r = vec![k.to_string()];
                r.extend(basis.labels[k].iter().map(|&x| fmt(x)));
                r.extend(basis.vectors.column(k).iter().map(|&x| fmt(x)));
                r
            })
            .collect();
        Report {
            json: to_json(&json),
            header,
            rows,
        }
    }

    pub fn tridiag(basis: &EigenBasis, action: &TridiagonalAction) -> Self {
        let subsets = basis.label_subsets();
        let json = TridiagJson {
            chain: basis.chain.perm().to_vec(),
            level: basis.level,
            op: action.op,
            sort_key: subsets[action.sort_key],
            off_band_residual: Num(action.off_band_residual),
            norm: Num(action.norm),
            blocks: action
                .blocks
                .iter()
                .map(|b| TriBlockJson {
                    common_labels: nums(&b.common_labels),
                    indices: b.indices.clone(),
                    keys: nums(&b.keys),
                    diagonal: nums(&b.diagonal),
                    upper: nums(&b.upper),
                    lower: nums(&b.lower),
                })
                .collect(),
        };
        let mut rows = Vec::new();
        for (bi, b) in action.blocks.iter().enumerate() {
            for (p, &idx) in b.indices.iter().enumerate() {
                rows.push(vec![
                    bi.to_string(),
                    idx.to_string(),
                    fmt(b.keys[p]),
                    fmt(b.diagonal[p]),
                    b.upper.get(p).map(|&x| fmt(x)).unwrap_or_default(),
                    b.lower.get(p).map(|&x| fmt(x)).unwrap_or_default(),
                ]);
            }
        }
        Report {
            json: to_json(&json),
            header: strings(["block", "index", "key", "diagonal", "upper", "lower"]),
            rows,
        }
    }

    pub fn cc(cc: &ConnectionMatrix, path: &Path, recurrence: f64, composition: f64) -> Self {
        let json = CcJson {
            source: cc.source.clone(),
            target: cc.target.clone(),
            level: cc.level,
            steps: path
                .steps
                .iter()
                .map(|s| StepJson {
                    position: s.position,
                    before: s.before.perm().to_vec(),
                    after: s.after.perm().to_vec(),
                    change: s.change,
                })
                .collect(),
            orthogonality_residual: Num(cc.orthogonality_residual),
            off_block_residual: Num(cc.off_block_residual),
            recurrence_residual: Num(recurrence),
            composition_residual: Num(composition),
            blocks: cc
                .blocks
                .iter()
                .map(|b| CcBlockJson {
                    common_labels: nums(&b.common_labels),
                    source_indices: b.source_indices.clone(),
                    target_indices: b.target_indices.clone(),
                    matrix: rows_of(&b.matrix),
                })
                .collect(),
            matrix: rows_of(&cc.assembled),
        };
        let m = &cc.assembled;
        let rows = (0..m.nrows())
            .flat_map(|r| {
                (0..m.ncols()).map(move |c| vec![r.to_string(), c.to_string(), fmt(m[(r, c)])])
            })
            .collect();
        Report {
            json: to_json(&json),
            header: strings(["target", "source", "value"]),
            rows,
        }
    }
}
