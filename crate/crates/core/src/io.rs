//! File formats: problem and bundle JSON, run and figure CSV, report JSON.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly. Non-finite values become `null` in JSON.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::constructions::{ConstructionBundle, ConstructionSpec, RegimeInterval};
use crate::error::{LabError, Result};
use crate::linalg::Matrix;
use crate::quadratic::{FiniteSumProblem, QuadraticComponent};
use crate::shuffle::RunRecord;
use crate::verify::{GapComparison, TrajectoryFigure};

/// `+∞` written as `null` and read back from `null`, for open interval
/// ends and unbounded margins.
pub mod infinity_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON with every float at 17 significant digits.
struct SigFigFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for SigFigFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Pretty JSON document with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, SigFigFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| LabError::Serialization(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| LabError::Serialization(e.to_string()))
}

fn from_json<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| LabError::Serialization(e.to_string()))
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct MetaDoc {
    mu: f64,
    #[serde(rename = "L")]
    ell: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "P")]
    p: f64,
    construction: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    d: usize,
    n: usize,
    components: Vec<ComponentDoc>,
    meta: MetaDoc,
}

pub fn problem_to_json(problem: &FiniteSumProblem) -> Result<String> {
    let doc = ProblemDoc {
        d: problem.dim(),
        n: problem.n(),
        components: problem
            .components()
            .iter()
            .map(|c| ComponentDoc {
                a: c.hessian.to_rows(),
                b: c.linear.clone(),
                c: c.offset,
            })
            .collect(),
        meta: MetaDoc {
            mu: problem.mu(),
            ell: problem.ell(),
            g: problem.grad_error_g(),
            p: problem.grad_error_p(),
            construction: problem.construction().map(str::to_string),
        },
    };
    to_json(&doc)
}

/// Parses a problem document; the declared mu and L are validated against
/// the spectrum, G* and the minimizer are recomputed.
pub fn problem_from_json(text: &str) -> Result<FiniteSumProblem> {
    let doc: ProblemDoc = from_json(text)?;
    if doc.components.len() != doc.n {
        return Err(LabError::Serialization(format!(
            "n = {} but {} components",
            doc.n,
            doc.components.len()
        )));
    }
    let mut comps = Vec::with_capacity(doc.n);
    for (i, c) in doc.components.into_iter().enumerate() {
        let a = Matrix::try_from_rows(&c.a)
            .ok_or_else(|| LabError::Serialization(format!("component {i}: A is not square")))?;
        if a.dim() != doc.d || c.b.len() != doc.d {
            return Err(LabError::DimensionMismatch {
                expected: doc.d,
                got: c.b.len().min(a.dim()),
            });
        }
        comps.push(QuadraticComponent {
            hessian: a,
            linear: c.b,
            offset: c.c,
        });
    }
    let mut problem = FiniteSumProblem::new(comps)?
        .with_constants(doc.meta.mu, doc.meta.ell)?
        .with_grad_error(doc.meta.g, doc.meta.p);
    if let Some(id) = doc.meta.construction {
        problem = problem.with_construction(id);
    }
    Ok(problem)
}

#[derive(Serialize)]
struct BlockDoc<'a> {
    label: &'a str,
    offset: usize,
    d: usize,
    x0: &'a [f64],
}

#[derive(Serialize)]
struct ConstantDoc<'a> {
    name: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct BundleDoc<'a> {
    spec: &'a ConstructionSpec,
    d: usize,
    n: usize,
    x0: &'a [f64],
    analytic_lower_bound: f64,
    regimes: &'a [RegimeInterval],
    per_dimension: Vec<BlockDoc<'a>>,
    constants: Vec<ConstantDoc<'a>>,
    notes: &'a [String],
}

/// `bundle.json`: spec, x0, regime intervals (open right end as null),
/// per-dimension blocks and bound constants. The problem itself goes to its
/// own document.
pub fn bundle_to_json(bundle: &ConstructionBundle) -> Result<String> {
    to_json(&BundleDoc {
        spec: &bundle.spec,
        d: bundle.problem.dim(),
        n: bundle.problem.n(),
        x0: &bundle.x0,
        analytic_lower_bound: bundle.analytic_lower_bound,
        regimes: &bundle.regimes,
        per_dimension: bundle
            .per_dimension
            .iter()
            .map(|b| BlockDoc {
                label: &b.label,
                offset: b.offset,
                d: b.problem.dim(),
                x0: &b.x0,
            })
            .collect(),
        constants: bundle
            .constants
            .iter()
            .map(|(name, value)| ConstantDoc {
                name,
                value: *value,
            })
            .collect(),
        notes: &bundle.notes,
    })
}

/// `epoch,gap,x_1..x_d`, one row per epoch start; the last row is the final
/// iterate.
pub fn run_record_to_csv(record: &RunRecord) -> String {
    let d = record.final_iterate.len();
    let mut out = String::from("epoch,gap");
    for j in 1..=d {
        let _ = write!(out, ",x_{j}");
    }
    out.push('\n');
    for (k, (x, gap)) in record.epoch_starts.iter().zip(&record.gaps).enumerate() {
        let _ = write!(out, "{k},{}", fmt_f64(*gap));
        for v in x {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses the output of [`run_record_to_csv`] into `(epoch, gap, x)` rows.
pub fn parse_run_csv(text: &str) -> Result<Vec<(usize, f64, Vec<f64>)>> {
    let bad = |line: usize, what: &str| LabError::Serialization(format!("line {line}: {what}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let cols = header.split(',').count();
    if !header.starts_with("epoch,gap") {
        return Err(bad(1, "header must start with epoch,gap"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(bad(i + 2, "wrong field count"));
            }
            let epoch = fields[0].parse().map_err(|_| bad(i + 2, "epoch"))?;
            let nums: std::result::Result<Vec<f64>, _> =
                fields[1..].iter().map(|f| f.parse::<f64>()).collect();
            let nums = nums.map_err(|_| bad(i + 2, "number"))?;
            Ok((epoch, nums[0], nums[1..].to_vec()))
        })
        .collect()
}

/// `K,strategy,mean_gap,q1,q3` preceded by a `#` metadata line.
pub fn gap_comparison_to_csv(fig: &GapComparison) -> String {
    let s = &fig.spec;
    let ks: Vec<String> = s.k_list.iter().map(|k| k.to_string()).collect();
    let mut out = format!(
        "# gap-comparison mu={} L={} G={} n={} seeds={} seed={} K_list={}\n",
        fmt_f64(s.mu),
        fmt_f64(s.ell),
        fmt_f64(s.g),
        s.n,
        s.seeds,
        s.seed,
        ks.join(";")
    );
    out.push_str("K,strategy,mean_gap,q1,q3\n");
    for r in &fig.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            r.strategy,
            fmt_f64(r.mean_gap),
            fmt_f64(r.q1),
            fmt_f64(r.q3)
        );
    }
    let _ = writeln!(
        out,
        "# summary igd_over_rr_at_smallest_K={} rr_wr_within_iqr={} rr_wr_bands_overlap={} herding_below_rr={}",
        fmt_f64(fig.igd_over_rr_at_smallest_k),
        fig.rr_wr_within_iqr,
        fig.rr_wr_bands_overlap,
        fig.herding_below_rr
    );
    out
}

/// `epoch,step,x,y` for every iterate, with `#` metadata and summary lines.
pub fn trajectory_to_csv(fig: &TrajectoryFigure) -> String {
    let s = &fig.spec;
    let start = match s.start {
        crate::verify::TrajectoryStart::Origin => "origin",
        crate::verify::TrajectoryStart::Polygon => "polygon",
    };
    let mut out = format!(
        "# trajectory mu={} L={} G={} n={} K={} eta={} start={start}\n",
        fmt_f64(s.mu),
        fmt_f64(s.ell),
        fmt_f64(s.g),
        s.n,
        s.epochs,
        fmt_f64(fig.eta)
    );
    out.push_str("epoch,step,x,y\n");
    for (i, p) in fig.points.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i / s.n,
            i % s.n,
            fmt_f64(p[0]),
            fmt_f64(p[1])
        );
    }
    let _ = writeln!(
        out,
        "# summary final_radius={} drifts_outward={} closure_error={} rotation_error={}",
        fmt_f64(fig.final_radius),
        fig.drifts_outward,
        fmt_f64(fig.closure_error),
        fmt_f64(fig.rotation_error)
    );
    out
}
