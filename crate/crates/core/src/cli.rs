//! Command-line surface: argument parsing, the JSON output envelope, CSV and
//! plain-text rendering, and the exit-code contract
//! (0 success, 1 usage, 2 mathematically invalid input, 3 resource exhaustion).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{Integer, Natural};
use crate::iwasawa::{self, LambdaReport, SelmerReport};
use crate::qfield::{PrimeKind, QuadElem, QuadField};
use crate::twistlab::{self, ScanItem, Violation};
use crate::{dyadic, Config, Error, Result};

pub const SCHEMA_VERSION: &str = "1.0";
pub const CSV_HEADER: [&str; 7] = [
    "R",
    "valid",
    "s_inf",
    "lambda_F",
    "lambda_Fprime",
    "lambda_J",
    "case",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Scan candidates handed to the worker pool at a time.
const SCAN_CHUNK: usize = 512;

#[derive(Debug, Parser)]
#[command(
    name = "quadtwist",
    version,
    about = "Splitting counts, lambda-invariants and Selmer coranks of quadratic twists over Q(sqrt(-q))"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit a JSON document (scan: one JSON record per line).
    #[arg(long, global = true)]
    pub json: bool,
    /// Emit CSV rows (lambda, classify and scan).
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Largest 2-adic precision in bits.
    #[arg(long, global = true, value_name = "BITS")]
    pub precision_cap: Option<u32>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// s_inf(R), lambda-invariants and Selmer coranks.
    Lambda {
        #[arg(long)]
        q: u64,
        #[arg(long = "R", value_name = "R", allow_hyphen_values = true)]
        r: TwistArg,
    },
    /// Every squarefree rational twist with |R| <= rmax.
    Scan {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        rmax: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Rank-one case of a rational twist.
    Classify {
        #[arg(long)]
        q: u64,
        #[arg(long = "R", value_name = "R", allow_hyphen_values = true)]
        r: TwistArg,
    },
    /// Kummer generators for sqrt(-q) R, with an independent check.
    Witness {
        #[arg(long)]
        q: u64,
        #[arg(long = "R", value_name = "R", allow_hyphen_values = true)]
        r: TwistArg,
    },
    /// Decomposition of a rational prime in K and in K_inf.
    Split {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        prime: Natural,
    },
    /// Order of the ray class group modulo (p*)^2.
    Rayclass {
        #[arg(long)]
        q: u64,
    },
    /// Class number of Q(sqrt(-q)).
    Classgroup {
        #[arg(long)]
        q: u64,
    },
    /// Norm surjectivity 1 + 2^m O -> 1 + 2^m Z_2 for an unramified extension.
    VerifyNorm {
        #[arg(long)]
        deg: usize,
        #[arg(long)]
        m: u32,
        /// Precision in bits; defaults to m + 6.
        #[arg(long)]
        prec: Option<u32>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lambda { .. } => "lambda",
            Command::Scan { .. } => "scan",
            Command::Classify { .. } => "classify",
            Command::Witness { .. } => "witness",
            Command::Split { .. } => "split",
            Command::Rayclass { .. } => "rayclass",
            Command::Classgroup { .. } => "classgroup",
            Command::VerifyNorm { .. } => "verify-norm",
        }
    }
}

/// A twisting element as typed: `741`, `-3`, `1+2*sqrt(-7)` or `(1+3*sqrt(-7))/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistArg {
    /// Numerator `a + b sqrt(-q)` over `denominator`.
    pub a: Integer,
    pub b: Integer,
    pub denominator: u32,
    /// `q` named inside `sqrt(-q)`, if any.
    pub q: Option<u64>,
}

impl TwistArg {
    pub fn rational(&self) -> Option<Integer> {
        (self.b.is_zero() && self.denominator == 1).then(|| self.a.clone())
    }

    pub fn to_elem(&self, field: &QuadField) -> Result<QuadElem> {
        if let Some(q) = self.q {
            if q != field.q() {
                return Err(Error::InvalidInput(format!(
                    "R mentions sqrt(-{q}) but q = {}",
                    field.q()
                )));
            }
        }
        let (a, b) = if self.denominator == 1 {
            (&self.a * 2, &self.b * 2)
        } else {
            (self.a.clone(), self.b.clone())
        };
        QuadElem::from_halves(field.q(), a, b)
    }
}

impl FromStr for TwistArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad =
            || format!("cannot parse {s:?}; expected an integer, a+b*sqrt(-q) or (a+b*sqrt(-q))/2");
        let (body, denominator) = match compact.strip_suffix("/2") {
            Some(inner) => {
                let inner = inner
                    .strip_prefix('(')
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(bad)?;
                (inner.to_string(), 2)
            }
            None => (compact.clone(), 1),
        };
        let Some(pos) = body.find("sqrt(-") else {
            let a = BigInt::from_str(&body).map_err(|_| bad())?;
            if denominator == 2 {
                return Err(bad());
            }
            return Ok(TwistArg {
                a,
                b: Integer::zero(),
                denominator,
                q: None,
            });
        };
        let tail = &body[pos + "sqrt(-".len()..];
        let close = tail.find(')').ok_or_else(bad)?;
        let q: u64 = tail[..close].parse().map_err(|_| bad())?;
        if close + 1 != tail.len() {
            return Err(bad());
        }
        // head: "a+b*", "a-b*", "b*", "a+", "a-", "-", ""
        let head = &body[..pos];
        let (a_str, b) = if let Some(h) = head.strip_suffix('*') {
            let i = h.rfind(['+', '-']).filter(|&i| i > 0).unwrap_or(0);
            let b_str = &h[i..];
            (
                &h[..i],
                BigInt::from_str(b_str.strip_prefix('+').unwrap_or(b_str)).map_err(|_| bad())?,
            )
        } else if let Some(h) = head.strip_suffix('-') {
            (h, BigInt::from(-1))
        } else {
            (head.strip_suffix('+').unwrap_or(head), BigInt::from(1))
        };
        let a = if a_str.is_empty() {
            Integer::zero()
        } else {
            BigInt::from_str(a_str).map_err(|_| bad())?
        };
        Ok(TwistArg {
            a,
            b,
            denominator,
            q: Some(q),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest 2-adic precision (bits) any embedding needed.
    pub precision_used: u32,
    pub precision_cap: u32,
    pub factor_trial_bound: u64,
    pub factor_rho_iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
    pub exit_code: i32,
}

/// Envelope shared by every non-streaming command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub schema_version: String,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub diagnostics: Diagnostics,
    pub error: Option<ErrorReport>,
}

impl OutputDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("output document serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(EXIT_OK, |e| e.exit_code)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_resource() {
        EXIT_RESOURCE
    } else {
        EXIT_INVALID
    }
}

fn error_report(err: &Error) -> ErrorReport {
    let violations = match err {
        Error::InvalidTwist(v) => v.clone(),
        _ => Vec::new(),
    };
    ErrorReport {
        kind: err.kind().into(),
        message: err.to_string(),
        violations,
        exit_code: exit_code(err),
    }
}

fn diagnostics(cfg: &Config, precision_used: u32) -> Diagnostics {
    Diagnostics {
        precision_used,
        precision_cap: cfg.precision_cap,
        factor_trial_bound: cfg.factor.trial_bound,
        factor_rho_iterations: cfg.factor.rho_iterations,
    }
}

/// Result of one non-streaming command: the envelope plus its plain-text form.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: OutputDocument,
    pub text: String,
    /// Scan-format rows, for the commands that have one.
    pub rows: Vec<ScanRow>,
}

impl Outcome {
    fn ok(command: &str, inputs: Value, results: Value, diag: Diagnostics, text: String) -> Self {
        let document = OutputDocument {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            inputs,
            results,
            diagnostics: diag,
            error: None,
        };
        Outcome {
            document,
            text,
            rows: Vec::new(),
        }
    }

    fn failed(command: &str, inputs: Value, err: &Error, cfg: &Config) -> Self {
        let report = error_report(err);
        let text = format!("error: {}", report.message);
        let document = OutputDocument {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            inputs,
            results: Value::Null,
            diagnostics: diagnostics(cfg, 0),
            error: Some(report),
        };
        Outcome {
            document,
            text,
            rows: Vec::new(),
        }
    }
}

fn twist_inputs(q: u64, r: &TwistArg) -> Value {
    json!({ "q": q, "R": twist_repr(r) })
}

/// `R` echoed in the element wire form, over the denominator 2.
fn twist_repr(r: &TwistArg) -> Value {
    let scale = 2 / r.denominator;
    json!({ "a": (&r.a * scale).to_string(), "b": (&r.b * scale).to_string(), "denominator": 2 })
}

fn label<T: Serialize>(x: &T) -> String {
    to_value(x).as_str().unwrap_or_default().to_string()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn finish(command: &str, inputs: Value, cfg: &Config, r: Result<Outcome>) -> Outcome {
    r.unwrap_or_else(|e| Outcome::failed(command, inputs, &e, cfg))
}

/// `lambda`: full splitting table, lambda-invariants and Selmer coranks.
pub fn cmd_lambda(q: u64, r: &TwistArg, cfg: &Config) -> Outcome {
    let inputs = twist_inputs(q, r);
    finish(
        "lambda",
        inputs.clone(),
        cfg,
        (|| {
            let field = QuadField::new(q)?;
            let elem = r.to_elem(&field)?;
            let report = iwasawa::lambda_invariants(&field, &elem, cfg)?;
            let selmer = SelmerReport::from_lambda(&report);
            let identity = iwasawa::rank_identity_check(&report).ok();
            let text = render_lambda(&report, &selmer);
            let case = match r.rational() {
                Some(n) => twistlab::classify_rank_one(&field, &n, cfg)?
                    .case
                    .as_str()
                    .to_string(),
                None => String::new(),
            };
            let row = ScanRow::from_report(&elem, &report, &case);
            let results = json!({
                "lambda": to_value(&report),
                "selmer": to_value(&selmer),
                "rank_identity": identity,
            });
            let mut out = Outcome::ok(
                "lambda",
                inputs,
                results,
                diagnostics(cfg, report.max_precision()),
                text,
            );
            out.rows.push(row);
            Ok(out)
        })(),
    )
}

fn render_lambda(report: &LambdaReport, selmer: &SelmerReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "K = Q(sqrt(-{})), R = {}  (q mod 16 = {})",
        report.q, report.r, report.q_mod_16
    );
    let _ = writeln!(
        s,
        "{:<28} {:<28} {:>4} {:>6} {:>6}",
        "prime", "generator of prime^h", "ord", "count", "bits"
    );
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{:<28} {:<28} {:>4} {:>6} {:>6}",
            e.prime.to_string(),
            e.generator.to_string(),
            e.ord,
            e.count,
            e.precision
        );
    }
    let opt = |v: &Option<Natural>| {
        v.as_ref()
            .map_or("undetermined".to_string(), |v| v.to_string())
    };
    let _ = writeln!(s, "s_inf       = {}", report.s_inf);
    let _ = writeln!(s, "lambda_F    = {}", report.lambda_f);
    let _ = writeln!(s, "lambda_F'   = {}", opt(&report.lambda_fprime));
    let _ = writeln!(s, "lambda_J    = {}", opt(&report.lambda_j));
    let _ = writeln!(
        s,
        "corank_F_inf = {}   [{}]",
        selmer.corank_f_inf, selmer.identity_f
    );
    let _ = write!(s, "corank_J_inf = {}", opt(&selmer.corank_j_inf));
    if let Some(id) = &selmer.identity_j {
        let _ = write!(s, "   [{id}]");
    }
    s
}

/// `classify`: rank-one case of a rational twist.
pub fn cmd_classify(q: u64, r: &TwistArg, cfg: &Config) -> Outcome {
    let inputs = twist_inputs(q, r);
    finish(
        "classify",
        inputs.clone(),
        cfg,
        (|| {
            let field = QuadField::new(q)?;
            let n = r.rational().ok_or_else(|| {
                Error::InvalidInput("the classifier takes a rational integer R".into())
            })?;
            let item = twistlab::scan_item(&field, &n, cfg)?;
            let c = &item.case;
            let mut text = format!("q = {q}, R = {n}: {}", c.case);
            if let Some(reason) = &c.reason {
                let _ = write!(text, " ({reason})");
            }
            if let Some(cons) = &c.consequences {
                let _ = write!(
                    text,
                    "\n  Sel(F_inf) corank {}, base Selmer finite: {}, layers: {}, L-value: {}",
                    cons.selmer_f_inf_corank,
                    cons.selmer_base_finite,
                    label(&cons.layer_corank),
                    label(&cons.l_value)
                );
            }
            let precision = item.lambda.as_ref().map_or(0, |l| l.max_precision());
            let row = ScanRow::from_item(&item);
            let mut out = Outcome::ok(
                "classify",
                inputs,
                to_value(c),
                diagnostics(cfg, precision),
                text,
            );
            out.rows.push(row);
            Ok(out)
        })(),
    )
}

/// `witness`: Kummer generators and their verification.
pub fn cmd_witness(q: u64, r: &TwistArg, cfg: &Config) -> Outcome {
    let inputs = twist_inputs(q, r);
    finish(
        "witness",
        inputs.clone(),
        cfg,
        (|| {
            let field = QuadField::new(q)?;
            let elem = r.to_elem(&field)?;
            let w = twistlab::construct_witnesses(&field, &elem, cfg)?;
            let check = twistlab::verify_witnesses(&field, &elem, &w, cfg)?;
            let mut text = format!("h' = {}\n", w.h_prime);
            for (i, (a, p)) in w.alphas.iter().zip(&w.supports).enumerate() {
                let _ = writeln!(text, "alpha_{} = {a}   support {p}", i + 1);
            }
            let _ = write!(
                text,
                "verification: {}",
                if check.passed() { "passed" } else { "FAILED" }
            );
            for f in &check.failures {
                let _ = write!(text, "\n  {f}");
            }
            let results = json!({ "witnesses": to_value(&w), "check": to_value(&check), "passed": check.passed() });
            Ok(Outcome::ok(
                "witness",
                inputs,
                results,
                diagnostics(cfg, 0),
                text,
            ))
        })(),
    )
}

/// `split`: primes of `K` above `ell` and their splitting counts in `K_inf`.
pub fn cmd_split(q: u64, ell: &Natural, cfg: &Config) -> Outcome {
    let inputs = json!({ "q": q, "prime": ell.to_string() });
    finish(
        "split",
        inputs.clone(),
        cfg,
        (|| {
            let field = QuadField::new(q)?;
            let splitting = field.splitting_type(ell)?;
            let mut entries = Vec::new();
            let mut totally_ramified = Vec::new();
            for prime in splitting.primes() {
                if prime.kind == PrimeKind::DyadicP {
                    totally_ramified.push(prime);
                } else {
                    entries.push(iwasawa::primes_above_in_kinf(&field, &prime, cfg)?);
                }
            }
            let mut text = format!("{ell} is {} in Q(sqrt(-{q}))\n", splitting.label());
            for e in &entries {
                let _ = writeln!(
                    text,
                    "{}: {} prime(s) of K_inf  (generator {}, ord {})",
                    e.prime, e.count, e.generator, e.ord
                );
            }
            for p in &totally_ramified {
                let _ = writeln!(text, "{p}: totally ramified in K_inf");
            }
            let precision = entries.iter().map(|e| e.precision).max().unwrap_or(0);
            let results = json!({
                "splitting": splitting.label(),
                "entries": to_value(&entries),
                "totally_ramified": to_value(&totally_ramified),
            });
            Ok(Outcome::ok(
                "split",
                inputs,
                results,
                diagnostics(cfg, precision),
                text.trim_end().to_string(),
            ))
        })(),
    )
}

fn parity(n: u64) -> &'static str {
    if n % 2 == 1 {
        "odd"
    } else {
        "even"
    }
}

/// `rayclass`: order of the ray class group modulo `(p*)^2`.
pub fn cmd_rayclass(q: u64, cfg: &Config) -> Outcome {
    let inputs = json!({ "q": q });
    finish(
        "rayclass",
        inputs.clone(),
        cfg,
        (|| {
            let field = QuadField::new(q)?;
            let r = twistlab::ray_class_order(&field);
            let text = format!(
                "ray class order mod (p*)^2 = {} ({}) = h {} * #(O/(p*)^2)^x {} / #image(units) {}",
                r.order,
                parity(r.order),
                r.class_number,
                r.residue_units,
                r.unit_image
            );
            let results =
                json!({ "ray_class": to_value(&r), "order": r.order, "parity": parity(r.order) });
            Ok(Outcome::ok(
                "rayclass",
                inputs,
                results,
                diagnostics(cfg, 0),
                text,
            ))
        })(),
    )
}

/// `classgroup`: class number by reduced forms.
pub fn cmd_classgroup(q: u64, cfg: &Config) -> Outcome {
    let inputs = json!({ "q": q });
    finish(
        "classgroup",
        inputs.clone(),
        cfg,
        (|| {
            let h = QuadField::new(q)?.class_number();
            let text = format!("h(Q(sqrt(-{q}))) = {h} ({})", parity(h));
            let results = json!({ "class_number": h, "parity": parity(h) });
            Ok(Outcome::ok(
                "classgroup",
                inputs,
                results,
                diagnostics(cfg, 0),
                text,
            ))
        })(),
    )
}

/// `verify-norm`: local norm surjectivity at finite precision.
pub fn cmd_verify_norm(deg: usize, m: u32, prec: Option<u32>, cfg: &Config) -> Outcome {
    let k = prec.unwrap_or(m + 6);
    let inputs = json!({ "deg": deg, "m": m, "prec": k });
    finish(
        "verify-norm",
        inputs.clone(),
        cfg,
        (|| {
            let report = dyadic::verify_norm_surjectivity(deg, m, k)?;
            let text =
                format!(
            "degree {deg}, m = {m}, mod 2^{k}: {} ({} of {} classes hit, {} points examined)",
            if report.surjective { "surjective" } else { "NOT surjective" },
            report.preimages.iter().filter(|p| p.preimage.is_some()).count(),
            report.preimages.len(),
            report.points_examined
        );
            Ok(Outcome::ok(
                "verify-norm",
                inputs,
                to_value(&report),
                diagnostics(cfg, k),
                text,
            ))
        })(),
    )
}

/// One line of scan output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "R")]
    pub r: String,
    pub valid: bool,
    pub s_inf: Option<String>,
    #[serde(rename = "lambda_F")]
    pub lambda_f: Option<String>,
    #[serde(rename = "lambda_Fprime")]
    pub lambda_fprime: Option<String>,
    #[serde(rename = "lambda_J")]
    pub lambda_j: Option<String>,
    pub case: String,
}

impl ScanRow {
    pub fn from_item(item: &ScanItem) -> Self {
        match &item.lambda {
            Some(l) => ScanRow::from_report(&item.record.r, l, item.case.case.as_str()),
            None => ScanRow {
                r: item.r.to_string(),
                valid: false,
                s_inf: None,
                lambda_f: None,
                lambda_fprime: None,
                lambda_j: None,
                case: item.case.case.as_str().into(),
            },
        }
    }

    fn from_report(r: &QuadElem, l: &LambdaReport, case: &str) -> Self {
        ScanRow {
            r: r.to_string(),
            valid: true,
            s_inf: Some(l.s_inf.to_string()),
            lambda_f: Some(l.lambda_f.to_string()),
            lambda_fprime: l.lambda_fprime.as_ref().map(|v| v.to_string()),
            lambda_j: l.lambda_j.as_ref().map(|v| v.to_string()),
            case: case.into(),
        }
    }

    fn fields(&self) -> [String; 7] {
        let o = |v: &Option<String>| v.clone().unwrap_or_default();
        [
            self.r.clone(),
            self.valid.to_string(),
            o(&self.s_inf),
            o(&self.lambda_f),
            o(&self.lambda_fprime),
            o(&self.lambda_j),
            self.case.clone(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

fn csv_line(fields: &[String]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields)?;
    w.into_inner().map_err(|e| e.into_error())
}

/// Sink for scan rows in one of the three formats.
pub struct RowWriter<W: Write> {
    format: Format,
    out: W,
}

impl<W: Write> RowWriter<W> {
    pub fn new(mut out: W, format: Format) -> io::Result<Self> {
        match format {
            Format::Csv => out.write_all(&csv_line(&CSV_HEADER.map(String::from))?)?,
            Format::Text => writeln!(
                out,
                "{:>10} {:>6} {:>6} {:>9} {:>13} {:>9}  case",
                "R", "valid", "s_inf", "lambda_F", "lambda_Fprime", "lambda_J"
            )?,
            Format::Json => {}
        }
        Ok(RowWriter { format, out })
    }

    pub fn row(&mut self, row: &ScanRow) -> io::Result<()> {
        let w = &mut self.out;
        match self.format {
            Format::Csv => w.write_all(&csv_line(&row.fields())?),
            Format::Json => writeln!(w, "{}", serde_json::to_string(row)?),
            Format::Text => {
                let f = row.fields();
                writeln!(
                    w,
                    "{:>10} {:>6} {:>6} {:>9} {:>13} {:>9}  {}",
                    f[0], f[1], f[2], f[3], f[4], f[5], f[6]
                )
            }
        }
    }

    /// Marker written after the last row when a scan stops early.
    pub fn trailer(&mut self, err: &Error, rows: usize) -> io::Result<()> {
        let w = &mut self.out;
        match self.format {
            Format::Json => {
                let t =
                    json!({ "trailer": "incomplete", "rows": rows, "error": error_report(err) });
                writeln!(w, "{t}")
            }
            _ => writeln!(w, "# INCOMPLETE after {rows} rows: {}: {err}", err.kind()),
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Scans every rational twist with `|R| <= rmax`, `jobs` workers at a time,
/// emitting rows in enumeration order. Returns the number of rows written.
/// On failure the rows before the failing `R` are written, then a trailer.
pub fn cmd_scan<W: Write>(
    q: u64,
    rmax: u64,
    jobs: usize,
    cfg: &Config,
    writer: &mut RowWriter<W>,
) -> std::result::Result<usize, ScanError> {
    let mut run = || -> std::result::Result<usize, ScanError> {
        let field = QuadField::new(q).map_err(|e| ScanError::Math(e, 0))?;
        let candidates =
            twistlab::twist_candidates(&field, rmax, cfg).map_err(|e| ScanError::Math(e, 0))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| ScanError::Io(io::Error::other(e)))?;
        let mut written = 0;
        for chunk in candidates.chunks(SCAN_CHUNK) {
            let items: Vec<Result<ScanItem>> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|r| twistlab::scan_item(&field, r, cfg))
                    .collect()
            });
            for item in items {
                match item {
                    Ok(item) => {
                        writer
                            .row(&ScanRow::from_item(&item))
                            .map_err(ScanError::Io)?;
                        written += 1;
                    }
                    Err(e) => return Err(ScanError::Math(e, written)),
                }
            }
        }
        Ok(written)
    };
    let result = run();
    if let Err(ScanError::Math(e, rows)) = &result {
        writer.trailer(e, *rows).map_err(ScanError::Io)?;
    }
    writer.flush().map_err(ScanError::Io)?;
    result
}

#[derive(Debug)]
pub enum ScanError {
    /// Arithmetic failure after this many rows were written.
    Math(Error, usize),
    Io(io::Error),
}

/// Parses `args` and runs the command, writing to `out` and `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut cfg = Config::default();
    if let Some(cap) = cli.precision_cap {
        cfg.precision_cap = cap;
    }
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let outcome = match &cli.command {
        Command::Scan { q, rmax, jobs } => {
            return run_scan(*q, *rmax, *jobs, &cfg, format, out, err)
        }
        Command::Lambda { q, r } => cmd_lambda(*q, r, &cfg),
        Command::Classify { q, r } => cmd_classify(*q, r, &cfg),
        Command::Witness { q, r } => cmd_witness(*q, r, &cfg),
        Command::Split { q, prime } => cmd_split(*q, prime, &cfg),
        Command::Rayclass { q } => cmd_rayclass(*q, &cfg),
        Command::Classgroup { q } => cmd_classgroup(*q, &cfg),
        Command::VerifyNorm { deg, m, prec } => cmd_verify_norm(*deg, *m, *prec, &cfg),
    };
    let code = outcome.document.exit_code();
    let written = match format {
        Format::Json => writeln!(out, "{}", outcome.document.to_json()),
        Format::Csv if code == EXIT_OK => {
            if outcome.rows.is_empty() {
                let _ = writeln!(
                    err,
                    "error: --csv is supported by lambda, classify and scan only"
                );
                return EXIT_USAGE;
            }
            RowWriter::new(&mut *out, Format::Csv)
                .and_then(|mut w| outcome.rows.iter().try_for_each(|row| w.row(row)))
        }
        _ if code == EXIT_OK => writeln!(out, "{}", outcome.text),
        _ => writeln!(err, "{}", outcome.text),
    };
    if written.is_err() {
        return EXIT_RESOURCE;
    }
    code
}

fn run_scan(
    q: u64,
    rmax: u64,
    jobs: usize,
    cfg: &Config,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut writer = match RowWriter::new(&mut *out, format) {
        Ok(w) => w,
        Err(_) => return EXIT_RESOURCE,
    };
    match cmd_scan(q, rmax, jobs, cfg, &mut writer) {
        Ok(_) => EXIT_OK,
        Err(ScanError::Math(e, _)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(ScanError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RESOURCE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("quadtwist").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parse_twist_args() {
        let p = |s: &str| s.parse::<TwistArg>().unwrap();
        assert_eq!(p("741").rational(), Some(741.into()));
        assert_eq!(p("-3").rational(), Some((-3).into()));
        let t = p("1+2*sqrt(-7)");
        assert_eq!(
            (t.a, t.b, t.denominator, t.q),
            (1.into(), 2.into(), 1, Some(7))
        );
        let t = p("(1 - 3*sqrt(-7))/2");
        assert_eq!((t.a, t.b, t.denominator), (1.into(), (-3).into(), 2));
        let t = p("-sqrt(-7)");
        assert_eq!((t.a, t.b), (0.into(), (-1).into()));
        let t = p("sqrt(-7)");
        assert_eq!((t.a, t.b), (0.into(), 1.into()));
        let t = p("3*sqrt(-7)");
        assert_eq!((t.a, t.b), (0.into(), 3.into()));
        let t = p("2-sqrt(-7)");
        assert_eq!((t.a, t.b), (2.into(), (-1).into()));
        for bad in [
            "",
            "x",
            "1+2*sqrt(7)",
            "3/2",
            "(1+sqrt(-7))/3",
            "1+2*sqrt(-7)x",
        ] {
            assert!(bad.parse::<TwistArg>().is_err(), "{bad}");
        }
    }

    #[test]
    fn quadratic_twist_arg_parity() {
        let k = QuadField::new(7).unwrap();
        assert!("(1+sqrt(-7))/2"
            .parse::<TwistArg>()
            .unwrap()
            .to_elem(&k)
            .is_ok());
        assert!("(1+2*sqrt(-7))/2"
            .parse::<TwistArg>()
            .unwrap()
            .to_elem(&k)
            .is_err());
        assert!("1+sqrt(-23)"
            .parse::<TwistArg>()
            .unwrap()
            .to_elem(&k)
            .is_err());
    }

    #[test]
    fn lambda_command_examples() {
        let (code, out, _) = run_args(&["lambda", "--q", "7", "--R", "741", "--json"]);
        assert_eq!(code, 0);
        let doc = OutputDocument::from_json(&out).unwrap();
        let l = &doc.results["lambda"];
        assert_eq!(
            (
                l["s_inf"].as_str(),
                l["lambda_f"].as_str(),
                l["lambda_j"].as_str()
            ),
            (Some("4"), Some("3"), Some("7"))
        );

        let (code, out, _) = run_args(&["lambda", "--q", "7", "--R", "1", "--json"]);
        assert_eq!(code, 0);
        assert_eq!(
            OutputDocument::from_json(&out).unwrap().results["lambda"]["lambda_j"],
            "1"
        );

        let (code, out, _) = run_args(&["lambda", "--q", "7", "--R", "3", "--json"]);
        assert_eq!(code, 2);
        let doc = OutputDocument::from_json(&out).unwrap();
        assert_eq!(doc.error.unwrap().violations, vec![Violation::Not1Mod4]);

        let (code, _, err) = run_args(&["lambda", "--q", "7", "--R", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("not_1_mod_4"));
    }

    #[test]
    fn document_round_trip_and_stability() {
        let a = run_args(&["lambda", "--q", "7", "--R", "741", "--json"]).1;
        let b = run_args(&["lambda", "--q", "7", "--R", "741", "--json"]).1;
        assert_eq!(a, b);
        let doc = OutputDocument::from_json(&a).unwrap();
        assert_eq!(format!("{}\n", doc.to_json()), a);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&[]).0, 1);
        assert_eq!(run_args(&["lambda", "--q", "7"]).0, 1);
        assert_eq!(run_args(&["lambda", "--q", "7", "--R", "abc"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(run_args(&["lambda", "--q", "11", "--R", "1"]).0, 2);
        assert_eq!(run_args(&["witness", "--q", "7", "--R", "-11"]).0, 2);
        assert_eq!(
            run_args(&["lambda", "--q", "7", "--R", "741", "--precision-cap", "4"]).0,
            3
        );
        assert_eq!(run_args(&["rayclass", "--q", "7", "--csv"]).0, 1);
    }

    #[test]
    fn scan_examples() {
        let (code, out, _) = run_args(&["scan", "--q", "7", "--rmax", "50", "--csv"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(
            lines.next(),
            Some("R,valid,s_inf,lambda_F,lambda_Fprime,lambda_J,case")
        );
        assert!(out
            .lines()
            .any(|l| l.starts_with("-3,true,") && l.ends_with(",case_iii")));

        let (_, out, _) = run_args(&["scan", "--q", "47", "--rmax", "1", "--csv"]);
        assert_eq!(out.lines().nth(1).unwrap(), "1,true,2,1,,,case_i");

        let (code, out, _) = run_args(&["scan", "--q", "7", "--rmax", "0", "--csv"]);
        assert_eq!(
            (code, out.as_str()),
            (0, "R,valid,s_inf,lambda_F,lambda_Fprime,lambda_J,case\n")
        );
    }

    #[test]
    fn scan_is_deterministic_across_jobs() {
        let one = run_args(&["scan", "--q", "23", "--rmax", "300", "--json"]).1;
        let four = run_args(&[
            "scan", "--q", "23", "--rmax", "300", "--json", "--jobs", "4",
        ])
        .1;
        assert_eq!(one, four);
        let k = QuadField::new(23).unwrap();
        let n = twistlab::twist_candidates(&k, 300, &Config::default())
            .unwrap()
            .len();
        assert_eq!(one.lines().count(), n);
    }

    #[test]
    fn scan_failure_writes_trailer() {
        let (code, out, _) = run_args(&[
            "scan",
            "--q",
            "7",
            "--rmax",
            "20",
            "--csv",
            "--precision-cap",
            "4",
        ]);
        assert_eq!(code, 3);
        assert!(out.lines().last().unwrap().starts_with("# INCOMPLETE"));
    }

    #[test]
    fn small_commands() {
        let (code, out, _) = run_args(&["split", "--q", "7", "--prime", "11", "--json"]);
        assert_eq!(code, 0);
        let doc = OutputDocument::from_json(&out).unwrap();
        let counts: Vec<_> = doc.results["entries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| (e["prime"]["residue"].clone(), e["count"].clone()))
            .collect();
        assert_eq!(
            counts,
            vec![(json!("2"), json!("1")), (json!("9"), json!("2"))]
        );

        let (_, out, _) = run_args(&["rayclass", "--q", "7", "--json"]);
        let doc = OutputDocument::from_json(&out).unwrap();
        assert_eq!(
            (
                doc.results["order"].as_u64(),
                doc.results["parity"].as_str()
            ),
            (Some(1), Some("odd"))
        );

        let (_, out, _) = run_args(&[
            "verify-norm",
            "--deg",
            "2",
            "--m",
            "2",
            "--prec",
            "6",
            "--json",
        ]);
        assert_eq!(
            OutputDocument::from_json(&out).unwrap().results["surjective"],
            true
        );

        let (_, out, _) = run_args(&["classgroup", "--q", "23"]);
        assert!(out.contains("= 3 (odd)"));

        let (code, out, _) = run_args(&["classify", "--q", "7", "--R", "-3"]);
        assert_eq!(code, 0);
        assert!(out.contains("case_iii"));
    }
}
