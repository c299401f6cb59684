//! Wire formats: point-data files in, report files out.
//!
//! Exact values never touch floats on the wire. Every rational travels
//! as a canonical string (`"p/q"`, Gaussian values as `"a+b*i"`), so a
//! report parsed back in compares equal to the one that was written;
//! floating-point numbers appear only in fields whose names start with
//! `numeric_`. Serialization is `serde_json` with pretty printing and
//! struct-ordered keys, which makes reports byte-identical across runs
//! for identical inputs — the regression suite relies on that.
//!
//! One [`ReportFile`] envelope covers all three front-end commands:
//! a density run fills `densities`, a ledger run fills `ledger`, a
//! verification run fills `suite`; `tool`, `version`, and `units` are
//! always present. The ledger additionally renders to markdown for
//! human reading.

use serde::{Deserialize, Serialize};

use crate::functional::{
    density, ledger, EngineError, GradientArg, Ledger, PerturbationKind, PointData, SymbolMode,
};
use crate::jet::ScalarJet;
use crate::scalar::{parse_rat, GaussRat, Rat};
use crate::verify;

/// Which assembly mode(s) a density request asks for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModeChoice {
    /// Stated expansions only.
    Paper,
    /// Iterated composition only.
    Derived,
    /// Both, reported side by side.
    Both,
}

impl ModeChoice {
    /// Stable wire name.
    pub fn as_str(self) -> &'static str {
        match self {
            ModeChoice::Paper => "paper",
            ModeChoice::Derived => "derived",
            ModeChoice::Both => "both",
        }
    }

    /// Parse a wire name.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(ModeChoice::Paper),
            "derived" => Some(ModeChoice::Derived),
            "both" => Some(ModeChoice::Both),
            _ => None,
        }
    }

    /// The modes to run, in report order.
    pub fn modes(self) -> Vec<SymbolMode> {
        match self {
            ModeChoice::Paper => vec![SymbolMode::Paper],
            ModeChoice::Derived => vec![SymbolMode::Derived],
            ModeChoice::Both => vec![SymbolMode::Paper, SymbolMode::Derived],
        }
    }
}

// ------------------------------------------------------------ input files

#[derive(Deserialize)]
struct RawJet {
    value: String,
    grad: Vec<String>,
}

#[derive(Deserialize)]
struct RawTorsionEntry {
    j: usize,
    l: usize,
    t: usize,
    val: String,
}

#[derive(Deserialize)]
struct RawPoint {
    n: usize,
    kind: String,
    f: RawJet,
    u: Vec<String>,
    v: Vec<String>,
    w: Vec<String>,
    #[serde(rename = "X", default)]
    x: Option<Vec<String>>,
    #[serde(rename = "T", default)]
    torsion: Option<Vec<RawTorsionEntry>>,
    #[serde(default)]
    phi_trace: Option<String>,
    #[serde(rename = "dim_E", default)]
    dim_e: Option<u32>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(rename = "thm47_variant", default)]
    gradient_arg: Option<String>,
}

fn input_err(context: &str, detail: impl std::fmt::Display) -> EngineError {
    EngineError::Input(format!("{context}: {detail}"))
}

fn parse_gauss(field: &str, s: &str) -> Result<GaussRat, EngineError> {
    GaussRat::parse(s).map_err(|e| input_err(&format!("field '{field}', value '{s}'"), e))
}

fn parse_rat_field(field: &str, s: &str) -> Result<Rat, EngineError> {
    parse_rat(s).map_err(|e| input_err(&format!("field '{field}', value '{s}'"), e))
}

fn parse_covector(field: &str, raw: &[String]) -> Result<Vec<Rat>, EngineError> {
    raw.iter()
        .enumerate()
        .map(|(i, s)| parse_rat_field(&format!("{field}[{i}]"), s))
        .collect()
}

/// Parse a point-data JSON document into validated engine inputs plus
/// the requested mode choice.
///
/// # Errors
///
/// [`EngineError::Input`] with the offending field (and, for JSON
/// syntax problems, the line and column) in the message.
pub fn parse_point_file(text: &str) -> Result<(PointData, ModeChoice), EngineError> {
    let raw: RawPoint = serde_json::from_str(text)
        .map_err(|e| input_err("point data is not valid JSON", e))?;

    let kind = PerturbationKind::parse(&raw.kind).ok_or_else(|| {
        input_err(
            "field 'kind'",
            format!(
                "'{}' is not one of torsion, imaginary-vector, grading-vector, twisted",
                raw.kind
            ),
        )
    })?;

    let value = parse_gauss("f.value", &raw.f.value)?;
    let grad = raw
        .f
        .grad
        .iter()
        .enumerate()
        .map(|(i, s)| parse_gauss(&format!("f.grad[{i}]"), s))
        .collect::<Result<Vec<_>, _>>()?;
    if grad.len() != raw.n {
        return Err(input_err(
            "field 'f.grad'",
            format!("has {} components, expected n = {}", grad.len(), raw.n),
        ));
    }
    let f = ScalarJet::with_gradient(raw.n, value, grad);

    let torsion = match &raw.torsion {
        None => None,
        Some(entries) => {
            let mut t = crate::clifford::ThreeForm::zero(raw.n);
            for (i, e) in entries.iter().enumerate() {
                let val = parse_rat_field(&format!("T[{i}].val"), &e.val)?;
                t.set(e.j, e.l, e.t, val).map_err(|msg| {
                    input_err(&format!("T[{i}] = ({}, {}, {})", e.j, e.l, e.t), msg)
                })?;
            }
            Some(t)
        }
    };

    let x_vector = match &raw.x {
        None => None,
        Some(x) => Some(parse_covector("X", x)?),
    };

    let phi_trace = match &raw.phi_trace {
        None => GaussRat::zero(),
        Some(s) => parse_gauss("phi_trace", s)?,
    };

    let gradient_arg = match raw.gradient_arg.as_deref() {
        None => GradientArg::F,
        Some(s) => GradientArg::parse(s)
            .ok_or_else(|| input_err("field 'thm47_variant'", format!("'{s}' is not 'f' or 'f3'")))?,
    };

    let mode = match raw.mode.as_deref() {
        None => ModeChoice::Both,
        Some(s) => ModeChoice::parse(s).ok_or_else(|| {
            input_err("field 'mode'", format!("'{s}' is not paper, derived, or both"))
        })?,
    };

    let point = PointData {
        n: raw.n,
        kind,
        f,
        u: parse_covector("u", &raw.u)?,
        v: parse_covector("v", &raw.v)?,
        w: parse_covector("w", &raw.w)?,
        x_vector,
        torsion,
        phi_trace,
        dim_e: raw.dim_e.unwrap_or(1),
        gradient_arg,
    };
    point.validate()?;
    Ok((point, mode))
}

// ----------------------------------------------------------- report files

/// Units statement for every exact density/ledger value in a report.
pub const UNITS: &str = "Vol*trid";

/// Echo of the input the report was computed from.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct PointEcho {
    /// Frame dimension.
    pub n: usize,
    /// Perturbation kind wire name.
    pub kind: String,
    /// Requested mode choice wire name.
    pub mode: String,
    /// Auxiliary bundle rank.
    #[serde(rename = "dim_E")]
    pub dim_e: u32,
    /// Gradient-argument variant wire name.
    #[serde(rename = "thm47_variant")]
    pub gradient_arg: String,
}

/// One named density row on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct TermEntry {
    /// Stable label.
    pub label: String,
    /// What the row is.
    pub description: String,
    /// Exact value, canonical rational string, units [`UNITS`].
    pub value: String,
}

/// One mode's density breakdown on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct DensitySection {
    /// Assembly mode wire name.
    pub mode: String,
    /// Named rows in canonical order.
    pub terms: Vec<TermEntry>,
    /// Exact total, units [`UNITS`].
    pub total: String,
    /// Exact total in units of `Vol(S^{n-1})`.
    pub total_vol_units: String,
    /// Exact total in units of `π^pi_power`.
    pub total_pi_units: String,
    /// Power of `π` for the previous field.
    pub pi_power: u32,
    /// Real part of the total with `π` substituted.
    pub numeric_re: f64,
    /// Imaginary part of the total with `π` substituted.
    pub numeric_im: f64,
}

/// One comparison row on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct LedgerEntry {
    /// Stable row name.
    pub name: String,
    /// Engine value (canonical rational string).
    pub engine: String,
    /// Stated value (canonical rational string).
    pub printed: String,
    /// `printed - engine`, exact.
    pub difference: String,
    /// Context, empty when none is needed.
    pub note: String,
}

/// The discrepancy ledger on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct LedgerSection {
    /// Engine total, stated zeroth-order symbol.
    pub paper_total: String,
    /// Engine total, recomputed zeroth-order symbol.
    pub derived_total: String,
    /// Per-term comparisons.
    pub term_rows: Vec<LedgerEntry>,
    /// Totals and summaries.
    pub total_rows: Vec<LedgerEntry>,
    /// Kind-level remarks.
    pub notes: Vec<String>,
}

/// One verification check on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct CheckEntry {
    /// Suite the check belongs to.
    pub suite: String,
    /// Stable check name.
    pub name: String,
    /// Whether it passed.
    pub passed: bool,
    /// What was measured.
    pub detail: String,
}

/// A verification run on the wire.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct SuiteSection {
    /// Suite name requested (`"all"` included).
    pub suite: String,
    /// RNG seed the run used.
    pub seed: u64,
    /// Trial budget per randomized check.
    pub trials: usize,
    /// Conjunction of all check outcomes.
    pub passed: bool,
    /// Individual checks in execution order.
    pub checks: Vec<CheckEntry>,
}

/// The single report envelope all front-end commands emit.
#[derive(Serialize, Deserialize, PartialEq, Debug, Clone)]
pub struct ReportFile {
    /// Tool name.
    pub tool: String,
    /// Tool version.
    pub version: String,
    /// Units of every exact value in the report.
    pub units: String,
    /// Input echo (density and ledger runs).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point: Option<PointEcho>,
    /// Density breakdowns, one per requested mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub densities: Option<Vec<DensitySection>>,
    /// Discrepancy ledger.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ledger: Option<LedgerSection>,
    /// Verification results.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<SuiteSection>,
}

fn envelope() -> ReportFile {
    ReportFile {
        tool: "storsion".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        units: UNITS.to_string(),
        point: None,
        densities: None,
        ledger: None,
        suite: None,
    }
}

fn echo(p: &PointData, mode: ModeChoice) -> PointEcho {
    PointEcho {
        n: p.n,
        kind: p.kind.as_str().to_string(),
        mode: mode.as_str().to_string(),
        dim_e: p.dim_e,
        gradient_arg: p.gradient_arg.as_str().to_string(),
    }
}

fn density_section(p: &PointData, mode: SymbolMode) -> Result<DensitySection, EngineError> {
    let report = density(p, mode)?;
    Ok(DensitySection {
        mode: mode.as_str().to_string(),
        terms: report
            .terms
            .iter()
            .map(|t| TermEntry {
                label: t.label.clone(),
                description: t.description.clone(),
                value: t.value.canonical(),
            })
            .collect(),
        total: report.total.canonical(),
        total_vol_units: report.total_vol_units.canonical(),
        total_pi_units: report.total_pi_units.canonical(),
        pi_power: report.pi_power,
        numeric_re: report.numeric_re,
        numeric_im: report.numeric_im,
    })
}

fn ledger_section(book: &Ledger) -> LedgerSection {
    let entry = |r: &crate::functional::LedgerRow| LedgerEntry {
        name: r.name.clone(),
        engine: r.engine.canonical(),
        printed: r.printed.canonical(),
        difference: r.difference.canonical(),
        note: r.note.clone(),
    };
    LedgerSection {
        paper_total: book.paper_total.canonical(),
        derived_total: book.derived_total.canonical(),
        term_rows: book.term_rows.iter().map(entry).collect(),
        total_rows: book.total_rows.iter().map(entry).collect(),
        notes: book.notes.clone(),
    }
}

/// Build the report for a density run.
///
/// # Errors
///
/// Propagates [`EngineError`] from validation or assembly.
pub fn density_report(p: &PointData, choice: ModeChoice) -> Result<ReportFile, EngineError> {
    let mut report = envelope();
    report.point = Some(echo(p, choice));
    let mut sections = Vec::new();
    for mode in choice.modes() {
        sections.push(density_section(p, mode)?);
    }
    report.densities = Some(sections);
    Ok(report)
}

/// Build the report for a ledger run (both modes are always computed).
///
/// # Errors
///
/// Propagates [`EngineError`] from validation or assembly.
pub fn ledger_report(p: &PointData) -> Result<ReportFile, EngineError> {
    let book = ledger(p)?;
    let mut report = envelope();
    report.point = Some(echo(p, ModeChoice::Both));
    report.ledger = Some(ledger_section(&book));
    Ok(report)
}

/// Build the report for a verification run.
///
/// # Errors
///
/// [`EngineError::Input`] for an unknown suite name; internal errors
/// propagate.
pub fn verify_report(suite: &str, seed: u64, trials: usize) -> Result<ReportFile, EngineError> {
    verify_report_with_tolerance(suite, seed, trials, None)
}

/// Like [`verify_report`], but overriding the matrix-oracle residual
/// tolerance (see [`verify::run_with_oracle_tolerance`]).
///
/// # Errors
///
/// Same contract as [`verify_report`].
pub fn verify_report_with_tolerance(
    suite: &str,
    seed: u64,
    trials: usize,
    oracle_tolerance: Option<f64>,
) -> Result<ReportFile, EngineError> {
    let results = verify::run_with_oracle_tolerance(suite, seed, trials, oracle_tolerance)?;
    let mut report = envelope();
    report.suite = Some(SuiteSection {
        suite: suite.to_string(),
        seed,
        trials,
        passed: results.iter().all(|r| r.passed),
        checks: results
            .iter()
            .map(|r| CheckEntry {
                suite: r.suite.to_string(),
                name: r.name.to_string(),
                passed: r.passed,
                detail: r.detail.clone(),
            })
            .collect(),
    });
    Ok(report)
}

/// Serialize a report to its canonical byte representation.
pub fn render_json(report: &ReportFile) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report structs always serialize");
    out.push('\n');
    out
}

/// Parse a report back from JSON (the round-trip direction).
///
/// # Errors
///
/// [`EngineError::Input`] for malformed JSON.
pub fn parse_report(text: &str) -> Result<ReportFile, EngineError> {
    serde_json::from_str(text).map_err(|e| input_err("report is not valid JSON", e))
}

/// Render the ledger section of a report as a markdown document.
///
/// # Errors
///
/// [`EngineError::Input`] if the report has no ledger section.
pub fn render_ledger_markdown(report: &ReportFile) -> Result<String, EngineError> {
    let ledger = report
        .ledger
        .as_ref()
        .ok_or_else(|| EngineError::Input("report has no ledger section".into()))?;
    let point = report
        .point
        .as_ref()
        .ok_or_else(|| EngineError::Input("report has no point echo".into()))?;

    let mut out = String::new();
    out.push_str(&format!(
        "# Discrepancy ledger: kind {}, n = {}\n\n",
        point.kind, point.n
    ));
    out.push_str(&format!(
        "All exact values in units {} (tool {} {}).\n\n",
        report.units, report.tool, report.version
    ));
    out.push_str(&format!(
        "Engine totals: paper mode `{}`, derived mode `{}`.\n\n",
        ledger.paper_total, ledger.derived_total
    ));

    let table = |rows: &[LedgerEntry], out: &mut String| {
        out.push_str("| row | engine | printed | difference | note |\n");
        out.push_str("|---|---|---|---|---|\n");
        for r in rows {
            out.push_str(&format!(
                "| {} | `{}` | `{}` | `{}` | {} |\n",
                r.name, r.engine, r.printed, r.difference, r.note
            ));
        }
    };

    out.push_str("## Per-term comparison\n\n");
    table(&ledger.term_rows, &mut out);
    out.push_str("\n## Totals and summaries\n\n");
    table(&ledger.total_rows, &mut out);

    if !ledger.notes.is_empty() {
        out.push_str("\n## Notes\n\n");
        for note in &ledger.notes {
            out.push_str(&format!("- {note}\n"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORSION_FLAT: &str = r#"{
        "n": 4,
        "kind": "torsion",
        "f": {"value": "1", "grad": ["0", "0", "0", "0"]},
        "u": ["1", "0", "0", "0"],
        "v": ["0", "1", "0", "0"],
        "w": ["0", "0", "1", "0"],
        "T": [{"j": 1, "l": 2, "t": 3, "val": "1"}],
        "mode": "both"
    }"#;

    #[test]
    fn point_file_parses_and_computes() {
        let (point, mode) = parse_point_file(TORSION_FLAT).unwrap();
        assert_eq!(mode, ModeChoice::Both);
        let report = density_report(&point, mode).unwrap();
        let sections = report.densities.as_ref().unwrap();
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].mode, "paper");
        assert_eq!(sections[0].total, "-3");
        assert_eq!(sections[0].total_pi_units, "-24");
        let row_i = sections[0].terms.iter().find(|t| t.label == "I").unwrap();
        assert_eq!(row_i.value, "3/2");
    }

    #[test]
    fn report_round_trips_byte_identically() {
        let (point, mode) = parse_point_file(TORSION_FLAT).unwrap();
        let report = density_report(&point, mode).unwrap();
        let json = render_json(&report);
        let reparsed = parse_report(&json).unwrap();
        assert_eq!(report, reparsed);
        assert_eq!(render_json(&reparsed), json);
    }

    #[test]
    fn malformed_input_names_the_field() {
        let bad = TORSION_FLAT.replace("\"1\", \"0\", \"0\", \"0\"", "\"1\", \"x\", \"0\", \"0\"");
        let err = parse_point_file(&bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("u[1]"), "got: {msg}");

        let syntactic = parse_point_file("{ not json").unwrap_err();
        let msg = format!("{syntactic}");
        assert!(msg.contains("line"), "got: {msg}");
    }

    #[test]
    fn unordered_torsion_triple_is_rejected() {
        let bad = TORSION_FLAT.replace(
            "{\"j\": 1, \"l\": 2, \"t\": 3, \"val\": \"1\"}",
            "{\"j\": 2, \"l\": 1, \"t\": 3, \"val\": \"1\"}",
        );
        assert!(parse_point_file(&bad).is_err());
    }

    #[test]
    fn ledger_report_renders_markdown() {
        let input = r#"{
            "n": 4,
            "kind": "torsion",
            "f": {"value": "1", "grad": ["1", "0", "0", "0"]},
            "u": ["0", "1", "0", "0"],
            "v": ["1", "0", "0", "0"],
            "w": ["0", "1", "0", "0"]
        }"#;
        let (point, _) = parse_point_file(input).unwrap();
        let report = ledger_report(&point).unwrap();
        let md = render_ledger_markdown(&report).unwrap();
        assert!(md.contains("| II-f |"));
        assert!(md.contains("## Totals and summaries"));
        let ledger = report.ledger.as_ref().unwrap();
        assert_eq!(ledger.paper_total, "1");
        assert_eq!(ledger.derived_total, "0");
        let ii_f = ledger.term_rows.iter().find(|r| r.name == "II-f").unwrap();
        assert_eq!(ii_f.difference, "3");
    }

    #[test]
    fn verify_report_carries_seed_and_outcomes() {
        let report = verify_report("sphere", 11, 30).unwrap();
        let suite = report.suite.as_ref().unwrap();
        assert_eq!(suite.seed, 11);
        assert!(suite.passed);
        assert!(suite.checks.iter().any(|c| c.name == "degree-two-isotropy"));
        let json = render_json(&report);
        assert_eq!(parse_report(&json).unwrap(), report);
    }

    #[test]
    fn defaults_fill_in_optional_fields() {
        let minimal = r#"{
            "n": 4,
            "kind": "twisted",
            "f": {"value": "2", "grad": ["0", "0", "0", "1/2"]},
            "u": ["1", "0", "0", "0"],
            "v": ["0", "1", "0", "0"],
            "w": ["0", "0", "1", "0"]
        }"#;
        let (point, mode) = parse_point_file(minimal).unwrap();
        assert_eq!(mode, ModeChoice::Both);
        assert_eq!(point.dim_e, 1);
        assert!(point.phi_trace.is_zero());
        assert_eq!(point.gradient_arg, GradientArg::F);
    }
}
