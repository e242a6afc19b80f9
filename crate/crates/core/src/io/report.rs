//! Comparison and sensitivity tables.
//!
//! Costs are shown in whole euros, life years to 0.1, cost per life year to
//! two decimals, ICERs in whole euros and breast-cancer deaths as whole
//! persons. Rounding is half away from zero.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mc::{McConfig, OracleCheck, ORACLE_STANDARD_ERRORS};
use crate::model::{icer, Icer, ScenarioResult, Screening};
use crate::scenario::ScenarioSpec;

use super::bundle::DataBundle;
use super::config::SensitivityCase;

pub fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (value * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn fixed(value: f64, decimals: i32) -> String {
    format!("{:.*}", decimals as usize, round_to(value, decimals))
}

pub fn format_euros(value: f64) -> String {
    fixed(value, 0)
}

pub fn format_life_years(value: f64) -> String {
    fixed(value, 1)
}

pub fn format_ratio(value: f64) -> String {
    fixed(value, 2)
}

pub fn format_icer(value: &Icer) -> String {
    value.value().map_or_else(String::new, |v| fixed(v, 0))
}

pub fn format_deaths(value: f64) -> String {
    fixed(value, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: String,
    pub label: String,
    pub total_cost: f64,
    pub total_life_years: f64,
    pub ratio: Option<f64>,
    /// `None` on the baseline row.
    pub incremental_cost: Option<f64>,
    pub icer: Option<Icer>,
    pub bc_deaths: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub baseline: String,
    pub rows: Vec<ReportRow>,
}

const COLUMNS: [&str; 8] = [
    "target_age",
    "total_cost",
    "total_life_years",
    "ratio",
    "incremental_cost",
    "icer",
    "icer_note",
    "bc_deaths",
];

const TEXT_COLUMNS: [&str; 7] = [
    "Target age group",
    "Total costs",
    "Life years",
    "Ratio",
    "Incremental cost",
    "ICER",
    "BC deaths",
];

impl ReportRow {
    fn cells(&self) -> [String; 8] {
        [
            self.label.clone(),
            format_euros(self.total_cost),
            format_life_years(self.total_life_years),
            self.ratio.map(format_ratio).unwrap_or_else(|| "undefined".into()),
            self.incremental_cost.map(format_euros).unwrap_or_default(),
            self.icer.as_ref().map(format_icer).unwrap_or_default(),
            self.icer.as_ref().map(|i| i.note().to_string()).unwrap_or_default(),
            format_deaths(self.bc_deaths),
        ]
    }

    fn text_cells(&self) -> [String; 7] {
        let [label, cost, ly, ratio, inc, icer, note, deaths] = self.cells();
        let icer = match (icer.is_empty(), note.is_empty()) {
            (_, true) => icer,
            (true, false) => note,
            (false, false) => format!("{icer} ({})", note.split(' ').next().unwrap_or("")),
        };
        [label, cost, ly, ratio, inc, icer, deaths]
    }
}

impl ReportTable {
    /// Single-row table summarising one result.
    pub fn summary(result: &ScenarioResult) -> Self {
        ReportTable {
            title: format!("Scenario {}", result.name),
            baseline: result.name.clone(),
            rows: vec![ReportRow {
                id: result.name.clone(),
                label: result.label.clone(),
                total_cost: result.total_cost,
                total_life_years: result.total_life_years,
                ratio: result.cost_per_life_year,
                incremental_cost: None,
                icer: None,
                bc_deaths: result.bc_deaths,
            }],
        }
    }

    pub fn to_csv(&self) -> String {
        csv_string(&COLUMNS, self.rows.iter().map(|r| r.cells().to_vec()))
    }

    pub fn to_text(&self) -> String {
        let body: Vec<[String; 7]> = self.rows.iter().map(ReportRow::text_cells).collect();
        let mut widths = TEXT_COLUMNS.map(str::len);
        for cells in &body {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        let render = |cells: &[String], out: &mut String| {
            let line: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        };
        let header = TEXT_COLUMNS.map(String::from);
        render(&header, &mut out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(out, "{}", rule.join("  ")).unwrap();
        for cells in &body {
            render(cells, &mut out);
        }
        out
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// Per-age breakdown of one result, full precision.
pub fn per_age_csv(result: &ScenarioResult) -> String {
    let rows = (0..result.groups.len()).map(|j| {
        vec![
            result.groups[j].start.to_string(),
            result.groups[j].end.to_string(),
            match result.screening.get(j) {
                Some(Screening::Screen) => "screen".to_string(),
                Some(Screening::NoScreen) => "no_screen".to_string(),
                None => String::new(),
            },
            format!("{:?}", result.incidence.get(j).copied().unwrap_or(f64::NAN)),
            format!("{:?}", result.trajectory.get(j).copied().unwrap_or(f64::NAN)),
            format!("{:?}", result.cost_by_age.get(j).copied().unwrap_or(f64::NAN)),
        ]
    });
    csv_string(
        &[
            "age_start",
            "age_end",
            "decision",
            "incidence",
            "invited",
            "expected_cost",
        ],
        rows,
    )
}

/// Analytic-versus-simulated comparison for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub scenario: String,
    pub config: McConfig,
    pub cohort_size: f64,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(OracleCheck::passes)
    }

    fn cells(c: &OracleCheck) -> [String; 6] {
        [
            c.quantity.to_string(),
            format!("{:.6}", c.analytic),
            format!("{:.6}", c.simulated.mean),
            format!("{:.6}", c.simulated.std_error),
            format!("{:.3}", c.z_score()),
            if c.passes() { "pass" } else { "fail" }.to_string(),
        ]
    }

    pub fn to_csv(&self) -> String {
        csv_string(
            &["quantity", "analytic", "mc_mean", "mc_std_error", "z", "result"],
            self.checks.iter().map(|c| Self::cells(c).to_vec()),
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "Oracle check for scenario {}: seed {}, {} individuals, cohort {}, threshold {} SE",
            self.scenario, self.config.seed, self.config.individuals, self.cohort_size, ORACLE_STANDARD_ERRORS
        )
        .unwrap();
        let header = ["Quantity", "Analytic", "MC mean", "MC SE", "z", "Result"].map(String::from);
        let body: Vec<[String; 6]> = self.checks.iter().map(Self::cells).collect();
        let mut widths = header.clone().map(|h| h.len());
        for cells in &body {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.len());
            }
        }
        for cells in std::iter::once(&header).chain(&body) {
            let line: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(out, "{}", line.join("  ")).unwrap();
        }
        writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        out
    }
}

/// Compares every result with the baseline, keeping the input order. The
/// first result named `baseline_id` is the baseline; later results with the
/// same name are treated as alternatives.
pub fn emit_comparison(results: &[ScenarioResult], baseline_id: &str, title: &str) -> Result<ReportTable> {
    if results.len() < 2 {
        return Err(Error::Data(format!(
            "a comparison needs at least two scenarios, got {}",
            results.len()
        )));
    }
    let base_idx = results
        .iter()
        .position(|r| r.name == baseline_id)
        .ok_or_else(|| Error::Data(format!("unknown baseline scenario '{baseline_id}'")))?;
    let base = &results[base_idx];
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let is_base = i == base_idx;
            let icer = if is_base { None } else { Some(icer(base, r)?) };
            Ok(ReportRow {
                id: r.name.clone(),
                label: r.label.clone(),
                total_cost: r.total_cost,
                total_life_years: r.total_life_years,
                ratio: r.cost_per_life_year,
                incremental_cost: (!is_base).then_some(r.total_cost - base.total_cost),
                icer,
                bc_deaths: r.bc_deaths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportTable {
        title: title.to_string(),
        baseline: baseline_id.to_string(),
        rows,
    })
}

/// One comparison table per sensitivity case: every scenario of `scenarios`
/// is re-run with the case's transforms appended.
pub fn emit_sensitivity_suite(
    cases: &[SensitivityCase],
    scenarios: &[ScenarioSpec],
    baseline_id: &str,
    bundle: &DataBundle,
) -> Result<Vec<ReportTable>> {
    cases
        .iter()
        .map(|case| {
            let results = scenarios
                .iter()
                .map(|s| bundle.evaluate(&s.with_extra_transforms(&case.transforms)))
                .collect::<Result<Vec<_>>>()?;
            emit_comparison(&results, baseline_id, case.display_title())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cost_per_life_year, AgeGroup};

    fn result(name: &str, cost: f64, ly: f64, deaths: f64) -> ScenarioResult {
        ScenarioResult {
            name: name.into(),
            label: format!("{name} yr"),
            groups: vec![AgeGroup::new(46)],
            screening: vec![],
            incidence: vec![],
            trajectory: vec![],
            total_life_years: ly,
            total_cost: cost,
            cost_by_age: vec![],
            bc_deaths: deaths,
            cost_per_life_year: cost_per_life_year(cost, ly),
        }
    }

    #[test]
    fn rounding_ledger() {
        assert_eq!(format_euros(769_777.5), "769778");
        assert_eq!(format_euros(-0.4), "0");
        assert_eq!(format_life_years(3_860_854.84), "3860854.8");
        assert_eq!(format_ratio(245_498_112.0 / 3_860_854.8), "63.59");
        assert_eq!(format_deaths(1685.6), "1686");
    }

    #[test]
    fn table_one_shape() {
        let results = [
            result("50-69", 245_498_112.0, 3_860_854.8, 1686.0),
            result("46-69", 246_267_889.0, 3_861_654.4, 1658.0),
        ];
        let table = emit_comparison(&results, "50-69", "Main").unwrap();
        assert_eq!(table.rows[0].incremental_cost, None);
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[1], "50-69 yr,245498112,3860854.8,63.59,,,,1686");
        assert_eq!(lines[2], "46-69 yr,246267889,3861654.4,63.77,769777,963,,1658");
        let text = table.to_text();
        assert!(text.starts_with("Main\n"));
        assert!(text.contains("963"));
    }

    #[test]
    fn identical_scenarios_are_undefined() {
        let results = [result("a", 10.0, 5.0, 1.0), result("b", 10.0, 5.0, 1.0)];
        let table = emit_comparison(&results, "a", "t").unwrap();
        assert_eq!(table.rows[1].incremental_cost, Some(0.0));
        let csv = table.to_csv();
        assert!(csv
            .lines()
            .nth(2)
            .unwrap()
            .contains(",0,,undefined (no life-year difference),"));
        assert!(table.to_text().contains("undefined (no life-year difference)"));
    }

    #[test]
    fn dominant_rows_are_labelled() {
        let results = [result("a", 100.0, 5.0, 1.0), result("b", 90.0, 6.0, 1.0)];
        let table = emit_comparison(&results, "a", "t").unwrap();
        assert!(table.to_text().contains("-10 (dominant)"));
    }

    #[test]
    fn comparison_errors() {
        let results = [result("a", 1.0, 1.0, 0.0), result("b", 1.0, 1.0, 0.0)];
        assert!(emit_comparison(&results, "zzz", "t").is_err());
        assert!(emit_comparison(&results[..1], "a", "t").is_err());
    }
}
