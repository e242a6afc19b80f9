//! The CSV data bundle: one directory holding every input table.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Issue, Result};
use crate::mc::{estimate, oracle_checks, McConfig, McModel};
use crate::model::{
    AgeGrid, AgeGroup, CostBand, CostModel, CostRow, CostTriple, DiagnosedSurvival, GroupSurvival, ScenarioResult,
    Stage, SurvivalModel, UndiagnosedSurvival,
};
use crate::scenario::{prepare, Baseline, IncidenceCurve, PreparedScenario, ScenarioSpec, BASELINE_VARIANT};

use super::config::ScenarioFile;
use super::report::OracleReport;

pub const INCIDENCE_FILE: &str = "incidence.csv";
pub const STAGE_FILE: &str = "stage_dist.csv";
pub const SURVIVAL_FILE: &str = "survival.csv";
pub const INTERVAL_FILE: &str = "population_interval.csv";
pub const COST_FILES: [&str; 3] = ["cost_c1.csv", "cost_c2.csv", "cost_c3.csv"];
pub const SCENARIO_FILE: &str = "scenarios.cfg";

const INCIDENCE_HEADER: &[&str] = &["age_start", "age_end", "policy_variant", "rate"];
const STAGE_HEADER: &[&str] = &["age_start", "age_end", "stage", "prob"];
const SURVIVAL_HEADER: &[&str] = &[
    "age_start",
    "age_end",
    "stage",
    "t_years",
    "prob_death",
    "prob_bc_given_death",
];
const INTERVAL_HEADER: &[&str] = &["age_start", "age_end", "p_die_y0", "p_die_y1", "p_survive"];
const COST_HEADER: &[&str] = &["band_start", "band_end", "stage", "euros"];

#[derive(Debug, Deserialize)]
struct IncidenceRecord {
    age_start: u32,
    age_end: u32,
    policy_variant: String,
    rate: f64,
}

#[derive(Debug, Deserialize)]
struct StageRecord {
    age_start: u32,
    age_end: u32,
    stage: i32,
    prob: f64,
}

#[derive(Debug, Deserialize)]
struct SurvivalRecord {
    age_start: u32,
    age_end: u32,
    stage: i32,
    t_years: u32,
    prob_death: f64,
    prob_bc_given_death: f64,
}

#[derive(Debug, Deserialize)]
struct IntervalRecord {
    age_start: u32,
    age_end: u32,
    p_die_y0: f64,
    p_die_y1: f64,
    p_survive: f64,
}

#[derive(Debug, Deserialize)]
struct CostRecord {
    band_start: u32,
    band_end: u32,
    stage: i32,
    euros: f64,
}

/// Every input of the model, parsed and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBundle {
    pub dir: Option<PathBuf>,
    pub grid: AgeGrid,
    /// Incidence curves in order of first appearance; `baseline` covers every group.
    pub incidence: Vec<IncidenceCurve>,
    /// Conditional stage distribution per grid group.
    pub cond_stage: Vec<[f64; 5]>,
    pub survival: SurvivalModel,
    pub costs: CostModel,
    pub config: ScenarioFile,
}

/// Reads a CSV file with an exact header, collecting row-level issues.
fn read_csv<T: DeserializeOwned>(
    dir: &Path,
    name: &str,
    header: &[&str],
    issues: &mut Vec<Issue>,
) -> Option<Vec<(usize, T)>> {
    let path = dir.join(name);
    let mut reader = match csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(&path) {
        Ok(r) => r,
        Err(e) => {
            issues.push(Issue::new(name, format!("cannot open: {e}")));
            return None;
        }
    };
    match reader.headers() {
        Ok(h) if h.iter().eq(header.iter().copied()) => {}
        Ok(h) => {
            issues.push(Issue::at_line(
                name,
                1,
                format!(
                    "header is '{}', expected '{}'",
                    h.iter().collect::<Vec<_>>().join(","),
                    header.join(",")
                ),
            ));
            return None;
        }
        Err(e) => {
            issues.push(Issue::at_line(name, 1, format!("unreadable header: {e}")));
            return None;
        }
    }
    let mut rows = Vec::new();
    for record in reader.deserialize::<T>() {
        match record {
            Ok(r) => rows.push((rows.len() + 2, r)),
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                issues.push(Issue::at_line(name, line, format!("malformed row: {e}")));
            }
        }
    }
    Some(rows)
}

fn check_group(name: &str, line: usize, start: u32, end: u32, issues: &mut Vec<Issue>) -> bool {
    if end != start + 1 {
        issues.push(Issue::at_line(
            name,
            line,
            format!("age group {start}-{end} is not a two-year band"),
        ));
        return false;
    }
    true
}

fn diagnosed_stage(name: &str, line: usize, code: i32, issues: &mut Vec<Issue>) -> Option<usize> {
    match Stage::from_code(code).and_then(Stage::diagnosed_index) {
        Some(k) => Some(k),
        None => {
            issues.push(Issue::at_line(
                name,
                line,
                format!("stage {code} is not a diagnosed stage (0..=4)"),
            ));
            None
        }
    }
}

type SurvivalCells = BTreeMap<(u32, i32), BTreeMap<u32, (f64, f64)>>;

impl DataBundle {
    /// Loads and validates every file under `dir`, reporting all failures at once.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::validation(
                dir.display().to_string(),
                "data directory does not exist",
            ));
        }
        let mut issues = Vec::new();

        let stages: Option<Vec<(usize, StageRecord)>> = read_csv(dir, STAGE_FILE, STAGE_HEADER, &mut issues);
        let incidence: Option<Vec<(usize, IncidenceRecord)>> =
            read_csv(dir, INCIDENCE_FILE, INCIDENCE_HEADER, &mut issues);
        let survival: Option<Vec<(usize, SurvivalRecord)>> = read_csv(dir, SURVIVAL_FILE, SURVIVAL_HEADER, &mut issues);
        let interval: Option<Vec<(usize, IntervalRecord)>> = read_csv(dir, INTERVAL_FILE, INTERVAL_HEADER, &mut issues);
        let costs: Vec<Option<Vec<(usize, CostRecord)>>> = COST_FILES
            .iter()
            .map(|f| read_csv(dir, f, COST_HEADER, &mut issues))
            .collect();
        let config_path = dir.join(SCENARIO_FILE);
        let config = match fs::read_to_string(&config_path) {
            Ok(text) => match ScenarioFile::parse(&text, SCENARIO_FILE) {
                Ok(c) => Some(c),
                Err(e) => {
                    issues.extend(e.issues().iter().cloned());
                    None
                }
            },
            Err(e) => {
                issues.push(Issue::new(SCENARIO_FILE, format!("cannot read: {e}")));
                None
            }
        };

        // Grid and conditional stage mix.
        let mut grid = None;
        let mut cond_stage = Vec::new();
        if let Some(rows) = stages {
            let mut by_group: BTreeMap<u32, [Option<f64>; 5]> = BTreeMap::new();
            for (line, r) in rows {
                if !check_group(STAGE_FILE, line, r.age_start, r.age_end, &mut issues) {
                    continue;
                }
                let Some(k) = diagnosed_stage(STAGE_FILE, line, r.stage, &mut issues) else {
                    continue;
                };
                let slot = &mut by_group.entry(r.age_start).or_default()[k];
                if slot.replace(r.prob).is_some() {
                    issues.push(Issue::at_line(
                        STAGE_FILE,
                        line,
                        format!("duplicate row for {}-{} stage {}", r.age_start, r.age_end, r.stage),
                    ));
                }
            }
            let groups: Vec<AgeGroup> = by_group.keys().map(|s| AgeGroup::new(*s)).collect();
            match AgeGrid::from_groups(groups) {
                Ok(g) => grid = Some(g),
                Err(e) => issues.extend(e.issues().iter().map(|i| Issue::new(STAGE_FILE, i.message.clone()))),
            }
            for (start, probs) in &by_group {
                let g = AgeGroup::new(*start);
                let mut row = [0.0; 5];
                for (k, p) in probs.iter().enumerate() {
                    match p {
                        Some(p) => row[k] = *p,
                        None => issues.push(Issue::new(
                            STAGE_FILE,
                            format!("age group {g} has no row for stage {k}"),
                        )),
                    }
                }
                if row.iter().any(|p| *p < 0.0) {
                    issues.push(Issue::new(
                        STAGE_FILE,
                        format!("age group {g} has a negative stage probability"),
                    ));
                }
                let total = crate::sum::compensated_sum(row);
                if (total - 1.0).abs() > crate::model::PROBABILITY_TOLERANCE {
                    issues.push(Issue::new(
                        STAGE_FILE,
                        format!("age group {g}: stage distribution sums to {total}, expected 1"),
                    ));
                }
                cond_stage.push(row);
            }
        }

        let curves = incidence
            .map(|rows| parse_incidence(rows, grid.as_ref(), &mut issues))
            .unwrap_or_default();

        let survival = match (&grid, survival, interval) {
            (Some(grid), Some(s), Some(i)) => parse_survival(grid, s, i, &mut issues),
            _ => None,
        };

        let cost_model = match (&costs[0], &costs[1], &costs[2], &config) {
            (Some(c1), Some(c2), Some(c3), Some(cfg)) => {
                parse_costs([c1, c2, c3], cfg.screening_unit_cost, grid.as_ref(), &mut issues)
            }
            _ => None,
        };

        if let (Some(cfg), Some(grid)) = (&config, &grid) {
            for s in &cfg.scenarios {
                for variant in scenario_curves(s, &curves) {
                    if !curves.iter().any(|c| c.name == variant) {
                        issues.push(Issue::new(
                            SCENARIO_FILE,
                            format!("scenario '{}' refers to unknown incidence curve '{variant}'", s.id),
                        ));
                    }
                }
                let (lo, hi) = s.screen_range();
                if !grid.groups().iter().any(|g| g.within(lo, hi)) {
                    issues.push(Issue::new(
                        SCENARIO_FILE,
                        format!("scenario '{}' screens no age group of the grid ({lo}-{hi})", s.id),
                    ));
                }
            }
        }

        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let (Some(grid), Some(survival), Some(costs), Some(config)) = (grid, survival, cost_model, config) else {
            return Err(Error::validation(dir.display().to_string(), "incomplete bundle"));
        };
        Ok(DataBundle {
            dir: Some(dir.to_path_buf()),
            grid,
            incidence: curves,
            cond_stage,
            survival,
            costs,
            config,
        })
    }

    /// Writes every table in canonical form; `load` on the result gives back
    /// an equal bundle.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(path, e))
        };

        let mut text = format!("{}\n", INCIDENCE_HEADER.join(","));
        for c in &self.incidence {
            for (g, r) in &c.rates {
                text += &format!("{},{},{},{}\n", g.start, g.end, c.name, r);
            }
        }
        put(INCIDENCE_FILE, text)?;

        let mut text = format!("{}\n", STAGE_HEADER.join(","));
        for (g, row) in self.grid.groups().iter().zip(&self.cond_stage) {
            for (k, p) in row.iter().enumerate() {
                text += &format!("{},{},{},{}\n", g.start, g.end, k, p);
            }
        }
        put(STAGE_FILE, text)?;

        let mut surv = format!("{}\n", SURVIVAL_HEADER.join(","));
        let mut interval = format!("{}\n", INTERVAL_HEADER.join(","));
        for gs in &self.survival.groups {
            let g = gs.group;
            let u = &gs.undiagnosed;
            interval += &format!(
                "{},{},{},{},{}\n",
                g.start, g.end, u.p_die_year0, u.p_die_year1, u.p_survive
            );
            for (t, p) in u.pmf.iter().enumerate() {
                surv += &format!("{},{},-1,{},{},0\n", g.start, g.end, t, p);
            }
            for (k, d) in gs.diagnosed.iter().enumerate() {
                for (t, (p, bc)) in d.pmf.iter().zip(&d.bc_share).enumerate().skip(1) {
                    surv += &format!("{},{},{},{},{},{}\n", g.start, g.end, k, t, p, bc);
                }
            }
        }
        put(SURVIVAL_FILE, surv)?;
        put(INTERVAL_FILE, interval)?;

        let pick: [fn(&CostTriple) -> f64; 3] = [|c| c.first_year, |c| c.maintenance, |c| c.terminal];
        for (name, get) in COST_FILES.iter().zip(pick) {
            let mut text = format!("{}\n", COST_HEADER.join(","));
            for row in &self.costs.rows {
                for (k, triple) in row.stages.iter().enumerate() {
                    text += &format!("{},{},{},{}\n", row.band.start, row.band.end, k, get(triple));
                }
            }
            put(name, text)?;
        }

        let mut config = self.config.clone();
        config.screening_unit_cost = self.costs.screening_unit_cost;
        put(SCENARIO_FILE, config.to_text())
    }

    /// Checks an in-memory bundle: every table against the grid and every
    /// scenario of the scenario file.
    pub fn validate(&self) -> Result<()> {
        self.survival.check_grid(&self.grid)?;
        self.survival.validate()?;
        self.costs.validate(&self.grid)?;
        for spec in &self.config.scenarios {
            self.prepare(spec)?;
        }
        Ok(())
    }

    pub fn baseline(&self) -> Baseline<'_> {
        Baseline {
            grid: &self.grid,
            cond_stage: &self.cond_stage,
            incidence: &self.incidence,
            costs: &self.costs,
        }
    }

    pub fn prepare(&self, spec: &ScenarioSpec) -> Result<PreparedScenario> {
        prepare(&self.baseline(), spec)
    }

    pub fn evaluate(&self, spec: &ScenarioSpec) -> Result<ScenarioResult> {
        self.prepare(spec)?
            .evaluate(&self.grid, &self.survival, self.config.cohort_size)
    }

    /// Runs the Monte Carlo oracle against the analytic result of `spec`.
    pub fn oracle(&self, spec: &ScenarioSpec, config: &McConfig) -> Result<OracleReport> {
        let prepared = self.prepare(spec)?;
        let analytic = prepared.evaluate(&self.grid, &self.survival, self.config.cohort_size)?;
        let model = McModel::new(
            &self.grid,
            &prepared.policy,
            &prepared.epi,
            &self.survival,
            &prepared.costs,
        )?;
        let estimate = estimate(config, &model, self.config.cohort_size)?;
        Ok(OracleReport {
            scenario: spec.id.clone(),
            config: *config,
            cohort_size: self.config.cohort_size,
            checks: oracle_checks(&analytic, &estimate).to_vec(),
        })
    }

    /// Every scenario of the scenario file, in file order.
    pub fn evaluate_all(&self) -> Result<Vec<ScenarioResult>> {
        self.config.scenarios.iter().map(|s| self.evaluate(s)).collect()
    }
}

fn scenario_curves<'a>(spec: &'a ScenarioSpec, curves: &[IncidenceCurve]) -> Vec<&'a str> {
    let mut v = vec![spec.base_variant()];
    if spec.extension.older() {
        v.push(spec.older_variant(curves));
    }
    v
}

fn parse_incidence(
    rows: Vec<(usize, IncidenceRecord)>,
    grid: Option<&AgeGrid>,
    issues: &mut Vec<Issue>,
) -> Vec<IncidenceCurve> {
    let mut curves: Vec<IncidenceCurve> = Vec::new();
    for (line, r) in rows {
        if !check_group(INCIDENCE_FILE, line, r.age_start, r.age_end, issues) {
            continue;
        }
        if !(0.0..=1.0).contains(&r.rate) {
            issues.push(Issue::at_line(
                INCIDENCE_FILE,
                line,
                format!("incidence {} outside [0, 1]", r.rate),
            ));
        }
        let g = AgeGroup::new(r.age_start);
        if let Some(grid) = grid {
            if grid.index_of(g).is_none() {
                issues.push(Issue::at_line(
                    INCIDENCE_FILE,
                    line,
                    format!("age group {g} is not in the stage table"),
                ));
            }
        }
        let curve = match curves.iter().position(|c| c.name == r.policy_variant) {
            Some(i) => &mut curves[i],
            None => {
                curves.push(IncidenceCurve {
                    name: r.policy_variant.clone(),
                    rates: Vec::new(),
                });
                curves.last_mut().unwrap()
            }
        };
        if curve.rate(g.start).is_some() {
            issues.push(Issue::at_line(
                INCIDENCE_FILE,
                line,
                format!("duplicate rate for {g} in '{}'", curve.name),
            ));
        }
        curve.rates.push((g, r.rate));
    }
    for c in &mut curves {
        c.rates.sort_by_key(|(g, _)| g.start);
    }
    match (curves.iter().find(|c| c.name == BASELINE_VARIANT), grid) {
        (None, _) => issues.push(Issue::new(
            INCIDENCE_FILE,
            format!("no '{BASELINE_VARIANT}' policy variant"),
        )),
        (Some(base), Some(grid)) => {
            for g in grid.groups() {
                if base.rate(g.start).is_none() {
                    issues.push(Issue::new(
                        INCIDENCE_FILE,
                        format!("'{BASELINE_VARIANT}' has no rate for {g}"),
                    ));
                }
            }
        }
        _ => {}
    }
    curves
}

fn parse_survival(
    grid: &AgeGrid,
    rows: Vec<(usize, SurvivalRecord)>,
    interval: Vec<(usize, IntervalRecord)>,
    issues: &mut Vec<Issue>,
) -> Option<SurvivalModel> {
    let before = issues.len();
    let mut cells: SurvivalCells = BTreeMap::new();
    for (line, r) in rows {
        if !check_group(SURVIVAL_FILE, line, r.age_start, r.age_end, issues) {
            continue;
        }
        let Some(stage) = Stage::from_code(r.stage) else {
            issues.push(Issue::at_line(
                SURVIVAL_FILE,
                line,
                format!("unknown stage {}", r.stage),
            ));
            continue;
        };
        if stage.is_diagnosed() && r.t_years == 0 {
            issues.push(Issue::at_line(
                SURVIVAL_FILE,
                line,
                "diagnosed stages start at t_years = 1",
            ));
            continue;
        }
        if !stage.is_diagnosed() && r.prob_bc_given_death != 0.0 {
            issues.push(Issue::at_line(
                SURVIVAL_FILE,
                line,
                "stage -1 cannot die of breast cancer",
            ));
        }
        if !(0.0..=1.0).contains(&r.prob_death) || !(0.0..=1.0).contains(&r.prob_bc_given_death) {
            issues.push(Issue::at_line(SURVIVAL_FILE, line, "probability outside [0, 1]"));
        }
        let horizon = AgeGroup::new(r.age_start).max_years_left() as u32;
        if r.t_years > horizon {
            issues.push(Issue::at_line(
                SURVIVAL_FILE,
                line,
                format!(
                    "t_years {} is past the {horizon}-year horizon of {}-{}",
                    r.t_years, r.age_start, r.age_end
                ),
            ));
            continue;
        }
        let by_t = cells.entry((r.age_start, r.stage)).or_default();
        if by_t.insert(r.t_years, (r.prob_death, r.prob_bc_given_death)).is_some() {
            issues.push(Issue::at_line(SURVIVAL_FILE, line, "duplicate (age, stage, t) row"));
        }
    }

    let mut splits: BTreeMap<u32, (f64, f64, f64)> = BTreeMap::new();
    for (line, r) in interval {
        if !check_group(INTERVAL_FILE, line, r.age_start, r.age_end, issues) {
            continue;
        }
        if splits
            .insert(r.age_start, (r.p_die_y0, r.p_die_y1, r.p_survive))
            .is_some()
        {
            issues.push(Issue::at_line(INTERVAL_FILE, line, "duplicate age group"));
        }
    }

    let mut groups = Vec::new();
    for g in grid.groups() {
        let pmf_of = |stage: i32, issues: &mut Vec<Issue>| -> Option<(Vec<f64>, Vec<f64>)> {
            let Some(by_t) = cells.get(&(g.start, stage)) else {
                issues.push(Issue::new(
                    SURVIVAL_FILE,
                    format!("no rows for age group {g} stage {stage}"),
                ));
                return None;
            };
            let len = *by_t.keys().last().unwrap() as usize + 1;
            let mut pmf = vec![0.0; len];
            let mut bc = vec![0.0; len];
            for (t, (p, c)) in by_t {
                pmf[*t as usize] = *p;
                bc[*t as usize] = *c;
            }
            Some((pmf, bc))
        };
        let Some(&(p0, p1, ps)) = splits.get(&g.start) else {
            issues.push(Issue::new(INTERVAL_FILE, format!("no row for age group {g}")));
            continue;
        };
        let undiagnosed = pmf_of(-1, issues).map(|(pmf, _)| UndiagnosedSurvival {
            p_die_year0: p0,
            p_die_year1: p1,
            p_survive: ps,
            pmf,
        });
        let diagnosed: Vec<Option<DiagnosedSurvival>> = Stage::DIAGNOSED
            .iter()
            .map(|s| pmf_of(s.code(), issues).map(|(pmf, bc_share)| DiagnosedSurvival { pmf, bc_share }))
            .collect();
        if let (Some(u), true) = (undiagnosed, diagnosed.iter().all(Option::is_some)) {
            let mut it = diagnosed.into_iter().flatten();
            groups.push(GroupSurvival {
                group: *g,
                undiagnosed: u,
                diagnosed: std::array::from_fn(|_| it.next().unwrap()),
            });
        }
    }
    let extra: Vec<u32> = splits
        .keys()
        .filter(|s| grid.index_of_start(**s).is_none())
        .copied()
        .collect();
    for s in extra {
        issues.push(Issue::new(
            INTERVAL_FILE,
            format!("age group starting at {s} is not in the stage table"),
        ));
    }
    if issues.len() > before {
        return None;
    }
    let model = SurvivalModel { groups };
    if let Err(e) = model.validate() {
        issues.extend(
            e.issues()
                .iter()
                .map(|i| Issue::new(SURVIVAL_FILE, format!("{}: {}", i.source, i.message))),
        );
        return None;
    }
    Some(model)
}

fn parse_costs(
    files: [&Vec<(usize, CostRecord)>; 3],
    screening_unit_cost: f64,
    grid: Option<&AgeGrid>,
    issues: &mut Vec<Issue>,
) -> Option<CostModel> {
    let before = issues.len();
    let mut table: BTreeMap<(u32, u32), [[Option<f64>; 3]; 5]> = BTreeMap::new();
    for (which, (name, rows)) in COST_FILES.iter().zip(files).enumerate() {
        for (line, r) in rows {
            let Some(k) = diagnosed_stage(name, *line, r.stage, issues) else {
                continue;
            };
            if r.band_end < r.band_start {
                issues.push(Issue::at_line(*name, *line, "band end precedes band start"));
                continue;
            }
            if !(r.euros >= 0.0) {
                issues.push(Issue::at_line(*name, *line, format!("negative cost {}", r.euros)));
            }
            let slot = &mut table.entry((r.band_start, r.band_end)).or_default()[k][which];
            if slot.replace(r.euros).is_some() {
                issues.push(Issue::at_line(*name, *line, "duplicate (band, stage) row"));
            }
        }
    }
    let mut rows = Vec::new();
    for ((start, end), cells) in &table {
        let mut stages = [CostTriple::default(); 5];
        for (k, c) in cells.iter().enumerate() {
            for (which, v) in c.iter().enumerate() {
                match v {
                    Some(v) => match which {
                        0 => stages[k].first_year = *v,
                        1 => stages[k].maintenance = *v,
                        _ => stages[k].terminal = *v,
                    },
                    None => issues.push(Issue::new(
                        COST_FILES[which],
                        format!("band {start}-{end} has no row for stage {k}"),
                    )),
                }
            }
        }
        rows.push(CostRow {
            band: CostBand {
                start: *start,
                end: *end,
            },
            stages,
        });
    }
    let model = CostModel {
        screening_unit_cost,
        rows,
    };
    if let Some(grid) = grid {
        if let Err(e) = model.validate(grid) {
            issues.extend(e.issues().iter().map(|i| Issue::new("cost files", i.message.clone())));
        }
    }
    (issues.len() == before).then_some(model)
}
