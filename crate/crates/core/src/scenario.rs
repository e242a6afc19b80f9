//! Policy scenarios derived from a baseline data set.
//!
//! Extensions move the screened age range and rewrite the epidemiology of the
//! affected groups; sensitivity transforms then perturb incidence, stage mix
//! or treatment costs. Survival data is never touched: a scenario only
//! produces a new [`EpidemiologyTable`] and [`CostModel`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Issue, Result};
use crate::model::{
    evaluate, AgeGrid, AgeGroup, CostModel, EpiRow, EpidemiologyTable, Policy, ScenarioResult, Stage, SurvivalModel,
};
use crate::sum::NeumaierSum;

/// Incidence multipliers for the first screening rounds of a younger start,
/// keyed by group start age.
pub const YOUNGER_INCIDENCE_MULTIPLIERS: [(u32, f64); 3] = [(46, 1.28), (48, 1.247), (50, 0.881)];

/// `(target start age, source start age)` stage-mix copies for a younger start.
pub const YOUNGER_STAGE_SOURCES: [(u32, u32); 3] = [(46, 50), (48, 52), (50, 52)];

/// Last group whose stage mix seeds the older extension.
pub const OLDER_SOURCE_START: u32 = 68;
pub const OLDER_FIRST_START: u32 = 70;
/// From 74-75 on, each older group takes the mix of the group this many
/// years younger.
pub const OLDER_SHIFT_YEARS: u32 = 4;

/// Screened ages of the current programme.
pub const CURRENT_SCREEN_AGES: (u32, u32) = (50, 69);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extension {
    None,
    Younger,
    Older,
    Both,
}

impl Extension {
    pub fn younger(self) -> bool {
        matches!(self, Extension::Younger | Extension::Both)
    }

    pub fn older(self) -> bool {
        matches!(self, Extension::Older | Extension::Both)
    }

    /// Screened age range implied by the extension. Groups are screened only
    /// when wholly inside the range, so 50-74 ends with 72-73.
    pub fn screen_ages(self) -> (u32, u32) {
        let (lo, hi) = CURRENT_SCREEN_AGES;
        (if self.younger() { 46 } else { lo }, if self.older() { 74 } else { hi })
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extension::None => "none",
            Extension::Younger => "younger",
            Extension::Older => "older",
            Extension::Both => "both",
        })
    }
}

impl FromStr for Extension {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Extension::None),
            "younger" => Ok(Extension::Younger),
            "older" => Ok(Extension::Older),
            "both" => Ok(Extension::Both),
            other => Err(format!("unknown extension '{other}' (none|younger|older|both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    IncidenceScale,
    CostScale,
    StageShift,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::IncidenceScale => "incidence_scale",
            TransformKind::CostScale => "cost_scale",
            TransformKind::StageShift => "stage_shift",
        })
    }
}

impl FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "incidence_scale" | "incidence" => Ok(TransformKind::IncidenceScale),
            "cost_scale" | "cost" => Ok(TransformKind::CostScale),
            "stage_shift" | "stage" => Ok(TransformKind::StageShift),
            other => Err(format!(
                "unknown transform '{other}' (incidence_scale|cost_scale|stage_shift)"
            )),
        }
    }
}

/// Age groups a transform applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgeScope {
    All,
    /// The newly screened groups of the scenario's extension.
    Auto,
    /// Inclusive age ranges; a group is in scope when it lies inside one.
    Ranges(Vec<(u32, u32)>),
}

impl AgeScope {
    /// In-scope flag per grid group.
    pub fn mask(&self, grid: &AgeGrid, kind: TransformKind, extension: Extension) -> Vec<bool> {
        grid.groups()
            .iter()
            .map(|g| match self {
                AgeScope::All => true,
                AgeScope::Ranges(ranges) => ranges.iter().any(|&(lo, hi)| g.within(lo, hi)),
                AgeScope::Auto => auto_scope(*g, kind, extension),
            })
            .collect()
    }
}

fn auto_scope(g: AgeGroup, kind: TransformKind, extension: Extension) -> bool {
    let older = extension.older() && g.start >= OLDER_FIRST_START;
    match kind {
        TransformKind::CostScale => true,
        TransformKind::IncidenceScale => match extension {
            Extension::None => false,
            Extension::Younger => g.within(46, 69),
            Extension::Older => older,
            Extension::Both => true,
        },
        TransformKind::StageShift => (extension.younger() && g.within(46, 51)) || older,
    }
}

impl fmt::Display for AgeScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgeScope::All => f.write_str("all"),
            AgeScope::Auto => f.write_str("auto"),
            AgeScope::Ranges(ranges) => {
                let parts: Vec<String> = ranges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                f.write_str(&parts.join("+"))
            }
        }
    }
}

impl FromStr for AgeScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(AgeScope::All),
            "auto" => Ok(AgeScope::Auto),
            other => other
                .split('+')
                .map(parse_age_range)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(AgeScope::Ranges),
        }
    }
}

/// Parses `"46-69"` into `(46, 69)`.
pub fn parse_age_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s
        .trim()
        .split_once('-')
        .ok_or_else(|| format!("age range '{s}' is not of the form LO-HI"))?;
    let lo: u32 = a.trim().parse().map_err(|_| format!("bad age '{a}' in '{s}'"))?;
    let hi: u32 = b.trim().parse().map_err(|_| format!("bad age '{b}' in '{s}'"))?;
    if hi < lo {
        return Err(format!("age range '{s}' is empty"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityTransform {
    pub kind: TransformKind,
    /// Relative change for scale transforms, absolute probability for stage shifts.
    pub magnitude: f64,
    pub scope: AgeScope,
}

impl SensitivityTransform {
    pub fn new(kind: TransformKind, magnitude: f64, scope: AgeScope) -> Self {
        SensitivityTransform { kind, magnitude, scope }
    }
}

impl fmt::Display for SensitivityTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.kind, self.magnitude, self.scope)
    }
}

impl FromStr for SensitivityTransform {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [kind, magnitude, scope] = parts[..] else {
            return Err(format!("transform '{s}' is not 'kind,magnitude,scope'"));
        };
        let magnitude: f64 = magnitude.parse().map_err(|_| format!("bad magnitude '{magnitude}'"))?;
        if !magnitude.is_finite() {
            return Err(format!("magnitude '{magnitude}' is not finite"));
        }
        Ok(SensitivityTransform::new(kind.parse()?, magnitude, scope.parse()?))
    }
}

/// Incidence rates for part of the grid under one policy variant.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceCurve {
    pub name: String,
    pub rates: Vec<(AgeGroup, f64)>,
}

impl IncidenceCurve {
    pub fn rate(&self, start: u32) -> Option<f64> {
        self.rates.iter().find(|(g, _)| g.start == start).map(|(_, r)| *r)
    }
}

/// One policy to evaluate, as written in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: String,
    /// Row label in reports; defaults to the screened age range.
    pub label: Option<String>,
    pub extension: Extension,
    /// Screened ages; defaults to [`Extension::screen_ages`].
    pub screen_ages: Option<(u32, u32)>,
    /// Incidence curve for the frozen baseline snapshot.
    pub incidence_variant: Option<String>,
    /// Incidence curve for groups from 70 on under an older extension.
    pub older_incidence: Option<String>,
    pub transforms: Vec<SensitivityTransform>,
}

pub const BASELINE_VARIANT: &str = "baseline";

impl ScenarioSpec {
    pub fn new(id: impl Into<String>, extension: Extension) -> Self {
        ScenarioSpec {
            id: id.into(),
            label: None,
            extension,
            screen_ages: None,
            incidence_variant: None,
            older_incidence: None,
            transforms: Vec::new(),
        }
    }

    pub fn screen_range(&self) -> (u32, u32) {
        self.screen_ages.unwrap_or_else(|| self.extension.screen_ages())
    }

    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let (lo, hi) = self.screen_range();
            format!("{lo}-{hi} yr")
        })
    }

    pub fn base_variant(&self) -> &str {
        self.incidence_variant.as_deref().unwrap_or(BASELINE_VARIANT)
    }

    /// Older-ages curve: explicit, else `both` for a two-way extension when
    /// present, else `older`.
    pub fn older_variant<'a>(&'a self, curves: &[IncidenceCurve]) -> &'a str {
        if let Some(v) = &self.older_incidence {
            return v;
        }
        if self.extension == Extension::Both && curves.iter().any(|c| c.name == "both") {
            "both"
        } else {
            "older"
        }
    }

    pub fn with_extra_transforms(&self, extra: &[SensitivityTransform]) -> Self {
        let mut spec = self.clone();
        spec.transforms.extend_from_slice(extra);
        spec
    }
}

/// Rewrites groups 46-51 for a screening start at 46. Reads only `base`.
pub fn apply_younger_extension(base: &EpidemiologyTable) -> Result<EpidemiologyTable> {
    let mut out = base.clone();
    younger_into(base, &mut out)?;
    out.validate()?;
    Ok(out)
}

fn row_index(table: &EpidemiologyTable, start: u32) -> Result<usize> {
    table
        .rows
        .iter()
        .position(|r| r.group.start == start)
        .ok_or_else(|| Error::Data(format!("epidemiology table has no group starting at {start}")))
}

fn younger_into(base: &EpidemiologyTable, out: &mut EpidemiologyTable) -> Result<()> {
    for (target, source) in YOUNGER_STAGE_SOURCES {
        let src = base.rows[row_index(base, source)?].cond_stage;
        let t = row_index(out, target)?;
        out.rows[t].cond_stage = src;
    }
    let mut issues = Vec::new();
    for (start, factor) in YOUNGER_INCIDENCE_MULTIPLIERS {
        let b = base.rows[row_index(base, start)?].incidence;
        let t = row_index(out, start)?;
        let scaled = b * factor;
        if scaled > 1.0 {
            issues.push(Issue::new(
                format!("age group {}", out.rows[t].group),
                format!("younger-start incidence {scaled} exceeds 1"),
            ));
        }
        out.rows[t].incidence = scaled;
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(issues))
    }
}

/// Rewrites groups from 70 on for screening continued to 74 (groups 70-71 and 72-73).
///
/// 70-71 and 72-73 take the stage mix of 68-69; every later group takes the
/// mix of the group four years younger. All mixes are read from `base`.
/// Incidence for those groups comes from `older_incidence`.
pub fn apply_older_extension(base: &EpidemiologyTable, older_incidence: &IncidenceCurve) -> Result<EpidemiologyTable> {
    let mut out = base.clone();
    older_into(base, older_incidence, &mut out)?;
    out.validate()?;
    Ok(out)
}

fn older_into(base: &EpidemiologyTable, older_incidence: &IncidenceCurve, out: &mut EpidemiologyTable) -> Result<()> {
    let mut missing = Vec::new();
    for t in 0..out.rows.len() {
        let start = out.rows[t].group.start;
        if start < OLDER_FIRST_START {
            continue;
        }
        let source = if start < OLDER_FIRST_START + 4 {
            OLDER_SOURCE_START
        } else {
            start - OLDER_SHIFT_YEARS
        };
        out.rows[t].cond_stage = base.rows[row_index(base, source)?].cond_stage;
        match older_incidence.rate(start) {
            Some(rate) => out.rows[t].incidence = rate,
            None => missing.push(out.rows[t].group.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "incidence curve '{}' has no rate for age group(s) {}",
            older_incidence.name,
            missing.join(", ")
        )));
    }
    Ok(())
}

fn require_kind(t: &SensitivityTransform, kind: TransformKind) -> Result<()> {
    if t.kind != kind {
        return Err(Error::Domain(format!("expected a {kind} transform, got {}", t.kind)));
    }
    Ok(())
}

fn grid_of(epi: &EpidemiologyTable) -> Result<AgeGrid> {
    AgeGrid::from_groups(epi.rows.iter().map(|r| r.group).collect())
}

/// Multiplies in-scope incidence by `1 + magnitude`.
pub fn apply_incidence_scale(
    t: &SensitivityTransform,
    epi: &EpidemiologyTable,
    extension: Extension,
) -> Result<EpidemiologyTable> {
    require_kind(t, TransformKind::IncidenceScale)?;
    let mask = t.scope.mask(&grid_of(epi)?, t.kind, extension);
    let mut out = epi.clone();
    scale_incidence(&mut out, &mask, t.magnitude)?;
    Ok(out)
}

fn scale_incidence(epi: &mut EpidemiologyTable, mask: &[bool], magnitude: f64) -> Result<()> {
    let factor = 1.0 + magnitude;
    let mut issues = Vec::new();
    for (row, _) in epi.rows.iter_mut().zip(mask).filter(|(_, m)| **m) {
        row.incidence *= factor;
        if !(0.0..=1.0).contains(&row.incidence) {
            issues.push(Issue::new(
                format!("age group {}", row.group),
                format!("scaled incidence {} outside [0, 1]", row.incidence),
            ));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(issues))
    }
}

/// Multiplies every treatment cost by `1 + magnitude`; screening cost is kept.
pub fn apply_cost_scale(t: &SensitivityTransform, costs: &CostModel) -> Result<CostModel> {
    require_kind(t, TransformKind::CostScale)?;
    let factor = 1.0 + t.magnitude;
    if factor < 0.0 {
        return Err(Error::Domain(format!(
            "cost scale {} makes costs negative",
            t.magnitude
        )));
    }
    Ok(costs.with_treatment_scaled(factor))
}

/// Moves `magnitude` of conditional probability from regional to localized
/// disease on in-scope groups. Negative results are errors, never clamped.
pub fn apply_stage_shift(
    t: &SensitivityTransform,
    epi: &EpidemiologyTable,
    extension: Extension,
) -> Result<EpidemiologyTable> {
    require_kind(t, TransformKind::StageShift)?;
    let mask = t.scope.mask(&grid_of(epi)?, t.kind, extension);
    let offsets: Vec<f64> = mask.iter().map(|m| if *m { t.magnitude } else { 0.0 }).collect();
    let mut out = epi.clone();
    shift_stages(&mut out, &offsets)?;
    Ok(out)
}

fn shifted(row: &EpiRow, offset: f64) -> (f64, f64) {
    let loc = Stage::Localized.diagnosed_index().expect("diagnosed");
    let reg = Stage::Regional.diagnosed_index().expect("diagnosed");
    (row.cond_stage[loc] + offset, row.cond_stage[reg] - offset)
}

fn shift_issues(epi: &EpidemiologyTable, offsets: &[f64]) -> Vec<Issue> {
    epi.rows
        .iter()
        .zip(offsets)
        .filter(|(_, o)| **o != 0.0)
        .filter_map(|(row, o)| {
            let (loc, reg) = shifted(row, *o);
            (loc < 0.0 || reg < 0.0 || loc > 1.0 || reg > 1.0).then(|| {
                Issue::new(
                    format!("age group {}", row.group),
                    format!("stage shift {o} gives localized {loc}, regional {reg}"),
                )
            })
        })
        .collect()
}

fn shift_stages(epi: &mut EpidemiologyTable, offsets: &[f64]) -> Result<()> {
    let issues = shift_issues(epi, offsets);
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    let loc = Stage::Localized.diagnosed_index().expect("diagnosed");
    let reg = Stage::Regional.diagnosed_index().expect("diagnosed");
    for (row, o) in epi.rows.iter_mut().zip(offsets) {
        if *o != 0.0 {
            let (l, r) = shifted(row, *o);
            row.cond_stage[loc] = l;
            row.cond_stage[reg] = r;
        }
    }
    Ok(())
}

/// Read-only view of the baseline data every scenario is derived from.
#[derive(Debug, Clone, Copy)]
pub struct Baseline<'a> {
    pub grid: &'a AgeGrid,
    /// Conditional stage distribution per grid group.
    pub cond_stage: &'a [[f64; 5]],
    pub incidence: &'a [IncidenceCurve],
    pub costs: &'a CostModel,
}

impl Baseline<'_> {
    pub fn curve(&self, name: &str) -> Result<&IncidenceCurve> {
        self.incidence
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Data(format!("no incidence curve named '{name}'")))
    }

    /// Epidemiology table from `variant` incidence and the baseline stage mix.
    pub fn table(&self, variant: &str) -> Result<EpidemiologyTable> {
        let curve = self.curve(variant)?;
        let rows = self
            .grid
            .groups()
            .iter()
            .zip(self.cond_stage)
            .map(|(g, cond)| {
                let incidence = curve
                    .rate(g.start)
                    .ok_or_else(|| Error::Data(format!("incidence curve '{variant}' has no rate for {g}")))?;
                Ok(EpiRow {
                    group: *g,
                    incidence,
                    cond_stage: *cond,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EpidemiologyTable::new(rows)
    }
}

/// A scenario with its policy, epidemiology and cost tables resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenario {
    pub id: String,
    pub label: String,
    pub extension: Extension,
    pub policy: Policy,
    pub epi: EpidemiologyTable,
    pub costs: CostModel,
}

impl PreparedScenario {
    pub fn evaluate(&self, grid: &AgeGrid, survival: &SurvivalModel, cohort_size: f64) -> Result<ScenarioResult> {
        let mut result = evaluate(grid, &self.policy, &self.epi, survival, &self.costs, cohort_size)?;
        result.label = self.label.clone();
        Ok(result)
    }
}

/// Builds a scenario from a frozen baseline snapshot.
///
/// Extensions read only the snapshot. Transforms then run in listed order;
/// consecutive stage shifts accumulate into one net offset per group, so a
/// shift followed by its negation restores the table exactly.
pub fn prepare(baseline: &Baseline<'_>, spec: &ScenarioSpec) -> Result<PreparedScenario> {
    let snapshot = baseline.table(spec.base_variant())?;
    let mut epi = snapshot.clone();
    if spec.extension.younger() {
        younger_into(&snapshot, &mut epi)?;
    }
    if spec.extension.older() {
        let curve = baseline.curve(spec.older_variant(baseline.incidence))?;
        older_into(&snapshot, curve, &mut epi)?;
    }
    epi.validate()?;

    let mut costs = baseline.costs.clone();
    let mut offsets = vec![NeumaierSum::new(); epi.len()];
    for t in &spec.transforms {
        let mask = t.scope.mask(baseline.grid, t.kind, spec.extension);
        match t.kind {
            TransformKind::IncidenceScale => scale_incidence(&mut epi, &mask, t.magnitude)?,
            TransformKind::CostScale => costs = apply_cost_scale(t, &costs)?,
            TransformKind::StageShift => {
                for (acc, _) in offsets.iter_mut().zip(&mask).filter(|(_, m)| **m) {
                    *acc += t.magnitude;
                }
                let net: Vec<f64> = offsets.iter().map(NeumaierSum::total).collect();
                let issues = shift_issues(&epi, &net);
                if !issues.is_empty() {
                    return Err(Error::Validation(issues));
                }
            }
        }
    }
    let net: Vec<f64> = offsets.iter().map(NeumaierSum::total).collect();
    shift_stages(&mut epi, &net)?;
    epi.validate()?;

    let (lo, hi) = spec.screen_range();
    Ok(PreparedScenario {
        id: spec.id.clone(),
        label: spec.display_label(),
        extension: spec.extension,
        policy: Policy::screen_ages(spec.id.clone(), baseline.grid, lo, hi),
        epi,
        costs,
    })
}
