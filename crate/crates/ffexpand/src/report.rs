//! Versioned experiment reports and the runners behind each CLI command.
//!
//! Every command produces the same envelope: schema version, the echoed run
//! configuration, a command-specific result, and the wall time.  Reports are
//! reproducible byte for byte given the same inputs and seed; `wall_time_ms`
//! is the one field excluded from that contract, and [`strip_wall_time`]
//! removes it when comparing runs.  Serialization goes through serde_json
//! with sorted object keys, so re-serializing a parsed report canonicalizes
//! it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{
    self, ExpansionMeasurement, ImageOptions, SampleMode,
};
use crate::gf::{FieldCtx, FieldElement, Subset};
use crate::incidence::{self, CurveFamily, PointSet, VinhCheck};
use crate::mvpoly::MvPoly;
use crate::rng::subtask_rng;
use crate::structure::{
    self, AnnihilatorBudget, FamilyReport, NicenessOptions, NicenessStatus, NicenessVerdict,
    QuadraticVerdict,
};

pub const SCHEMA_VERSION: u32 = 1;

/// The configuration echoed into every report: the subcommand, field, seed,
/// output format, and all other parameters as a sorted map.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub field: String,
    pub seed: u64,
    pub format: String,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl RunConfig {
    pub fn new(command: &str, field: &str, seed: u64, format: &str) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            field: field.to_string(),
            seed,
            format: format.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> RunConfig {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("parameter JSON"));
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub config: RunConfig,
    pub result: T,
    pub wall_time_ms: u64,
}

impl<T: Serialize> Report<T> {
    pub fn new(config: RunConfig, result: T, wall_time_ms: u64) -> Report<T> {
        Report { schema_version: SCHEMA_VERSION, config, result, wall_time_ms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report JSON")
    }
}

/// Drops `wall_time_ms` from a serialized report so two runs can be compared
/// byte for byte.
pub fn strip_wall_time(report_json: &str) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(report_json)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("wall_time_ms");
    }
    Ok(serde_json::to_string_pretty(&value).expect("stripped JSON"))
}

// ---- Set descriptors ----

/// How to obtain one subset of F_q: "full", "random:<size>",
/// "random:<size>:<seed>", "interval:<size>", "interval:<size>:<seed>",
/// "file:<path>", or a bare integer (random of that size).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetSpec {
    Full,
    Random { size: u64, seed: Option<u64> },
    Interval { size: u64, seed: Option<u64> },
    File(String),
}

/// A point-set or curve-family source: "full", "random:<size>[:<seed>]",
/// "file:<path>", or a bare integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CollectionSpec {
    Full,
    Random { size: u64, seed: Option<u64> },
    File(String),
}

fn split_sized(rest: &str, what: &str) -> Result<(u64, Option<u64>)> {
    let mut parts = rest.split(':');
    let size = parts
        .next()
        .filter(|s| !s.is_empty())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::domain(format!("{what} needs a size, as in {what}:10")))?;
    let seed = match parts.next() {
        None => None,
        Some(s) => Some(
            s.parse()
                .map_err(|_| Error::domain(format!("{what} seed must be an integer, got {s:?}")))?,
        ),
    };
    if parts.next().is_some() {
        return Err(Error::domain(format!("too many ':' fields in {what} descriptor")));
    }
    Ok((size, seed))
}

impl SubsetSpec {
    pub fn parse(text: &str) -> Result<SubsetSpec> {
        let text = text.trim();
        if text == "full" {
            return Ok(SubsetSpec::Full);
        }
        if let Some(rest) = text.strip_prefix("random:") {
            let (size, seed) = split_sized(rest, "random")?;
            return Ok(SubsetSpec::Random { size, seed });
        }
        if let Some(rest) = text.strip_prefix("interval:") {
            let (size, seed) = split_sized(rest, "interval")?;
            return Ok(SubsetSpec::Interval { size, seed });
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Ok(SubsetSpec::File(path.to_string()));
        }
        if let Ok(size) = text.parse() {
            return Ok(SubsetSpec::Random { size, seed: None });
        }
        Err(Error::domain(format!(
            "unrecognized set descriptor {text:?}; expected full, random:<n>, interval:<n>, file:<path>, or a size"
        )))
    }

    /// Splits a comma-separated descriptor list; a single descriptor is
    /// repeated for all `count` sets.
    pub fn parse_list(text: &str, count: usize) -> Result<Vec<SubsetSpec>> {
        let parts: Vec<&str> = text.split(',').collect();
        let specs: Vec<SubsetSpec> =
            parts.iter().map(|p| SubsetSpec::parse(p)).collect::<Result<_>>()?;
        if specs.len() == 1 {
            return Ok(vec![specs[0].clone(); count]);
        }
        if specs.len() != count {
            return Err(Error::domain(format!(
                "expected 1 or {count} set descriptors, got {}",
                specs.len()
            )));
        }
        Ok(specs)
    }
}

impl CollectionSpec {
    pub fn parse(text: &str) -> Result<CollectionSpec> {
        let text = text.trim();
        if text == "full" {
            return Ok(CollectionSpec::Full);
        }
        if let Some(rest) = text.strip_prefix("random:") {
            let (size, seed) = split_sized(rest, "random")?;
            return Ok(CollectionSpec::Random { size, seed });
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Ok(CollectionSpec::File(path.to_string()));
        }
        if let Ok(size) = text.parse() {
            return Ok(CollectionSpec::Random { size, seed: None });
        }
        Err(Error::domain(format!(
            "unrecognized descriptor {text:?}; expected full, random:<n>, file:<path>, or a size"
        )))
    }
}

fn read_json_file(path: &str) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(Path::new(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Builds the subsets for an expansion run.  Set i without an explicit seed
/// draws from stream (seed, i); explicit seeds pin the stream instead.
pub fn realize_subsets(
    ctx: &FieldCtx,
    specs: &[SubsetSpec],
    seed: u64,
) -> Result<Vec<Subset>> {
    let mut out = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let set = match spec {
            SubsetSpec::Full => expansion::sample_sets(ctx, &[ctx.q()], SampleMode::Full, seed)?
                .pop()
                .expect("one set requested"),
            SubsetSpec::Random { size, seed: explicit } => {
                let (s, stream) = match explicit {
                    Some(e) => (*e, 0),
                    None => (seed, i as u64),
                };
                one_sampled(ctx, *size, SampleMode::UniformRandom, s, stream)?
            }
            SubsetSpec::Interval { size, seed: explicit } => {
                let (s, stream) = match explicit {
                    Some(e) => (*e, 0),
                    None => (seed, i as u64),
                };
                one_sampled(ctx, *size, SampleMode::Interval, s, stream)?
            }
            SubsetSpec::File(path) => {
                let value = read_json_file(path)?;
                let sets = value
                    .get("sets")
                    .and_then(serde_json::Value::as_array)
                    .ok_or_else(|| Error::domain("subset file needs a \"sets\" array"))?;
                let list = sets.get(i).ok_or_else(|| {
                    Error::domain(format!("subset file has no entry for set {i}"))
                })?;
                subset_from_json(ctx, list)?
            }
        };
        out.push(set);
    }
    Ok(out)
}

fn one_sampled(ctx: &FieldCtx, size: u64, mode: SampleMode, seed: u64, stream: u64) -> Result<Subset> {
    // sample_sets streams by set index; reproduce its stream layout for a
    // single set at the given index.
    let sizes: Vec<u64> = (0..=stream).map(|_| size).collect();
    let mut sets = expansion::sample_sets(ctx, &sizes, mode, seed)?;
    Ok(sets.pop().expect("at least one set"))
}

pub fn subset_from_json(ctx: &FieldCtx, value: &serde_json::Value) -> Result<Subset> {
    let list = value
        .as_array()
        .ok_or_else(|| Error::domain("a subset must be a JSON array of elements"))?;
    let mut elems = Vec::with_capacity(list.len());
    for item in list {
        elems.push(crate::gf::element_from_json(ctx, item)?);
    }
    Subset::from_elements(ctx, &elems)
}

pub fn realize_points(
    ctx: &FieldCtx,
    spec: &CollectionSpec,
    rng: &mut impl rand::RngExt,
) -> Result<PointSet> {
    match spec {
        CollectionSpec::Full => PointSet::full(ctx),
        CollectionSpec::Random { size, seed } => match seed {
            Some(s) => PointSet::random(ctx, *size, &mut crate::rng::seeded_rng(*s)),
            None => PointSet::random(ctx, *size, rng),
        },
        CollectionSpec::File(path) => PointSet::from_json(ctx, &read_json_file(path)?),
    }
}

pub fn realize_curves(
    ctx: &FieldCtx,
    degree: usize,
    spec: &CollectionSpec,
    rng: &mut impl rand::RngExt,
) -> Result<CurveFamily> {
    match spec {
        CollectionSpec::Full => CurveFamily::full(ctx, degree),
        CollectionSpec::Random { size, seed } => match seed {
            Some(s) => CurveFamily::random(ctx, degree, *size, &mut crate::rng::seeded_rng(*s)),
            None => CurveFamily::random(ctx, degree, *size, rng),
        },
        CollectionSpec::File(path) => {
            let family = CurveFamily::from_json(ctx, &read_json_file(path)?)?;
            if family.degree() != degree {
                return Err(Error::domain(format!(
                    "curve file has degree {}, expected {degree}",
                    family.degree()
                )));
            }
            Ok(family)
        }
    }
}

// ---- Variable-count inference ----

/// Infers the variable count of polynomial text: the highest xN index if
/// numbered variables appear, otherwise how far into the x, y, z aliases the
/// text reaches.
pub fn infer_nvars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'x' => {
                let mut j = i + 1;
                let mut digits = 0usize;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    digits = digits * 10 + (bytes[j] - b'0') as usize;
                    j += 1;
                }
                if j > i + 1 {
                    best = best.max(digits);
                    i = j;
                    continue;
                }
                best = best.max(1);
            }
            b'y' => best = best.max(2),
            b'z' => best = best.max(3),
            _ => {}
        }
        i += 1;
    }
    best.max(1)
}

// ---- Command payloads and runners ----

#[derive(Clone, Debug, Serialize)]
pub struct NicenessPayload {
    pub poly: String,
    pub nvars: usize,
    pub verdict: NicenessVerdict,
}

pub fn run_check_nice(
    ctx: &FieldCtx,
    poly_text: &str,
    nvars: Option<usize>,
    opts: &NicenessOptions,
) -> Result<NicenessPayload> {
    let nvars = nvars.unwrap_or_else(|| infer_nvars(poly_text));
    let poly = MvPoly::parse(ctx, nvars, poly_text)?;
    let verdict = structure::is_nice_with(&poly, opts)?;
    Ok(NicenessPayload { poly: poly.to_string(), nvars, verdict })
}

#[derive(Clone, Debug, Serialize)]
pub struct IncidencePayload {
    pub q: u64,
    pub degree: usize,
    pub trials: u64,
    pub satisfied: u64,
    pub all_satisfied: bool,
    /// Largest deviation/bound ratio seen (0 when every deviation was 0).
    pub max_ratio: f64,
    pub worst: Option<VinhCheck>,
}

pub fn run_incidence(
    ctx: &FieldCtx,
    degree: usize,
    points: &CollectionSpec,
    curves: &CollectionSpec,
    trials: u64,
    seed: u64,
) -> Result<IncidencePayload> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let mut satisfied = 0u64;
    let mut max_ratio = -1.0f64;
    let mut worst: Option<VinhCheck> = None;
    for t in 0..trials {
        let mut rng = subtask_rng(seed, t);
        let p = realize_points(ctx, points, &mut rng)?;
        let q = realize_curves(ctx, degree, curves, &mut rng)?;
        let check = incidence::vinh_deviation(&p, &q)?;
        if check.satisfied {
            satisfied += 1;
        }
        let ratio = if check.bound == 0.0 { 0.0 } else { check.deviation / check.bound };
        if ratio > max_ratio {
            max_ratio = ratio;
            worst = Some(check);
        }
    }
    Ok(IncidencePayload {
        q: ctx.q(),
        degree,
        trials,
        satisfied,
        all_satisfied: satisfied == trials,
        max_ratio: max_ratio.max(0.0),
        worst,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpandPayload {
    pub poly: String,
    pub measurement: ExpansionMeasurement,
}

#[allow(clippy::too_many_arguments)]
pub fn run_expand(
    ctx: &FieldCtx,
    poly_text: &str,
    nvars: Option<usize>,
    sets_text: &str,
    seed: u64,
    threshold_c: f64,
    opts: &ImageOptions,
) -> Result<ExpandPayload> {
    let nvars = nvars.unwrap_or_else(|| infer_nvars(poly_text));
    let poly = MvPoly::parse(ctx, nvars, poly_text)?;
    let specs = SubsetSpec::parse_list(sets_text, nvars)?;
    let sets = realize_subsets(ctx, &specs, seed)?;
    let measurement = expansion::deficiency_stat(&poly, &sets, threshold_c, opts)?;
    Ok(ExpandPayload { poly: poly.to_string(), measurement })
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexamplePayload {
    pub p: u64,
    pub coeffs: Vec<FieldElement>,
    pub quarter_bound: u64,
    pub set_sizes: Vec<u64>,
    pub size_window_low: f64,
    pub size_window_high: f64,
    pub sizes_in_window: bool,
    pub image_size: u64,
    pub ceiling: u64,
    pub within_ceiling: bool,
}

pub fn run_counterexample(ctx: &FieldCtx, coeffs: &[i64]) -> Result<CounterexamplePayload> {
    if coeffs.len() != 3 {
        return Err(Error::domain("exactly three coefficients a,b,c are required"));
    }
    let a = ctx.from_int(coeffs[0]);
    let b = ctx.from_int(coeffs[1]);
    let c = ctx.from_int(coeffs[2]);
    let (x, y, z) = expansion::counterexample_sets(&a, &b, &c)?;
    let q_poly = expansion::diagonal_form(&a, &b, &c)?;
    let sizes = vec![x.len() as u64, y.len() as u64, z.len() as u64];
    let image = expansion::image_set(&q_poly, &[x, y, z])?;
    let p = ctx.p();
    let pf = p as f64;
    let slack = 3.0 * pf.sqrt() * pf.ln();
    let low = pf / 4.0 - slack;
    let high = pf / 4.0 + slack;
    let ceiling = 3 * p / 4;
    Ok(CounterexamplePayload {
        p,
        coeffs: vec![a, b, c],
        quarter_bound: p / 4,
        sizes_in_window: sizes.iter().all(|&s| low <= s as f64 && s as f64 <= high),
        set_sizes: sizes,
        size_window_low: low,
        size_window_high: high,
        image_size: image.len() as u64,
        ceiling,
        within_ceiling: image.len() as u64 <= ceiling,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyPayload {
    pub poly: String,
    pub class: QuadraticVerdict,
    pub agrees_with_search: bool,
}

pub fn run_classify_quadratic(ctx: &FieldCtx, poly_text: &str) -> Result<ClassifyPayload> {
    let poly = MvPoly::parse(ctx, 3, poly_text)?;
    let class = structure::classify_quadratic(&poly)?;
    let verdict = structure::is_nice(&poly)?;
    let agrees = match verdict.status {
        NicenessStatus::Nice => class.is_nice(),
        NicenessStatus::NotNice => !class.is_nice(),
        NicenessStatus::Inconclusive => false,
    };
    Ok(ClassifyPayload { poly: poly.to_string(), class, agrees_with_search: agrees })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyExhaustivePayload {
    pub q: u64,
    pub scanned: u64,
    pub quadratics: u64,
    pub nice: u64,
    pub not_nice: u64,
    pub search_inconclusive: u64,
    pub disagreements: u64,
    pub agreement: bool,
}

/// Scans all constant-free ternary polynomials of degree <= 2 over F_3 and
/// compares the classifier with the search on every genuine quadratic.
pub fn run_classify_exhaustive(ctx: &FieldCtx) -> Result<ClassifyExhaustivePayload> {
    if ctx.q() != 3 {
        return Err(Error::cap(format!(
            "the exhaustive scan enumerates q^9 polynomials and is fixed to q = 3, got q = {}",
            ctx.q()
        )));
    }
    let exps: [[u32; 3]; 9] = [
        [2, 0, 0],
        [0, 2, 0],
        [0, 0, 2],
        [0, 1, 1],
        [1, 0, 1],
        [1, 1, 0],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
    ];
    let mut payload = ClassifyExhaustivePayload {
        q: 3,
        scanned: 0,
        quadratics: 0,
        nice: 0,
        not_nice: 0,
        search_inconclusive: 0,
        disagreements: 0,
        agreement: false,
    };
    for mask in 0..3u64.pow(9) {
        payload.scanned += 1;
        let mut poly = MvPoly::zero(ctx, 3);
        let mut m = mask;
        for e in exps {
            let c = (m % 3) as i64;
            m /= 3;
            if c != 0 {
                poly = &poly + &MvPoly::monomial(&ctx.from_int(c), e.to_vec());
            }
        }
        if poly.total_degree() != Some(2) {
            continue;
        }
        payload.quadratics += 1;
        let class = structure::classify_quadratic(&poly)?;
        let verdict = structure::is_nice(&poly)?;
        if class.is_nice() {
            payload.nice += 1;
        } else {
            payload.not_nice += 1;
        }
        match verdict.status {
            NicenessStatus::Inconclusive => payload.search_inconclusive += 1,
            NicenessStatus::Nice if !class.is_nice() => payload.disagreements += 1,
            NicenessStatus::NotNice if class.is_nice() => payload.disagreements += 1,
            _ => {}
        }
    }
    payload.agreement = payload.disagreements == 0 && payload.search_inconclusive == 0;
    Ok(payload)
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorPayload {
    pub polys: Vec<String>,
    pub nvars: usize,
    pub family: FamilyReport,
}

pub fn run_annihilator(
    ctx: &FieldCtx,
    poly_texts: &[String],
    nvars: Option<usize>,
    bound: Option<usize>,
    budget: &AnnihilatorBudget,
) -> Result<AnnihilatorPayload> {
    if poly_texts.is_empty() {
        return Err(Error::domain("at least one polynomial is required"));
    }
    let nvars = nvars
        .unwrap_or_else(|| poly_texts.iter().map(|t| infer_nvars(t)).max().unwrap_or(1));
    let polys: Vec<MvPoly> = poly_texts
        .iter()
        .map(|t| MvPoly::parse(ctx, nvars, t))
        .collect::<Result<_>>()?;
    let opts = NicenessOptions { bound_override: bound, budget: *budget };
    let family = structure::classify_family(&polys, &opts)?;
    Ok(AnnihilatorPayload {
        polys: polys.iter().map(MvPoly::to_string).collect(),
        nvars,
        family,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcPayload {
    pub a: FieldElement,
    pub degree: u32,
    pub f: String,
    pub g: String,
    pub poly: String,
    pub independence: FamilyReport,
    pub independence_certified: bool,
    pub measurement: ExpansionMeasurement,
}

#[allow(clippy::too_many_arguments)]
pub fn run_conc_family(
    ctx: &FieldCtx,
    a: i64,
    degree: u32,
    f_text: &str,
    g_text: &str,
    sets_text: &str,
    seed: u64,
    threshold_c: f64,
    opts: &ImageOptions,
) -> Result<ConcPayload> {
    let f = bivariate_in_yz(ctx, f_text)?;
    let g = bivariate_in_yz(ctx, g_text)?;
    let a = ctx.from_int(a);
    let independence = structure::classify_family(&[f.clone(), g.clone()], &NicenessOptions::default())?;
    let poly = expansion::conc_family(&a, degree, &f, &g)?;
    let specs = SubsetSpec::parse_list(sets_text, 3)?;
    let sets = realize_subsets(ctx, &specs, seed)?;
    let measurement = expansion::deficiency_stat(&poly, &sets, threshold_c, opts)?;
    Ok(ConcPayload {
        a,
        degree,
        f: f.to_string(),
        g: g.to_string(),
        poly: poly.to_string(),
        independence_certified: independence.status.is_independent(),
        independence,
        measurement,
    })
}

/// Parses coefficient-polynomial text written in the variables y and z (the
/// roles it plays in a ternary assembly) down to a bivariate polynomial.
pub fn bivariate_in_yz(ctx: &FieldCtx, text: &str) -> Result<MvPoly> {
    let ternary = MvPoly::parse(ctx, 3, text)?;
    if ternary.occurs(0) {
        return Err(Error::domain("coefficient polynomials may use only y and z"));
    }
    let mut out = MvPoly::zero(ctx, 2);
    for (e, c) in ternary.terms() {
        out = &out + &MvPoly::monomial(&c, vec![e[1], e[2]]);
    }
    Ok(out)
}
