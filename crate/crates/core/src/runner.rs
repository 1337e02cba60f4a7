//! Config-driven experiments: parse a small INI-like file, run one of the
//! checks, and emit `table.csv`, `summary.txt` and an optional `plot.svg`.
//!
//! The config is line-oriented `key = value` under `[section]` headers. Lists
//! are comma-separated and complex numbers are written `a+bi`. Lines starting
//! with `#` are comments.
//!
//! ```text
//! [experiment]
//! kind = smt-riemann
//! name = exp-three-points
//!
//! [map]
//! gallery = exp
//!
//! [targets]
//! values = 0, inf, 1
//!
//! [grid]
//! kind = standard
//!
//! [params]
//! eps = 0.1
//! ```

use crate::error::{Error, Result};
use crate::exact::{gq_to_c64, parse_gq};
use crate::funcrep::{gallery, parse_exppoly, GalleryParams, Disc, HoloMap, Target, TargetGeometry};
use crate::ldl::{ldl_residual, GammaPolicy};
use crate::nevan::{
    characteristic_series, growth_index_from_series, proximity_counting_series, GrowthIndexEstimate,
    NevanlinnaTable,
};
use crate::nochka::nochka_smt_report;
use crate::projcurve::{ahlfors_estimate_check, cartan_smt_report, plucker_series, Hyperplane, ProjCurve};
use crate::quad::{calculus_lemma_check, LemmaForm, RadialGrid, Spacing};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Verdict threshold for weighted exceptional measures.
pub const DEFAULT_CAP: f64 = 10.0;

pub const CSV_HEADER: &str = "r,T,T_area,m_total,N_total,N_ram,S_k,slack,exceptional";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Fmt,
    SmtRiemann,
    Cartan,
    Nochka,
    Ahlfors,
    Plucker,
    Ldl,
    GrowthIndex,
    CalculusLemma,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Fmt,
        ExperimentKind::SmtRiemann,
        ExperimentKind::Cartan,
        ExperimentKind::Nochka,
        ExperimentKind::Ahlfors,
        ExperimentKind::Plucker,
        ExperimentKind::Ldl,
        ExperimentKind::GrowthIndex,
        ExperimentKind::CalculusLemma,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Fmt => "fmt",
            ExperimentKind::SmtRiemann => "smt-riemann",
            ExperimentKind::Cartan => "cartan",
            ExperimentKind::Nochka => "nochka",
            ExperimentKind::Ahlfors => "ahlfors",
            ExperimentKind::Plucker => "plucker",
            ExperimentKind::Ldl => "ldl",
            ExperimentKind::GrowthIndex => "growth-index",
            ExperimentKind::CalculusLemma => "calculus-lemma",
        }
    }

    fn uses_curve(&self) -> bool {
        matches!(self, ExperimentKind::Cartan | ExperimentKind::Nochka | ExperimentKind::Ahlfors | ExperimentKind::Plucker)
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Where the map comes from: a gallery entry with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub gallery: String,
    pub params: GalleryParams,
    /// Overrides the gallery's geometry: `fubini-study` or `poincare`.
    pub geometry: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    Gallery(String),
    Components(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridSpec {
    /// The 48-point default for the domain.
    Standard,
    Geometric { r0: f64, r1: f64, n: usize },
    Boundary { r0: f64, r1: f64, n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GammaChoice {
    Theorem,
    InverseDistance,
    One,
}

/// The function h in a calculus-lemma experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaFunction {
    /// T_f of the configured map
    Characteristic,
    /// h(r) = r
    Identity,
    /// h(r) = log 1/(1 − r)
    LogInverseDistance,
    /// h(r) = eʳ
    Exp,
}

/// Optional bounds checked by `--assert`; unset ones take per-kind defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assertions {
    pub slack_min: Option<f64>,
    pub range_max: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub measure_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub seed: u64,
    pub map: Option<MapSpec>,
    pub curve: Option<CurveSpec>,
    /// Basis of the linear subspace containing a degenerate curve.
    pub plane: Vec<Vec<C>>,
    pub targets: Vec<Target>,
    pub hyperplanes: Vec<Vec<C>>,
    pub grid: GridSpec,
    pub eps: f64,
    pub delta: f64,
    pub k: usize,
    pub lambda: f64,
    /// Growth index override; fitted from T when absent.
    pub c: Option<f64>,
    pub gamma: GammaChoice,
    pub h: LemmaFunction,
    pub form: LemmaForm,
    pub cap: f64,
    pub assertions: Assertions,
}

type Sections = BTreeMap<String, Vec<(String, String)>>;

fn sections(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            out.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let sec = current.as_ref().ok_or_else(|| Error::Config(format!("line {}: key outside any section", no + 1)))?;
        out.get_mut(sec).expect("section exists").push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

struct Section<'a> {
    name: &'a str,
    entries: &'a [(String, String)],
}

impl<'a> Section<'a> {
    fn of(all: &'a Sections, name: &'a str, allowed: &[&str]) -> Result<Self> {
        let entries = all.get(name).map(Vec::as_slice).unwrap_or(&[]);
        if let Some((k, _)) = entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("[{name}]: unknown key `{k}`")));
        }
        Ok(Section { name, entries })
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn all<'k>(&self, key: &'k str) -> impl Iterator<Item = &'a str> + 'k
    where
        'a: 'k,
    {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| Error::Config(format!("[{}]: cannot parse `{key} = {v}`", self.name))))
            .transpose()
    }
}

fn parse_complex(s: &str) -> Result<C> {
    parse_gq(s).map(|g| gq_to_c64(&g)).ok_or_else(|| Error::Config(format!("cannot parse `{s}` as a complex number")))
}

fn parse_vector(s: &str) -> Result<Vec<C>> {
    s.split(',').map(parse_complex).collect()
}

fn parse_target(s: &str) -> Result<Target> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(Target::Infinity),
        other => parse_complex(other).map(Target::Finite),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let all = sections(text)?;
        const KNOWN: [&str; 8] = ["experiment", "map", "curve", "targets", "grid", "params", "assert", "output"];
        if let Some(s) = all.keys().find(|s| !KNOWN.contains(&s.as_str())) {
            return Err(Error::Config(format!("unknown section [{s}]")));
        }

        let ex = Section::of(&all, "experiment", &["kind", "name", "seed"])?;
        let kind: ExperimentKind = ex.get("kind").ok_or_else(|| Error::Config("[experiment]: missing `kind`".into()))?.parse()?;
        let name = ex.get("name").unwrap_or(kind.as_str()).to_string();
        let seed = ex.parse("seed")?.unwrap_or(0);

        let map = match all.get("map") {
            None => None,
            Some(entries) => {
                let mut params = GalleryParams::default();
                let mut name = None;
                let mut geometry = None;
                for (k, v) in entries {
                    match k.as_str() {
                        "gallery" => name = Some(v.clone()),
                        "geometry" => geometry = Some(v.clone()),
                        _ => params = params.with(k, v),
                    }
                }
                let gallery = match name {
                    Some(n) => n,
                    None if params.0.contains_key("expr") => "exppoly".into(),
                    None if params.0.contains_key("num") => "rational".into(),
                    None if params.0.contains_key("coeffs") => "poly".into(),
                    None => return Err(Error::Config("[map]: give `gallery` or an inline `expr`, `coeffs` or `num`".into())),
                };
                Some(MapSpec { gallery, params, geometry })
            }
        };

        let cs = Section::of(&all, "curve", &["gallery", "components", "plane"])?;
        let curve = match (cs.get("gallery"), cs.get("components")) {
            (Some(_), Some(_)) => return Err(Error::Config("[curve]: `gallery` and `components` are exclusive".into())),
            (Some(g), None) => Some(CurveSpec::Gallery(g.to_string())),
            (None, Some(c)) => Some(CurveSpec::Components(c.split(',').map(|s| s.trim().to_string()).collect())),
            (None, None) => None,
        };
        let plane = cs.all("plane").map(parse_vector).collect::<Result<Vec<_>>>()?;

        let ts = Section::of(&all, "targets", &["values", "hyperplane"])?;
        let targets = match ts.get("values") {
            Some(v) => v.split(',').map(parse_target).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let hyperplanes = ts.all("hyperplane").map(parse_vector).collect::<Result<Vec<_>>>()?;

        let gs = Section::of(&all, "grid", &["kind", "r0", "r1", "n"])?;
        let grid = match gs.get("kind").unwrap_or("standard") {
            "standard" => GridSpec::Standard,
            g @ ("geometric" | "boundary") => {
                let need = |k: &str| -> Result<f64> {
                    gs.parse::<f64>(k)?.ok_or_else(|| Error::Config(format!("[grid]: `{g}` needs `{k}`")))
                };
                let (r0, r1) = (need("r0")?, need("r1")?);
                let n = gs.parse::<usize>("n")?.unwrap_or(48);
                if g == "geometric" {
                    GridSpec::Geometric { r0, r1, n }
                } else {
                    GridSpec::Boundary { r0, r1, n }
                }
            }
            other => return Err(Error::Config(format!("[grid]: unknown kind `{other}`"))),
        };

        let ps = Section::of(&all, "params", &["eps", "delta", "k", "lambda", "c", "gamma", "h", "form", "cap"])?;
        let gamma = match ps.get("gamma").unwrap_or("theorem") {
            "theorem" => GammaChoice::Theorem,
            "inverse-distance" => GammaChoice::InverseDistance,
            "one" => GammaChoice::One,
            other => return Err(Error::Config(format!("[params]: unknown gamma `{other}`"))),
        };
        let h = match ps.get("h") {
            None if map.is_some() => LemmaFunction::Characteristic,
            None | Some("r") => LemmaFunction::Identity,
            Some("characteristic") => LemmaFunction::Characteristic,
            Some("log-inv") => LemmaFunction::LogInverseDistance,
            Some("exp") => LemmaFunction::Exp,
            Some(other) => return Err(Error::Config(format!("[params]: unknown h `{other}`"))),
        };
        let form = match ps.get("form").unwrap_or("first") {
            "first" => LemmaForm::FirstOrder,
            "second" => LemmaForm::SecondOrder,
            other => return Err(Error::Config(format!("[params]: unknown form `{other}`"))),
        };

        let asr = Section::of(&all, "assert", &["slack_min", "range_max", "c_min", "c_max", "measure_max"])?;
        let assertions = Assertions {
            slack_min: asr.parse("slack_min")?,
            range_max: asr.parse("range_max")?,
            c_min: asr.parse("c_min")?,
            c_max: asr.parse("c_max")?,
            measure_max: asr.parse("measure_max")?,
        };

        let cfg = ExperimentConfig {
            kind,
            name,
            seed,
            map,
            curve,
            plane,
            targets,
            hyperplanes,
            grid,
            eps: ps.parse("eps")?.unwrap_or(0.1),
            delta: ps.parse("delta")?.unwrap_or(0.5),
            k: ps.parse("k")?.unwrap_or(1),
            lambda: ps.parse("lambda")?.unwrap_or(0.5),
            c: ps.parse("c")?,
            gamma,
            h,
            form,
            cap: ps.parse("cap")?.unwrap_or(DEFAULT_CAP),
            assertions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        positive("eps", self.eps)?;
        positive("cap", self.cap)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("`delta` must lie in (0,1), got {}", self.delta)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Config(format!("`lambda` must lie in (0,1), got {}", self.lambda)));
        }
        if let Some(c) = self.c {
            if !(c >= 0.0) {
                return Err(Error::Config(format!("`c` must be nonnegative, got {c}")));
            }
        }
        if self.kind.uses_curve() {
            if self.curve.is_none() {
                return Err(Error::Config(format!("`{}` needs a [curve] section", self.kind.as_str())));
            }
        } else {
            let synthetic = self.kind == ExperimentKind::CalculusLemma && self.h != LemmaFunction::Characteristic;
            if self.map.is_none() && !synthetic {
                return Err(Error::Config(format!("`{}` needs a [map] section", self.kind.as_str())));
            }
        }
        match self.kind {
            ExperimentKind::Fmt | ExperimentKind::SmtRiemann if self.targets.is_empty() => {
                Err(Error::Config("[targets]: `values` is required".into()))
            }
            ExperimentKind::Nochka if self.plane.is_empty() || self.hyperplanes.is_empty() => {
                Err(Error::Config("nochka needs `plane` lines in [curve] and `hyperplane` lines in [targets]".into()))
            }
            ExperimentKind::Ahlfors if self.hyperplanes.len() != 1 => {
                Err(Error::Config("ahlfors needs exactly one `hyperplane`".into()))
            }
            _ => Ok(()),
        }
    }

    fn build_map(&self) -> Result<(HoloMap, TargetGeometry)> {
        let spec = self.map.as_ref().ok_or_else(|| Error::Config("missing [map]".into()))?;
        let (f, geom) = gallery(&spec.gallery, &spec.params)?;
        let geom = match spec.geometry.as_deref() {
            None => geom,
            Some("fubini-study") => TargetGeometry::P1FubiniStudy,
            Some("poincare") if f.disc().radius() == 1.0 => TargetGeometry::PoincarePullback,
            Some("poincare") => return Err(Error::Config("the Poincaré geometry needs a map on the unit disc".into())),
            Some(other) => return Err(Error::Config(format!("[map]: unknown geometry `{other}`"))),
        };
        Ok((f, geom))
    }

    fn build_curve(&self) -> Result<ProjCurve> {
        match self.curve.as_ref().ok_or_else(|| Error::Config("missing [curve]".into()))? {
            CurveSpec::Gallery(name) => ProjCurve::from_gallery(name),
            CurveSpec::Components(cs) => ProjCurve::new(
                cs.iter()
                    .map(|e| Ok(HoloMap::exp_poly(parse_exppoly(e)?, Disc::plane()).with_name(e)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    fn build_grid(&self, radius: f64) -> Result<RadialGrid> {
        let g = match self.grid {
            GridSpec::Standard => RadialGrid::standard(radius),
            GridSpec::Geometric { r0, r1, n } => RadialGrid::geometric(r0, r1, n),
            GridSpec::Boundary { r0, r1, n } if radius.is_finite() => {
                RadialGrid::geometric_to_boundary(r0 / radius, r1 / radius, n).and_then(|g| {
                    RadialGrid::new(g.radii().iter().map(|r| r * radius).collect(), Spacing::GeometricBoundary)
                })
            }
            GridSpec::Boundary { .. } => return Err(Error::Config("a boundary grid needs a finite disc".into())),
        }
        .map_err(|e| Error::Config(format!("[grid]: {e}")))?;
        let last = *g.radii().last().expect("nonempty grid");
        if last >= radius {
            return Err(Error::Config(format!("[grid]: radius {last} is outside the disc of radius {radius}")));
        }
        Ok(g)
    }

    fn hyperplanes_for(&self, curve: &ProjCurve) -> Result<Vec<Hyperplane>> {
        if self.hyperplanes.is_empty() {
            return Ok((0..=curve.n()).map(|i| Hyperplane::coordinate(curve.n(), i)).collect());
        }
        self.hyperplanes
            .iter()
            .map(|a| {
                if a.len() != curve.n() + 1 {
                    return Err(Error::Config(format!("hyperplane has {} coordinates, the curve lives in P^{}", a.len(), curve.n())));
                }
                Hyperplane::new(a.clone())
            })
            .collect()
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentConfig::parse(s)
    }
}

/// Radii where an inequality failed and their weighted measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalSummary {
    pub flagged: Vec<f64>,
    pub measure: f64,
    pub cap: f64,
    /// measure < cap
    pub finite: bool,
}

impl ExceptionalSummary {
    pub fn new(flagged: Vec<f64>, measure: f64, cap: f64) -> Self {
        ExceptionalSummary { flagged, measure, cap, finite: measure < cap }
    }

    /// Same set, judged against another cap.
    pub fn with_cap(self, cap: f64) -> Self {
        ExceptionalSummary::new(self.flagged, self.measure, cap)
    }
}

/// Flags radii with negative slack and sums exp((c+ε)T(rᵢ))Δrᵢ over them,
/// with Δr the trapezoid weights of the table's radii. The verdict uses
/// [`DEFAULT_CAP`].
pub fn exceptional_set_measure(table: &NevanlinnaTable, c: f64, eps: f64) -> ExceptionalSummary {
    let radii: Vec<f64> = table.records.iter().map(|x| x.r).collect();
    let weights = RadialGrid::new(radii, Spacing::Custom).map(|g| g.weights().to_vec()).unwrap_or_default();
    let w = c + eps;
    let mut flagged = Vec::new();
    let mut measure = 0.0;
    for (rec, dr) in table.records.iter().zip(&weights) {
        if rec.slack < 0.0 {
            flagged.push(rec.r);
            measure += if w.is_infinite() { f64::INFINITY } else { (w * rec.t).exp() * dr };
        }
    }
    ExceptionalSummary::new(flagged, measure, DEFAULT_CAP)
}

/// One CSV row; NaN marks a column that does not apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Row {
    pub r: f64,
    pub t: f64,
    pub t_area: f64,
    pub m_total: f64,
    pub n_total: f64,
    pub n_ram: f64,
    pub s_k: f64,
    pub slack: f64,
    pub exceptional: bool,
}

impl Row {
    fn at(r: f64) -> Self {
        Row {
            r,
            t: f64::NAN,
            t_area: f64::NAN,
            m_total: f64::NAN,
            n_total: f64::NAN,
            n_ram: f64::NAN,
            s_k: f64::NAN,
            slack: f64::NAN,
            exceptional: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything one run produces, before it is written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub kind: ExperimentKind,
    pub rows: Vec<Row>,
    pub summary: Vec<(String, String)>,
    pub exceptional: Option<ExceptionalSummary>,
    pub checks: Vec<Check>,
}

/// Shortest round-trip decimal, scientific outside [1e-5, 1e16).
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x != 0.0 && (x.abs() >= 1e16 || x.abs() < 1e-5) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Outcome {
    pub fn table_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let cols = [r.r, r.t, r.t_area, r.m_total, r.n_total, r.n_ram, r.s_k, r.slack].map(fmt_num);
            let _ = writeln!(s, "{},{}", cols.join(","), u8::from(r.exceptional));
        }
        s
    }

    pub fn summary_txt(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.name);
        let _ = writeln!(s, "kind: {}", self.kind.as_str());
        let _ = writeln!(s, "rows: {}", self.rows.len());
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}: {v}");
        }
        if let Some(e) = &self.exceptional {
            let list: Vec<String> = e.flagged.iter().map(|&r| fmt_num(r)).collect();
            let _ = writeln!(s, "exceptional_flagged: {}", e.flagged.len());
            let _ = writeln!(s, "exceptional_radii: [{}]", list.join(", "));
            let _ = writeln!(s, "exceptional_measure: {}", fmt_num(e.measure));
            let _ = writeln!(s, "exceptional_cap: {}", fmt_num(e.cap));
            let _ = writeln!(s, "exceptional_verdict: {}", if e.finite { "finite" } else { "infinite" });
        }
        for c in &self.checks {
            let _ = writeln!(s, "check_{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// T, m, N and slack against log r.
    pub fn plot_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 50.0;
        let series: [(&str, fn(&Row) -> f64); 4] = [
            ("#1f77b4", |r| r.t),
            ("#2ca02c", |r| r.m_total),
            ("#ff7f0e", |r| r.n_total),
            ("#d62728", |r| r.slack),
        ];
        let xs: Vec<f64> = self.rows.iter().map(|r| r.r.ln()).collect();
        let ys = self.rows.iter().flat_map(|r| series.iter().map(move |(_, f)| f(r))).filter(|y| y.is_finite());
        let (ylo, yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let (xlo, xhi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
        let px = |x: f64| PAD + (x - xlo) / span(xlo, xhi) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - ylo) / span(ylo, yhi) * (H - 2.0 * PAD);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
            H - PAD,
            W - PAD
        );
        let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, xml_escape(&self.name));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">log r</text>"#, W / 2.0, H - 15.0);
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">value</text>"#,
            H / 2.0,
            H / 2.0
        );
        if xlo.is_finite() && ylo.is_finite() {
            for (colour, f) in series {
                let pts: Vec<String> = self
                    .rows
                    .iter()
                    .zip(&xs)
                    .filter(|(r, _)| f(r).is_finite())
                    .map(|(r, &x)| format!("{:.2},{:.2}", px(x), py(f(r))))
                    .collect();
                if pts.len() >= 2 {
                    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}"/>"#, pts.join(" "));
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }

    /// Writes `table.csv`, `summary.txt` and, when asked, `plot.svg`.
    pub fn write(&self, dir: &Path, svg: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("table.csv"), self.table_csv())?;
        std::fs::write(dir.join("summary.txt"), self.summary_txt())?;
        if svg {
            std::fs::write(dir.join("plot.svg"), self.plot_svg())?;
        }
        Ok(())
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn growth_lines(out: &mut Vec<(String, String)>, g: &GrowthIndexEstimate) {
    out.push(("c_est".into(), fmt_num(g.c_est)));
    out.push(("kappa".into(), g.kappa.map_or("none".into(), fmt_num)));
    let window = g.window.map_or("none".into(), |(a, b)| format!("[{}, {}]", fmt_num(a), fmt_num(b)));
    out.push(("fit_window".into(), window));
    out.push(("fit_residual_rms".into(), fmt_num(g.residual_rms)));
    out.push(("bounded_characteristic".into(), g.bounded_characteristic.to_string()));
}

fn table_rows(t: &NevanlinnaTable) -> Vec<Row> {
    t.records
        .iter()
        .map(|x| Row {
            t: x.t,
            t_area: x.t_area,
            m_total: x.m.iter().sum(),
            n_total: x.n.iter().sum(),
            n_ram: x.n_ram,
            slack: x.slack,
            exceptional: x.exceptional,
            ..Row::at(x.r)
        })
        .collect()
}

fn table_lines(out: &mut Vec<(String, String)>, t: &NevanlinnaTable, c_used: f64) {
    out.push(("geometry".into(), t.geometry.into()));
    out.push(("targets".into(), t.targets.join(", ")));
    out.push(("eps".into(), fmt_num(t.eps)));
    growth_lines(out, &t.growth);
    out.push(("c_used".into(), fmt_num(c_used)));
    out.push(("c_log".into(), fmt_num(t.constants.c_log)));
    out.push(("c_const".into(), fmt_num(t.constants.c)));
    out.push(("implied_c".into(), fmt_num(t.implied_c)));
    for (name, d) in t.targets.iter().zip(&t.defects) {
        out.push((format!("defect[{name}]"), fmt_num(d.value)));
    }
    out.push(("defect_sum".into(), fmt_num(t.defect_sum())));
    out.push(("min_slack".into(), fmt_num(t.min_slack_from(0.0))));
}

fn bound_check(name: &str, value: f64, lo: Option<f64>, hi: Option<f64>) -> Check {
    let passed = lo.map_or(true, |l| value >= l) && hi.map_or(true, |h| value <= h);
    let mut detail = format!("{name} = {}", fmt_num(value));
    if let Some(l) = lo {
        let _ = write!(detail, ", min {}", fmt_num(l));
    }
    if let Some(h) = hi {
        let _ = write!(detail, ", max {}", fmt_num(h));
    }
    Check { name: name.into(), passed, detail }
}

/// Runs one experiment. Output is a pure function of the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let a = &cfg.assertions;
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    let mut exceptional = None;
    summary.push(("seed".to_string(), cfg.seed.to_string()));

    let rows = match cfg.kind {
        ExperimentKind::Fmt => {
            let (f, geom) = cfg.build_map()?;
            let grid = cfg.build_grid(f.disc().radius())?;
            let radii = grid.radii();
            let ch = characteristic_series(&f, &geom, radii)?;
            let mut rows: Vec<Row> =
                radii.iter().enumerate().map(|(i, &r)| Row { t: ch.value[i], t_area: ch.area[i], m_total: 0.0, n_total: 0.0, ..Row::at(r) }).collect();
            let mut worst: f64 = 0.0;
            for target in &cfg.targets {
                let (m, n) = proximity_counting_series(&f, &geom, target, radii)?;
                let res: Vec<f64> = (0..radii.len()).map(|i| m[i] + n[i] - ch.value[i]).collect();
                let range = res.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - res.iter().cloned().fold(f64::INFINITY, f64::min);
                summary.push((format!("residual_range[{target}]"), fmt_num(range)));
                worst = worst.max(range);
                for (i, row) in rows.iter_mut().enumerate() {
                    row.m_total += m[i];
                    row.n_total += n[i];
                }
            }
            summary.push(("geometry".into(), geom.kind().into()));
            summary.push(("residual_range_max".into(), fmt_num(worst)));
            checks.push(bound_check("residual_range", worst, None, Some(a.range_max.unwrap_or(1.0))));
            rows
        }
        ExperimentKind::SmtRiemann => {
            let (f, geom) = cfg.build_map()?;
            let grid = cfg.build_grid(f.disc().radius())?;
            let table = crate::nevan::smt_riemann_report(&f, &geom, &cfg.targets, &grid, cfg.eps, cfg.c)?;
            let c_used = cfg.c.unwrap_or(table.growth.c_est);
            table_lines(&mut summary, &table, c_used);
            slack_checks(&mut checks, &mut exceptional, &table, c_used, cfg)?;
            table_rows(&table)
        }
        ExperimentKind::Cartan => {
            let curve = cfg.build_curve()?;
            let grid = cfg.build_grid(curve.disc().radius())?;
            let hs = cfg.hyperplanes_for(&curve)?;
            let rep = cartan_smt_report(&curve, &hs, &grid, cfg.eps, cfg.c)?;
            let c_used = cfg.c.unwrap_or(rep.table.growth.c_est);
            table_lines(&mut summary, &rep.table, c_used);
            summary.push(("n_w_max".into(), fmt_num(rep.n_w.iter().cloned().fold(0.0, f64::max))));
            let last = rep.table.records.last().expect("nonempty grid");
            summary.push(("proximity_ratio_last".into(), fmt_num(last.m.iter().sum::<f64>() / last.t)));
            slack_checks(&mut checks, &mut exceptional, &rep.table, c_used, cfg)?;
            table_rows(&rep.table)
        }
        ExperimentKind::Nochka => {
            let curve = cfg.build_curve()?;
            let grid = cfg.build_grid(curve.disc().radius())?;
            let hs = cfg.hyperplanes_for(&curve)?;
            let rep = nochka_smt_report(&curve, &cfg.plane, &hs, &grid, cfg.eps, cfg.c)?;
            let c_used = cfg.c.unwrap_or(rep.table.growth.c_est);
            table_lines(&mut summary, &rep.table, c_used);
            summary.push(("k".into(), rep.k.to_string()));
            let omega: Vec<String> = rep.weights.omega.iter().map(|w| w.to_string()).collect();
            summary.push(("omega".into(), omega.join(", ")));
            summary.push(("theta".into(), rep.weights.theta.to_string()));
            summary.push(("weights_certified".into(), rep.weights.is_certified().to_string()));
            slack_checks(&mut checks, &mut exceptional, &rep.table, c_used, cfg)?;
            checks.push(Check {
                name: "weights_certified".into(),
                passed: rep.weights.is_certified(),
                detail: format!("theta = {}", rep.weights.theta),
            });
            table_rows(&rep.table)
        }
        ExperimentKind::Ahlfors => {
            let curve = cfg.build_curve()?;
            let grid = cfg.build_grid(curve.disc().radius())?;
            let h = cfg.hyperplanes_for(&curve)?.remove(0);
            let rep = ahlfors_estimate_check(&curve, cfg.k, &h, cfg.lambda, &grid)?;
            summary.push(("k".into(), rep.k.to_string()));
            summary.push(("lambda".into(), fmt_num(rep.lambda)));
            summary.push(("constant".into(), fmt_num(rep.constant)));
            summary.push(("all_ok".into(), rep.all_ok().to_string()));
            checks.push(Check {
                name: "estimate_holds".into(),
                passed: rep.all_ok(),
                detail: format!("{} of {} radii within the bound", rep.ok.iter().filter(|&&b| b).count(), rep.ok.len()),
            });
            (0..rep.radii.len())
                .map(|i| Row {
                    t: rep.t[i],
                    m_total: rep.lhs[i],
                    slack: rep.rhs[i] - rep.lhs[i],
                    exceptional: !rep.ok[i],
                    ..Row::at(rep.radii[i])
                })
                .collect()
        }
        ExperimentKind::Plucker => {
            let curve = cfg.build_curve()?;
            let grid = cfg.build_grid(curve.disc().radius())?;
            let p = plucker_series(&curve, cfg.k, grid.radii())?;
            let range = p.residual_range();
            summary.push(("k".into(), p.k.to_string()));
            summary.push(("residual_range".into(), fmt_num(range)));
            checks.push(bound_check("residual_range", range, None, Some(a.range_max.unwrap_or(1.0))));
            (0..p.radii.len())
                .map(|i| Row { t: p.t_k[i], n_total: p.n_dk[i], s_k: p.s_k[i], ..Row::at(p.radii[i]) })
                .collect()
        }
        ExperimentKind::Ldl => {
            let (f, _) = cfg.build_map()?;
            let radius = f.disc().radius();
            let grid = cfg.build_grid(radius)?;
            let policy = match cfg.gamma {
                GammaChoice::Theorem => GammaPolicy::Theorem { eps: cfg.eps },
                GammaChoice::InverseDistance if radius.is_finite() => GammaPolicy::inverse_distance(radius),
                GammaChoice::InverseDistance => return Err(Error::Config("gamma = inverse-distance needs a finite disc".into())),
                GammaChoice::One => GammaPolicy::user("1", |_| 1.0),
            };
            let rep = ldl_residual(&f, &grid, cfg.k, cfg.delta, &policy)?;
            summary.push(("k".into(), rep.k.to_string()));
            summary.push(("delta".into(), fmt_num(rep.delta)));
            summary.push(("gamma".into(), rep.gamma.clone()));
            summary.push(("c_log".into(), fmt_num(rep.c_log)));
            summary.push(("c_const".into(), fmt_num(rep.c)));
            let flagged = rep.records.iter().filter(|x| x.exceptional).map(|x| x.r).collect();
            let ex = ExceptionalSummary::new(flagged, rep.exceptional_measure, cfg.cap);
            checks.push(bound_check("exceptional_measure", ex.measure, None, Some(a.measure_max.unwrap_or(cfg.cap))));
            exceptional = Some(ex);
            rep.records
                .iter()
                .map(|x| Row { t: x.t, m_total: x.lhs, slack: x.rhs - x.lhs, exceptional: x.exceptional, ..Row::at(x.r) })
                .collect()
        }
        ExperimentKind::GrowthIndex => {
            let (f, geom) = cfg.build_map()?;
            let grid = cfg.build_grid(f.disc().radius())?;
            let ch = characteristic_series(&f, &geom, grid.radii())?;
            let g = if f.disc().is_plane() {
                GrowthIndexEstimate::entire()
            } else {
                growth_index_from_series(f.disc().radius(), grid.radii(), &ch.value)?
            };
            summary.push(("geometry".into(), geom.kind().into()));
            growth_lines(&mut summary, &g);
            if a.c_min.is_some() || a.c_max.is_some() {
                checks.push(bound_check("c_est", g.c_est, a.c_min, a.c_max));
            }
            (0..grid.len()).map(|i| Row { t: ch.value[i], t_area: ch.area[i], ..Row::at(grid.radii()[i]) }).collect()
        }
        ExperimentKind::CalculusLemma => {
            let (h, radius): (Box<dyn Fn(f64) -> f64>, f64) = match cfg.h {
                LemmaFunction::Characteristic => {
                    let (f, geom) = cfg.build_map()?;
                    let radius = f.disc().radius();
                    let grid = cfg.build_grid(radius)?;
                    let ch = characteristic_series(&f, &geom, grid.radii())?;
                    let table: Vec<(f64, f64)> = grid.radii().iter().cloned().zip(ch.value).collect();
                    (Box::new(move |r| lookup(&table, r)), radius)
                }
                LemmaFunction::Identity => (Box::new(|r| r), cfg.map_radius()?),
                LemmaFunction::LogInverseDistance => (Box::new(|r: f64| -(1.0 - r).ln()), 1.0),
                LemmaFunction::Exp => (Box::new(f64::exp), cfg.map_radius()?),
            };
            let grid = cfg.build_grid(radius)?;
            let gamma: Box<dyn Fn(f64) -> f64> = match cfg.gamma {
                GammaChoice::One => Box::new(|_| 1.0),
                GammaChoice::InverseDistance if radius.is_finite() => Box::new(move |r| 1.0 / (radius - r)),
                GammaChoice::InverseDistance => return Err(Error::Config("gamma = inverse-distance needs a finite disc".into())),
                GammaChoice::Theorem => {
                    let c = cfg.c.ok_or(Error::MissingGrowthIndex)?;
                    let w = c + cfg.eps;
                    let h = &h;
                    let hv: Vec<(f64, f64)> = grid.radii().iter().map(|&r| (r, h(r))).collect();
                    Box::new(move |r| (w * lookup(&hv, r)).exp())
                }
            };
            let check = calculus_lemma_check(&h, &gamma, cfg.delta, &grid, cfg.form)?;
            summary.push(("delta".into(), fmt_num(cfg.delta)));
            summary.push(("form".into(), format!("{:?}", cfg.form)));
            let ex = ExceptionalSummary::new(check.violations.clone(), check.measure, cfg.cap);
            checks.push(bound_check("exceptional_measure", ex.measure, None, Some(a.measure_max.unwrap_or(cfg.cap))));
            exceptional = Some(ex);
            grid.radii()
                .iter()
                .map(|&r| Row { t: h(r), exceptional: check.violations.contains(&r), ..Row::at(r) })
                .collect()
        }
    };
    Ok(Outcome { name: cfg.name.clone(), kind: cfg.kind, rows, summary, exceptional, checks })
}

impl ExperimentConfig {
    /// Radius for synthetic lemma checks: the map's disc if one is given, else ℂ.
    fn map_radius(&self) -> Result<f64> {
        match &self.map {
            Some(_) => Ok(self.build_map()?.0.disc().radius()),
            None if self.grid == GridSpec::Standard => Err(Error::Config("a synthetic h needs an explicit [grid]".into())),
            None => Ok(f64::INFINITY),
        }
    }
}

/// Value at a grid radius; radii come from the same grid so lookups are exact.
fn lookup(table: &[(f64, f64)], r: f64) -> f64 {
    table.iter().find(|(x, _)| *x == r).map_or(f64::NAN, |&(_, v)| v)
}

fn slack_checks(
    checks: &mut Vec<Check>,
    exceptional: &mut Option<ExceptionalSummary>,
    table: &NevanlinnaTable,
    c: f64,
    cfg: &ExperimentConfig,
) -> Result<()> {
    let a = &cfg.assertions;
    let ex = exceptional_set_measure(table, c, cfg.eps).with_cap(cfg.cap);
    checks.push(bound_check("min_slack", table.min_slack_from(0.0), Some(a.slack_min.unwrap_or(-1.0)), None));
    checks.push(bound_check("exceptional_measure", ex.measure, None, Some(a.measure_max.unwrap_or(cfg.cap))));
    *exceptional = Some(ex);
    Ok(())
}
