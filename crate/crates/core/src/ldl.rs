//! Logarithmic derivative lemma: the proximity of f^{(k)}/f to ∞ and its
//! bound by (1+δ)k log γ(r) + δk log⁺r + O(log T + log log γ + log log r).

use crate::error::{Error, Result};
use crate::exact::ExpPoly;
use crate::funcrep::{eval_exppoly, HoloMap, Target, TargetGeometry};
use crate::nevan::{characteristic_series, growth_index, least_squares, log_plus, Preimages};
use crate::quad::{circle_average, CircleIntegrand, RadialGrid};
use crate::zeros;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

const TOL_CIRCLE: f64 = 1e-9;
/// ε in γ(r) = exp((c + ε)T(r)) when none is given.
pub const DEFAULT_EPS: f64 = 0.1;

/// Choice of the auxiliary function γ with ∫γ = ∞.
#[derive(Clone)]
pub enum GammaPolicy {
    /// γ(r) = exp((c + ε)T_f(r)) with c the growth index of f.
    Theorem { eps: f64 },
    /// A caller-supplied γ, e.g. 1/(1 − r) when T_f stays bounded.
    User { label: String, gamma: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl GammaPolicy {
    pub fn theorem() -> Self {
        GammaPolicy::Theorem { eps: DEFAULT_EPS }
    }

    pub fn user(label: &str, gamma: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GammaPolicy::User { label: label.into(), gamma: Arc::new(gamma) }
    }

    /// γ(r) = 1/(R − r) on Δ(R).
    pub fn inverse_distance(radius: f64) -> Self {
        GammaPolicy::user(&format!("1/({radius}-r)"), move |r| 1.0 / (radius - r))
    }

    pub fn label(&self) -> String {
        match self {
            GammaPolicy::Theorem { eps } => format!("exp((c+{eps})T)"),
            GammaPolicy::User { label, .. } => label.clone(),
        }
    }
}

impl std::fmt::Debug for GammaPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

fn identically_zero(f: &HoloMap) -> Result<bool> {
    if let Some(e) = f.as_exp_poly() {
        return Ok(e.is_zero());
    }
    if f.as_rational().is_some() {
        return Ok(false);
    }
    let rho = if f.disc().is_plane() { 1.0 } else { 0.5 * f.disc().radius() };
    for i in 0..16 {
        if f.eval(C::from_polar(rho * (0.3 + 0.04 * i as f64), 0.7 * i as f64))?.norm() > 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluates |f^{(k)}/f| at z, sharing the exponential scale between the two.
struct Ratio {
    f: HoloMap,
    dk: HoloMap,
    exact: Option<(ExpPoly, ExpPoly)>,
}

impl Ratio {
    fn new(f: &HoloMap, k: usize) -> Result<Self> {
        let dk = f.derivative(k)?;
        let exact = match (f.as_exp_poly(), dk.as_exp_poly()) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Ok(Ratio { f: f.clone(), dk, exact })
    }

    fn log_abs(&self, z: C) -> Result<f64> {
        let (num, den) = match &self.exact {
            Some((f, dk)) => {
                let s = f.log_scale(z);
                (eval_exppoly(dk, z, s), eval_exppoly(f, z, s))
            }
            None => (self.dk.eval(z)?, self.f.eval(z)?),
        };
        if den.norm() == 0.0 {
            return Err(Error::ZeroOnCircle { radius: z.norm() });
        }
        Ok((num.norm() / den.norm()).ln())
    }
}

fn hint_radius(f: &HoloMap, r: f64) -> f64 {
    if f.disc().is_plane() {
        1.05 * r
    } else {
        (1.05 * r).min(0.5 * (r + f.disc().radius()))
    }
}

/// Zeros and poles of f up to a little beyond `r`.
fn singular_sets(f: &HoloMap, r: f64) -> Result<Vec<Preimages>> {
    let geom = TargetGeometry::P1FubiniStudy;
    let radius = hint_radius(f, r);
    let mut out = vec![Preimages::locate(f, &geom, &Target::Finite(C::new(0.0, 0.0)), radius)?];
    if !f.is_holomorphic() {
        out.push(Preimages::locate(f, &geom, &Target::Infinity, radius)?);
    }
    Ok(out)
}

fn proximity_with(ratio: &Ratio, r: f64, sets: &[Preimages]) -> Result<f64> {
    zeros::with_retries(r, |rr| {
        let hints: Vec<f64> = sets.iter().flat_map(|s| s.hints_near(rr)).collect();
        let g = CircleIntegrand::new(|t| Ok(ratio.log_abs(C::from_polar(rr, t))?.max(0.0)))
            .with_hints(hints)
            .with_panels(ratio.f.panels(rr).max(ratio.dk.panels(rr)))
            .on_radius(rr);
        circle_average(&g, TOL_CIRCLE * (1.0 + rr))
    })
}

/// circavg log⁺|f^{(k)}/f| on |z| = r.
pub fn logderiv_proximity(f: &HoloMap, r: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    if !(r > 0.0) || r >= f.disc().radius() {
        return Err(Error::DomainViolation { z: C::new(r, 0.0), radius: f.disc().radius() });
    }
    if identically_zero(f)? {
        return Err(Error::InvalidArgument("f vanishes identically".into()));
    }
    let sets = singular_sets(f, r)?;
    proximity_with(&Ratio::new(f, k)?, r, &sets)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdlRecord {
    pub r: f64,
    pub lhs: f64,
    pub t: f64,
    pub log_gamma: f64,
    /// (1+δ)k log γ + δk log⁺r.
    pub raw_rhs: f64,
    /// raw_rhs + C_log·(log⁺T + log⁺log γ + log⁺log⁺r) + C.
    pub rhs: f64,
    pub exceptional: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdlReport {
    pub k: usize,
    pub delta: f64,
    pub gamma: String,
    pub records: Vec<LdlRecord>,
    pub c_log: f64,
    pub c: f64,
    /// Σ_{flagged} γ(rᵢ)Δrᵢ.
    pub exceptional_measure: f64,
}

impl LdlReport {
    pub fn lhs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lhs).collect()
    }

    pub fn all_within(&self) -> bool {
        self.records.iter().all(|r| !r.exceptional)
    }
}

/// Fills the report on the grid; the O(log …) term is fitted on the first
/// third of the grid as C_log·L + C with L = log⁺T + log⁺log γ + log⁺log⁺r.
pub fn ldl_residual(f: &HoloMap, grid: &RadialGrid, k: usize, delta: f64, policy: &GammaPolicy) -> Result<LdlReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::PreconditionViolation(format!("δ must lie in (0, 1), got {delta}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    if identically_zero(f)? {
        return Err(Error::InvalidArgument("f vanishes identically".into()));
    }
    let radii = grid.radii();
    if let Some(&r) = radii.iter().find(|&&r| r >= f.disc().radius()) {
        return Err(Error::DomainViolation { z: C::new(r, 0.0), radius: f.disc().radius() });
    }
    let geom = TargetGeometry::P1FubiniStudy;
    let t = characteristic_series(f, &geom, radii)?.value;
    let log_gamma: Vec<f64> = match policy {
        GammaPolicy::Theorem { eps } => {
            let c = growth_index(f, &geom, grid)?.c_est;
            if !c.is_finite() {
                return Err(Error::MissingGrowthIndex);
            }
            t.iter().map(|t| (c + eps) * t).collect()
        }
        GammaPolicy::User { gamma, .. } => radii.iter().map(|&r| gamma(r).ln()).collect(),
    };
    let ratio = Ratio::new(f, k)?;
    let sets = singular_sets(f, radii[radii.len() - 1])?;
    let lhs: Vec<f64> = radii.par_iter().map(|&r| proximity_with(&ratio, r, &sets)).collect::<Result<_>>()?;

    let kf = k as f64;
    let raw: Vec<f64> =
        radii.iter().zip(&log_gamma).map(|(&r, lg)| (1.0 + delta) * kf * lg + delta * kf * log_plus(r)).collect();
    let l: Vec<f64> = (0..radii.len()).map(|i| log_plus(t[i]) + log_plus(log_gamma[i]) + log_plus(log_plus(radii[i]))).collect();
    let fit = grid.fit_len().clamp(1, radii.len());
    let excess: Vec<f64> = (0..fit).map(|i| lhs[i] - raw[i]).collect();
    let c_log = if fit >= 2 { least_squares(&l[..fit], &excess).0.max(0.0) } else { 0.0 };
    let c = (0..fit).map(|i| excess[i] - c_log * l[i]).fold(f64::NEG_INFINITY, f64::max);

    let mut measure = 0.0;
    let records = (0..radii.len())
        .map(|i| {
            let rhs = raw[i] + c_log * l[i] + c;
            let exceptional = lhs[i] > rhs + 1e-9 * (1.0 + rhs.abs());
            if exceptional {
                measure += log_gamma[i].exp() * grid.weights()[i];
            }
            LdlRecord { r: radii[i], lhs: lhs[i], t: t[i], log_gamma: log_gamma[i], raw_rhs: raw[i], rhs, exceptional }
        })
        .collect();
    Ok(LdlReport { k, delta, gamma: policy.label(), records, c_log, c, exceptional_measure: measure })
}
