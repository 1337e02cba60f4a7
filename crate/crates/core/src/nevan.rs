//! Nevanlinna functions of maps into P¹, the flat torus and the Poincaré
//! pullback: characteristic, proximity, counting, defects, growth index and
//! second-main-theorem reports.

use crate::error::{Error, Result};
use crate::funcrep::{HoloMap, Target, TargetGeometry};
use crate::quad::{circle_average, height_on_radii, CircleIntegrand, RadialGrid};
use crate::zeros::{self, ZeroSet};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;

/// Largest admissible drift between the circle-average and area forms of T.
pub const CROSS_CHECK_TOL: f64 = 0.05;
/// Trailing window for fits and liminf surrogates.
pub const TAIL_WINDOW: usize = 12;
const TOL_CIRCLE: f64 = 1e-9;
const TOL_PROX: f64 = 1e-8;
const TOL_AREA: f64 = 1e-7;
/// The area form only cross-checks the circle-average form for P¹.
const TOL_AREA_CHECK: f64 = 1e-4;
/// Radii whose circles need more angular panels are not cross-checked.
pub const MAX_CHECK_PANELS: usize = 512;

fn origin() -> C {
    C::new(0.0, 0.0)
}

/// Cartan form circavg log‖F(re^{iθ})‖ − log‖F(0)‖ for maps into P¹.
pub fn cartan_characteristic(f: &HoloMap, r: f64) -> Result<f64> {
    let at0 = f.eval_projective(origin())?.log_norm();
    let g = CircleIntegrand::new(|t| Ok(f.eval_projective(C::from_polar(r, t))?.log_norm()))
        .with_panels(f.panels(r))
        .on_radius(r);
    Ok(circle_average(&g, TOL_CIRCLE * (1.0 + r))? - at0)
}

fn area_density<'a>(f: &'a HoloMap, geom: &'a TargetGeometry) -> Result<Box<dyn Fn(C) -> Result<f64> + Sync + 'a>> {
    Ok(match geom {
        TargetGeometry::P1FubiniStudy => Box::new(move |z| f.fs_density(z)),
        TargetGeometry::TorusFlat(l) => {
            let d = f.derivative(1)?;
            let k = std::f64::consts::PI / l.area();
            Box::new(move |z| Ok(k * d.eval(z)?.norm_sqr()))
        }
        TargetGeometry::PoincarePullback => Box::new(|z: C| {
            let s = 1.0 - z.norm_sqr();
            Ok(2.0 / (s * s))
        }),
        TargetGeometry::PnFubiniStudy(_) => {
            return Err(Error::PreconditionViolation("curves into Pⁿ are handled by projcurve".into()))
        }
    })
}

/// Both forms of T on an increasing list of radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacteristicSeries {
    pub radii: Vec<f64>,
    /// The reported value: the circle-average form for P¹, the area form otherwise.
    pub value: Vec<f64>,
    /// Area form; NaN beyond the cross-checked radii.
    pub area: Vec<f64>,
    /// Circle-average form where available.
    pub cartan: Option<Vec<f64>>,
}

/// T on every radius, with the cross-check between its two forms for P¹.
pub fn characteristic_series(f: &HoloMap, geom: &TargetGeometry, radii: &[f64]) -> Result<CharacteristicSeries> {
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0) || r >= f.disc().radius()) {
        return Err(Error::DomainViolation { z: C::new(r, 0.0), radius: f.disc().radius() });
    }
    let density = area_density(f, geom)?;
    let panels = |s: f64| f.panels(s);
    let p1 = matches!(geom, TargetGeometry::P1FubiniStudy);
    // the cross-check stops where circles need more panels than it is worth
    let checked = if p1 { radii.iter().take_while(|&&r| f.panels(r) <= MAX_CHECK_PANELS).count() } else { radii.len() };
    let tol = if p1 { TOL_AREA_CHECK } else { TOL_AREA };
    let mut area = height_on_radii(&density, &radii[..checked], tol, &panels, &[])?;
    area.resize(radii.len(), f64::NAN);
    let cartan = match geom {
        TargetGeometry::P1FubiniStudy => {
            let c: Vec<f64> = radii.par_iter().map(|&r| cartan_characteristic(f, r)).collect::<Result<_>>()?;
            for ((&r, &a), &b) in radii.iter().zip(&area).zip(&c).take(checked) {
                if (a - b).abs() > CROSS_CHECK_TOL {
                    return Err(Error::CrossCheckMismatch { r, cartan: b, area: a });
                }
            }
            Some(c)
        }
        _ => None,
    };
    let value = cartan.clone().unwrap_or_else(|| area.clone());
    Ok(CharacteristicSeries { radii: radii.to_vec(), value, area, cartan })
}

/// T_{f,ω}(r).
pub fn characteristic(f: &HoloMap, geom: &TargetGeometry, r: f64) -> Result<f64> {
    Ok(characteristic_series(f, geom, &[r])?.value[0])
}

/// Zeros of f − a needed for counting and quadrature hints up to `radius`.
#[derive(Clone, Debug)]
pub enum Preimages {
    Zeros(ZeroSet),
    /// a + Λ scaled back to the source: points (a + p)/scale.
    Lattice { points: Vec<C>, radius: f64 },
}

impl Preimages {
    pub fn locate(f: &HoloMap, geom: &TargetGeometry, a: &Target, radius: f64) -> Result<Self> {
        match geom {
            TargetGeometry::TorusFlat(l) => {
                let (a, scale) = torus_parts(f, a)?;
                let pts = l.points_within(-a, scale.norm() * radius).into_iter().map(|p| (a + p) / scale).collect();
                Ok(Preimages::Lattice { points: pts, radius })
            }
            TargetGeometry::P1FubiniStudy | TargetGeometry::PoincarePullback => {
                if f.omits_value(a) {
                    return Ok(Preimages::Zeros(ZeroSet { radius, zeros: Vec::new() }));
                }
                let g = f.preimage_rep(a);
                Ok(Preimages::Zeros(zeros::locate_with_retries(&g, radius)?))
            }
            TargetGeometry::PnFubiniStudy(_) => Err(Error::PreconditionViolation("use projcurve for curves".into())),
        }
    }

    pub fn counting(&self, r: f64) -> f64 {
        match self {
            Preimages::Zeros(z) => z.counting(r, None),
            Preimages::Lattice { points, .. } => {
                points.iter().filter(|p| p.norm() < r).map(|p| (r / p.norm()).ln()).sum()
            }
        }
    }

    pub fn hints_near(&self, r: f64) -> Vec<f64> {
        match self {
            Preimages::Zeros(z) => z.hints_near(r),
            Preimages::Lattice { points, .. } => points
                .iter()
                .filter(|p| p.norm() >= 0.98 * r && p.norm() <= 1.02 * r)
                .map(|p| p.arg())
                .collect(),
        }
    }

    fn hits_origin(&self) -> bool {
        match self {
            Preimages::Zeros(z) => z.zeros.iter().any(|z| z.location.norm() == 0.0),
            Preimages::Lattice { points, .. } => points.iter().any(|p| p.norm() == 0.0),
        }
    }
}

fn torus_parts(f: &HoloMap, a: &Target) -> Result<(C, C)> {
    let scale = match f.body() {
        crate::funcrep::Body::TorusLift { scale, .. } => *scale,
        _ => return Err(Error::PreconditionViolation("torus geometry needs a torus-projection map".into())),
    };
    match a {
        Target::Finite(c) => Ok((*c, scale)),
        Target::Infinity => Err(Error::InvalidArgument("the torus has no point at infinity".into())),
    }
}

/// m(r, a) with singular-angle hints supplied by the caller.
pub fn proximity_with_hints(f: &HoloMap, geom: &TargetGeometry, r: f64, a: &Target, hints: &[f64]) -> Result<f64> {
    let g = match geom {
        TargetGeometry::P1FubiniStudy => {
            let a = *a;
            CircleIntegrand::new(move |t| Ok(-f.log_chordal(C::from_polar(r, t), &a)?))
        }
        TargetGeometry::TorusFlat(l) => {
            let (a, scale) = torus_parts(f, a)?;
            CircleIntegrand::new(move |t| Ok(0.5 * l.green(scale * C::from_polar(r, t), a)))
        }
        other => {
            return Err(Error::PreconditionViolation(format!("proximity is not defined for {} targets", other.kind())))
        }
    };
    let g = g.with_hints(hints.iter().copied()).with_panels(f.panels(r)).on_radius(r);
    circle_average(&g, TOL_PROX * (1.0 + r))
}

fn hint_radius(f: &HoloMap, r: f64) -> f64 {
    let big = f.disc().radius();
    if big.is_finite() {
        (1.02 * r).min(0.5 * (r + big))
    } else {
        1.02 * r
    }
}

/// m_{f,ω}(r, a): circle average of the potential ½u_a with dd^c u_a = ω − δ_a.
pub fn proximity(f: &HoloMap, geom: &TargetGeometry, r: f64, a: &Target) -> Result<f64> {
    zeros::with_retries(r, |rr| {
        let pre = Preimages::locate(f, geom, a, hint_radius(f, rr))?;
        proximity_with_hints(f, geom, rr, a, &pre.hints_near(rr))
    })
}

/// N_f(r, a) for the given geometry.
pub fn counting(f: &HoloMap, geom: &TargetGeometry, r: f64, a: &Target) -> Result<f64> {
    let pre = Preimages::locate(f, geom, a, r)?;
    if pre.hits_origin() {
        return Err(Error::OriginHitsTarget);
    }
    Ok(pre.counting(r))
}

/// m + N − T at radius r; bounded in r by the first main theorem.
pub fn fmt_residual(f: &HoloMap, geom: &TargetGeometry, r: f64, a: &Target) -> Result<f64> {
    let pre = Preimages::locate(f, geom, a, hint_radius(f, r))?;
    if pre.hits_origin() {
        return Err(Error::OriginHitsTarget);
    }
    let m = zeros::with_retries(r, |rr| proximity_with_hints(f, geom, rr, a, &pre.hints_near(rr)))?;
    Ok(m + pre.counting(r) - characteristic(f, geom, r)?)
}

/// m, N and T on a grid, sharing the preimage search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FmtSeries {
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub t: Vec<f64>,
}

impl FmtSeries {
    pub fn residuals(&self) -> Vec<f64> {
        self.m.iter().zip(&self.n).zip(&self.t).map(|((m, n), t)| m + n - t).collect()
    }

    /// max − min of the residual.
    pub fn residual_range(&self) -> f64 {
        let r = self.residuals();
        r.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - r.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub fn proximity_counting_series(f: &HoloMap, geom: &TargetGeometry, a: &Target, radii: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let last = *radii.last().ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    let pre = Preimages::locate(f, geom, a, hint_radius(f, last))?;
    if pre.hits_origin() {
        return Err(Error::OriginHitsTarget);
    }
    let m = radii
        .par_iter()
        .map(|&r| zeros::with_retries(r, |rr| proximity_with_hints(f, geom, rr, a, &pre.hints_near(rr))))
        .collect::<Result<Vec<_>>>()?;
    let n = radii.iter().map(|&r| pre.counting(r)).collect();
    Ok((m, n))
}

pub fn fmt_series(f: &HoloMap, geom: &TargetGeometry, a: &Target, radii: &[f64]) -> Result<FmtSeries> {
    let t = characteristic_series(f, geom, radii)?.value;
    let (m, n) = proximity_counting_series(f, geom, a, radii)?;
    Ok(FmtSeries { m, n, t })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthIndexEstimate {
    /// Estimated growth index; +∞ for bounded characteristic.
    pub c_est: f64,
    /// Slope of T against log R/(R − r); None when no fit was made.
    pub kappa: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub residual_rms: f64,
    pub bounded_characteristic: bool,
}

impl GrowthIndexEstimate {
    pub fn entire() -> Self {
        GrowthIndexEstimate { c_est: 0.0, kappa: None, window: None, residual_rms: 0.0, bounded_characteristic: false }
    }
}

/// Least-squares slope and intercept of y against x.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let k = sxy / sxx;
    (k, my - k * mx)
}

/// Fit of T against log R/(R − r) over the trailing window of the series.
pub fn growth_index_from_series(radius: f64, radii: &[f64], t: &[f64]) -> Result<GrowthIndexEstimate> {
    if radius.is_infinite() {
        return Ok(GrowthIndexEstimate::entire());
    }
    let n = radii.len();
    if n < 3 {
        return Err(Error::GridTooCoarse("need at least three radii for the growth fit".into()));
    }
    let lo = n.saturating_sub(TAIL_WINDOW);
    let x: Vec<f64> = radii[lo..].iter().map(|&r| (radius / (radius - r)).ln()).collect();
    let y = &t[lo..];
    let (k, b) = least_squares(&x, y);
    let rms = (x.iter().zip(y).map(|(a, v)| (v - k * a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    let variation = y[y.len() - 1] - y[0];
    let window = Some((radii[lo], radii[n - 1]));
    // bounded or sublogarithmic characteristic: no finite index
    if !(k > 1e-3) || variation.abs() < 1e-9 {
        return Ok(GrowthIndexEstimate { c_est: f64::INFINITY, kappa: Some(k), window, residual_rms: rms, bounded_characteristic: true });
    }
    if rms > 0.1 * variation.abs() {
        return Err(Error::FitUnstable { rms, variation });
    }
    Ok(GrowthIndexEstimate { c_est: 1.0 / k, kappa: Some(k), window, residual_rms: rms, bounded_characteristic: false })
}

/// Growth index: 0 on the plane, otherwise 1/κ with T ≈ κ·log 1/(1 − r).
pub fn growth_index(f: &HoloMap, geom: &TargetGeometry, grid: &RadialGrid) -> Result<GrowthIndexEstimate> {
    if f.disc().is_plane() {
        return Ok(GrowthIndexEstimate::entire());
    }
    let t = characteristic_series(f, geom, grid.radii())?.value;
    growth_index_from_series(f.disc().radius(), grid.radii(), &t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectEstimate {
    /// min over the trailing window of m̃/T, clamped to [0, 1].
    pub value: f64,
    /// m̃/T at the last radius, unclamped.
    pub last: f64,
    /// Additive constant removed from m (mean FMT residual on the fit third).
    pub constant: f64,
}

/// Liminf surrogate of m/T after removing the first-main-theorem constant.
pub fn defect_from_series(s: &FmtSeries, fit_len: usize) -> DefectEstimate {
    let res = s.residuals();
    let k = fit_len.clamp(1, res.len());
    let constant = res[..k].iter().sum::<f64>() / k as f64;
    let ratio: Vec<f64> = s.m.iter().zip(&s.t).map(|(m, t)| (m - constant) / t).collect();
    let lo = ratio.len().saturating_sub(TAIL_WINDOW);
    let value = ratio[lo..].iter().cloned().fold(f64::INFINITY, f64::min).clamp(0.0, 1.0);
    DefectEstimate { value, last: *ratio.last().expect("nonempty"), constant }
}

/// When f(0) = a the counting function is undefined and the FMT constant
/// cannot be fitted; the surrogate then uses m/T as it stands.
pub fn defect_estimate(f: &HoloMap, geom: &TargetGeometry, a: &Target, grid: &RadialGrid) -> Result<DefectEstimate> {
    match fmt_series(f, geom, a, grid.radii()) {
        Ok(s) => Ok(defect_from_series(&s, grid.fit_len())),
        Err(Error::OriginHitsTarget) => {
            let radii = grid.radii();
            let t = characteristic_series(f, geom, radii)?.value;
            let pre = Preimages::locate(f, geom, a, hint_radius(f, radii[radii.len() - 1]))?;
            let m = radii
                .par_iter()
                .map(|&r| zeros::with_retries(r, |rr| proximity_with_hints(f, geom, rr, a, &pre.hints_near(rr))))
                .collect::<Result<Vec<_>>>()?;
            Ok(raw_defect(&m, &t))
        }
        Err(e) => Err(e),
    }
}

fn raw_defect(m: &[f64], t: &[f64]) -> DefectEstimate {
    let ratio: Vec<f64> = m.iter().zip(t).map(|(m, t)| m / t).collect();
    let lo = ratio.len().saturating_sub(TAIL_WINDOW);
    let value = ratio[lo..].iter().cloned().fold(f64::INFINITY, f64::min).clamp(0.0, 1.0);
    DefectEstimate { value, last: *ratio.last().expect("nonempty"), constant: 0.0 }
}

/// Constants of the fitted-constant protocol: LHS ≤ base + c_log·log⁺T + c.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FittedConstants {
    pub c_log: f64,
    pub c: f64,
}

pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

impl FittedConstants {
    /// Fits on the first `fit_len` points: c_log is the nonnegative slope of
    /// the excess LHS − base against log⁺T, c the largest remaining excess.
    pub fn fit(lhs: &[f64], base: &[f64], t: &[f64], fit_len: usize) -> Self {
        let k = fit_len.clamp(1, lhs.len());
        let excess: Vec<f64> = (0..k).map(|i| lhs[i] - base[i]).collect();
        let lt: Vec<f64> = t[..k].iter().map(|&x| log_plus(x)).collect();
        let c_log = if k >= 2 { least_squares(&lt, &excess).0.max(0.0) } else { 0.0 };
        let c = (0..k).map(|i| excess[i] - c_log * lt[i]).fold(f64::NEG_INFINITY, f64::max);
        FittedConstants { c_log, c }
    }

    pub fn rhs(&self, base: f64, t: f64) -> f64 {
        base + self.c_log * log_plus(t) + self.c
    }
}

/// Σ_{slack<0} exp(w·T(rᵢ))Δrᵢ.
pub fn exceptional_measure(grid: &RadialGrid, slack: &[f64], t: &[f64], w: f64) -> f64 {
    slack
        .iter()
        .zip(t)
        .zip(grid.weights())
        .filter(|((s, _), _)| **s < 0.0)
        .map(|((_, t), dr)| (w * t).exp() * dr)
        .fold(0.0, |a, b| a + b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NevanlinnaRecord {
    pub r: f64,
    pub t: f64,
    pub t_area: f64,
    /// Per target, in the order of [`NevanlinnaTable::targets`].
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub n_ram: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub exceptional: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NevanlinnaTable {
    pub geometry: &'static str,
    pub targets: Vec<String>,
    pub eps: f64,
    pub growth: GrowthIndexEstimate,
    pub constants: FittedConstants,
    pub records: Vec<NevanlinnaRecord>,
    pub defects: Vec<DefectEstimate>,
    /// Σ_{exceptional} exp((c+ε)T)Δr.
    pub exceptional_measure: f64,
    /// Slope of the excess Σm + N_ram − (curvature term)·T against T: the
    /// smallest c the theorem allows, once additive constants are absorbed.
    pub implied_c: f64,
}

impl NevanlinnaTable {
    pub fn defect_sum(&self) -> f64 {
        self.defects.iter().map(|d| d.value).sum()
    }

    pub fn min_slack_from(&self, r0: f64) -> f64 {
        self.records.iter().filter(|x| x.r >= r0).map(|x| x.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Curvature coefficient χ in Σm + N_ram ≤ (χ + (1+ε)(c+ε))T: 2 for P¹,
/// 0 for the flat torus, −1 for the hyperbolic pullback.
fn curvature_term(geom: &TargetGeometry) -> f64 {
    match geom {
        TargetGeometry::P1FubiniStudy | TargetGeometry::PnFubiniStudy(_) => 2.0,
        TargetGeometry::TorusFlat(_) => 0.0,
        TargetGeometry::PoincarePullback => -1.0,
    }
}

/// Per-radius slack of the second main theorem for maps of a disc into a
/// Riemann surface. `c` overrides the fitted growth index.
pub fn smt_riemann_report(
    f: &HoloMap,
    geom: &TargetGeometry,
    targets: &[Target],
    grid: &RadialGrid,
    eps: f64,
    c: Option<f64>,
) -> Result<NevanlinnaTable> {
    for (i, a) in targets.iter().enumerate() {
        if targets[..i].contains(a) {
            return Err(Error::InvalidArgument(format!("target {a} listed twice")));
        }
    }
    let radii = grid.radii();
    let series = characteristic_series(f, geom, radii)?;
    let t = &series.value;
    let growth = if f.disc().is_plane() {
        GrowthIndexEstimate::entire()
    } else {
        growth_index_from_series(f.disc().radius(), radii, t)?
    };
    let c = match c {
        Some(c) => c,
        None if growth.c_est.is_finite() => growth.c_est,
        None => return Err(Error::MissingGrowthIndex),
    };
    let per_target = targets
        .iter()
        .map(|a| proximity_counting_series(f, geom, a, radii))
        .collect::<Result<Vec<_>>>()?;
    let n_ram = ramification_series(f, geom, radii)?;

    let chi = curvature_term(geom);
    let coef = chi + (1.0 + eps) * (c + eps);
    let sum_m: Vec<f64> = (0..radii.len()).map(|i| per_target.iter().map(|(m, _)| m[i]).sum()).collect();
    let lhs: Vec<f64> = sum_m.iter().zip(&n_ram).map(|(m, n)| m + n).collect();
    let base: Vec<f64> = radii.iter().zip(t).map(|(&r, &t)| coef * t + eps * log_plus(r)).collect();
    let constants = FittedConstants::fit(&lhs, &base, t, grid.fit_len());
    let rhs: Vec<f64> = base.iter().zip(t).map(|(&b, &t)| constants.rhs(b, t)).collect();
    let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let exceptional_measure = exceptional_measure(grid, &slack, t, c + eps);

    let excess: Vec<f64> = lhs.iter().zip(t).map(|(l, t)| l - chi * t).collect();
    let implied_c = least_squares(t, &excess).0;

    let defects = per_target
        .iter()
        .map(|(m, n)| defect_from_series(&FmtSeries { m: m.clone(), n: n.clone(), t: t.clone() }, grid.fit_len()))
        .collect();
    let records = (0..radii.len())
        .map(|i| NevanlinnaRecord {
            r: radii[i],
            t: t[i],
            t_area: series.area[i],
            m: per_target.iter().map(|(m, _)| m[i]).collect(),
            n: per_target.iter().map(|(_, n)| n[i]).collect(),
            n_ram: n_ram[i],
            lhs: lhs[i],
            rhs: rhs[i],
            slack: slack[i],
            exceptional: slack[i] < 0.0,
        })
        .collect();
    Ok(NevanlinnaTable {
        geometry: geom.kind(),
        targets: targets.iter().map(|a| a.to_string()).collect(),
        eps,
        growth,
        constants,
        records,
        defects,
        exceptional_measure,
        implied_c,
    })
}

/// N_ram on the grid: zeros of the derivative for torus and hyperbolic
/// targets, of the Wronskian of the reduced representation for P¹.
pub fn ramification_series(f: &HoloMap, geom: &TargetGeometry, radii: &[f64]) -> Result<Vec<f64>> {
    let last = *radii.last().ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    if f.is_unramified() {
        return Ok(vec![0.0; radii.len()]);
    }
    let w = match geom {
        TargetGeometry::P1FubiniStudy => f.wronskian_rep(),
        _ => f.derivative(1)?,
    };
    if w.eval(origin())?.norm() == 0.0 {
        return Err(Error::OriginHitsTarget);
    }
    let set = zeros::locate_with_retries(&w, last)?;
    Ok(radii.iter().map(|&r| set.counting(r, None)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{gallery, GalleryParams};
    use proptest::prelude::*;

    fn map(name: &str) -> (HoloMap, TargetGeometry) {
        gallery(name, &GalleryParams::default()).unwrap()
    }

    fn poly(coeffs: &str) -> HoloMap {
        gallery("poly", &GalleryParams::default().with("coeffs", coeffs)).unwrap().0
    }

    const P1: TargetGeometry = TargetGeometry::P1FubiniStudy;

    fn fin(x: f64) -> Target {
        Target::Finite(C::new(x, 0.0))
    }

    #[test]
    fn characteristic_examples() {
        let (z, _) = map("z");
        assert!((characteristic(&z, &P1, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-8);
        let (exp, _) = map("exp");
        let t = characteristic(&exp, &P1, 10.0).unwrap();
        assert!((t - 10.0 / std::f64::consts::PI).abs() < 0.02 * 10.0 / std::f64::consts::PI + 0.5);
        let (l, g) = map("lambda-poincare");
        assert!((characteristic(&l, &g, 0.9).unwrap() - (100.0f64 / 19.0).ln()).abs() < 1e-6);
    }

    #[test]
    fn cartan_and_area_forms_agree() {
        let (m, _) = map("mobius-half");
        let radii = [0.3, 1.0, 2.5, 7.0, 20.0];
        let s = characteristic_series(&m, &P1, &radii).unwrap();
        let c = s.cartan.unwrap();
        for (a, b) in s.area.iter().zip(&c) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn torus_characteristic_is_quadratic() {
        let (t, g) = map("torus-proj");
        let r = 3.0;
        let expected = std::f64::consts::PI * r * r / 2.0;
        assert!((characteristic(&t, &g, r).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn proximity_examples() {
        let (exp, _) = map("exp");
        let m = proximity(&exp, &P1, 10.0, &Target::Infinity).unwrap();
        assert!((m - 10.0 / std::f64::consts::PI).abs() < 0.1);
        let (z, _) = map("z");
        let m = proximity(&z, &P1, 10.0, &fin(0.0)).unwrap();
        assert!((m - 0.5 * (1.0f64 + 0.01).ln()).abs() < 1e-8);
        let m = proximity(&exp, &P1, 10.0, &fin(1.0)).unwrap();
        assert!((0.0..=1.5).contains(&m));
    }

    #[test]
    fn fmt_residual_is_an_exact_constant_for_polynomials() {
        // m + N − T = log 1/chord(F(0), a) for a reduced representation
        let f = poly("-1,0,1");
        for r in [0.5, 2.0, 9.0] {
            let res = fmt_residual(&f, &P1, r, &fin(3.0)).unwrap();
            let chord = 4.0 / (2f64.sqrt() * 10f64.sqrt());
            assert!((res - (1.0 / chord).ln()).abs() < 1e-7, "r = {r}: {res}");
        }
    }

    #[test]
    fn fmt_examples() {
        let grid = RadialGrid::geometric(2.0, 100.0, 12).unwrap();
        let (z, _) = map("z");
        assert!(fmt_series(&z, &P1, &fin(1.0), grid.radii()).unwrap().residual_range() <= 1.0);
        assert!(fmt_series(&z, &P1, &Target::Infinity, grid.radii()).unwrap().residual_range() <= 1.0);
        let (exp, _) = map("exp");
        let grid = RadialGrid::geometric(1.0, 30.0, 12).unwrap();
        assert!(fmt_series(&exp, &P1, &fin(0.0), grid.radii()).unwrap().residual_range() <= 1.0);
        let z0 = map("z").0;
        assert!(matches!(fmt_residual(&z0, &P1, 1.0, &fin(0.0)), Err(Error::OriginHitsTarget)));
    }

    #[test]
    fn torus_fmt_residual_is_bounded() {
        let (t, g) = map("torus-proj");
        let a = Target::Finite(C::new(0.31, 0.17));
        let grid = RadialGrid::geometric(2.0, 12.0, 8).unwrap();
        let s = fmt_series(&t, &g, &a, grid.radii()).unwrap();
        assert!(s.residual_range() < 0.5, "{:?}", s.residuals());
    }

    #[test]
    fn growth_index_examples() {
        let (exp, _) = map("exp");
        let grid = RadialGrid::standard(f64::INFINITY).unwrap();
        assert_eq!(growth_index(&exp, &P1, &grid).unwrap().c_est, 0.0);
        let grid = RadialGrid::standard(1.0).unwrap();
        let t: Vec<f64> = grid.radii().iter().map(|r| 2.0 * (1.0 / (1.0 - r)).ln()).collect();
        let g = growth_index_from_series(1.0, grid.radii(), &t).unwrap();
        assert!((g.c_est - 0.5).abs() < 1e-9);
        let flat = vec![1.0; grid.len()];
        assert!(growth_index_from_series(1.0, grid.radii(), &flat).unwrap().bounded_characteristic);
    }

    #[test]
    fn fitted_constants_cover_the_fit_window() {
        let t: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let lhs: Vec<f64> = t.iter().map(|x| 2.0 * x + 0.7 * x.ln() + 3.0).collect();
        let base: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        let k = FittedConstants::fit(&lhs, &base, &t, 10);
        assert!((k.c_log - 0.7).abs() < 1e-9);
        assert!((k.c - 3.0).abs() < 1e-9);
        for i in 0..30 {
            assert!(k.rhs(base[i], t[i]) >= lhs[i] - 1e-9);
        }
    }

    #[test]
    fn exp_report() {
        let (exp, _) = map("exp");
        let grid = RadialGrid::geometric(5.0, 50.0, 16).unwrap();
        let rep = smt_riemann_report(&exp, &P1, &[fin(0.0), Target::Infinity], &grid, 0.1, None).unwrap();
        assert_eq!(rep.growth.c_est, 0.0);
        assert!(rep.min_slack_from(5.0) >= -0.5);
        assert!(rep.defect_sum() <= 2.0 + 1e-9);
        assert!(rep.defects.iter().all(|d| d.value > 0.99));
        assert!(rep.exceptional_measure <= 10.0);
        assert!(rep.records.iter().all(|x| x.n_ram == 0.0));
    }

    #[test]
    fn duplicate_targets_are_rejected() {
        let (exp, _) = map("exp");
        let grid = RadialGrid::geometric(1.0, 5.0, 6).unwrap();
        assert!(smt_riemann_report(&exp, &P1, &[fin(0.0), fin(0.0)], &grid, 0.1, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn characteristic_is_nondecreasing(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let f = poly(&format!("{a},{b},1"));
            let radii: Vec<f64> = (1..10).map(|i| 0.4 * i as f64).collect();
            let s = characteristic_series(&f, &P1, &radii).unwrap();
            for w in s.value.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9);
            }
        }

        #[test]
        fn defects_lie_in_unit_interval(x in -3.0f64..3.0) {
            prop_assume!(x.abs() > 0.1);
            let f = poly("0.5,0,1");
            let grid = RadialGrid::geometric(1.0, 20.0, 12).unwrap();
            let d = defect_estimate(&f, &P1, &fin(x), &grid).unwrap();
            prop_assert!((0.0..=1.0).contains(&d.value));
        }
    }
}
