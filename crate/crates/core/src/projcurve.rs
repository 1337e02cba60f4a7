//! Holomorphic curves in Pⁿ: associated curves, the densities h_k,
//! characteristic functions of F_k, Plücker residuals, projective distances
//! to hyperplanes, the Cartan-type second main theorem, the Ahlfors estimate
//! and the product-to-sum inequality.

use crate::error::{Error, Result};
use crate::exact::{float_rank, gq_from_c64, gq_is_zero, gq_zero, ExpPoly, Gq, Poly};
use crate::funcrep::{curve_gallery, Disc, HoloMap, TargetGeometry};
use crate::nevan::{
    defect_from_series, exceptional_measure, growth_index_from_series, least_squares, log_plus, CharacteristicSeries,
    FittedConstants, FmtSeries, GrowthIndexEstimate, NevanlinnaRecord, NevanlinnaTable, CROSS_CHECK_TOL,
    MAX_CHECK_PANELS,
};
use crate::quad::{circle_average, height_on_radii, CircleIntegrand, RadialGrid};
use crate::zeros::{self, ZeroRecord, ZeroSet};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Largest number of hyperplanes in the max-over-K enumeration.
pub const MAX_Q: usize = 10;
/// Largest projective dimension handled by the SMT reports.
pub const MAX_N: usize = 4;
const SAMPLES: usize = 32;
/// Step toward the origin used to evaluate h_k and φ_k next to stationary points.
pub const STATIONARY_OFFSET: f64 = 1e-7;
const TOL_CIRCLE: f64 = 1e-9;
const TOL_AREA_CHECK: f64 = 1e-4;
const TOL_AHLFORS: f64 = 1e-6;
const ORDER_CAP: u32 = 64;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All `size`-subsets of 0..m in lexicographic order.
pub fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Coordinate index of Λ^{k+1}ℂ^{n+1}: the (k+1)-subsets of 0..=n in
/// lexicographic order.
pub fn wedge_index(n: usize, k: usize) -> Vec<Vec<usize>> {
    subsets(n + 1, k + 1)
}

fn det(mut m: Vec<Vec<C>>) -> C {
    let n = m.len();
    let mut d = C::new(1.0, 0.0);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty");
        if m[p][col].norm() == 0.0 {
            return C::new(0.0, 0.0);
        }
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        let piv = m[col][col];
        d *= piv;
        for r in col + 1..n {
            let f = m[r][col] / piv;
            if f.norm() != 0.0 {
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    d
}

/// Cofactor expansion along the first row; sizes stay at most MAX_N + 1.
fn det_exact(m: &[Vec<ExpPoly>]) -> ExpPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ExpPoly::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<ExpPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = m[0][j].mul(&det_exact(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Deterministic interior sample points for degeneracy checks.
pub(crate) fn sample_points(disc: Disc) -> Vec<C> {
    let rho = if disc.is_plane() { 3.0 } else { 0.9 * disc.radius() };
    (0..SAMPLES)
        .map(|i| {
            let t = (i as f64 + 0.5) / SAMPLES as f64;
            C::from_polar(rho * t.sqrt(), 2.399_963_229_728_653 * i as f64 + 0.3)
        })
        .collect()
}

pub(crate) fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// A hyperplane {a·x = 0} of Pⁿ with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vec<C>,
}

impl Hyperplane {
    pub fn new(normal: Vec<C>) -> Result<Self> {
        let s = norm(&normal);
        if normal.len() < 2 || !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument("hyperplane normal must be a nonzero vector of length ≥ 2".into()));
        }
        Ok(Hyperplane { normal: normal.into_iter().map(|a| a / s).collect() })
    }

    pub fn from_real(normal: &[f64]) -> Result<Self> {
        Hyperplane::new(normal.iter().map(|&x| C::new(x, 0.0)).collect())
    }

    /// {x_i = 0} in Pⁿ.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut a = vec![C::new(0.0, 0.0); n + 1];
        a[i] = C::new(1.0, 0.0);
        Hyperplane { normal: a }
    }

    pub fn normal(&self) -> &[C] {
        &self.normal
    }

    /// n for a hyperplane of Pⁿ.
    pub fn dim(&self) -> usize {
        self.normal.len() - 1
    }

    pub fn pair(&self, x: &[C]) -> C {
        self.normal.iter().zip(x).map(|(a, x)| a * x).sum()
    }
}

impl std::fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.normal.iter().map(|a| format!("{}", a)).collect();
        write!(f, "({})", parts.join("; "))
    }
}

/// ξ⌊a for ξ in wedge coordinates of Λ^{k+1}ℂ^{n+1}; the result lives in
/// Λ^kℂ^{n+1} (a scalar for k = 0).
pub fn interior_product(xi: &[C], a: &[C], k: usize) -> Vec<C> {
    let n = a.len() - 1;
    if k == 0 {
        return vec![a.iter().zip(xi).map(|(a, x)| a * x).sum()];
    }
    let lower: BTreeMap<Vec<usize>, usize> = wedge_index(n, k - 1).into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut out = vec![C::new(0.0, 0.0); lower.len()];
    for (set, x) in wedge_index(n, k).iter().zip(xi) {
        if x.norm() == 0.0 {
            continue;
        }
        for pos in 0..set.len() {
            let mut j = set.clone();
            let i = j.remove(pos);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out[lower[&j]] += a[i] * x * sign;
        }
    }
    out
}

/// ‖x; H‖ = ‖ξ⌊a‖/(‖ξ‖‖a‖) for x = [ξ] in P(Λ^{k+1}ℂ^{n+1}).
pub fn hyperplane_distance(xi: &[C], h: &Hyperplane, k: usize) -> Result<f64> {
    let n = h.dim();
    if k > n || xi.len() != binomial(n + 1, k + 1) {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates; Λ^{}ℂ^{} needs {}",
            xi.len(),
            k + 1,
            n + 1,
            binomial(n + 1, k + 1)
        )));
    }
    let s = norm(xi);
    if !(s > 0.0) {
        return Err(Error::InvalidArgument("the zero vector is not a projective point".into()));
    }
    Ok((norm(&interior_product(xi, h.normal(), k)) / s).min(1.0))
}

/// The k-th associated curve F_k = f ∧ f′ ∧ … ∧ f^{(k)} in wedge coordinates.
#[derive(Clone, Debug)]
pub struct AssociatedCurve {
    n: usize,
    k: usize,
    index: Vec<Vec<usize>>,
    minors: Vec<HoloMap>,
    exact: Option<Vec<ExpPoly>>,
    /// f_i^{(j)}, row j, for numeric evaluation.
    rows: Vec<Vec<HoloMap>>,
    zero: bool,
}

impl AssociatedCurve {
    fn build(comps: &[HoloMap], k: usize) -> Result<Self> {
        let n = comps.len() - 1;
        let disc = comps[0].disc();
        let index = wedge_index(n, k);
        let exact_comps: Option<Vec<ExpPoly>> = comps.iter().map(HoloMap::as_exp_poly).collect();
        if let Some(ec) = exact_comps {
            let mut rows = vec![ec];
            for j in 1..=k {
                let next = rows[j - 1].iter().map(ExpPoly::derivative).collect();
                rows.push(next);
            }
            let exact: Vec<ExpPoly> = index
                .iter()
                .map(|set| {
                    let m: Vec<Vec<ExpPoly>> = rows.iter().map(|r| set.iter().map(|&i| r[i].clone()).collect()).collect();
                    det_exact(&m)
                })
                .collect();
            let zero = exact.iter().all(ExpPoly::is_zero);
            let minors = exact
                .iter()
                .zip(&index)
                .map(|(e, set)| HoloMap::exp_poly(e.clone(), disc).with_name(&format!("F{k}{set:?}")))
                .collect();
            return Ok(AssociatedCurve { n, k, index, minors, exact: Some(exact), rows: Vec::new(), zero });
        }
        let mut rows = vec![comps.to_vec()];
        for j in 1..=k {
            rows.push(comps.iter().map(|c| c.derivative(j)).collect::<Result<Vec<_>>>()?);
        }
        let minors = index
            .iter()
            .map(|set| {
                let cols: Vec<Vec<HoloMap>> = rows.iter().map(|r| set.iter().map(|&i| r[i].clone()).collect()).collect();
                HoloMap::from_fn(disc, &format!("F{k}{set:?}"), move |z| {
                    let m = cols.iter().map(|r| r.iter().map(|g| g.eval(z)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
                    Ok(det(m))
                })
            })
            .collect();
        let mut ac = AssociatedCurve { n, k, index, minors, exact: None, rows, zero: false };
        ac.zero = ac.vanishes_on_samples(disc)?;
        Ok(ac)
    }

    /// Sampling test: ‖F_k‖ negligible against the Hadamard bound at every sample.
    fn vanishes_on_samples(&self, disc: Disc) -> Result<bool> {
        for z in sample_points(disc) {
            let vals: Vec<Vec<C>> = self.rows.iter().map(|r| r.iter().map(|g| g.eval(z)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
            let bound: f64 = vals.iter().map(|r| norm(r)).product::<f64>() * binomial(self.n + 1, self.k + 1) as f64;
            let (v, _) = self.eval_scaled(z)?;
            if norm(&v) > 1e-10 * bound {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The (k+1)-subsets labelling the components.
    pub fn index(&self) -> &[Vec<usize>] {
        &self.index
    }

    pub fn components(&self) -> &[HoloMap] {
        &self.minors
    }

    /// Exact minors when every component is an exponential polynomial.
    pub fn exact_components(&self) -> Option<&[ExpPoly]> {
        self.exact.as_deref()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Component values times e^{−shift}, with the shift returned.
    pub fn eval_scaled(&self, z: C) -> Result<(Vec<C>, f64)> {
        match &self.exact {
            Some(ex) => {
                let disc = self.minors[0].disc();
                if !disc.contains(z) {
                    return Err(Error::DomainViolation { z, radius: disc.radius() });
                }
                let s = ex.iter().filter(|e| !e.is_zero()).map(|e| e.log_scale(z)).fold(f64::NEG_INFINITY, f64::max);
                let s = if s.is_finite() { s } else { 0.0 };
                Ok((ex.iter().map(|e| crate::funcrep::eval_exppoly(e, z, s)).collect(), s))
            }
            None => {
                let vals: Vec<Vec<C>> =
                    self.rows.iter().map(|r| r.iter().map(|g| g.eval(z)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
                let v = self
                    .index
                    .iter()
                    .map(|set| det(vals.iter().map(|r| set.iter().map(|&i| r[i]).collect()).collect()))
                    .collect();
                Ok((v, 0.0))
            }
        }
    }

    /// log‖F_k(z)‖; −∞ at common zeros.
    pub fn log_norm(&self, z: C) -> Result<f64> {
        if self.zero {
            return Ok(f64::NEG_INFINITY);
        }
        let (v, s) = self.eval_scaled(z)?;
        Ok(norm(&v).ln() + s)
    }

    pub fn panels(&self, r: f64) -> usize {
        self.minors.iter().map(|m| m.panels(r)).max().unwrap_or(16)
    }
}

/// Zeros shared by all components of F_k, with the order and leading
/// coefficient at the origin.
#[derive(Clone, Debug)]
pub struct CommonDivisor {
    pub origin_order: u32,
    /// log‖F_k^{(ν)}(0)/ν!‖ for ν = origin_order.
    pub log_lead: f64,
    /// Common zeros off the origin.
    pub zeros: ZeroSet,
}

impl CommonDivisor {
    /// Σ_{0<|a|<r} μ_a log(r/|a|) + ν log r.
    pub fn counting(&self, r: f64) -> f64 {
        self.zeros.counting(r, None) + self.origin_order as f64 * r.ln()
    }

    pub fn hints_near(&self, r: f64) -> Vec<f64> {
        self.zeros.hints_near(r)
    }

    fn empty(radius: f64, log_lead: f64) -> Self {
        CommonDivisor { origin_order: 0, log_lead, zeros: ZeroSet { radius, zeros: Vec::new() } }
    }
}

/// Value at 0 of Σ p_j(z)e^{λ_j z}, exactly.
fn exact_value_at_origin(e: &ExpPoly) -> Gq {
    e.terms().iter().fold(gq_zero(), |acc, (_, p)| acc + p.coeffs().first().cloned().unwrap_or_else(gq_zero))
}

/// Order of vanishing of g at z0 (capped), read off Taylor coefficients.
fn vanishing_order(g: &HoloMap, z0: C, cap: u32) -> Result<u32> {
    let mut vals = vec![g.eval(z0)?];
    let mut fact = 1.0;
    for d in 1..=cap {
        fact *= d as f64;
        vals.push(g.derivative(d as usize)?.eval(z0)? / fact);
    }
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(cap);
    }
    Ok(vals.iter().position(|v| v.norm() > 1e-6 * scale).unwrap_or(cap as usize) as u32)
}

fn origin_data(ac: &AssociatedCurve) -> Result<(u32, f64)> {
    let zero = C::new(0.0, 0.0);
    match &ac.exact {
        Some(ex) => {
            let mut cur: Vec<ExpPoly> = ex.clone();
            let mut fact = 1.0;
            for nu in 0..=ORDER_CAP {
                if nu > 0 {
                    fact *= nu as f64;
                    cur = cur.iter().map(ExpPoly::derivative).collect();
                }
                let vals: Vec<Gq> = cur.iter().map(exact_value_at_origin).collect();
                if vals.iter().any(|v| !gq_is_zero(v)) {
                    let lead: Vec<C> = vals.iter().map(|v| crate::exact::gq_to_c64(v) / fact).collect();
                    return Ok((nu, norm(&lead).ln()));
                }
            }
            Err(Error::Degenerate("associated curve vanishes to high order at the origin".into()))
        }
        None => {
            let nu = ac.minors.iter().map(|m| vanishing_order(m, zero, 8)).collect::<Result<Vec<_>>>()?.into_iter().min().unwrap_or(0);
            let fact: f64 = (1..=nu).map(|d| d as f64).product();
            let lead = ac
                .minors
                .iter()
                .map(|m| if nu == 0 { m.eval(zero) } else { Ok(m.derivative(nu as usize)?.eval(zero)? / fact) })
                .collect::<Result<Vec<_>>>()?;
            Ok((nu, norm(&lead).ln()))
        }
    }
}

fn off_origin(set: ZeroSet, radius: f64) -> ZeroSet {
    let tiny = 1e-9 * radius.max(1.0);
    ZeroSet { radius: set.radius, zeros: set.zeros.into_iter().filter(|z| z.location.norm() > tiny).collect() }
}

/// The common-zero divisor of F_k on |z| < radius.
pub fn common_divisor(ac: &AssociatedCurve, radius: f64) -> Result<CommonDivisor> {
    if ac.zero {
        return Err(Error::Degenerate(format!("F_{} vanishes identically", ac.k)));
    }
    let (nu, log_lead) = origin_data(ac)?;
    let disc = ac.minors[0].disc();
    if let Some(ex) = &ac.exact {
        let live: Vec<&ExpPoly> = ex.iter().filter(|e| !e.is_zero()).collect();
        // e^{λz}·p(z) in every component: the divisor is that of gcd of the p's
        if live.iter().all(|e| e.terms().len() == 1) {
            let g = live.iter().skip(1).fold(live[0].terms()[0].1.clone(), |g, e| Poly::gcd(&g, &e.terms()[0].1));
            let mut div = CommonDivisor::empty(radius, log_lead);
            div.origin_order = nu;
            if !g.is_constant() {
                let gm = HoloMap::polynomial(g).restricted(disc);
                div.zeros = off_origin(zeros::locate_with_retries(&gm, radius)?, radius);
            }
            return Ok(div);
        }
        if live.iter().any(|e| e.terms().len() == 1 && e.terms()[0].1.is_constant()) {
            let mut div = CommonDivisor::empty(radius, log_lead);
            div.origin_order = nu;
            return Ok(div);
        }
    }
    // zeros of one component, kept with the smallest order found among the rest
    let pivot = ac
        .minors
        .iter()
        .zip(ac.exact.iter().flatten().map(Some).chain(std::iter::repeat(None)))
        .find(|(_, e)| e.map_or(true, |e| !e.is_zero()))
        .map(|(m, _)| m.clone())
        .expect("F_k is not identically zero");
    let set = off_origin(zeros::locate_with_retries(&pivot, radius)?, radius);
    let mut common = Vec::new();
    for rec in set.zeros {
        let mut mu = rec.multiplicity;
        for m in &ac.minors {
            if mu == 0 {
                break;
            }
            mu = mu.min(vanishing_order(m, rec.location, mu)?);
        }
        if mu > 0 {
            common.push(ZeroRecord { multiplicity: mu, ..rec });
        }
    }
    Ok(CommonDivisor { origin_order: nu, log_lead, zeros: ZeroSet { radius: set.radius, zeros: common } })
}

/// A reduced representation [f₀ : … : f_n] of a holomorphic curve in Pⁿ.
#[derive(Clone, Debug)]
pub struct ProjCurve {
    comps: Vec<HoloMap>,
    disc: Disc,
    assoc: Vec<AssociatedCurve>,
    nondegenerate: bool,
}

impl ProjCurve {
    pub fn new(comps: Vec<HoloMap>) -> Result<Self> {
        if comps.len() < 2 {
            return Err(Error::InvalidArgument("a curve in Pⁿ needs at least two components".into()));
        }
        let disc = comps[0].disc();
        if comps.iter().any(|c| c.disc().radius() != disc.radius()) {
            return Err(Error::InvalidArgument("components must live on a common disc".into()));
        }
        if let Some(c) = comps.iter().find(|c| !c.is_holomorphic()) {
            return Err(Error::InvalidArgument(format!("component {} has poles", c.name())));
        }
        let n = comps.len() - 1;
        let assoc = (0..=n).map(|k| AssociatedCurve::build(&comps, k)).collect::<Result<Vec<_>>>()?;
        if assoc[0].zero {
            return Err(Error::InvalidArgument("all components vanish identically".into()));
        }
        // reducedness on a reference disc
        let reference = if disc.is_plane() { 4.0 } else { 0.9 * disc.radius() };
        let div = common_divisor(&assoc[0], reference)?;
        if div.origin_order > 0 || !div.zeros.zeros.is_empty() {
            let at = div.zeros.zeros.first().map_or(C::new(0.0, 0.0), |z| z.location);
            return Err(Error::InvalidArgument(format!("components share a zero at {at}; the representation is not reduced")));
        }
        let nondegenerate = !assoc[n].zero;
        Ok(ProjCurve { comps, disc, assoc, nondegenerate })
    }

    /// Named curve from the curve gallery.
    pub fn from_gallery(name: &str) -> Result<Self> {
        ProjCurve::new(curve_gallery(name)?)
    }

    pub fn n(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn components(&self) -> &[HoloMap] {
        &self.comps
    }

    pub fn disc(&self) -> Disc {
        self.disc
    }

    pub fn geometry(&self) -> TargetGeometry {
        TargetGeometry::PnFubiniStudy(self.n())
    }

    /// True when the Wronskian is not identically zero.
    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    pub fn associated(&self, k: usize) -> Result<&AssociatedCurve> {
        let ac = self.assoc.get(k).ok_or_else(|| Error::InvalidArgument(format!("k = {k} exceeds n = {}", self.n())))?;
        if ac.zero {
            return Err(Error::Degenerate(format!("F_{k} vanishes identically")));
        }
        Ok(ac)
    }

    /// Values of the components times e^{−shift}.
    pub fn eval_scaled(&self, z: C) -> Result<(Vec<C>, f64)> {
        self.assoc[0].eval_scaled(z)
    }

    pub fn panels(&self, r: f64) -> usize {
        self.assoc.iter().filter(|a| !a.zero).map(|a| a.panels(r)).max().unwrap_or(16)
    }

    fn log_norm_k(&self, k: isize, z: C) -> Result<f64> {
        if k < 0 {
            return Ok(0.0);
        }
        match self.assoc.get(k as usize) {
            Some(a) => a.log_norm(z),
            None => Ok(f64::NEG_INFINITY),
        }
    }

    /// log h_k(z); −∞ where h_k vanishes, NaN at stationary points of F_k.
    fn log_hk(&self, k: usize, z: C) -> Result<f64> {
        let lk = self.log_norm_k(k as isize, z)?;
        if lk == f64::NEG_INFINITY {
            return Ok(f64::NAN);
        }
        let lp = self.log_norm_k(k as isize - 1, z)?;
        let ln = self.log_norm_k(k as isize + 1, z)?;
        Ok(2.0 * lp + 2.0 * ln - 4.0 * lk)
    }

    /// Linear combination a·f as a holomorphic function.
    pub fn pairing(&self, h: &Hyperplane) -> Result<HoloMap> {
        if h.dim() != self.n() {
            return Err(Error::InvalidArgument(format!("hyperplane of P^{} for a curve in P^{}", h.dim(), self.n())));
        }
        let name = format!("{h}·f");
        if let Some(ex) = self.assoc[0].exact_components() {
            let e = ex.iter().zip(h.normal()).fold(ExpPoly::zero(), |acc, (f, a)| acc.add(&f.scale(&gq_from_c64(*a))));
            return Ok(HoloMap::exp_poly(e, self.disc).with_name(&name));
        }
        let comps = self.comps.clone();
        let a = h.normal().to_vec();
        Ok(HoloMap::from_fn(self.disc, &name, move |z| {
            comps.iter().zip(&a).map(|(f, a)| Ok(f.eval(z)? * a)).sum()
        }))
    }

    /// True when the image lies in H: exact for exponential polynomials,
    /// by sampling otherwise.
    pub fn lies_in(&self, h: &Hyperplane) -> Result<bool> {
        let g = self.pairing(h)?;
        if let Some(e) = g.as_exp_poly() {
            return Ok(e.is_zero());
        }
        for z in sample_points(self.disc) {
            let (v, _) = self.eval_scaled(z)?;
            if h.pair(&v).norm() > 1e-12 * norm(&v) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn associated_curve(curve: &ProjCurve, k: usize) -> Result<AssociatedCurve> {
    curve.associated(k).cloned()
}

fn stationary_neighbour(z: C) -> C {
    let r = z.norm();
    if r > STATIONARY_OFFSET {
        z * (1.0 - STATIONARY_OFFSET / r)
    } else {
        z + STATIONARY_OFFSET
    }
}

/// h_k(z) = ‖F_{k−1}‖²‖F_{k+1}‖²/‖F_k‖⁴, the density of F_k*ω_k. At a zero
/// of F_k the value is taken a step 1e−7 toward the origin.
pub fn hk_density(curve: &ProjCurve, k: usize, z: C) -> Result<f64> {
    curve.associated(k)?;
    let v = curve.log_hk(k, z)?;
    let v = if v.is_nan() { curve.log_hk(k, stationary_neighbour(z))? } else { v };
    if v.is_nan() {
        return Err(Error::StationaryPoint { z });
    }
    Ok(v.exp())
}

/// As [`hk_density`] without the limit filler.
pub fn hk_density_strict(curve: &ProjCurve, k: usize, z: C) -> Result<f64> {
    curve.associated(k)?;
    let v = curve.log_hk(k, z)?;
    if v.is_nan() {
        return Err(Error::StationaryPoint { z });
    }
    Ok(v.exp())
}

pub(crate) fn largest(radii: &[f64]) -> Result<f64> {
    radii.iter().cloned().reduce(f64::max).ok_or_else(|| Error::InvalidArgument("empty list of radii".into()))
}

pub(crate) fn check_radii(curve: &ProjCurve, radii: &[f64]) -> Result<()> {
    match radii.iter().find(|&&r| !(r > 0.0) || r >= curve.disc.radius()) {
        Some(&r) => Err(Error::DomainViolation { z: C::new(r, 0.0), radius: curve.disc.radius() }),
        None => Ok(()),
    }
}

/// T_{F_k} on every radius: the circle average of log‖F_k‖ less its value
/// at the origin and the common-zero counting function, optionally
/// cross-checked against the area integral of h_k.
pub fn characteristic_fk_series(curve: &ProjCurve, k: usize, radii: &[f64], cross_check: bool) -> Result<CharacteristicSeries> {
    check_radii(curve, radii)?;
    let ac = curve.associated(k)?;
    if k == curve.n() {
        // F_n maps to a point
        let z = vec![0.0; radii.len()];
        return Ok(CharacteristicSeries { radii: radii.to_vec(), value: z.clone(), area: z.clone(), cartan: Some(z) });
    }
    let div = common_divisor(ac, largest(radii)?)?;
    let value: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let avg = zeros::with_retries(r, |rr| {
                let g = CircleIntegrand::new(|t| ac.log_norm(C::from_polar(rr, t)))
                    .with_hints(div.hints_near(rr))
                    .with_panels(ac.panels(rr))
                    .on_radius(rr);
                circle_average(&g, TOL_CIRCLE * (1.0 + rr))
            })?;
            Ok(avg - div.log_lead - div.counting(r))
        })
        .collect::<Result<_>>()?;
    let mut area = vec![f64::NAN; radii.len()];
    if cross_check {
        let checked = radii.iter().take_while(|&&r| ac.panels(r) <= MAX_CHECK_PANELS).count();
        let density = |z: C| hk_density(curve, k, z);
        let panels = |s: f64| ac.panels(s);
        let a = height_on_radii(&density, &radii[..checked], TOL_AREA_CHECK, &panels, &[])?;
        for (i, (&r, a)) in radii.iter().zip(a).enumerate() {
            if (a - value[i]).abs() > CROSS_CHECK_TOL {
                return Err(Error::CrossCheckMismatch { r, cartan: value[i], area: a });
            }
            area[i] = a;
        }
    }
    Ok(CharacteristicSeries { radii: radii.to_vec(), value: value.clone(), area, cartan: Some(value) })
}

/// T_{F_k}(r), cross-checked against the area form.
pub fn characteristic_fk(curve: &ProjCurve, k: usize, r: f64) -> Result<f64> {
    Ok(characteristic_fk_series(curve, k, &[r], true)?.value[0])
}

/// S_k(r) = ½ circavg log h_k.
pub fn s_k(curve: &ProjCurve, k: usize, r: f64, hints: &[f64]) -> Result<f64> {
    zeros::with_retries(r, |rr| {
        let g = CircleIntegrand::new(|t| {
            let z = C::from_polar(rr, t);
            let v = curve.log_hk(k, z)?;
            let v = if v.is_finite() { v } else { curve.log_hk(k, stationary_neighbour(z))? };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::SingularAverage { radius: rr })
            }
        })
        .with_hints(hints.iter().copied())
        .with_panels(curve.panels(rr))
        .on_radius(rr);
        Ok(0.5 * circle_average(&g, TOL_CIRCLE * (1.0 + rr))?)
    })
}

/// Terms of the Plücker identity on a list of radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PluckerSeries {
    pub k: usize,
    pub radii: Vec<f64>,
    pub n_dk: Vec<f64>,
    pub t_prev: Vec<f64>,
    pub t_k: Vec<f64>,
    pub t_next: Vec<f64>,
    pub s_k: Vec<f64>,
    /// N_{d_k} + T_{F_{k−1}} − 2T_{F_k} + T_{F_{k+1}} − S_k.
    pub residual: Vec<f64>,
}

impl PluckerSeries {
    pub fn residual_range(&self) -> f64 {
        let lo = self.residual.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.residual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

/// The Plücker combination for 0 ≤ k < n. N_{d_k} is the zero divisor of h_k,
/// whose multiplicities are the second differences of the common-zero orders
/// of F_{k−1}, F_k, F_{k+1}.
pub fn plucker_series(curve: &ProjCurve, k: usize, radii: &[f64]) -> Result<PluckerSeries> {
    let n = curve.n();
    if k >= n {
        return Err(Error::PreconditionViolation(format!("S_k needs k < n; h_{n} vanishes identically since F_{} ≡ 0", n + 1)));
    }
    check_radii(curve, radii)?;
    let rmax = largest(radii)?;
    let t_of = |j: isize| -> Result<Vec<f64>> {
        if j < 0 {
            Ok(vec![0.0; radii.len()])
        } else {
            Ok(characteristic_fk_series(curve, j as usize, radii, true)?.value)
        }
    };
    let (t_prev, t_k, t_next) = (t_of(k as isize - 1)?, t_of(k as isize)?, t_of(k as isize + 1)?);
    let divs: Vec<Option<CommonDivisor>> = [k as isize - 1, k as isize, k as isize + 1]
        .iter()
        .map(|&j| if j < 0 { Ok(None) } else { common_divisor(curve.associated(j as usize)?, rmax).map(Some) })
        .collect::<Result<_>>()?;
    let count = |d: &Option<CommonDivisor>, r: f64| d.as_ref().map_or(0.0, |d| d.counting(r));
    let n_dk: Vec<f64> = radii.iter().map(|&r| count(&divs[2], r) - 2.0 * count(&divs[1], r) + count(&divs[0], r)).collect();
    let s: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let hints: Vec<f64> = divs.iter().flatten().flat_map(|d| d.hints_near(r)).collect();
            s_k(curve, k, r, &hints)
        })
        .collect::<Result<_>>()?;
    let residual = (0..radii.len()).map(|i| n_dk[i] + t_prev[i] - 2.0 * t_k[i] + t_next[i] - s[i]).collect();
    Ok(PluckerSeries { k, radii: radii.to_vec(), n_dk, t_prev, t_k, t_next, s_k: s, residual })
}

pub fn plucker_residual(curve: &ProjCurve, k: usize, r: f64) -> Result<f64> {
    Ok(plucker_series(curve, k, &[r])?.residual[0])
}

/// log(1/‖F_k(z); H‖), computed from scaled components.
pub(crate) fn log_inv_distance(ac: &AssociatedCurve, h: &Hyperplane, z: C) -> Result<f64> {
    let (v, _) = ac.eval_scaled(z)?;
    let c = norm(&interior_product(&v, h.normal(), ac.k));
    Ok((norm(&v) / c).ln().max(0.0))
}

/// Zeros of a·f, the preimage of H, up to `radius`.
pub fn hyperplane_preimages(curve: &ProjCurve, h: &Hyperplane, radius: f64) -> Result<ZeroSet> {
    let g = curve.pairing(h)?;
    if let Some(e) = g.as_exp_poly() {
        if e.is_zero() {
            return Err(Error::ImageInHyperplane { index: 0 });
        }
        if e.terms().len() == 1 && e.terms()[0].1.is_constant() {
            return Ok(ZeroSet { radius, zeros: Vec::new() });
        }
    }
    zeros::locate_with_retries(&g, radius)
}

/// Counting function of a zero set in which a zero at the origin counts log r.
fn counting_with_origin(set: &ZeroSet, r: f64) -> f64 {
    set.zeros
        .iter()
        .filter(|z| z.location.norm() < r)
        .map(|z| z.multiplicity as f64 * if z.location.norm() > 0.0 { (r / z.location.norm()).ln() } else { r.ln() })
        .sum()
}

fn proximity_fk_with_hints(ac: &AssociatedCurve, h: &Hyperplane, r: f64, hints: &[f64]) -> Result<f64> {
    zeros::with_retries(r, |rr| {
        let g = CircleIntegrand::new(|t| {
            let v = log_inv_distance(ac, h, C::from_polar(rr, t))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::SingularAverage { radius: rr })
            }
        })
        .with_hints(hints.iter().copied())
        .with_panels(ac.panels(rr))
        .on_radius(rr);
        circle_average(&g, TOL_CIRCLE * (1.0 + rr))
    })
}

/// m_{F_k}(r, H) = circavg log 1/‖F_k; H‖.
pub fn proximity_fk(curve: &ProjCurve, k: usize, r: f64, h: &Hyperplane) -> Result<f64> {
    check_radii(curve, &[r])?;
    let ac = curve.associated(k)?;
    if h.dim() != curve.n() {
        return Err(Error::InvalidArgument("hyperplane dimension does not match the curve".into()));
    }
    let hints = if k == 0 { hyperplane_preimages(curve, h, r)?.hints_near(r) } else { Vec::new() };
    proximity_fk_with_hints(ac, h, r, &hints)
}

/// A Cartan-type SMT table together with the proof-side quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CartanReport {
    pub table: NevanlinnaTable,
    /// circavg max_K Σ_{j∈K} log 1/‖f; H_j‖.
    pub max_k: Vec<f64>,
    pub n_w: Vec<f64>,
    /// Λ(r) = min_k 1/T_{F_k}(r) over 0 ≤ k < n.
    pub lambda: Vec<f64>,
}

impl CartanReport {
    /// Σ_j m(r, H_j)/T(r) at the grid radius closest to r.
    pub fn proximity_ratio_near(&self, r: f64) -> f64 {
        let rec = self
            .table
            .records
            .iter()
            .min_by(|a, b| (a.r - r).abs().partial_cmp(&(b.r - r).abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty table");
        rec.m.iter().sum::<f64>() / rec.t
    }
}

/// Maximal independent subsets of the normals (all of size rank).
fn independent_bases(normals: &[Vec<C>]) -> Vec<Vec<usize>> {
    let rank = float_rank(normals, 1e-10);
    subsets(normals.len(), rank)
        .into_iter()
        .filter(|s| float_rank(&s.iter().map(|&j| normals[j].clone()).collect::<Vec<_>>(), 1e-10) == rank)
        .collect()
}

fn validate_hyperplanes(curve: &ProjCurve, hyperplanes: &[Hyperplane]) -> Result<()> {
    let n = curve.n();
    if n > MAX_N || hyperplanes.len() > MAX_Q {
        return Err(Error::PreconditionViolation(format!("the max-over-K enumeration is capped at n ≤ {MAX_N} and q ≤ {MAX_Q}")));
    }
    if hyperplanes.is_empty() {
        return Err(Error::InvalidArgument("no hyperplanes given".into()));
    }
    for (i, h) in hyperplanes.iter().enumerate() {
        if h.dim() != n {
            return Err(Error::InvalidArgument(format!("hyperplane #{i} lives in P^{}, the curve in P^{n}", h.dim())));
        }
        if curve.lies_in(h)? {
            return Err(Error::ImageInHyperplane { index: i });
        }
    }
    Ok(())
}

/// Shared inputs of the SMT reports: T_f, the growth index and the
/// per-hyperplane proximity and counting series.
pub(crate) struct SmtInputs {
    pub t: Vec<f64>,
    pub t_area: Vec<f64>,
    pub growth: GrowthIndexEstimate,
    pub c: f64,
    pub preimages: Vec<ZeroSet>,
    pub m: Vec<Vec<f64>>,
    pub counts: Vec<Vec<f64>>,
}

pub(crate) fn smt_inputs(curve: &ProjCurve, hyperplanes: &[Hyperplane], grid: &RadialGrid, c: Option<f64>) -> Result<SmtInputs> {
    validate_hyperplanes(curve, hyperplanes)?;
    let radii = grid.radii();
    check_radii(curve, radii)?;
    let rmax = largest(radii)?;
    let series = characteristic_fk_series(curve, 0, radii, true)?;
    let t = series.value;
    let growth = if curve.disc.is_plane() {
        GrowthIndexEstimate::entire()
    } else {
        growth_index_from_series(curve.disc.radius(), radii, &t)?
    };
    let c = match c {
        Some(c) => c,
        None if growth.c_est.is_finite() => growth.c_est,
        None => return Err(Error::MissingGrowthIndex),
    };
    let preimages: Vec<ZeroSet> = hyperplanes.iter().map(|h| hyperplane_preimages(curve, h, rmax)).collect::<Result<_>>()?;
    let f0 = curve.associated(0)?;
    let m: Vec<Vec<f64>> = hyperplanes
        .iter()
        .zip(&preimages)
        .map(|(h, p)| radii.par_iter().map(|&r| proximity_fk_with_hints(f0, h, r, &p.hints_near(r))).collect())
        .collect::<Result<_>>()?;
    let counts = preimages.iter().map(|p| radii.iter().map(|&r| counting_with_origin(p, r)).collect()).collect();
    Ok(SmtInputs { t, t_area: series.area, growth, c, preimages, m, counts })
}

/// Fits the constants of `lhs ≤ base + C_log·log⁺T + C` and fills the table.
/// `leading` is the coefficient of T in the main term and `spread` the factor
/// multiplying (1+ε)(c+ε)T, used to read off the implied growth index.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_table(
    curve: &ProjCurve,
    hyperplanes: &[Hyperplane],
    grid: &RadialGrid,
    eps: f64,
    inputs: SmtInputs,
    lhs: Vec<f64>,
    base: Vec<f64>,
    n_ram: &[f64],
    leading: f64,
    spread: f64,
) -> NevanlinnaTable {
    let radii = grid.radii();
    let SmtInputs { t, t_area, growth, c, m, counts, .. } = inputs;
    let constants = FittedConstants::fit(&lhs, &base, &t, grid.fit_len());
    let rhs: Vec<f64> = base.iter().zip(&t).map(|(&b, &t)| constants.rhs(b, t)).collect();
    let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let measure = exceptional_measure(grid, &slack, &t, c + eps);
    let excess: Vec<f64> = lhs.iter().zip(&t).map(|(l, t)| l - leading * t).collect();
    let implied_c = if spread > 0.0 { least_squares(&t, &excess).0 / spread } else { f64::NAN };
    let defects = m
        .iter()
        .zip(&counts)
        .map(|(m, nn)| defect_from_series(&FmtSeries { m: m.clone(), n: nn.clone(), t: t.clone() }, grid.fit_len()))
        .collect();
    let records = (0..radii.len())
        .map(|i| NevanlinnaRecord {
            r: radii[i],
            t: t[i],
            t_area: t_area[i],
            m: m.iter().map(|m| m[i]).collect(),
            n: counts.iter().map(|n| n[i]).collect(),
            n_ram: n_ram[i],
            lhs: lhs[i],
            rhs: rhs[i],
            slack: slack[i],
            exceptional: slack[i] < 0.0,
        })
        .collect();
    NevanlinnaTable {
        geometry: curve.geometry().kind(),
        targets: hyperplanes.iter().map(|h| h.to_string()).collect(),
        eps,
        growth,
        constants,
        records,
        defects,
        exceptional_measure: measure,
        implied_c,
    }
}

/// Per-radius slack of the general Cartan SMT:
/// circavg max_K Σ_{j∈K} log 1/‖f;H_j‖ + N_W ≤ (n+1)T + (n(n+1)/2)(1+ε)(c+ε)T
/// + C_log·log⁺T + (n(n+1)/2)ε·log⁺r + C. `c` overrides the fitted growth index.
pub fn cartan_smt_report(
    curve: &ProjCurve,
    hyperplanes: &[Hyperplane],
    grid: &RadialGrid,
    eps: f64,
    c: Option<f64>,
) -> Result<CartanReport> {
    if !curve.is_nondegenerate() {
        return Err(Error::Degenerate("the curve lies in a proper linear subspace".into()));
    }
    let inputs = smt_inputs(curve, hyperplanes, grid, c)?;
    let n = curve.n();
    let radii = grid.radii();
    let rmax = largest(radii)?;
    let f0 = curve.associated(0)?;
    let normals: Vec<Vec<C>> = hyperplanes.iter().map(|h| h.normal().to_vec()).collect();
    let bases = independent_bases(&normals);
    let pre = &inputs.preimages;
    let max_k: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            zeros::with_retries(r, |rr| {
                let hints: Vec<f64> = pre.iter().flat_map(|p| p.hints_near(rr)).collect();
                let g = CircleIntegrand::new(|th| {
                    let terms: Vec<f64> =
                        hyperplanes.iter().map(|h| log_inv_distance(f0, h, C::from_polar(rr, th))).collect::<Result<_>>()?;
                    let v = bases.iter().map(|b| b.iter().map(|&j| terms[j]).sum::<f64>()).fold(0.0, f64::max);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::SingularAverage { radius: rr })
                    }
                })
                .with_hints(hints)
                .with_panels(f0.panels(rr))
                .on_radius(rr);
                circle_average(&g, TOL_CIRCLE * (1.0 + rr))
            })
        })
        .collect::<Result<_>>()?;

    let w_div = common_divisor(curve.associated(n)?, rmax)?;
    let n_w: Vec<f64> = radii.iter().map(|&r| w_div.counting(r)).collect();
    let mut lambda = vec![f64::INFINITY; radii.len()];
    for k in 0..n {
        let tk = if k == 0 { inputs.t.clone() } else { characteristic_fk_series(curve, k, radii, false)?.value };
        for (l, tk) in lambda.iter_mut().zip(tk) {
            *l = l.min(1.0 / tk);
        }
    }

    let half = (n * (n + 1)) as f64 / 2.0;
    let c = inputs.c;
    let coef = (n + 1) as f64 + half * (1.0 + eps) * (c + eps);
    let lhs: Vec<f64> = max_k.iter().zip(&n_w).map(|(a, b)| a + b).collect();
    let base: Vec<f64> = radii.iter().zip(&inputs.t).map(|(&r, &t)| coef * t + half * eps * log_plus(r)).collect();
    let table = assemble_table(curve, hyperplanes, grid, eps, inputs, lhs, base, &n_w, (n + 1) as f64, half);
    Ok(CartanReport { table, max_k, n_w, lambda })
}

/// Per-radius Ahlfors estimate: LHS ≤ (1/λ²)(8T_{F_k} + C).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub k: usize,
    pub lambda: f64,
    pub radii: Vec<f64>,
    pub lhs: Vec<f64>,
    pub t: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ok: Vec<bool>,
    pub constant: f64,
}

impl AhlforsReport {
    pub fn all_ok(&self) -> bool {
        self.ok.iter().all(|&b| b)
    }
}

/// φ_j = ‖F_j; H‖² at z; F_{n+1} ≡ 0 gives 0.
fn phi(curve: &ProjCurve, j: usize, h: &Hyperplane, z: C) -> Result<f64> {
    match curve.assoc.get(j) {
        Some(ac) if !ac.zero => {
            let (v, _) = ac.eval_scaled(z)?;
            let s = norm(&v);
            if s == 0.0 {
                return Ok(f64::NAN);
            }
            Ok((norm(&interior_product(&v, h.normal(), j)) / s).powi(2).min(1.0))
        }
        _ => Ok(0.0),
    }
}

fn ahlfors_density(curve: &ProjCurve, k: usize, h: &Hyperplane, lambda: f64, z: C) -> Result<f64> {
    let eval = |z: C| -> Result<f64> {
        let pk = phi(curve, k, h, z)?;
        let pn = phi(curve, k + 1, h, z)?;
        if pn == 0.0 {
            return Ok(0.0);
        }
        let hk = curve.log_hk(k, z)?.exp();
        Ok(pn / pk.powf(1.0 - lambda) * hk)
    };
    let v = eval(z)?;
    if v.is_finite() {
        return Ok(v);
    }
    let v = eval(stationary_neighbour(z))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::StationaryPoint { z })
    }
}

/// LHS = ∫₀^r dt/t ∫_{|z|<t} (φ_{k+1}/φ_k^{1−λ}) Ω_k against (1/λ²)(8T_{F_k} + C),
/// with C fitted on the first third of the grid.
pub fn ahlfors_estimate_check(curve: &ProjCurve, k: usize, h: &Hyperplane, lambda: f64, grid: &RadialGrid) -> Result<AhlforsReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::PreconditionViolation(format!("λ must lie in (0, 1), got {lambda}")));
    }
    if h.dim() != curve.n() {
        return Err(Error::InvalidArgument("hyperplane dimension does not match the curve".into()));
    }
    let ac = curve.associated(k)?;
    let radii = grid.radii();
    check_radii(curve, radii)?;
    let radial_hints: Vec<f64> = if k == 0 {
        hyperplane_preimages(curve, h, largest(radii)?)?.zeros.iter().map(|z| z.location.norm()).filter(|&m| m > 0.0).collect()
    } else {
        Vec::new()
    };
    let density = |z: C| ahlfors_density(curve, k, h, lambda, z);
    let panels = |s: f64| ac.panels(s);
    let lhs = height_on_radii(&density, radii, TOL_AHLFORS, &panels, &radial_hints)?;
    let t = characteristic_fk_series(curve, k, radii, false)?.value;
    let l2 = lambda * lambda;
    let fit = grid.fit_len().min(radii.len());
    let constant = (0..fit).map(|i| l2 * lhs[i] - 8.0 * t[i]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let rhs: Vec<f64> = t.iter().map(|t| (8.0 * t + constant) / l2).collect();
    let ok = lhs.iter().zip(&rhs).map(|(l, r)| *l <= r + 1e-9 * (1.0 + r.abs())).collect();
    Ok(AhlforsReport { k, lambda, radii: radii.to_vec(), lhs, t, rhs, ok, constant })
}

/// Observed maxima of the product-to-sum ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductToSum {
    pub samples: usize,
    pub max_ratio: f64,
    /// Maximum over the first half of the samples, to judge stabilization.
    pub max_ratio_half: f64,
}

impl ProductToSum {
    /// Relative change of the maximum when the sample count doubles.
    pub fn doubling_change(&self) -> f64 {
        if self.max_ratio == 0.0 {
            0.0
        } else {
            (self.max_ratio - self.max_ratio_half) / self.max_ratio
        }
    }
}

/// Π_j ‖y;H_j‖²/‖x;H_j‖^{2−2λ} over (Σ_j …)^{n−k} for x ∈ P(Λ^{k+1}),
/// y ∈ P(Λ^{k+2}).
pub fn product_to_sum_ratio(x: &[C], y: &[C], hyperplanes: &[Hyperplane], k: usize, lambda: f64) -> Result<f64> {
    let n = hyperplanes[0].dim();
    let mut prod = 1.0;
    let mut sum = 0.0;
    for h in hyperplanes {
        let dx = hyperplane_distance(x, h, k)?;
        if dx == 0.0 {
            return Err(Error::InvalidArgument("x lies on a hyperplane".into()));
        }
        let term = hyperplane_distance(y, h, k + 1)?.powi(2) / dx.powf(2.0 - 2.0 * lambda);
        prod *= term;
        sum += term;
    }
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok(prod / sum.powi((n - k) as i32))
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<C> {
    (0..len).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Largest observed product-to-sum ratio over seeded random pairs (x, y).
pub fn product_to_sum_check(hyperplanes: &[Hyperplane], k: usize, lambda: f64, samples: usize, seed: u64) -> Result<ProductToSum> {
    let Some(first) = hyperplanes.first() else {
        return Err(Error::InvalidArgument("no hyperplanes given".into()));
    };
    let n = first.dim();
    let q = hyperplanes.len();
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::PreconditionViolation(format!("λ must lie in (0, 1), got {lambda}")));
    }
    if k >= n || n - k > q {
        return Err(Error::PreconditionViolation(format!("need 0 ≤ k ≤ n − 1 and n − k ≤ q (n = {n}, k = {k}, q = {q})")));
    }
    if hyperplanes.iter().any(|h| h.dim() != n) {
        return Err(Error::InvalidArgument("hyperplanes of different dimensions".into()));
    }
    let normals: Vec<Vec<C>> = hyperplanes.iter().map(|h| h.normal().to_vec()).collect();
    let size = q.min(n + 1);
    if subsets(q, size).iter().any(|s| float_rank(&s.iter().map(|&j| normals[j].clone()).collect::<Vec<_>>(), 1e-10) < size) {
        return Err(Error::PreconditionViolation("hyperplanes are not in general position".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lx, ly) = (binomial(n + 1, k + 1), binomial(n + 1, k + 2));
    let mut max_ratio: f64 = 0.0;
    let mut max_half: f64 = 0.0;
    for i in 0..samples {
        let ratio = loop {
            let x = random_vector(&mut rng, lx);
            let y = random_vector(&mut rng, ly);
            match product_to_sum_ratio(&x, &y, hyperplanes, k, lambda) {
                Ok(v) => break v,
                Err(Error::InvalidArgument(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        max_ratio = max_ratio.max(ratio);
        if i < samples / 2 {
            max_half = max_half.max(ratio);
        }
    }
    Ok(ProductToSum { samples, max_ratio, max_ratio_half: max_half })
}
