//! Subgeneral position, Nochka weights and the second main theorem for
//! curves whose image spans only a k-plane of Pⁿ.

use crate::error::{Error, Result};
use crate::exact::{exact_rank, float_rank, gq_from_c64, rat_to_f64, ExpPoly, Gq};
use crate::funcrep::HoloMap;
use crate::nevan::{log_plus, NevanlinnaTable};
use crate::projcurve::{
    assemble_table, check_radii, common_divisor, largest, log_inv_distance, norm, sample_points, smt_inputs, subsets,
    Hyperplane, ProjCurve,
};
use crate::quad::{circle_average, CircleIntegrand, RadialGrid};
use crate::zeros;
use num_complex::{Complex, Complex64 as C};
use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest denominator in the scan over θ.
pub const THETA_DENOMINATOR: i64 = 64;
const FLOAT_RANK_THRESHOLD: f64 = 1e-10;
const RATIONAL_DENOMINATOR: i64 = 1000;
const TOL_CIRCLE: f64 = 1e-9;

/// Covectors a_1, …, a_q in (ℂ^{k+1})*, kept exactly when every entry is a
/// small-denominator rational.
#[derive(Clone, Debug)]
pub enum Covectors {
    Exact(Vec<Vec<Gq>>),
    Float(Vec<Vec<C>>),
}

fn recognise_rational(x: f64) -> Option<Q> {
    if x == 0.0 {
        return Some(Q::zero());
    }
    let scale = x.abs().max(1.0);
    (1..=RATIONAL_DENOMINATOR).find_map(|d| {
        let p = (x * d as f64).round();
        ((x - p / d as f64).abs() <= 1e-13 * scale && p.abs() < 1e15).then(|| Q::new((p as i64).into(), d.into()))
    })
}

impl Covectors {
    pub fn from_complex(rows: &[Vec<C>]) -> Self {
        let exact: Option<Vec<Vec<Gq>>> = rows
            .iter()
            .map(|r| r.iter().map(|c| Some(Complex::new(recognise_rational(c.re)?, recognise_rational(c.im)?))).collect())
            .collect();
        match exact {
            Some(e) => Covectors::Exact(e),
            None => Covectors::Float(rows.to_vec()),
        }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        Covectors::from_complex(&rows.iter().map(|r| r.iter().map(|&x| C::new(x, 0.0)).collect()).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        match self {
            Covectors::Exact(v) => v.len(),
            Covectors::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// k + 1 for covectors on ℂ^{k+1}.
    pub fn dim(&self) -> usize {
        match self {
            Covectors::Exact(v) => v.first().map_or(0, Vec::len),
            Covectors::Float(v) => v.first().map_or(0, Vec::len),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Covectors::Exact(_))
    }

    /// dim L(B) for the covectors indexed by `idx`.
    pub fn rank(&self, idx: &[usize]) -> usize {
        match self {
            Covectors::Exact(v) => exact_rank(&idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>()),
            Covectors::Float(v) => float_rank(&idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>(), FLOAT_RANK_THRESHOLD),
        }
    }

    fn is_nonzero(&self, i: usize) -> bool {
        self.rank(&[i]) == 1
    }
}

/// True iff every n+1 of the covectors span (ℂ^{k+1})*. Fewer than n+1
/// covectors, or a zero covector, give false.
pub fn subgeneral_check(normals: &Covectors, n: usize) -> bool {
    let q = normals.len();
    if q < n + 1 || (0..q).any(|i| !normals.is_nonzero(i)) {
        return false;
    }
    let full = normals.dim();
    subsets(q, n + 1).par_iter().all(|s| normals.rank(s) == full)
}

/// One verified property of a Nochka certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub property: &'static str,
    pub holds: bool,
    /// The tightest instance found, e.g. the subset B with the least room in (iii).
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NochkaWeights {
    #[serde(serialize_with = "ser_rationals")]
    pub omega: Vec<Q>,
    #[serde(serialize_with = "ser_rational")]
    pub theta: Q,
    pub certificate: Vec<PropertyCheck>,
    /// Number of θ values tried before the returned one was found feasible.
    pub scanned: usize,
}

fn ser_rational<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_rationals<S: serde::Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl NochkaWeights {
    pub fn omega_f64(&self) -> Vec<f64> {
        self.omega.iter().map(rat_to_f64).collect()
    }

    pub fn theta_f64(&self) -> f64 {
        rat_to_f64(&self.theta)
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.iter().all(|c| c.holds)
    }
}

fn q_int(x: usize) -> Q {
    Q::from_integer(x.into())
}

fn fmt_set(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Checks properties (i)–(iv) in exact arithmetic, enumerating every B with
/// 1 ≤ #B ≤ n+1 for (iii).
pub fn certify(omega: &[Q], theta: &Q, normals: &Covectors, n: usize, k: usize) -> Vec<PropertyCheck> {
    let q = normals.len();
    let one = Q::one();
    let worst = omega.iter().enumerate().max_by(|a, b| a.1.cmp(b.1)).map(|(j, w)| (j, w * theta));
    let holds_i = omega.iter().all(|w| w.is_positive() && &(w * theta) <= &one);
    let p1 = PropertyCheck {
        property: "(i)",
        holds: holds_i,
        witness: worst.map_or(String::new(), |(j, v)| format!("max ω(j)θ = {v} at j = {}", j + 1)),
    };

    let sum: Q = omega.iter().cloned().sum();
    let lhs = Q::from_integer((q as i64 - 2 * n as i64 + k as i64 - 1).into());
    let rhs = theta * (&sum - q_int(k + 1));
    let p2 = PropertyCheck { property: "(ii)", holds: lhs == rhs, witness: format!("q − 2n + k − 1 = {lhs}, θ(Σω − k − 1) = {rhs}") };

    let mut tight: Option<(Q, Vec<usize>)> = None;
    let mut holds_iii = true;
    for size in 1..=(n + 1).min(q) {
        for b in subsets(q, size) {
            let room = q_int(normals.rank(&b)) - b.iter().map(|&j| omega[j].clone()).sum::<Q>();
            if room.is_negative() {
                holds_iii = false;
            }
            if tight.as_ref().map_or(true, |(r, _)| &room < r) {
                tight = Some((room, b));
            }
        }
    }
    let p3 = PropertyCheck {
        property: "(iii)",
        holds: holds_iii,
        witness: tight.map_or(String::new(), |(r, b)| format!("least room {r} at B = {}", fmt_set(&b))),
    };

    let lo = Q::new(q_int(n + 1).to_integer(), q_int(k + 1).to_integer());
    let hi = Q::new(((2 * n - k + 1) as i64).into(), ((k + 1) as i64).into());
    let p4 = PropertyCheck {
        property: "(iv)",
        holds: one <= lo && &lo <= theta && theta <= &hi,
        witness: format!("{lo} ≤ θ = {theta} ≤ {hi}"),
    };
    vec![p1, p2, p3, p4]
}

/// Descending rationals with denominator ≤ 64 in [lo, hi].
fn theta_scan(lo: &Q, hi: &Q) -> Vec<Q> {
    let mut set = BTreeSet::new();
    for d in 1..=THETA_DENOMINATOR {
        let dq = Q::from_integer(d.into());
        let p_lo = (lo * &dq).ceil().to_integer();
        let p_hi = (hi * &dq).floor().to_integer();
        let mut p = p_lo;
        while p <= p_hi {
            set.insert(Q::new(p.clone(), d.into()));
            p += 1;
        }
    }
    set.into_iter().rev().collect()
}

/// Nochka weights by a descending scan over θ with an exact LP at each step:
/// among ω with 0 < ω(j) ≤ 1/θ, Σ_B ω ≤ dim L(B) for #B ≤ n+1 and
/// Σω = (q − 2n + k − 1)/θ + k + 1, maximise min ω, then ω lexicographically.
pub fn nochka_weights(normals: &Covectors, n: usize, k: usize) -> Result<NochkaWeights> {
    let q = normals.len();
    if normals.dim() != k + 1 {
        return Err(Error::InvalidArgument(format!("covectors have {} entries, expected k + 1 = {}", normals.dim(), k + 1)));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if q < 2 * n - k + 1 {
        return Err(Error::PreconditionViolation(format!("need q ≥ 2n − k + 1 = {}, got q = {q}", 2 * n - k + 1)));
    }
    if !subgeneral_check(normals, n) {
        return Err(Error::PreconditionViolation(format!("covectors are not in {n}-subgeneral position")));
    }
    // only subsets with dependent covectors constrain beyond ω ≤ 1/θ ≤ 1
    let dependent: Vec<(Vec<usize>, usize)> = (2..=(n + 1).min(q))
        .flat_map(|size| subsets(q, size))
        .filter_map(|b| {
            let d = normals.rank(&b);
            (d < b.len()).then_some((b, d))
        })
        .collect();
    let lo = Q::new(((n + 1) as i64).into(), ((k + 1) as i64).into());
    let hi = Q::new(((2 * n - k + 1) as i64).into(), ((k + 1) as i64).into());
    let scan = theta_scan(&lo, &hi);
    for (i, theta) in scan.iter().enumerate() {
        if let Some(omega) = weights_at(theta, q, n, k, &dependent) {
            let certificate = certify(&omega, theta, normals, n, k);
            return Ok(NochkaWeights { omega, theta: theta.clone(), certificate, scanned: i + 1 });
        }
    }
    Err(Error::InfeasibleAtScanResolution { scanned: scan.len() })
}

fn weights_at(theta: &Q, q: usize, n: usize, k: usize, dependent: &[(Vec<usize>, usize)]) -> Option<Vec<Q>> {
    // variables ω_1..ω_q, then t = min ω
    let nv = q + 1;
    let cap = theta.recip();
    let mut le: Vec<(Vec<Q>, Q)> = Vec::new();
    for j in 0..q {
        let mut row = vec![Q::zero(); nv];
        row[j] = Q::one();
        le.push((row, cap.clone()));
        let mut row = vec![Q::zero(); nv];
        row[q] = Q::one();
        row[j] = -Q::one();
        le.push((row, Q::zero()));
    }
    for (b, d) in dependent {
        let mut row = vec![Q::zero(); nv];
        for &j in b {
            row[j] = Q::one();
        }
        le.push((row, q_int(*d)));
    }
    let total = Q::from_integer((q as i64 - 2 * n as i64 + k as i64 - 1).into()) / theta + q_int(k + 1);
    let mut sum_row = vec![Q::one(); nv];
    sum_row[q] = Q::zero();
    let mut eq = vec![(sum_row, total)];

    let mut obj = vec![Q::zero(); nv];
    obj[q] = Q::one();
    let (t_star, _) = lp_maximize(&obj, &le, &eq)?;
    if !t_star.is_positive() {
        return None;
    }
    let mut fix = vec![Q::zero(); nv];
    fix[q] = Q::one();
    eq.push((fix, t_star));
    let mut last = None;
    for j in 0..q {
        let mut obj = vec![Q::zero(); nv];
        obj[j] = Q::one();
        let (v, x) = lp_maximize(&obj, &le, &eq)?;
        let mut fix = vec![Q::zero(); nv];
        fix[j] = Q::one();
        eq.push((fix, v));
        last = Some(x);
    }
    last.map(|x| x[..q].to_vec())
}

/// Dense two-phase simplex over the rationals with Bland's rule:
/// maximise c·x subject to A x ≤ b, E x = e, x ≥ 0. None when infeasible
/// or unbounded.
pub fn lp_maximize(c: &[Q], le: &[(Vec<Q>, Q)], eq: &[(Vec<Q>, Q)]) -> Option<(Q, Vec<Q>)> {
    let nv = c.len();
    let ns = le.len();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    let mut needs_art: Vec<bool> = Vec::new();
    let mut slack_sign: Vec<Option<(usize, Q)>> = Vec::new();
    for (i, (a, b)) in le.iter().enumerate() {
        let flip = b.is_negative();
        let s = if flip { -Q::one() } else { Q::one() };
        rows.push(a.iter().map(|x| x * &s).collect());
        rhs.push(b * &s);
        slack_sign.push(Some((i, s)));
        needs_art.push(flip);
    }
    for (a, b) in eq {
        let flip = b.is_negative();
        let s = if flip { -Q::one() } else { Q::one() };
        rows.push(a.iter().map(|x| x * &s).collect());
        rhs.push(b * &s);
        slack_sign.push(None);
        needs_art.push(true);
    }
    let m = rows.len();
    let arts: Vec<usize> = (0..m).filter(|&i| needs_art[i]).collect();
    let ncols = nv + ns + arts.len();
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    let mut basis = vec![0usize; m];
    for i in 0..m {
        let mut row = rows[i].clone();
        row.resize(ncols + 1, Q::zero());
        if let Some((si, s)) = &slack_sign[i] {
            row[nv + si] = s.clone();
            if !needs_art[i] {
                basis[i] = nv + si;
            }
        }
        if let Some(pos) = arts.iter().position(|&a| a == i) {
            row[nv + ns + pos] = Q::one();
            basis[i] = nv + ns + pos;
        }
        row[ncols] = rhs[i].clone();
        t.push(row);
    }
    let is_art = |col: usize| col >= nv + ns;

    // phase one: maximise −Σ artificials
    let mut z = vec![Q::zero(); ncols + 1];
    for pos in 0..arts.len() {
        z[nv + ns + pos] = Q::one();
    }
    for i in 0..m {
        if is_art(basis[i]) {
            for col in 0..=ncols {
                let v = t[i][col].clone();
                z[col] -= v;
            }
        }
    }
    t.push(z);
    let allowed: Vec<bool> = (0..ncols).map(|_| true).collect();
    simplex(&mut t, &mut basis, &allowed)?;
    if !t[m][ncols].is_zero() {
        return None;
    }
    // drive artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < basis.len() {
        if is_art(basis[i]) {
            match (0..nv + ns).find(|&col| !t[i][col].is_zero()) {
                Some(col) => pivot(&mut t, &mut basis, i, col),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let m = basis.len();
    let allowed: Vec<bool> = (0..ncols).map(|col| !is_art(col)).collect();
    let mut z = vec![Q::zero(); ncols + 1];
    for (j, cj) in c.iter().enumerate() {
        z[j] = -cj.clone();
    }
    for i in 0..m {
        let cb = if basis[i] < nv { c[basis[i]].clone() } else { Q::zero() };
        if !cb.is_zero() {
            for col in 0..=ncols {
                let v = &t[i][col] * &cb;
                z[col] += v;
            }
        }
    }
    t[m] = z;
    simplex(&mut t, &mut basis, &allowed)?;
    let mut x = vec![Q::zero(); nv];
    for i in 0..m {
        if basis[i] < nv {
            x[basis[i]] = t[i][ncols].clone();
        }
    }
    Some((t[m][ncols].clone(), x))
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let f = row[col].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    basis[r] = col;
}

/// Runs to optimality on the last row as objective; None when unbounded.
fn simplex(t: &mut [Vec<Q>], basis: &mut [usize], allowed: &[bool]) -> Option<()> {
    let m = basis.len();
    let ncols = allowed.len();
    loop {
        let Some(col) = (0..ncols).find(|&j| allowed[j] && t[m][j].is_negative()) else {
            return Some(());
        };
        let mut best: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = &t[i][ncols] / &t[i][col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let (r, _) = best?;
        pivot(t, basis, r, col);
    }
}

/// Property (v): searches bases M ⊆ Y of L(Y) for Π_{j∈Y} E_j^{ω(j)} ≤ Π_{j∈M} E_j
/// and returns the best M with the verdict.
pub fn verify_property_v(weights: &NochkaWeights, normals: &Covectors, e: &[f64], y: &[usize]) -> (Vec<usize>, bool) {
    let omega = weights.omega_f64();
    let d = normals.rank(y);
    let lhs: f64 = y.iter().map(|&j| omega[j] * e[j].ln()).sum();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for pick in subsets(y.len(), d) {
        let m: Vec<usize> = pick.iter().map(|&i| y[i]).collect();
        if normals.rank(&m) != d {
            continue;
        }
        let v: f64 = m.iter().map(|&j| e[j].ln()).sum();
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, m));
        }
    }
    match best {
        Some((v, m)) => {
            let ok = lhs <= v + 1e-12 * (1.0 + v.abs());
            (m, ok)
        }
        None => (Vec::new(), false),
    }
}

/// Degenerate-curve SMT table with the weights used and the restricted normals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NochkaReport {
    pub table: NevanlinnaTable,
    pub weights: NochkaWeights,
    pub k: usize,
    pub n_ram: Vec<f64>,
}

fn orthonormalise(plane: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let mut out: Vec<Vec<C>> = Vec::new();
    for v in plane {
        let mut w = v.clone();
        for u in &out {
            let proj: C = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= proj * ui;
            }
        }
        let s = norm(&w);
        if s <= 1e-12 * norm(v).max(1e-300) {
            return Err(Error::InvalidArgument("the spanning vectors of the plane are dependent".into()));
        }
        out.push(w.into_iter().map(|x| x / s).collect());
    }
    Ok(out)
}

/// The curve g with f = B g, for B the orthonormalised plane basis.
pub fn restrict_to_plane(curve: &ProjCurve, plane: &[Vec<C>]) -> Result<ProjCurve> {
    let n = curve.n();
    if plane.is_empty() || plane.iter().any(|v| v.len() != n + 1) {
        return Err(Error::InvalidArgument(format!("plane vectors must lie in ℂ^{}", n + 1)));
    }
    let basis = orthonormalise(plane)?;
    for z in sample_points(curve.disc()) {
        let (v, _) = curve.eval_scaled(z)?;
        let mut rest = v.clone();
        for u in &basis {
            let proj: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (ri, ui) in rest.iter_mut().zip(u) {
                *ri -= proj * ui;
            }
        }
        if norm(&rest) > 1e-9 * norm(&v) {
            return Err(Error::InvalidArgument(format!("the curve leaves the given plane near z = {z}")));
        }
    }
    let disc = curve.disc();
    let exact: Option<Vec<ExpPoly>> = curve.components().iter().map(HoloMap::as_exp_poly).collect();
    let comps: Vec<HoloMap> = basis
        .iter()
        .enumerate()
        .map(|(i, u)| match &exact {
            Some(ex) => {
                let g = ex.iter().zip(u).fold(ExpPoly::zero(), |acc, (f, b)| acc.add(&f.scale(&gq_from_c64(b.conj()))));
                HoloMap::exp_poly(g, disc).with_name(&format!("g{i}"))
            }
            None => {
                let fs = curve.components().to_vec();
                let u = u.clone();
                HoloMap::from_fn(disc, &format!("g{i}"), move |z| fs.iter().zip(&u).map(|(f, b)| Ok(f.eval(z)? * b.conj())).sum())
            }
        })
        .collect();
    ProjCurve::new(comps)
}

/// Restricted normals â_j = Bᵀ a_j, so that a_j·f = â_j·g.
pub fn restricted_normals(plane: &[Vec<C>], hyperplanes: &[Hyperplane]) -> Result<Vec<Vec<C>>> {
    let basis = orthonormalise(plane)?;
    Ok(hyperplanes.iter().map(|h| basis.iter().map(|u| u.iter().zip(h.normal()).map(|(b, a)| a * b).sum()).collect()).collect())
}

/// Per-radius slack of Σ_j m(r, H_j) + ((n+1)/(k+1)) N_ram ≤ (2n−k+1)T
/// + ((2n−k+1)k/2)((1+ε)(c+ε)T + ε log⁺r) + C_log log⁺T + C, for a curve
/// whose image lies in the plane spanned by `plane`.
pub fn nochka_smt_report(
    curve: &ProjCurve,
    plane: &[Vec<C>],
    hyperplanes: &[Hyperplane],
    grid: &RadialGrid,
    eps: f64,
    c: Option<f64>,
) -> Result<NochkaReport> {
    let n = curve.n();
    let k = plane.len().checked_sub(1).ok_or_else(|| Error::InvalidArgument("empty plane".into()))?;
    if k > n {
        return Err(Error::InvalidArgument(format!("a {k}-plane does not fit in P^{n}")));
    }
    let g = restrict_to_plane(curve, plane)?;
    if !g.is_nondegenerate() {
        return Err(Error::Degenerate(format!("the curve lies in a proper subspace of the given {k}-plane")));
    }
    let hat = restricted_normals(plane, hyperplanes)?;
    for (j, a) in hat.iter().enumerate() {
        if norm(a) <= 1e-12 {
            return Err(Error::ImageInHyperplane { index: j });
        }
    }
    let covectors = Covectors::from_complex(&hat);
    let weights = nochka_weights(&covectors, n, k)?;

    let radii = grid.radii();
    check_radii(curve, radii)?;
    let inputs = smt_inputs(curve, hyperplanes, grid, c)?;
    let rmax = largest(radii)?;
    let w_div = common_divisor(g.associated(k)?, rmax)?;
    let n_ram: Vec<f64> = radii.iter().map(|&r| w_div.counting(r)).collect();

    // Σ_j m(r, H_j) as one circle average so that k = n matches the Cartan form
    let f0 = curve.associated(0)?;
    let pre = &inputs.preimages;
    let sum_m: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            zeros::with_retries(r, |rr| {
                let hints: Vec<f64> = pre.iter().flat_map(|p| p.hints_near(rr)).collect();
                let gi = CircleIntegrand::new(|th| {
                    let z = C::from_polar(rr, th);
                    let v = hyperplanes.iter().map(|h| log_inv_distance(f0, h, z)).sum::<Result<f64>>()?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::SingularAverage { radius: rr })
                    }
                })
                .with_hints(hints)
                .with_panels(f0.panels(rr))
                .on_radius(rr);
                circle_average(&gi, TOL_CIRCLE * (1.0 + rr))
            })
        })
        .collect::<Result<_>>()?;

    let ram_coef = (n + 1) as f64 / (k + 1) as f64;
    let leading = (2 * n - k + 1) as f64;
    let spread = leading * k as f64 / 2.0;
    let cc = inputs.c;
    let lhs: Vec<f64> = sum_m.iter().zip(&n_ram).map(|(m, nr)| m + ram_coef * nr).collect();
    let base: Vec<f64> = radii
        .iter()
        .zip(&inputs.t)
        .map(|(&r, &t)| leading * t + spread * ((1.0 + eps) * (cc + eps) * t + eps * log_plus(r)))
        .collect();
    let table = assemble_table(curve, hyperplanes, grid, eps, inputs, lhs, base, &n_ram, leading, spread);
    Ok(NochkaReport { table, weights, k, n_ram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projcurve::cartan_smt_report;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(p: i64, q: i64) -> Q {
        Q::new(p.into(), q.into())
    }

    fn five_in_c2() -> Covectors {
        Covectors::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 2.0]])
    }

    #[test]
    fn subgeneral_examples() {
        let lines = Covectors::from_real(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]);
        assert!(lines.is_exact());
        assert!(subgeneral_check(&lines, 2));
        assert!(subgeneral_check(&five_in_c2(), 2));
        let rep = Covectors::from_real(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(!subgeneral_check(&rep, 1));
        // the same configuration is 2-subgeneral: any three contain two independent ones
        assert!(subgeneral_check(&rep, 2));
        let irrational = Covectors::from_complex(&[
            vec![C::new(std::f64::consts::PI, 0.0), C::new(1.0, 0.0)],
            vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
        ]);
        assert!(!irrational.is_exact());
        assert!(subgeneral_check(&irrational, 1));
    }

    #[test]
    fn general_position_gives_unit_weights() {
        for n in 1..=3 {
            let q = 2 * n + 2;
            let rows: Vec<Vec<f64>> = (0..q).map(|j| (0..=n).map(|i| ((j + 1) as f64).powi(i as i32)).collect()).collect();
            let cov = Covectors::from_real(&rows);
            let w = nochka_weights(&cov, n, n).unwrap();
            assert_eq!(w.theta, Q::one());
            assert!(w.omega.iter().all(|x| x.is_one()));
            assert!(w.is_certified(), "{:?}", w.certificate);
        }
    }

    #[test]
    fn five_covectors_in_c2() {
        let w = nochka_weights(&five_in_c2(), 2, 1).unwrap();
        assert!(w.theta >= r(3, 2) && w.theta <= r(2, 1));
        assert!(w.is_certified());
        let q = Covectors::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(nochka_weights(&q, 2, 1), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn repeated_covectors_push_theta_down() {
        // two copies of a line among six covectors in ℂ²
        let cov = Covectors::from_real(&[
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![1.0, 2.0],
        ]);
        assert!(subgeneral_check(&cov, 2));
        let w = nochka_weights(&cov, 2, 1).unwrap();
        assert!(w.is_certified(), "{:?}", w.certificate);
        assert!(w.omega.iter().all(|x| x.is_positive()));
    }

    #[test]
    fn simplex_small_problems() {
        // max x + y with x + 2y ≤ 4, 3x + y ≤ 6
        let c = vec![Q::one(), Q::one()];
        let le = vec![(vec![r(1, 1), r(2, 1)], r(4, 1)), (vec![r(3, 1), r(1, 1)], r(6, 1))];
        let (v, x) = lp_maximize(&c, &le, &[]).unwrap();
        assert_eq!(v, r(14, 5));
        assert_eq!(x, vec![r(8, 5), r(6, 5)]);
        // infeasible: x + y = 3 with x ≤ 1, y ≤ 1
        let le = vec![(vec![r(1, 1), r(0, 1)], r(1, 1)), (vec![r(0, 1), r(1, 1)], r(1, 1))];
        let eq = vec![(vec![r(1, 1), r(1, 1)], r(3, 1))];
        assert!(lp_maximize(&c, &le, &eq).is_none());
        // unbounded
        assert!(lp_maximize(&c, &[(vec![r(1, 1), r(-1, 1)], r(1, 1))], &[]).is_none());
        // a ≥ row written with a negative right-hand side: x ≥ 2, x ≤ 5, max −x
        let le = vec![(vec![r(-1, 1)], r(-2, 1)), (vec![r(1, 1)], r(5, 1))];
        assert_eq!(lp_maximize(&[r(-1, 1)], &le, &[]).unwrap().0, r(-2, 1));
    }

    /// Random configurations with some repeated covectors, in subgeneral position.
    fn random_configuration(rng: &mut ChaCha8Rng) -> (Covectors, usize, usize) {
        loop {
            let k = rng.gen_range(0..=2usize);
            let n = rng.gen_range(k.max(1)..=3usize);
            let qmin = (2 * n - k + 1).max(n + 1);
            if qmin > 8 {
                continue;
            }
            let q = rng.gen_range(qmin..=8);
            let mut rows: Vec<Vec<f64>> = Vec::new();
            while rows.len() < q {
                if !rows.is_empty() && rng.gen_bool(0.3) {
                    let j = rng.gen_range(0..rows.len());
                    let s = rng.gen_range(1..=3) as f64;
                    let copy = rows[j].iter().map(|x| x * s).collect();
                    rows.push(copy);
                } else {
                    rows.push((0..=k).map(|_| rng.gen_range(-3..=3) as f64).collect());
                }
            }
            let cov = Covectors::from_real(&rows);
            if subgeneral_check(&cov, n) {
                return (cov, n, k);
            }
        }
    }

    #[test]
    fn random_certificates_and_property_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let (cov, n, k) = random_configuration(&mut rng);
            let w = nochka_weights(&cov, n, k).unwrap();
            // an independent re-check of (i)–(iv)
            assert!(certify(&w.omega, &w.theta, &cov, n, k).iter().all(|c| c.holds), "{:?}", w.certificate);
            let q = cov.len();
            for _ in 0..20 {
                let e: Vec<f64> = (0..q).map(|_| rng.gen_range(1.0..10.0)).collect();
                let size = rng.gen_range(1..=(n + 1).min(q));
                let mut y: Vec<usize> = (0..q).collect();
                for i in 0..size {
                    let j = rng.gen_range(i..q);
                    y.swap(i, j);
                }
                y.truncate(size);
                y.sort();
                let (m, ok) = verify_property_v(&w, &cov, &e, &y);
                assert!(ok, "q = {q}, n = {n}, k = {k}, Y = {y:?}, M = {m:?}, ω = {:?}", w.omega);
            }
        }
    }

    #[test]
    fn property_v_trivial_cases() {
        let cov = five_in_c2();
        let w = nochka_weights(&cov, 2, 1).unwrap();
        let ones = vec![1.0; 5];
        let (m, ok) = verify_property_v(&w, &cov, &ones, &[0, 2, 4]);
        assert!(ok && m.len() == 2);
        let lines = Covectors::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let w = nochka_weights(&lines, 1, 1).unwrap();
        let (m, ok) = verify_property_v(&w, &lines, &[3.0, 5.0, 7.0], &[0, 1]);
        assert!(ok);
        assert_eq!(m, vec![0, 1]);
    }

    fn exp_line() -> ProjCurve {
        ProjCurve::from_gallery("exp-line").unwrap()
    }

    fn plane_x2() -> Vec<Vec<C>> {
        vec![vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)], vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]]
    }

    fn five_planes() -> Vec<Hyperplane> {
        [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.0, -1.0, 2.0], [1.0, 2.0, -1.0]]
            .iter()
            .map(|a| Hyperplane::from_real(a).unwrap())
            .collect()
    }

    #[test]
    fn degenerate_smt_on_an_exponential_line() {
        let grid = RadialGrid::geometric(2.0, 30.0, 12).unwrap();
        let rep = nochka_smt_report(&exp_line(), &plane_x2(), &five_planes(), &grid, 0.1, None).unwrap();
        assert!(rep.weights.is_certified());
        assert!(rep.table.records.iter().all(|x| x.slack >= -1.0), "{:?}", rep.table.records);
        let mut hs = five_planes();
        hs.push(Hyperplane::coordinate(2, 2));
        assert!(matches!(nochka_smt_report(&exp_line(), &plane_x2(), &hs, &grid, 0.1, None), Err(Error::ImageInHyperplane { index: 5 })));
    }

    #[test]
    fn full_plane_matches_the_cartan_report() {
        let f = ProjCurve::from_gallery("exp-2").unwrap();
        let hs: Vec<Hyperplane> =
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]].iter().map(|a| Hyperplane::from_real(a).unwrap()).collect();
        let plane: Vec<Vec<C>> = (0..3).map(|i| (0..3).map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        let grid = RadialGrid::geometric(1.0, 20.0, 10).unwrap();
        let a = nochka_smt_report(&f, &plane, &hs, &grid, 0.1, None).unwrap();
        let b = cartan_smt_report(&f, &hs, &grid, 0.1, None).unwrap();
        assert_eq!(a.weights.theta, Q::one());
        for (x, y) in a.table.records.iter().zip(&b.table.records) {
            assert!((x.slack - y.slack).abs() <= 1e-9, "{} vs {}", x.slack, y.slack);
        }
    }

    #[test]
    fn plane_must_contain_the_curve() {
        let plane = vec![vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)], vec![C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)]];
        assert!(restrict_to_plane(&exp_line(), &plane).is_err());
        let g = restrict_to_plane(&exp_line(), &plane_x2()).unwrap();
        assert_eq!(g.n(), 1);
        assert!(g.is_nondegenerate());
    }
}
