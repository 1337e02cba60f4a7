//! Theta series, the modular lambda function and the flat-torus Green function.

use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

const I: C = C::new(0.0, 1.0);
const REL_TRUNC: f64 = 1e-20;
const MAX_TERMS: usize = 4000;

/// Fourth powers (θ₂⁴, θ₃⁴, θ₄⁴) at nome q = e^{iπτ}.
pub fn theta_fourth_powers(q: C) -> Result<(C, C, C)> {
    if q.norm() > 0.999 {
        return Err(Error::PrecisionFailure { terms: 0 });
    }
    // Σ q^{n(n+1)}
    let mut s2 = C::new(1.0, 0.0);
    let mut n = 1usize;
    loop {
        let term = q.powu((n * (n + 1)) as u32);
        s2 += term;
        if term.norm() < REL_TRUNC * s2.norm() {
            break;
        }
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::PrecisionFailure { terms: n });
        }
    }
    let mut t3 = C::new(1.0, 0.0);
    let mut t4 = C::new(1.0, 0.0);
    let mut n = 1usize;
    loop {
        let term = q.powu((n * n) as u32) * 2.0;
        t3 += term;
        t4 += if n % 2 == 1 { -term } else { term };
        if term.norm() < REL_TRUNC * t3.norm().min(t4.norm()).max(f64::MIN_POSITIVE) {
            break;
        }
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::PrecisionFailure { terms: n });
        }
    }
    let t2_4 = q * 16.0 * s2.powu(4);
    Ok((t2_4, t3.powu(4), t4.powu(4)))
}

fn nome(tau: C) -> C {
    (I * PI * tau).exp()
}

/// λ(τ) = θ₂⁴/θ₃⁴ summed directly, without modular reduction.
pub fn lambda_raw(tau: C) -> Result<C> {
    let (t2, t3, _) = theta_fourth_powers(nome(tau))?;
    Ok(t2 / t3)
}

/// A complex number m·e^{e} kept in two parts so that extreme magnitudes
/// neither overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub m: C,
    pub e: f64,
}

impl Scaled {
    pub fn new(m: C) -> Self {
        Scaled { m, e: 0.0 }.normalized()
    }

    fn normalized(self) -> Self {
        let a = self.m.norm();
        if a == 0.0 || !a.is_finite() {
            return self;
        }
        Scaled { m: self.m / a, e: self.e + a.ln() }
    }

    pub fn mul(self, o: Scaled) -> Scaled {
        Scaled { m: self.m * o.m, e: self.e + o.e }.normalized()
    }

    pub fn div(self, o: Scaled) -> Scaled {
        Scaled { m: self.m / o.m, e: self.e - o.e }.normalized()
    }

    pub fn scale(self, c: C) -> Scaled {
        Scaled { m: self.m * c, e: self.e }.normalized()
    }

    pub fn ln_abs(self) -> f64 {
        self.m.norm().ln() + self.e
    }

    pub fn to_c(self) -> C {
        self.m * self.e.exp()
    }
}

/// θ₂⁴ with its nome factor kept apart, and θ₃⁴, θ₄⁴ at τ.
fn theta_fourth_powers_scaled(tau: C) -> Result<(Scaled, C, C)> {
    let q = nome(tau);
    if q.norm() > 0.999 {
        return Err(Error::PrecisionFailure { terms: 0 });
    }
    let (_, t3, t4) = theta_fourth_powers(q)?;
    let mut s = C::new(1.0, 0.0);
    let mut n = 1usize;
    loop {
        let term = q.powu((n * (n + 1)) as u32);
        s += term;
        if term.norm() < REL_TRUNC * s.norm() {
            break;
        }
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::PrecisionFailure { terms: n });
        }
    }
    let t2 = Scaled { m: C::from_polar(16.0, PI * tau.re) * s.powu(4), e: -PI * tau.im }.normalized();
    Ok((t2, t3, t4))
}

/// The lift (θ₃⁴, θ₂⁴)/c of λ, c a local holomorphic unit, together with the
/// Wronskian w0·w1′ − w0′·w1 of that lift in the local variable.
#[derive(Clone, Copy, Debug)]
pub struct LambdaLift {
    pub w0: Scaled,
    pub w1: Scaled,
    pub wr: Scaled,
    /// θ₄⁴/c = w0 − w1, kept separately so that 1 − λ never cancels.
    pub w4: Scaled,
}

impl LambdaLift {
    pub fn lambda(&self) -> Scaled {
        self.w1.div(self.w0)
    }

    /// λ′ = W/w0².
    pub fn derivative(&self) -> Scaled {
        self.wr.div(self.w0.mul(self.w0))
    }

    /// |W|²/‖w‖⁴.
    pub fn fs_density(&self) -> f64 {
        let top = self.w0.e.max(self.w1.e);
        let n2 = (self.w0.m * (self.w0.e - top).exp()).norm_sqr() + (self.w1.m * (self.w1.e - top).exp()).norm_sqr();
        (2.0 * self.wr.ln_abs() - 4.0 * top - 2.0 * n2.ln()).exp()
    }

    /// log of the chordal distance from λ to a.
    pub fn log_chordal(&self, a: &super::Target) -> f64 {
        let top = self.w0.e.max(self.w1.e);
        let norm = ((self.w0.m * (self.w0.e - top).exp()).norm_sqr() + (self.w1.m * (self.w1.e - top).exp()).norm_sqr()).sqrt();
        let log_norm = norm.ln() + top;
        let (num, an) = match a {
            super::Target::Infinity => (self.w0.ln_abs(), 1.0),
            super::Target::Finite(c) if *c == C::new(0.0, 0.0) => (self.w1.ln_abs(), 1.0),
            super::Target::Finite(c) if *c == C::new(1.0, 0.0) => (self.w4.ln_abs(), 2f64.sqrt()),
            super::Target::Finite(c) => {
                // |c·w0 − w1| at the common scale
                let v = self.w0.m * (self.w0.e - top).exp() * c - self.w1.m * (self.w1.e - top).exp();
                (v.norm().ln() + top, (1.0 + c.norm_sqr()).sqrt())
            }
        };
        (num - log_norm - an.ln()).min(0.0)
    }

    /// (w0, w1, s) with e^s·(w0, w1) = (1, λ) and max(|w0|, |w1|) ≤ 1.
    pub fn affine_lift(&self) -> (C, C, f64) {
        let l = self.lambda();
        if l.e <= 0.0 {
            (C::new(1.0, 0.0), l.to_c(), 0.0)
        } else {
            (Scaled { m: l.m.inv(), e: -l.e }.to_c(), l.m, l.e)
        }
    }
}

enum Move {
    Shift(i64),
    Invert(C),
}

/// λ at τ in the upper half-plane, reduced into the fundamental domain first.
///
/// The triple (θ₂⁴, θ₃⁴, θ₄⁴) is carried back through the reduction: τ ↦ τ+1
/// negates θ₂⁴ and swaps θ₃⁴, θ₄⁴; τ ↦ −1/τ swaps θ₂⁴, θ₄⁴ and multiplies
/// all three by −τ². Only permutations and signs occur, so nothing cancels.
pub fn lambda_lift(tau: C) -> Result<LambdaLift> {
    if !(tau.im > 0.0) || !tau.re.is_finite() {
        return Err(Error::InvalidArgument(format!("tau = {tau} is not in the upper half-plane")));
    }
    let mut t = tau;
    let mut moves = Vec::new();
    for _ in 0..100_000 {
        if t.re.abs() > 0.5 + 1e-12 {
            let n = t.re.round() as i64;
            t -= n as f64;
            moves.push(Move::Shift(n));
        } else if t.norm_sqr() < 1.0 - 1e-12 {
            moves.push(Move::Invert(t));
            t = -1.0 / t;
        } else {
            break;
        }
    }
    let (t2, t3, t4) = theta_fourth_powers_scaled(t)?;
    let (mut a2, mut a3, mut a4) = (t2, Scaled::new(t3), Scaled::new(t4));
    // θ(τ) = c·(a2, a3, a4)
    let mut c = Scaled::new(C::new(1.0, 0.0));
    for m in moves.iter().rev() {
        match *m {
            Move::Shift(n) if n.rem_euclid(2) == 1 => {
                a2 = a2.scale(C::new(-1.0, 0.0));
                std::mem::swap(&mut a3, &mut a4);
            }
            Move::Shift(_) => {}
            Move::Invert(before) => {
                std::mem::swap(&mut a2, &mut a4);
                c = c.scale(-1.0 / (before * before));
            }
        }
    }
    // W(θ₃⁴, θ₂⁴) = iπθ₂⁴θ₃⁴θ₄⁴, so the lift θ/c has Wronskian iπ·c·a2a3a4
    let wr = a2.mul(a3).mul(a4).mul(c).scale(I * PI);
    Ok(LambdaLift { w0: a3, w1: a2, wr, w4: a4 })
}

/// Cayley map z ↦ i(1+z)/(1−z) from Δ(1) onto the upper half-plane.
pub fn cayley(z: C) -> C {
    I * (1.0 + z) / (1.0 - z)
}

/// λ∘Cayley on the unit disc, with the Wronskian taken in z.
pub fn lambda_disc_lift(z: C) -> Result<LambdaLift> {
    if z.norm() >= 1.0 {
        return Err(Error::DomainViolation { z, radius: 1.0 });
    }
    let v = lambda_lift(cayley(z))?;
    let dtau = 2.0 * I / ((1.0 - z) * (1.0 - z));
    Ok(LambdaLift { wr: v.wr.scale(dtau), ..v })
}

/// Lattice ω₁ℤ + ω₂ℤ, stored with a reduced basis so that τ = ω₂/ω₁ lies in
/// the standard fundamental domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    w1: C,
    w2: C,
}

impl Lattice {
    pub fn new(a: C, b: C) -> Result<Self> {
        let cross = a.re * b.im - a.im * b.re;
        if !(cross.abs() > 1e-12 * a.norm() * b.norm()) || !cross.is_finite() {
            return Err(Error::InvalidArgument("lattice basis is not R-linearly independent".into()));
        }
        let (mut w1, mut w2) = if cross > 0.0 { (a, b) } else { (b, a) };
        // Gauss reduction
        loop {
            if w2.norm_sqr() < w1.norm_sqr() {
                let t = w1;
                w1 = w2;
                w2 = -t;
            }
            let mu = (w2 / w1).re.round();
            if mu == 0.0 {
                break;
            }
            w2 -= w1 * mu;
            if w2.norm_sqr() >= w1.norm_sqr() {
                break;
            }
        }
        Ok(Lattice { w1, w2 })
    }

    pub fn gaussian() -> Self {
        Lattice::new(C::new(1.0, 0.0), C::new(0.0, 1.0)).expect("valid basis")
    }

    pub fn basis(&self) -> (C, C) {
        (self.w1, self.w2)
    }

    pub fn tau(&self) -> C {
        self.w2 / self.w1
    }

    pub fn area(&self) -> f64 {
        (self.w1.re * self.w2.im - self.w1.im * self.w2.re).abs()
    }

    /// Lattice points p with |p − centre| < radius.
    pub fn points_within(&self, centre: C, radius: f64) -> Vec<C> {
        let h = self.area() / self.w1.norm();
        let span2 = (radius / h).ceil() as i64 + 1;
        let mut out = Vec::new();
        let c = centre / self.w1;
        let tau = self.tau();
        let base2 = (c.im / tau.im).round() as i64;
        for n2 in (base2 - span2)..=(base2 + span2) {
            let row = tau * n2 as f64;
            let off = (c - row).re;
            let span1 = (radius / self.w1.norm()).ceil() as i64 + 1;
            let base1 = off.round() as i64;
            for n1 in (base1 - span1)..=(base1 + span1) {
                let p = self.w1 * (n1 as f64 + row);
                if (p - centre).norm() < radius {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Mean-zero Green function u_a(z) with dd^c u_a = ω − δ_a, ω the flat
    /// form of total mass one. Returns +∞ at lattice translates of a.
    pub fn green(&self, z: C, a: C) -> f64 {
        let tau = self.tau();
        let mut w = (z - a) / self.w1;
        let n2 = (w.im / tau.im).round();
        w -= tau * n2;
        w -= w.re.round();
        let q = nome(tau);
        let th = theta1(PI * w, q);
        if th == C::new(0.0, 0.0) {
            return f64::INFINITY;
        }
        -2.0 * th.norm().ln() + 2.0 * log_abs_eta(q, tau) + 2.0 * PI * w.im * w.im / tau.im
    }
}

/// θ₁(v | τ) = 2 Σ (−1)ⁿ q^{(n+½)²} sin((2n+1)v).
pub fn theta1(v: C, q: C) -> C {
    let lq = q.ln();
    let mut s = C::new(0.0, 0.0);
    for n in 0..MAX_TERMS {
        let e = (n as f64 + 0.5).powi(2);
        let term = (lq * e).exp() * ((2 * n + 1) as f64 * v).sin();
        let term = if n % 2 == 1 { -term } else { term };
        s += term;
        if n > 2 && term.norm() < REL_TRUNC * s.norm() {
            break;
        }
    }
    s * 2.0
}

fn log_abs_eta(q: C, tau: C) -> f64 {
    let mut s = -PI * tau.im / 12.0;
    let q2 = q * q;
    let mut p = q2;
    for _ in 0..MAX_TERMS {
        let t = (1.0 - p).norm().ln();
        s += t;
        if p.norm() < 1e-20 {
            break;
        }
        p *= q2;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_at_i_is_one_half() {
        let v = lambda_raw(I).unwrap();
        assert!((v - 0.5).norm() < 1e-15);
        let l = lambda_disc_lift(C::new(0.0, 0.0)).unwrap();
        assert!((l.lambda().to_c() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn reduction_agrees_with_direct_series() {
        for tau in [C::new(0.3, 0.4), C::new(-1.7, 0.9), C::new(0.05, 0.2), C::new(2.4, 0.15)] {
            let direct = lambda_raw(tau).unwrap();
            let l = lambda_lift(tau).unwrap();
            let reduced = l.lambda().to_c();
            assert!((direct - reduced).norm() < 1e-9 * direct.norm().max(1.0), "{tau}: {direct} vs {reduced}");
        }
    }

    #[test]
    fn wronskian_matches_finite_difference() {
        for z in [C::new(0.2, 0.1), C::new(-0.6, 0.5), C::new(0.9, -0.3)] {
            let l = lambda_disc_lift(z).unwrap();
            let f = |z: C| {
                lambda_disc_lift(z).unwrap().lambda().to_c()
            };
            let h = 1e-6;
            let fd = (f(z + h) - f(z - h)) / (2.0 * h);
            let d = l.derivative().to_c();
            assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0), "{z}: {fd} vs {d}");
        }
    }

    #[test]
    fn cusp_values_stay_representable() {
        // near τ = 1 the value λ is about e^{π/ε}/16, far beyond f64
        let l = lambda_lift(C::new(1.0, 1e-3)).unwrap();
        let ln = l.lambda().ln_abs();
        assert!((ln - (PI * 1e3 - 16f64.ln())).abs() < 1e-6, "{ln}");
        assert!(l.fs_density().is_finite());
        // near τ = 0 it tends to 1, near i∞ to 0
        assert!((lambda_lift(C::new(0.0, 1e-3)).unwrap().lambda().to_c() - 1.0).norm() < 1e-12);
        assert!(lambda_lift(C::new(0.2, 1e3)).unwrap().lambda().ln_abs() < -3000.0);
        // chordal distances to the omitted values, in logs
        let near_one = lambda_lift(C::new(0.0, 1e-3)).unwrap();
        let d = near_one.log_chordal(&super::super::Target::Finite(C::new(1.0, 0.0)));
        assert!((d - (16f64.ln() - PI * 1e3 - 2f64.ln())).abs() < 1e-6, "{d}");
    }

    #[test]
    fn raw_series_refuses_near_boundary() {
        assert!(lambda_raw(C::new(0.0, 1e-4)).is_err());
        assert!(lambda_lift(C::new(0.0, 1e-4)).is_ok());
    }

    #[test]
    fn torus_green_is_periodic_and_mean_zero() {
        let lat = Lattice::gaussian();
        let a = C::new(0.3, 0.2);
        let z = C::new(0.71, -0.43);
        let g0 = lat.green(z, a);
        assert!((lat.green(z + 1.0, a) - g0).abs() < 1e-10);
        assert!((lat.green(z + I * 3.0, a) - g0).abs() < 1e-10);
        let n = 200;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = C::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                s += lat.green(p, a + C::new(0.0013, 0.0007));
            }
        }
        assert!((s / (n * n) as f64).abs() < 2e-3);
    }

    #[test]
    fn lattice_points_counted() {
        let lat = Lattice::gaussian();
        let pts = lat.points_within(C::new(0.0, 0.0), 2.1);
        // |m + ni| < 2.1: 0, ±1, ±i, ±1±i, ±2, ±2i
        assert_eq!(pts.len(), 13);
    }
}
