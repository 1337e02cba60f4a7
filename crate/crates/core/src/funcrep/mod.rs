//! Holomorphic and meromorphic maps on discs Δ(R), their derivatives and the
//! named gallery.

mod gallery;
mod parse;
mod series;
pub mod special;

pub use gallery::{curve_gallery, gallery, gallery_manifest, GalleryEntry, GalleryParams, CURVE_NAMES};
pub use parse::parse_exppoly;
pub use series::Series;
pub use special::Lattice;

use crate::error::{Error, Result};
use crate::exact::{gq_from_c64, ExpPoly, Poly};
use crate::precision::{precision, Precision};
use num_complex::Complex64 as C;
use std::sync::Arc;

/// The disc Δ(R) = {|z| < R}; R = ∞ is the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    radius: f64,
}

impl Disc {
    pub fn new(radius: f64) -> Result<Self> {
        if radius > 0.0 {
            Ok(Disc { radius })
        } else {
            Err(Error::InvalidArgument(format!("disc radius must be positive, got {radius}")))
        }
    }

    pub fn plane() -> Self {
        Disc { radius: f64::INFINITY }
    }

    pub fn unit() -> Self {
        Disc { radius: 1.0 }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_plane(&self) -> bool {
        self.radius.is_infinite()
    }

    pub fn contains(&self, z: C) -> bool {
        z.norm() < self.radius && z.re.is_finite() && z.im.is_finite()
    }

    fn check(&self, z: C) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::DomainViolation { z, radius: self.radius })
        }
    }
}

/// A point of P¹.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Finite(C),
    Infinity,
}

impl Target {
    /// Homogeneous coordinates [a₀ : a₁] with a = a₁/a₀.
    pub fn coords(&self) -> (C, C) {
        match *self {
            Target::Finite(c) => (C::new(1.0, 0.0), c),
            Target::Infinity => (C::new(0.0, 0.0), C::new(1.0, 0.0)),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Finite(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Target::Finite(c) => write!(f, "{}{:+}i", c.re, c.im),
            Target::Infinity => write!(f, "inf"),
        }
    }
}

/// A value in P¹ stored as e^{log_scale}·(w0, w1); w1/w0 is the affine value.
#[derive(Clone, Copy, Debug)]
pub struct ProjPoint {
    pub w0: C,
    pub w1: C,
    pub log_scale: f64,
}

impl ProjPoint {
    pub fn new(w0: C, w1: C) -> Self {
        ProjPoint { w0, w1, log_scale: 0.0 }
    }

    fn raw_norm(&self) -> f64 {
        self.w0.norm().hypot(self.w1.norm())
    }

    /// log‖(f₀, f₁)‖ of the lift this point was evaluated from.
    pub fn log_norm(&self) -> f64 {
        self.raw_norm().ln() + self.log_scale
    }

    /// Chordal distance |w₀a₁ − w₁a₀| / (‖w‖‖a‖), in [0, 1].
    pub fn chordal(&self, a: &Target) -> f64 {
        let (a0, a1) = a.coords();
        let an = a0.norm().hypot(a1.norm());
        ((self.w0 * a1 - self.w1 * a0).norm() / (self.raw_norm() * an)).min(1.0)
    }

    pub fn affine(&self) -> Option<C> {
        (self.w0.norm() > 0.0).then(|| self.w1 / self.w0)
    }
}

type FnBody = Arc<dyn Fn(C) -> Result<C> + Send + Sync>;

/// Function body of a [`HoloMap`].
#[derive(Clone)]
pub enum Body {
    /// num/den in lowest terms; `wr` = den·num′ − den′·num.
    Rational { num: Poly, den: Poly, wr: Poly },
    /// Σ pⱼ(z)e^{λⱼz} together with its derivative.
    ExpPoly { f: ExpPoly, df: ExpPoly },
    Series { f: Series, df: Series },
    /// Modular λ precomposed with the Cayley map; `derivative` selects λ′.
    Lambda { derivative: bool },
    /// Lift z ↦ scale·z of the projection ℂ → ℂ/Λ.
    TorusLift { lattice: Lattice, scale: C },
    /// order-th derivative of `base` by a Cauchy integral on a small circle.
    Derivative { base: HoloMap, order: usize },
    Closure(FnBody),
}

impl std::fmt::Debug for Body {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Body::Rational { num, den, .. } => f.debug_struct("Rational").field("num", num).field("den", den).finish(),
            Body::ExpPoly { f: e, .. } => f.debug_tuple("ExpPoly").field(e).finish(),
            Body::Series { f: s, .. } => f.debug_tuple("Series").field(s).finish(),
            Body::Lambda { derivative } => f.debug_struct("Lambda").field("derivative", derivative).finish(),
            Body::TorusLift { lattice, scale } => {
                f.debug_struct("TorusLift").field("lattice", lattice).field("scale", scale).finish()
            }
            Body::Derivative { base, order } => {
                f.debug_struct("Derivative").field("base", &base.name).field("order", order).finish()
            }
            Body::Closure(_) => f.write_str("Closure"),
        }
    }
}

/// A holomorphic or meromorphic map on a disc. Immutable and cheap to clone.
#[derive(Clone, Debug)]
pub struct HoloMap {
    disc: Disc,
    body: Arc<Body>,
    name: Arc<str>,
}

const CAUCHY_POINTS: usize = 64;

impl HoloMap {
    pub fn polynomial(p: Poly) -> Self {
        let f = ExpPoly::from_poly(p);
        HoloMap::exp_poly(f, Disc::plane())
    }

    /// num/den reduced by an exact gcd.
    pub fn rational(num: Poly, den: Poly, disc: Disc) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("denominator is identically zero".into()));
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        // normalize so the denominator is monic
        let lead = den.leading().cloned().expect("nonzero denominator");
        let inv = crate::exact::gq_one() / lead;
        let (num, den) = (num.scale(&inv), den.scale(&inv));
        let wr = den.mul(&num.derivative()).sub(&den.derivative().mul(&num));
        Ok(HoloMap { disc, body: Arc::new(Body::Rational { num, den, wr }), name: "rational".into() })
    }

    pub fn exp_poly(f: ExpPoly, disc: Disc) -> Self {
        let df = f.derivative();
        HoloMap { disc, body: Arc::new(Body::ExpPoly { f, df }), name: "exp-poly".into() }
    }

    pub fn series(s: Series, disc: Disc) -> Result<Self> {
        if s.radius_of_convergence() < disc.radius() {
            return Err(Error::InvalidArgument(format!(
                "series radius {} is smaller than the disc radius {}",
                s.radius_of_convergence(),
                disc.radius()
            )));
        }
        let df = s.derivative();
        Ok(HoloMap { disc, body: Arc::new(Body::Series { f: s, df }), name: "series".into() })
    }

    /// Modular λ on Δ(1) through the Cayley map.
    pub fn lambda() -> Self {
        HoloMap { disc: Disc::unit(), body: Arc::new(Body::Lambda { derivative: false }), name: "lambda".into() }
    }

    pub fn torus_lift(lattice: Lattice, scale: C) -> Self {
        HoloMap {
            disc: Disc::plane(),
            body: Arc::new(Body::TorusLift { lattice, scale }),
            name: "torus-proj".into(),
        }
    }

    pub fn from_fn(disc: Disc, name: &str, f: impl Fn(C) -> Result<C> + Send + Sync + 'static) -> Self {
        HoloMap { disc, body: Arc::new(Body::Closure(Arc::new(f))), name: name.into() }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    /// The same map restricted to a smaller disc.
    pub fn restricted(mut self, disc: Disc) -> Self {
        self.disc = disc;
        self
    }

    pub fn disc(&self) -> Disc {
        self.disc
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn as_exp_poly(&self) -> Option<ExpPoly> {
        match &*self.body {
            Body::ExpPoly { f, .. } => Some(f.clone()),
            Body::Rational { num, den, .. } if den.is_constant() => {
                let inv = crate::exact::gq_one() / den.leading()?.clone();
                Some(ExpPoly::from_poly(num.scale(&inv)))
            }
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<(&Poly, &Poly)> {
        match &*self.body {
            Body::Rational { num, den, .. } => Some((num, den)),
            _ => None,
        }
    }

    /// True when the map has no poles in its disc.
    pub fn is_holomorphic(&self) -> bool {
        match &*self.body {
            Body::Rational { den, .. } => den.is_constant(),
            _ => true,
        }
    }

    /// Values the map provably never takes: ∞ for holomorphic maps, 0 for
    /// c·e^{λz}, and 0, 1, ∞ for the modular λ.
    pub fn omits_value(&self, a: &Target) -> bool {
        let zero = C::new(0.0, 0.0);
        match (&*self.body, a) {
            (_, Target::Infinity) if self.is_holomorphic() && !matches!(&*self.body, Body::TorusLift { .. }) => true,
            (Body::Lambda { derivative: false }, Target::Finite(c)) => *c == zero || *c == C::new(1.0, 0.0),
            (Body::ExpPoly { f, .. }, Target::Finite(c)) if *c == zero => is_single_exponential(f),
            _ => false,
        }
    }

    /// True when the derivative provably never vanishes (for rational maps:
    /// the Wronskian of the reduced representation is a nonzero constant).
    pub fn is_unramified(&self) -> bool {
        match &*self.body {
            Body::Lambda { derivative: false } => true,
            Body::ExpPoly { f, .. } => is_single_exponential(f),
            Body::TorusLift { scale, .. } => scale.norm() > 0.0,
            Body::Rational { wr, .. } => wr.is_constant() && !wr.is_zero(),
            _ => false,
        }
    }

    pub fn eval(&self, z: C) -> Result<C> {
        self.disc.check(z)?;
        match &*self.body {
            Body::Rational { num, den, .. } => {
                let d = eval_poly(den, z);
                let v = eval_poly(num, z) / d;
                if d.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
                    Err(Error::Pole { z })
                } else {
                    Ok(v)
                }
            }
            Body::ExpPoly { f, .. } => Ok(eval_exppoly(f, z, 0.0)),
            Body::Series { f, .. } => f.eval(z),
            Body::Lambda { derivative } => {
                let l = special::lambda_disc_lift(z)?;
                Ok(if *derivative { l.derivative() } else { l.lambda() }.to_c())
            }
            Body::TorusLift { scale, .. } => Ok(scale * z),
            Body::Derivative { base, order } => cauchy_derivative(base, z, *order),
            Body::Closure(f) => f(z),
        }
    }

    /// Value in P¹ from the reduced representation (den, num) for rational
    /// bodies and (1, f) otherwise. Poles give w₀ = 0.
    pub fn eval_projective(&self, z: C) -> Result<ProjPoint> {
        self.disc.check(z)?;
        let one = C::new(1.0, 0.0);
        match &*self.body {
            Body::Rational { num, den, .. } => Ok(ProjPoint::new(eval_poly(den, z), eval_poly(num, z))),
            Body::ExpPoly { f, .. } => {
                let s = f.log_scale(z).max(0.0);
                Ok(ProjPoint { w0: C::new((-s).exp(), 0.0), w1: eval_exppoly(f, z, s), log_scale: s })
            }
            Body::Lambda { derivative: false } => {
                // the lift (1, λ), rescaled when |λ| is large
                let (w0, w1, log_scale) = special::lambda_disc_lift(z)?.affine_lift();
                Ok(ProjPoint { w0, w1, log_scale })
            }
            _ => Ok(ProjPoint::new(one, self.eval(z)?)),
        }
    }

    /// log of the chordal distance from f(z) to a.
    pub fn log_chordal(&self, z: C, a: &Target) -> Result<f64> {
        match &*self.body {
            Body::Lambda { derivative: false } => {
                self.disc.check(z)?;
                Ok(special::lambda_disc_lift(z)?.log_chordal(a))
            }
            _ => Ok(self.eval_projective(z)?.chordal(a).ln()),
        }
    }

    /// Pullback of the Fubini–Study form: |W(f₀,f₁)|²/‖(f₀,f₁)‖⁴, the
    /// coefficient of (√−1/2π)dz∧dz̄.
    pub fn fs_density(&self, z: C) -> Result<f64> {
        self.disc.check(z)?;
        let (w0, w1, wr) = match &*self.body {
            Body::Rational { num, den, wr } => (eval_poly(den, z), eval_poly(num, z), eval_poly(wr, z)),
            Body::ExpPoly { f, df } => {
                let s = f.log_scale(z).max(0.0);
                let e = (-s).exp();
                (C::new(e, 0.0), eval_exppoly(f, z, s), eval_exppoly(df, z, s) * e)
            }
            Body::Lambda { derivative: false } => return Ok(special::lambda_disc_lift(z)?.fs_density()),
            Body::Series { f, df } => (C::new(1.0, 0.0), f.eval(z)?, df.eval(z)?),
            _ => (C::new(1.0, 0.0), self.eval(z)?, cauchy_derivative(self, z, 1)?),
        };
        let n2 = w0.norm_sqr() + w1.norm_sqr();
        Ok(wr.norm_sqr() / (n2 * n2))
    }

    /// order-th derivative. Exact for rational, exponential-polynomial and
    /// series bodies; λ′ in closed form; numeric otherwise.
    pub fn derivative(&self, order: usize) -> Result<HoloMap> {
        if order == 0 {
            return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
        }
        let mut m = self.clone();
        for _ in 0..order {
            m = m.derivative_once();
        }
        m.name = format!("{}^({order})", self.name).into();
        Ok(m)
    }

    fn derivative_once(&self) -> HoloMap {
        let body = match &*self.body {
            Body::Rational { den, wr, .. } => {
                let dnum = wr.clone();
                let dden = den.mul(den);
                return HoloMap::rational(dnum, dden, self.disc).expect("nonzero denominator").with_name(&self.name);
            }
            Body::ExpPoly { df, .. } => {
                return HoloMap::exp_poly(df.clone(), self.disc).with_name(&self.name);
            }
            Body::Series { df, .. } => Body::Series { f: df.clone(), df: df.derivative() },
            Body::Lambda { derivative: false } => Body::Lambda { derivative: true },
            Body::TorusLift { scale, .. } => {
                let c = Poly::constant(gq_from_c64(*scale));
                return HoloMap::exp_poly(ExpPoly::from_poly(c), self.disc).with_name(&self.name);
            }
            Body::Derivative { base, order } => Body::Derivative { base: base.clone(), order: order + 1 },
            Body::Lambda { derivative: true } => Body::Derivative { base: HoloMap::lambda().restricted(self.disc), order: 2 },
            Body::Closure(_) => Body::Derivative { base: self.clone(), order: 1 },
        };
        HoloMap { disc: self.disc, body: Arc::new(body), name: self.name.clone() }
    }

    /// A holomorphic function whose zeros are the solutions of f = a with
    /// multiplicity: num − a·den for rational bodies, f − a otherwise, and the
    /// denominator for a = ∞.
    pub fn preimage_rep(&self, a: &Target) -> HoloMap {
        let name = format!("{}-({a})", self.name);
        match (&*self.body, a) {
            (Body::Rational { num, den, .. }, Target::Finite(c)) => {
                HoloMap::polynomial(num.sub(&den.scale(&gq_from_c64(*c)))).restricted(self.disc).with_name(&name)
            }
            (Body::Rational { den, .. }, Target::Infinity) => HoloMap::polynomial(den.clone()).restricted(self.disc).with_name(&name),
            (_, Target::Infinity) => HoloMap::polynomial(Poly::one()).restricted(self.disc).with_name(&name),
            (Body::ExpPoly { f, .. }, Target::Finite(c)) => {
                let shifted = f.sub(&ExpPoly::from_poly(Poly::constant(gq_from_c64(*c))));
                HoloMap::exp_poly(shifted, self.disc).with_name(&name)
            }
            (_, Target::Finite(c)) => {
                let base = self.clone();
                let c = *c;
                HoloMap::from_fn(self.disc, &name, move |z| Ok(base.eval(z)? - c))
            }
        }
    }

    /// W(f₀, f₁) of the reduced representation, as a holomorphic map.
    pub fn wronskian_rep(&self) -> HoloMap {
        let name = format!("W({})", self.name);
        match &*self.body {
            Body::Rational { wr, .. } => HoloMap::polynomial(wr.clone()).restricted(self.disc).with_name(&name),
            Body::ExpPoly { df, .. } => HoloMap::exp_poly(df.clone(), self.disc).with_name(&name),
            _ => self.derivative(1).expect("order 1").with_name(&name),
        }
    }

    /// Initial number of angular panels for circle averages at radius r.
    pub fn panels(&self, r: f64) -> usize {
        let n = match &*self.body {
            Body::ExpPoly { f, .. } => {
                let (lam, deg) = f.complexity();
                2.0 * (lam * r + deg as f64) + 8.0
            }
            Body::Rational { num, den, .. } => {
                (num.degree().unwrap_or(0) + den.degree().unwrap_or(0)) as f64 * 2.0 + 8.0
            }
            Body::Lambda { .. } => 8.0 + 4.0 / (1.0 - r).max(1e-6),
            Body::Series { .. } => 8.0 + 2.0 * r,
            Body::Derivative { base, .. } => return base.panels(r),
            _ => 16.0,
        };
        (n.ceil() as usize).clamp(8, 4096)
    }
}

/// c·e^{λz} with c ≠ 0 and λ ≠ 0.
fn is_single_exponential(f: &ExpPoly) -> bool {
    matches!(f.terms(), [(l, p)] if !crate::exact::gq_is_zero(l) && p.is_constant() && !p.is_zero())
}

pub(crate) fn eval_poly(p: &Poly, z: C) -> C {
    match precision() {
        Precision::Double => p.eval(z),
        Precision::Extended => p.eval_compensated(z),
    }
}

pub(crate) fn eval_exppoly(f: &ExpPoly, z: C, shift: f64) -> C {
    match precision() {
        Precision::Double => f.eval_scaled(z, shift),
        Precision::Extended => f.eval_scaled_compensated(z, shift),
    }
}

/// f^{(k)}(z) = k!/ρᵏ · mean_j f(z + ρωʲ)ω^{−jk} on a circle of radius
/// ρ = ¼·min(1, distance to the boundary).
fn cauchy_derivative(f: &HoloMap, z: C, order: usize) -> Result<C> {
    let dist = f.disc.radius() - z.norm();
    let rho = 0.25 * dist.min(1.0);
    let n = CAUCHY_POINTS;
    let mut s = C::new(0.0, 0.0);
    for j in 0..n {
        let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
        s += f.eval(z + w * rho)? * w.powi(-(order as i32));
    }
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    Ok(s * (fact / (n as f64 * rho.powi(order as i32))))
}

/// Target geometry carrying the positive (1,1)-form ω.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetGeometry {
    P1FubiniStudy,
    PnFubiniStudy(usize),
    /// Flat form on ℂ/Λ scaled to total mass one.
    TorusFlat(Lattice),
    /// ω_P = (2/(1−|z|²)²)(√−1/2π)dz∧dz̄ pulled back to the source disc.
    PoincarePullback,
}

impl TargetGeometry {
    pub fn kind(&self) -> &'static str {
        match self {
            TargetGeometry::P1FubiniStudy => "P1-FubiniStudy",
            TargetGeometry::PnFubiniStudy(_) => "Pn-FubiniStudy",
            TargetGeometry::TorusFlat(_) => "Torus-flat",
            TargetGeometry::PoincarePullback => "Poincare-pullback",
        }
    }

    /// Factor turning Lebesgue area into ω-mass (1/area for the torus).
    pub fn volume_normalization(&self) -> f64 {
        match self {
            TargetGeometry::TorusFlat(l) => 1.0 / l.area(),
            _ => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{gq, rat};
    use num_complex::Complex;
    use proptest::prelude::*;

    fn quarter() -> Poly {
        Poly::new(vec![Complex::new(rat(-1, 4), rat(0, 1)), gq(0, 0), gq(1, 0)])
    }

    #[test]
    fn eval_examples() {
        let (exp, _) = gallery("exp", &GalleryParams::default()).unwrap();
        assert_eq!(exp.eval(C::new(0.0, 0.0)).unwrap(), C::new(1.0, 0.0));
        let p = HoloMap::polynomial(quarter());
        assert!((p.eval(C::new(1.0, 0.0)).unwrap() - 0.75).norm() < 1e-15);
        let l = HoloMap::lambda();
        assert!((l.eval(C::new(0.0, 0.0)).unwrap() - 0.5).norm() < 1e-14);
        assert!(matches!(l.eval(C::new(1.0, 0.0)), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn derivative_examples() {
        let z2 = HoloMap::polynomial(Poly::new(vec![gq(0, 0), gq(0, 0), gq(1, 0)]));
        assert!((z2.derivative(1).unwrap().eval(C::new(1.0, 0.0)).unwrap() - 2.0).norm() < 1e-15);
        let (exp, _) = gallery("exp", &GalleryParams::default()).unwrap();
        assert!((exp.derivative(2).unwrap().eval(C::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let (inv, _) = gallery("inv-one-minus-z", &GalleryParams::default()).unwrap();
        assert!((inv.derivative(1).unwrap().eval(C::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn poles_are_projective() {
        let (inv, _) = gallery("inv-one-minus-z", &GalleryParams::default()).unwrap();
        let inv = inv.restricted(Disc::plane());
        assert!(matches!(inv.eval(C::new(1.0, 0.0)), Err(Error::Pole { .. })));
        let p = inv.eval_projective(C::new(1.0, 0.0)).unwrap();
        assert_eq!(p.chordal(&Target::Infinity), 0.0);
    }

    #[test]
    fn shared_factor_cancels_exactly() {
        let a = gq(1, 1) * rat(1, 3);
        let num = Poly::from_roots(&[a.clone(), gq(2, 0)]);
        let den = Poly::from_roots(&[a, gq(0, -3)]);
        let f = HoloMap::rational(num, den, Disc::plane()).unwrap();
        let (n, d) = f.as_rational().unwrap();
        assert_eq!(n.degree(), Some(1));
        assert_eq!(d.degree(), Some(1));
    }

    #[test]
    fn lambda_derivative_matches_lift() {
        let l = HoloMap::lambda();
        let d1 = l.derivative(1).unwrap();
        let d2 = l.derivative(2).unwrap();
        let z = C::new(0.3, -0.2);
        let h = 1e-5;
        let fd = (d1.eval(z + h).unwrap() - d1.eval(z - h).unwrap()) / (2.0 * h);
        assert!((fd - d2.eval(z).unwrap()).norm() < 1e-6 * fd.norm().max(1.0));
    }

    #[test]
    fn fs_density_of_identity() {
        let z = HoloMap::polynomial(Poly::identity());
        for w in [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.3, 2.0)] {
            let expected = 1.0 / (1.0 + w.norm_sqr()).powi(2);
            assert!((z.fs_density(w).unwrap() - expected).abs() < 1e-15);
        }
    }

    fn derivative_agrees_with_difference(f: &HoloMap, z: C) {
        let d = f.derivative(1).unwrap().eval(z).unwrap();
        let h = 1e-5 * z.norm().max(1.0);
        let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
        assert!((d - fd).norm() <= 1e-6 * d.norm().max(fd.norm()).max(1e-3), "{}: {d} vs {fd} at {z}", f.name());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn derivatives_match_central_differences(re in -0.85f64..0.85, im in -0.85f64..0.85) {
            let z = C::new(re, im) * (0.85 / C::new(re, im).norm().max(0.85));
            let p = GalleryParams::default();
            for name in ["exp", "z", "mobius-half", "lambda", "inv-one-minus-z", "exp-series"] {
                let (f, _) = gallery(name, &p).unwrap();
                derivative_agrees_with_difference(&f, z);
            }
            let wide = z * 4.0;
            for name in ["exp", "exp-series"] {
                let (f, _) = gallery(name, &p).unwrap();
                derivative_agrees_with_difference(&f, wide);
            }
        }

        #[test]
        fn reduced_and_unreduced_rationals_agree(re in -3.0f64..3.0, im in -3.0f64..3.0, ar in -2i64..3, ai in -2i64..3) {
            let a = gq(ar, ai);
            let base_num = Poly::from_roots(&[gq(1, 0), gq(0, 2)]);
            let base_den = Poly::from_roots(&[gq(-3, 0)]);
            let f = HoloMap::rational(base_num.clone(), base_den.clone(), Disc::plane()).unwrap();
            let shared = Poly::from_roots(&[a]);
            let g = HoloMap::rational(base_num.mul(&shared), base_den.mul(&shared), Disc::plane()).unwrap();
            let z = C::new(re, im);
            if let (Ok(u), Ok(v)) = (f.eval(z), g.eval(z)) {
                prop_assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0));
            }
        }
    }

    #[test]
    fn lambda_omits_three_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let l = HoloMap::lambda();
        for _ in 0..10_000 {
            let r: f64 = rng.gen::<f64>().sqrt() * 0.9995;
            let t: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let p = l.eval_projective(C::from_polar(r, t)).unwrap();
            assert!(p.chordal(&Target::Finite(C::new(0.0, 0.0))) > 0.0);
            assert!(p.chordal(&Target::Finite(C::new(1.0, 0.0))) > 0.0);
            assert!(p.chordal(&Target::Infinity) > 0.0);
        }
    }
}
