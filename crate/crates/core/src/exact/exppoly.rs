use super::{gq_is_zero, gq_to_c64, gq_zero, Gq, Poly};
use num_complex::Complex64;

/// A finite sum Σ_j p_j(z)·exp(λ_j z) with exact polynomial parts and exact
/// exponents. Closed under addition, multiplication and differentiation, which
/// is what the Wronskian and associated-curve minors need.
#[derive(Clone, Debug)]
pub struct ExpPoly {
    terms: Vec<(Gq, Poly)>,
    approx: Vec<(Complex64, Poly)>,
}

impl PartialEq for ExpPoly {
    fn eq(&self, other: &Self) -> bool {
        // terms are kept sorted by a canonical key, so structural equality works
        self.terms == other.terms
    }
}

fn exponent_key(l: &Gq) -> (f64, f64) {
    let c = gq_to_c64(l);
    (c.re, c.im)
}

impl ExpPoly {
    pub fn new(terms: Vec<(Gq, Poly)>) -> Self {
        let mut merged: Vec<(Gq, Poly)> = Vec::new();
        for (l, p) in terms {
            if p.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|(m, _)| *m == l) {
                Some((_, q)) => *q = q.add(&p),
                None => merged.push((l, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        merged.sort_by(|a, b| {
            exponent_key(&a.0)
                .partial_cmp(&exponent_key(&b.0))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let approx = merged
            .iter()
            .map(|(l, p)| (gq_to_c64(l), p.clone()))
            .collect();
        ExpPoly { terms: merged, approx }
    }

    pub fn zero() -> Self {
        ExpPoly::new(Vec::new())
    }

    pub fn from_poly(p: Poly) -> Self {
        ExpPoly::new(vec![(gq_zero(), p)])
    }

    /// c·exp(λz).
    pub fn exp_term(coeff: Gq, lambda: Gq) -> Self {
        ExpPoly::new(vec![(lambda, Poly::constant(coeff))])
    }

    pub fn terms(&self) -> &[(Gq, Poly)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The polynomial part when there is no exponential factor.
    pub fn as_poly(&self) -> Option<Poly> {
        match self.terms.as_slice() {
            [] => Some(Poly::zero()),
            [(l, p)] if gq_is_zero(l) => Some(p.clone()),
            _ => None,
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        ExpPoly::new(self.terms.iter().chain(other.terms.iter()).cloned().collect())
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly::new(self.terms.iter().map(|(l, p)| (l.clone(), p.neg())).collect())
    }

    pub fn scale(&self, c: &Gq) -> ExpPoly {
        ExpPoly::new(self.terms.iter().map(|(l, p)| (l.clone(), p.scale(c))).collect())
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (l1, p1) in &self.terms {
            for (l2, p2) in &other.terms {
                out.push((l1 + l2, p1.mul(p2)));
            }
        }
        ExpPoly::new(out)
    }

    /// d/dz [p e^{λz}] = (p' + λp) e^{λz}.
    pub fn derivative(&self) -> ExpPoly {
        ExpPoly::new(
            self.terms
                .iter()
                .map(|(l, p)| (l.clone(), p.derivative().add(&p.scale(l))))
                .collect(),
        )
    }

    /// max_j Re(λ_j z); the natural log-scale of the value at z.
    pub fn log_scale(&self, z: Complex64) -> f64 {
        self.approx
            .iter()
            .map(|(l, _)| (l * z).re)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(-700.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_scaled(z, 0.0)
    }

    /// Value times e^{−shift}, computed without forming the unscaled value.
    pub fn eval_scaled(&self, z: Complex64, shift: f64) -> Complex64 {
        self.approx
            .iter()
            .map(|(l, p)| p.eval(z) * (l * z - shift).exp())
            .sum()
    }

    pub fn eval_scaled_compensated(&self, z: Complex64, shift: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        let mut c = Complex64::new(0.0, 0.0);
        for (l, p) in &self.approx {
            let term = p.eval_compensated(z) * (l * z - shift).exp();
            // Neumaier summation per component
            let t = s + term;
            let corr = |s: f64, x: f64, t: f64| {
                if s.abs() >= x.abs() {
                    (s - t) + x
                } else {
                    (x - t) + s
                }
            };
            c += Complex64::new(corr(s.re, term.re, t.re), corr(s.im, term.im, t.im));
            s = t;
        }
        s + c
    }

    /// Largest |λ_j| and largest polynomial degree; used to size angular panels.
    pub fn complexity(&self) -> (f64, usize) {
        let lam = self
            .approx
            .iter()
            .map(|(l, _)| l.norm())
            .fold(0.0, f64::max);
        let deg = self
            .terms
            .iter()
            .filter_map(|(_, p)| p.degree())
            .max()
            .unwrap_or(0);
        (lam, deg)
    }
}

#[cfg(test)]
mod tests {
    use super::super::gq;
    use super::*;

    #[test]
    fn derivative_of_z_exp_z() {
        // (z e^{2z})' = (1 + 2z) e^{2z}
        let f = ExpPoly::new(vec![(gq(2, 0), Poly::identity())]);
        let d = f.derivative();
        let z = Complex64::new(0.4, -0.3);
        let expected = (1.0 + 2.0 * z) * (2.0 * z).exp();
        assert!((d.eval(z) - expected).norm() < 1e-13);
    }

    #[test]
    fn products_merge_exponents() {
        let e1 = ExpPoly::exp_term(gq(1, 0), gq(1, 0));
        let e2 = ExpPoly::exp_term(gq(1, 0), gq(-1, 0));
        let prod = e1.mul(&e2);
        assert_eq!(prod.as_poly(), Some(Poly::one()));
        assert!(e1.sub(&e1).is_zero());
    }

    #[test]
    fn scaled_evaluation_avoids_overflow() {
        let f = ExpPoly::exp_term(gq(1, 0), gq(3, 0));
        let z = Complex64::new(300.0, 0.0);
        let shift = f.log_scale(z);
        let v = f.eval_scaled(z, shift);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
