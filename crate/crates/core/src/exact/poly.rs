use super::{gq_from_c64, gq_is_zero, gq_one, gq_to_c64, gq_zero, Gq};
use num_complex::Complex64;

/// Univariate polynomial with Gaussian-rational coefficients, lowest degree first.
///
/// The zero polynomial has no coefficients. A floating copy of the
/// coefficients is kept alongside for evaluation.
#[derive(Clone, Debug)]
pub struct Poly {
    coeffs: Vec<Gq>,
    approx: Vec<Complex64>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Gq>) -> Self {
        while coeffs.last().is_some_and(gq_is_zero) {
            coeffs.pop();
        }
        let approx = coeffs.iter().map(gq_to_c64).collect();
        Poly { coeffs, approx }
    }

    pub fn zero() -> Self {
        Poly::new(Vec::new())
    }

    pub fn one() -> Self {
        Poly::constant(gq_one())
    }

    pub fn constant(c: Gq) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial z.
    pub fn identity() -> Self {
        Poly::new(vec![gq_zero(), gq_one()])
    }

    /// ∏ (z − r_j).
    pub fn from_roots(roots: &[Gq]) -> Self {
        roots.iter().fold(Poly::one(), |acc, r| {
            acc.mul(&Poly::new(vec![-r.clone(), gq_one()]))
        })
    }

    pub fn from_f64_coeffs(coeffs: &[Complex64]) -> Self {
        Poly::new(coeffs.iter().copied().map(gq_from_c64).collect())
    }

    pub fn coeffs(&self) -> &[Gq] {
        &self.coeffs
    }

    pub fn approx_coeffs(&self) -> &[Complex64] {
        &self.approx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&Gq> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Poly::new(out)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Gq) -> Poly {
        if gq_is_zero(c) {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![gq_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if gq_is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * super::gq(i as i64, 0))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d_deg = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = gq_one() / divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d_deg {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![gq_zero(); rem.len() - d_deg];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + d_deg] * &lead_inv;
            if !gq_is_zero(&c) {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = &rem[k + j] - &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(d_deg);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = gq_one() / l.clone();
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            // keep coefficient growth in check
            x = y.monic();
            y = r;
        }
        x.monic()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.approx
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Horner evaluation with compensated accumulation (error-free product
    /// and sum transforms on the real and imaginary parts).
    pub fn eval_compensated(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        let mut e = Complex64::new(0.0, 0.0);
        for c in self.approx.iter().rev() {
            let (p, pe) = two_prod_c(s, z);
            let (t, te) = two_sum_c(p, *c);
            s = t;
            e = e * z + pe + te;
        }
        s + e
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn two_sum_c(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, ere) = two_sum(a.re, b.re);
    let (im, eim) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(ere, eim))
}

fn two_prod_c(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, ere) = two_sum(p1, -p2);
    let (im, eim) = two_sum(p3, p4);
    (
        Complex64::new(re, im),
        Complex64::new(ere + e1 - e2, eim + e3 + e4),
    )
}

#[cfg(test)]
mod tests {
    use super::super::{gq, rat};
    use super::*;
    use num_complex::Complex;

    #[test]
    fn gcd_recovers_shared_factor() {
        let a = Poly::from_roots(&[gq(1, 0), gq(0, 2)]);
        let b = Poly::from_roots(&[gq(1, 0), gq(-3, 0)]);
        assert_eq!(Poly::gcd(&a, &b), Poly::from_roots(&[gq(1, 0)]));
    }

    #[test]
    fn division_identity() {
        let a = Poly::new(vec![gq(1, 0), gq(2, 1), gq(0, 0), gq(5, 0)]);
        let b = Poly::new(vec![gq(-1, 0), gq(1, 0)]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn derivative_and_eval() {
        // z^2 - 1/4
        let p = Poly::new(vec![Complex::new(rat(-1, 4), rat(0, 1)), gq(0, 0), gq(1, 0)]);
        assert!((p.eval(Complex64::new(1.0, 0.0)) - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        let d = p.derivative();
        assert!((d.eval(Complex64::new(1.0, 0.0)) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let z = Complex64::new(0.3, -0.7);
        assert!((p.eval(z) - p.eval_compensated(z)).norm() < 1e-14);
    }
}
