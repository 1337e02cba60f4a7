use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::sync::Arc;

type CoeffFn = Arc<dyn Fn(usize) -> C + Send + Sync>;
type BoundFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

const MAX_TERMS: usize = 200_000;

/// Power series Σ aₙzⁿ with a majorant bₙ ≥ |aₙ| whose ratio bₙ₊₁/bₙ is
/// nonincreasing, so that the tail after n terms is at most
/// bₙ|z|ⁿ/(1 − bₙ₊₁|z|/bₙ).
#[derive(Clone)]
pub struct Series {
    coeff: CoeffFn,
    bound: BoundFn,
    radius: f64,
}

impl std::fmt::Debug for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Series").field("radius", &self.radius).finish_non_exhaustive()
    }
}

impl Series {
    pub fn new(
        coeff: impl Fn(usize) -> C + Send + Sync + 'static,
        bound: impl Fn(usize) -> f64 + Send + Sync + 'static,
        radius: f64,
    ) -> Self {
        Series { coeff: Arc::new(coeff), bound: Arc::new(bound), radius }
    }

    pub fn radius_of_convergence(&self) -> f64 {
        self.radius
    }

    pub fn coefficient(&self, n: usize) -> C {
        (self.coeff)(n)
    }

    pub fn derivative(&self) -> Series {
        let c = self.coeff.clone();
        let b = self.bound.clone();
        Series {
            coeff: Arc::new(move |n| c(n + 1) * (n + 1) as f64),
            bound: Arc::new(move |n| b(n + 1) * (n + 1) as f64),
            radius: self.radius,
        }
    }

    /// Sums until the certified tail drops below 1e−16 relative, and refuses
    /// when cancellation would cost more than six digits.
    pub fn eval(&self, z: C) -> Result<C> {
        let x = z.norm();
        let mut s = C::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut zn = C::new(1.0, 0.0);
        let mut xn = 1.0;
        for n in 0..MAX_TERMS {
            let t = (self.coeff)(n) * zn;
            s += t;
            abs_sum += t.norm();
            zn *= z;
            xn *= x;
            let b1 = (self.bound)(n + 1);
            let b2 = (self.bound)(n + 2);
            if b1 == 0.0 {
                if (n + 1..n + 8).all(|m| (self.bound)(m) == 0.0) {
                    return self.finish(s, abs_sum, n);
                }
                continue;
            }
            let ratio = b2 * x / b1;
            if ratio < 1.0 {
                let tail = b1 * xn / (1.0 - ratio);
                if tail <= 1e-16 * s.norm().max(1e-300) || tail == 0.0 {
                    return self.finish(s, abs_sum, n);
                }
            }
        }
        Err(Error::PrecisionFailure { terms: MAX_TERMS })
    }

    fn finish(&self, s: C, abs_sum: f64, n: usize) -> Result<C> {
        if abs_sum * 1e-16 > 1e-10 * s.norm() && abs_sum > 0.0 {
            return Err(Error::PrecisionFailure { terms: n + 1 });
        }
        Ok(s)
    }
}
