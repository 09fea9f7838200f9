use rand::Rng;
use rand_distr::Exp1;

use crate::scalar::Scalar;

/// Rayleigh power-fading coefficients, one per transmitter→receiver link.
///
/// Coefficients are unit-mean exponential draws, i.i.d. across links and
/// across samples. Stored row-major as `[tx * n + rx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization<T> {
    n: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> FadingRealization<T> {
    /// All coefficients equal to one: the frozen-fading regime.
    pub fn unit(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![T::one(); n * n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut f = Self::unit(n);
        f.resample_all(rng);
        f
    }

    pub fn from_coefficients(n: usize, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), n * n, "fading matrix must be n x n");
        Self { n, coeffs }
    }

    pub fn num_ues(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, tx: usize, rx: usize) -> T {
        self.coeffs[tx * self.n + rx]
    }

    pub fn set(&mut self, tx: usize, rx: usize, value: T) {
        self.coeffs[tx * self.n + rx] = value;
    }

    pub fn resample_all<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for c in &mut self.coeffs {
            *c = draw(rng);
        }
    }

    /// Redraws only the links among `ues` (tx-major order); other entries keep
    /// their previous values. Utility evaluation only reads these links.
    #[inline]
    pub fn resample_links<R: Rng + ?Sized>(&mut self, ues: &[usize], rng: &mut R) {
        for &tx in ues {
            let row = tx * self.n;
            for &rx in ues {
                self.coeffs[row + rx] = draw(rng);
            }
        }
    }
}

#[inline]
fn draw<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(Exp1);
    // Exp1 can return exactly 0 with negligible probability; keep coefficients positive.
    T::lit(x.max(f64::MIN_POSITIVE))
}
