use crate::radio::Estimate;
use crate::scalar::Scalar;

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAccumulator<T> {
    count: usize,
    mean: T,
    m2: T,
}

impl<T: Scalar> MeanAccumulator<T> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::from_usize(self.count).unwrap();
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn sample_variance(&self) -> T {
        if self.count < 2 {
            T::zero()
        } else {
            self.m2 / T::from_usize(self.count - 1).unwrap()
        }
    }

    pub fn std_error(&self) -> T {
        if self.count == 0 {
            return T::zero();
        }
        (self.sample_variance() / T::from_usize(self.count).unwrap()).sqrt()
    }

    pub fn estimate(&self) -> Estimate<T> {
        Estimate {
            mean: self.mean,
            std_error: self.std_error(),
            samples: self.count,
        }
    }
}

/// Mean and standard error (sample std / sqrt(n)) of a slice.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let mut acc = MeanAccumulator::<f64>::new();
    for &x in xs {
        acc.push(x);
    }
    (acc.mean(), acc.std_error())
}
