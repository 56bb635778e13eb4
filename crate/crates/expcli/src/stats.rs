//! Summary statistics and fixed-bin histograms.

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    if v.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
    (m, (ss / (v.len() - 1) as f64).sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    }
}

/// Uniform bins over `[lo, hi)`; the last bin also takes `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0, "histogram needs hi > lo and bins > 0");
        Self { lo, hi, bins }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|b| self.lo + (b as f64 + 0.5) * self.width()).collect()
    }

    pub fn bin(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins - 1))
    }

    fn raw_counts(&self, values: &[f64]) -> Vec<usize> {
        let mut c = vec![0; self.bins];
        for &x in values {
            if let Some(b) = self.bin(x) {
                c[b] += 1;
            }
        }
        c
    }

    /// `(center, count, 0)` per bin.
    pub fn counts(&self, values: &[f64]) -> Vec<(f64, f64, f64)> {
        self.centers().into_iter().zip(self.raw_counts(values)).map(|(x, c)| (x, c as f64, 0.0)).collect()
    }

    /// Counts divided by `values.len() * width`, so that a sample fully
    /// inside the range integrates to one.
    pub fn density(&self, values: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (values.len().max(1) as f64 * self.width());
        self.raw_counts(values).into_iter().map(|c| c as f64 * scale).collect()
    }

    pub fn outside_fraction(&self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        values.iter().filter(|&&x| self.bin(x).is_none()).count() as f64 / values.len() as f64
    }
}
