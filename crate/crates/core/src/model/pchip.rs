//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidConfig(
                "interpolation needs at least two (x, y) pairs of equal length".into(),
            ));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("interpolation nodes must be finite".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (a, b) = (delta[k - 1], delta[k]);
                if a * b > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn first(&self) -> f64 {
        self.xs[0]
    }

    pub fn last(&self) -> f64 {
        *self.xs.last().expect("non-empty")
    }

    /// Segment index containing `x` (clamped to the table).
    pub fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Interpolated value; outside the nodes the end values are held constant.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.last() {
            return *self.ys.last().expect("non-empty");
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.0), 2.0);
        assert!((p.eval(2.0) - 3.0).abs() < 1e-15);
        let two = Pchip::new(vec![1.0, 2.0], vec![5.0, 7.0]).unwrap();
        assert!((two.eval(1.25) - 5.5).abs() < 1e-15);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let xs = vec![0.0, 0.1, 0.5, 0.6, 2.0, 2.1];
        let ys = vec![0.0, 0.0, 1.0, 1.0, 5.0, 5.01];
        let p = Pchip::new(xs, ys).unwrap();
        let mut prev = p.eval(0.0);
        for i in 1..=2100 {
            let v = p.eval(i as f64 * 1e-3);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn nonnegative_data_stays_nonnegative() {
        let p = Pchip::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 3.0, 0.0, 2.0]).unwrap();
        for i in 0..=300 {
            assert!(p.eval(i as f64 * 0.01) >= 0.0);
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Pchip::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }
}
