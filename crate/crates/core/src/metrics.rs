//! Spectral similarity metrics.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Norms below this are treated as zero by [`cosine_distance`].
pub const ZERO_NORM: f64 = 1e-12;

fn check_lengths(p: &[f64], t: &[f64]) -> Result<()> {
    if p.len() != t.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: t.len(),
        });
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `1 - p·t / (|p| |t|)`. Returns `1.0` if either norm is (numerically) zero.
pub fn cosine_distance(p: &[f64], t: &[f64]) -> Result<f64> {
    check_lengths(p, t)?;
    let (np, nt) = (norm(p), norm(t));
    if np < ZERO_NORM || nt < ZERO_NORM {
        return Ok(1.0);
    }
    Ok(1.0 - dot(p, t) / (np * nt))
}

/// Cosine distance and its gradient with respect to `p`.
pub(crate) fn cosine_distance_grad(p: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let (np, nt) = (norm(p), norm(t));
    if np < ZERO_NORM || nt < ZERO_NORM {
        return (1.0, vec![0.0; p.len()]);
    }
    let pt = dot(p, t);
    let inv = 1.0 / (np * nt);
    let grad = p
        .iter()
        .zip(t)
        .map(|(pi, ti)| -(ti * inv - pt * pi * inv / (np * np)))
        .collect();
    (1.0 - pt * inv, grad)
}

/// Cached FFT plan for one signal length.
#[derive(Clone)]
pub struct FourierPlan {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("len", &self.len).finish()
    }
}

impl FourierPlan {
    pub fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        Self { len, fft }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of one-sided bins, `0 ..= len / 2`.
    pub fn n_bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// One-sided DFT coefficients of a real signal.
    pub fn transform(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.len, "signal length does not match plan");
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        buf.truncate(self.n_bins());
        buf
    }

    pub fn magnitude(&self, x: &[f64]) -> Vec<f64> {
        self.transform(x).iter().map(|c| c.norm()).collect()
    }

    /// Pulls a gradient with respect to the one-sided magnitudes back onto
    /// the real input: `g_n = Σ_k c_k Re(conj(F_k) e^{-2πikn/L}) / |F_k|`.
    /// Bins with `|F_k| < ZERO_NORM` contribute nothing.
    pub fn magnitude_pullback(&self, coeffs: &[Complex64], d_mag: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (k, (c, g)) in coeffs.iter().zip(d_mag).enumerate() {
            let m = c.norm();
            if m >= ZERO_NORM {
                buf[k] = c.conj() * (g / m);
            }
        }
        self.fft.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

/// One-sided DFT magnitudes of a real sequence, DC bin included.
pub fn fft_magnitude(p: &[f64]) -> Vec<f64> {
    FourierPlan::new(p.len()).magnitude(p)
}

/// Cosine distance between the DFT magnitudes of `p` and `t`.
pub fn fourier_cosine_distance(p: &[f64], t: &[f64]) -> Result<f64> {
    check_lengths(p, t)?;
    let plan = FourierPlan::new(p.len());
    cosine_distance(&plan.magnitude(p), &plan.magnitude(t))
}

/// Mean absolute deviation per bin.
pub fn mae(p: &[f64], t: &[f64]) -> Result<f64> {
    check_lengths(p, t)?;
    if p.is_empty() {
        return Err(Error::Empty("mae of empty sequences".into()));
    }
    Ok(p.iter().zip(t).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Textbook O(L²) DFT magnitude, one-sided.
    fn naive_dft_magnitude(x: &[f64]) -> Vec<f64> {
        let l = x.len();
        (0..=l / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (n, v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * n) as f64 / l as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn cosine_examples() {
        let p = [0.3, 1.2, -0.5, 2.0];
        assert_abs_diff_eq!(cosine_distance(&p, &p).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            cosine_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap(),
            1.0 - 1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            cosine_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap(),
            0.29289,
            epsilon = 1e-5
        );
    }

    #[test]
    fn cosine_zero_norm_and_mismatch() {
        assert_eq!(cosine_distance(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0; 4], &[0.0; 4]).unwrap(), 1.0);
        assert!(matches!(
            cosine_distance(&[1.0; 3], &[1.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fft_magnitude_constant() {
        let m = fft_magnitude(&[1.5; 16]);
        assert_eq!(m.len(), 9);
        assert_abs_diff_eq!(m[0], 24.0, epsilon = 1e-12);
        for v in &m[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fft_magnitude_pure_cosine() {
        let l = 32;
        let k0 = 5;
        let x: Vec<f64> = (0..l)
            .map(|n| (2.0 * PI * (k0 * n) as f64 / l as f64).cos())
            .collect();
        let m = fft_magnitude(&x);
        for (k, v) in m.iter().enumerate() {
            let expected = if k == k0 { l as f64 / 2.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-10);
        }
        let naive = naive_dft_magnitude(&x);
        for (a, b) in m.iter().zip(&naive) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn fourier_cosine_examples() {
        let p: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 + 0.5).collect();
        assert_abs_diff_eq!(fourier_cosine_distance(&p, &p).unwrap(), 0.0, epsilon = 1e-12);
        let mut shifted = p.clone();
        shifted.rotate_right(3);
        assert_abs_diff_eq!(
            fourier_cosine_distance(&p, &shifted).unwrap(),
            0.0,
            epsilon = 1e-9
        );

        // Impulse: flat magnitude 1 over 9 bins. Constant c: c·16 at DC only.
        // cos = (1 · 16c) / (3 · 16c) = 1/3.
        let mut impulse = vec![0.0; 16];
        impulse[4] = 1.0;
        let expected = cosine_distance(
            &naive_dft_magnitude(&impulse),
            &naive_dft_magnitude(&[0.7; 16]),
        )
        .unwrap();
        assert_abs_diff_eq!(expected, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            fourier_cosine_distance(&impulse, &[0.7; 16]).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mae_examples() {
        let p = [0.5, -1.0, 3.0];
        assert_eq!(mae(&p, &p).unwrap(), 0.0);
        let q: Vec<f64> = p.iter().map(|v| v + 1.0).collect();
        assert_abs_diff_eq!(mae(&q, &p).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(mae(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pullback_matches_finite_differences() {
        let x: Vec<f64> = (0..20).map(|i| (0.37 * i as f64).sin() + 0.1 * i as f64).collect();
        let plan = FourierPlan::new(20);
        let weights: Vec<f64> = (0..plan.n_bins()).map(|k| 0.3 + 0.1 * k as f64).collect();
        let objective = |x: &[f64]| -> f64 {
            plan.magnitude(x).iter().zip(&weights).map(|(m, w)| m * w).sum()
        };
        let grad = plan.magnitude_pullback(&plan.transform(&x), &weights);
        let h = 1e-6;
        for n in 0..20 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[n] += h;
            xm[n] -= h;
            let fd = (objective(&xp) - objective(&xm)) / (2.0 * h);
            assert_abs_diff_eq!(grad[n], fd, epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            p in prop::collection::vec(-5.0f64..5.0, 12),
            t in prop::collection::vec(-5.0f64..5.0, 12),
            c in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&p) > 1e-3 && norm(&t) > 1e-3);
            let d = cosine_distance(&p, &t).unwrap();
            prop_assert!((d - cosine_distance(&t, &p).unwrap()).abs() < 1e-14);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
            let scaled: Vec<f64> = p.iter().map(|v| v * c).collect();
            prop_assert!(cosine_distance(&p, &scaled).unwrap().abs() < 1e-12);
            prop_assert!((cosine_distance(&scaled, &t).unwrap() - d).abs() < 1e-12);
        }

        #[test]
        fn fft_magnitude_shift_invariant(
            x in prop::collection::vec(-10.0f64..10.0, 8..64),
            shift in 0usize..64,
        ) {
            let mut y = x.clone();
            y.rotate_left(shift % x.len());
            for (a, b) in fft_magnitude(&x).iter().zip(fft_magnitude(&y)) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn fft_matches_naive_dft(x in prop::collection::vec(-3.0f64..3.0, 8..40)) {
            for (a, b) in fft_magnitude(&x).iter().zip(naive_dft_magnitude(&x)) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
