//! Free-propagation kernels shared by every solver: the heat-kernel
//! convolution for densities and the spectral free-Schrodinger step for
//! wave functions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Field, RealField};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Gaussian tail cutoff in standard deviations. erfc(8.5/sqrt(2)) ~ 2e-17,
/// so the truncated kernel loses no mass at f64 precision.
const KERNEL_CUTOFF_SIGMAS: f64 = 8.5;

/// Heat-kernel convolution: out(x) = int (2 pi dt)^{-1/2}
/// exp(-(x-y)^2 / 2 dt) f(y) dy by banded trapezoid quadrature.
///
/// Total mass over the box is preserved up to leakage past the box edge;
/// the kernel must be resolved by the grid (dx <~ sqrt(dt)).
pub fn gaussian_step(field: &RealField, dt: f64) -> Result<RealField> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("gaussian_step needs dt > 0, got {dt}")));
    }
    let grid = field.grid();
    let dx = grid.dx();
    let sigma = dt.sqrt();
    let half_band = ((KERNEL_CUTOFF_SIGMAS * sigma / dx).ceil() as usize).max(1);

    // kernel weights on the lattice offsets, trapezoid weight dx each
    let norm = dx / (2.0 * std::f64::consts::PI * dt).sqrt();
    let weights: Vec<f64> = (0..=half_band)
        .map(|k| {
            let r = k as f64 * dx;
            norm * (-r * r / (2.0 * dt)).exp()
        })
        .collect();

    let v = field.values();
    let n = v.len();
    let convolve_at = |i: usize| {
        let mut acc = weights[0] * v[i];
        let kmax = half_band.min(n - 1);
        for k in 1..=kmax {
            let w = weights[k];
            let left = if i >= k { v[i - k] } else { 0.0 };
            let right = if i + k < n { v[i + k] } else { 0.0 };
            acc += w * (left + right);
        }
        acc
    };

    #[cfg(feature = "parallel")]
    let out: Vec<f64> = (0..n).into_par_iter().map(convolve_at).collect();
    #[cfg(not(feature = "parallel"))]
    let out: Vec<f64> = (0..n).map(convolve_at).collect();

    Field::new(grid, out)
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static PLANS: OnceLock<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>> =
        OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = plans.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Free Schrodinger propagation over `dt` for the Hamiltonian -1/2 d^2/dx^2,
/// applied spectrally as the multiplier exp(-i k^2 dt / 2) on the periodic
/// extension of the box. Exactly unitary on the discrete l2 norm.
pub fn fresnel_step(field: &ComplexField, dt: f64) -> Result<ComplexField> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("fresnel_step needs dt > 0, got {dt}")));
    }
    let grid = field.grid();
    let n = grid.n_points();
    // periodic extension: the node at x_max duplicates x_min, so transform
    // the n-1 distinct samples
    let m = n - 1;
    let (fwd, inv) = fft_pair(m);

    let mut buf: Vec<Complex64> = field.values()[..m].to_vec();
    fwd.process(&mut buf);

    let box_len = m as f64 * grid.dx();
    let dk = 2.0 * std::f64::consts::PI / box_len;
    for (j, z) in buf.iter_mut().enumerate() {
        // signed wavenumber of DFT bin j
        let jj = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
        let k = jj * dk;
        let phase = -0.5 * k * k * dt;
        *z *= Complex64::from_polar(1.0, phase);
    }
    inv.process(&mut buf);

    let scale = 1.0 / m as f64;
    let mut out: Vec<Complex64> = buf.into_iter().map(|z| z * scale).collect();
    out.push(out[0]); // restore the duplicated endpoint
    Field::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, l2_norm, DomainSpec, Grid1D};
    use std::f64::consts::PI;

    fn sup_diff_real(a: &RealField, b: &RealField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_step_rejects_bad_dt() {
        let g = Grid1D::new(-1.0, 1.0, 64).unwrap();
        let f = RealField::zeros(g);
        assert!(gaussian_step(&f, 0.0).is_err());
        assert!(gaussian_step(&f, -0.1).is_err());
    }

    #[test]
    fn gaussian_step_of_spike() {
        // unit-mass spike at x=0 -> Gaussian with variance dt
        let g = Grid1D::new(-4.0, 4.0, 2049).unwrap();
        let dx = g.dx();
        let mut f = RealField::zeros(g);
        let i0 = g.node_at(0.0).unwrap();
        f.values_mut()[i0] = 1.0 / dx;
        let dt = 0.05;
        let out = gaussian_step(&f, dt).unwrap();
        let d = DomainSpec::whole_box(g);
        let mass = integrate(&out, &d).unwrap();
        assert!((mass - 1.0).abs() < 1e-12, "mass {mass}");
        let var: f64 = g
            .xs()
            .zip(out.values())
            .map(|(x, p)| x * x * p * dx)
            .sum();
        assert!((var - dt).abs() < 1e-6, "variance {var}");
    }

    #[test]
    fn gaussian_step_constant_interior() {
        let g = Grid1D::new(-10.0, 10.0, 2001).unwrap();
        let f = RealField::from_fn(g, |_| 1.5);
        let out = gaussian_step(&f, 0.04).unwrap();
        // interior nodes (> 8.5 sigma from the edges) unchanged
        let i = g.node_at(0.0).unwrap();
        for j in [i - 100, i, i + 100] {
            assert!((out.values()[j] - 1.5).abs() < 1e-13);
        }
    }

    #[test]
    fn gaussian_step_matches_gaussian_convolution() {
        // Gaussian(0, 0.5) after dt = 0.25 -> Gaussian(0, 0.75) closed form
        let g = Grid1D::new(-12.0, 12.0, 4097).unwrap();
        let s0sq = 0.5;
        let f = RealField::from_fn(g, |x| {
            (-x * x / (2.0 * s0sq)).exp() / (2.0 * PI * s0sq).sqrt()
        });
        let out = gaussian_step(&f, 0.25).unwrap();
        let s1sq = 0.75;
        let expect = RealField::from_fn(g, |x| {
            (-x * x / (2.0 * s1sq)).exp() / (2.0 * PI * s1sq).sqrt()
        });
        assert!(sup_diff_real(&out, &expect) < 1e-6);
    }

    #[test]
    fn gaussian_step_semigroup() {
        let g = Grid1D::new(-8.0, 8.0, 2049).unwrap();
        let f = RealField::from_fn(g, |x| (-x * x).exp() * (1.0 + 0.3 * (2.0 * x).cos()));
        let dt = 0.05;
        let two = gaussian_step(&gaussian_step(&f, dt).unwrap(), dt).unwrap();
        let one = gaussian_step(&f, 2.0 * dt).unwrap();
        assert!(sup_diff_real(&two, &one) < 1e-8);
    }

    #[test]
    fn fresnel_plane_wave_eigenmode() {
        // box-commensurate e^{ikx} picks up exactly e^{-i k^2 dt/2}
        let g = Grid1D::new(0.0, 2.0 * PI, 257).unwrap();
        let k = 3.0;
        let f = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, k * x));
        let dt = 0.37;
        let out = fresnel_step(&f, dt).unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * k * k * dt);
        let err: f64 = f
            .values()
            .iter()
            .zip(out.values())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn fresnel_norm_and_semigroup() {
        let g = Grid1D::new(-20.0, 20.0, 2048).unwrap();
        let f = ComplexField::from_fn(g, |x| {
            Complex64::from_polar((-x * x / 4.0).exp(), 1.3 * x)
        });
        let n0 = l2_norm(&f);
        let dt = 0.11;
        let out = fresnel_step(&f, dt).unwrap();
        assert!((l2_norm(&out) - n0).abs() < 1e-12);
        let two = fresnel_step(&fresnel_step(&f, dt).unwrap(), dt).unwrap();
        let one = fresnel_step(&f, 2.0 * dt).unwrap();
        let err: f64 = two
            .values()
            .iter()
            .zip(one.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn fresnel_gaussian_packet_spreading() {
        // |psi|^2 width: sigma^2(t) = sigma^2 + t^2 / (4 sigma^2),
        // with sigma^2 the initial |psi|^2 variance.
        let g = Grid1D::new(-40.0, 40.0, 8192).unwrap();
        let sigma = 1.0; // width of |psi|^2
        let f = ComplexField::from_fn(g, |x| {
            Complex64::new(
                (-x * x / (4.0 * sigma * sigma)).exp()
                    / (2.0 * PI * sigma * sigma).powf(0.25),
                0.0,
            )
        });
        let t = 1.0;
        let out = fresnel_step(&f, t).unwrap();
        let dx = g.dx();
        let var: f64 = g
            .xs()
            .zip(out.values())
            .map(|(x, z)| x * x * z.norm_sqr() * dx)
            .sum();
        let expect = sigma * sigma + t * t / (4.0 * sigma * sigma);
        assert!((var - expect).abs() < 1e-6, "var {var} expect {expect}");

        // closed-form complex packet comparison
        let denom = Complex64::new(1.0, t / (2.0 * sigma * sigma));
        let sup: f64 = g
            .xs()
            .zip(out.values())
            .map(|(x, z)| {
                let amp = denom.sqrt().inv() / (2.0 * PI * sigma * sigma).powf(0.25);
                let arg = Complex64::new(-x * x / (4.0 * sigma * sigma), 0.0) / denom;
                (amp * arg.exp() - z).norm()
            })
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "sup {sup}");
    }
}
