//! Independent reference computations: direct sums, dense matrices and
//! closed forms. Nothing here calls the spectral code under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use abshift::Grid;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Direct-sum transform `phi_k = dy / sqrt(2 pi hbar) sum_j psi_j exp(-i p_k y_j / hbar)`.
pub fn dense_dft(amp: &[C], grid: &Grid) -> Vec<C> {
    let n = grid.n();
    let pref = grid.dy() / (2.0 * PI * grid.hbar()).sqrt();
    (0..n)
        .map(|k| {
            let p = grid.p(k);
            amp.iter()
                .enumerate()
                .map(|(j, a)| a * C::from_polar(1.0, -p * grid.y(j) / grid.hbar()))
                .sum::<C>()
                * pref
        })
        .collect()
}

/// Normalized Gaussian amplitude with momentum `k0` referenced to the origin.
pub fn gaussian_amp(y: f64, center: f64, sigma: f64, k0: f64, hbar: f64) -> C {
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    let d = y - center;
    C::from_polar(norm * (-d * d / (4.0 * sigma * sigma)).exp(), k0 * y / hbar)
}

pub fn gaussian_density(x: f64, mean: f64, sd: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * PI).sqrt())
}

/// Velocity density of the two-branch state, `P_o(v) (1 + cos(m v L / hbar - alpha))`.
pub fn ab_velocity_density(v: f64, separation: f64, alpha: f64, sigma: f64, mass: f64, hbar: f64) -> f64 {
    let sv = hbar / (2.0 * sigma * mass);
    gaussian_density(v, 0.0, sv) * (1.0 + (mass * v * separation / hbar - alpha).cos())
}

/// Raw moments of a Gaussian, `E[x^n]` for `n <= 4`.
pub fn gaussian_raw_moment(n: u32, mean: f64, sd: f64) -> f64 {
    let (m, s2) = (mean, sd * sd);
    match n {
        0 => 1.0,
        1 => m,
        2 => m * m + s2,
        3 => m.powi(3) + 3.0 * m * s2,
        4 => m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2,
        _ => unimplemented!(),
    }
}

/// Unitary DFT matrix on the centered lattice, `U_kj = exp(-i p_k y_j / hbar) / sqrt(n)`.
pub fn dft_matrix(grid: &Grid) -> DMatrix<C> {
    let n = grid.n();
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, j| C::from_polar(s, -grid.p(k) * grid.y(j) / grid.hbar()))
}

/// `f(P)` for the lattice momentum operator, as a dense matrix in position space.
pub fn momentum_function(grid: &Grid, f: impl Fn(f64) -> f64) -> DMatrix<C> {
    let u = dft_matrix(grid);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        grid.n(),
        (0..grid.n()).map(|k| c(f(grid.p(k)), 0.0)),
    ));
    u.adjoint() * d * u
}

pub fn position_matrix(grid: &Grid) -> DMatrix<C> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        grid.n(),
        (0..grid.n()).map(|j| c(grid.y(j), 0.0)),
    ))
}

/// `exp(-i H t / hbar)` by the matrix exponential.
pub fn propagator(h: &DMatrix<C>, t: f64, hbar: f64) -> DMatrix<C> {
    (h * c(0.0, -t / hbar)).exp()
}

/// Applies a per-column propagator to a column-major composite amplitude
/// `amp[iq * ny + iy]`.
pub fn apply_blocks(amp: &[C], ny: usize, block: impl Fn(usize) -> DMatrix<C>) -> Vec<C> {
    let nq = amp.len() / ny;
    let mut out = Vec::with_capacity(amp.len());
    for iq in 0..nq {
        let col = nalgebra::DVector::from_column_slice(&amp[iq * ny..(iq + 1) * ny]);
        let u = block(iq);
        out.extend((u * col).iter().copied());
    }
    out
}

/// `sqrt(sum |a - b|^2 * cell)`.
pub fn l2_distance(a: &[C], b: &[C], cell: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() * cell.sqrt()
}

/// Trapezoid-free Riemann sum on a uniform axis.
pub fn riemann(values: &[f64], d: f64) -> f64 {
    values.iter().sum::<f64>() * d
}

pub fn l1(a: &[f64], b: &[f64], d: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * d
}

/// Mean and variance of a density tabulated on a uniform axis.
pub fn mean_var(axis: &[f64], dens: &[f64]) -> (f64, f64) {
    let d = axis[1] - axis[0];
    let total = riemann(dens, d);
    let mean = axis.iter().zip(dens).map(|(x, p)| x * p).sum::<f64>() * d / total;
    let var = axis.iter().zip(dens).map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() * d / total;
    (mean, var)
}

/// Freely evolved Gaussian: the packet `gaussian_amp(y, center, sigma, p0, hbar)`
/// after time `t`.
pub fn free_gaussian_amp(y: f64, t: f64, center: f64, sigma: f64, p0: f64, mass: f64, hbar: f64) -> C {
    let s = c(1.0, hbar * t / (2.0 * mass * sigma * sigma));
    let v = p0 / mass;
    let d = y - center - v * t;
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    let env = (-(d * d) / (4.0 * sigma * sigma * s)).exp();
    env * C::from_polar(norm, p0 * (y - 0.5 * v * t) / hbar) / s.sqrt()
}

/// Builds a composite amplitude `psi(y) chi(q)` in column-major order.
pub fn product_amp(psi: &[C], chi: &[C]) -> Vec<C> {
    chi.iter().flat_map(|q| psi.iter().map(move |p| p * q)).collect()
}
