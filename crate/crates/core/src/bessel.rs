//! Exponentially scaled modified spherical Bessel functions.
//!
//! `scaled_i(l, z) = e^{-z} i_l(z)` and `scaled_k(l, z) = e^{z} k_l(z)` with
//! `i_0(z) = sinh z / z` and `k_0(z) = (π/2) e^{-z} / z`.

use std::f64::consts::FRAC_PI_2;

const CLOSED_FORM_MAX_ORDER: usize = 5;
const CLOSED_FORM_MIN_ARG: f64 = 10.0;

/// Coefficients `(l+k)! / (k! (l-k)!)` of the terminating series.
fn series_coefficients(l: usize) -> Vec<f64> {
    let mut a = vec![1.0; l + 1];
    for k in 1..=l {
        a[k] = a[k - 1] * ((l + k) * (l + 1 - k)) as f64 / k as f64;
    }
    a
}

fn series(a: &[f64], x: f64, alternating: bool) -> f64 {
    let mut sum = 0.0;
    let mut p = 1.0;
    for (k, c) in a.iter().enumerate() {
        let sign = if alternating && k % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * c * p;
        p *= x;
    }
    sum
}

/// `e^{z} k_l(z)` from the terminating series.
pub fn scaled_k_closed(l: usize, z: f64) -> f64 {
    FRAC_PI_2 / z * series(&series_coefficients(l), 1.0 / (2.0 * z), false)
}

/// `e^{-z} i_l(z)` from the terminating series; accurate for `z` large
/// compared with `l`.
pub fn scaled_i_closed(l: usize, z: f64) -> f64 {
    let a = series_coefficients(l);
    let x = 1.0 / (2.0 * z);
    let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
    (series(&a, x, true) + sign * (-2.0 * z).exp() * series(&a, x, false)) / (2.0 * z)
}

/// `e^{-z} i_0(z)` without cancellation for small `z`.
pub fn scaled_i0(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-2.0 * z).exp_m1() / (2.0 * z)
    }
}

/// `e^{z} k_l(z)` for `l = 0..=l_max` by upward recurrence.
pub fn scaled_k_all(l_max: usize, z: f64) -> Vec<f64> {
    let mut k = Vec::with_capacity(l_max + 1);
    k.push(FRAC_PI_2 / z);
    if l_max >= 1 {
        k.push(FRAC_PI_2 / z * (1.0 + 1.0 / z));
    }
    for l in 1..l_max {
        let next = k[l - 1] + (2 * l + 1) as f64 / z * k[l];
        k.push(next);
    }
    k
}

/// `e^{-z} i_l(z)` for `l = 0..=l_max` by downward (Miller) recurrence,
/// normalized by the closed form of order 0.
pub fn scaled_i_all(l_max: usize, z: f64) -> Vec<f64> {
    assert!(z > 0.0, "argument must be positive");
    let start = l_max + 41 + (2.0 * z).ceil() as usize;
    let mut out = vec![0.0; l_max + 1];
    let (mut upper, mut current) = (0.0f64, 1e-300f64);
    for n in (1..=start).rev() {
        let lower = upper + (2 * n + 1) as f64 / z * current;
        upper = current;
        current = lower;
        if n - 1 <= l_max {
            out[n - 1] = current;
        }
        if current.abs() > 1e200 {
            upper *= 1e-200;
            current *= 1e-200;
            for v in out.iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let scale = scaled_i0(z) / out[0];
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Values and derivatives `(ĩ_l, ĩ_l', k̃_l, k̃_l')` where the primes denote
/// the scaled derivatives `e^{-z} i_l'(z)` and `e^{z} k_l'(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselPair {
    pub i: f64,
    pub di: f64,
    pub k: f64,
    pub dk: f64,
}

impl BesselPair {
    /// Relative defect of `i k' - i' k = -π / (2 z²)`.
    pub fn wronskian_defect(&self, z: f64) -> f64 {
        let exact = -FRAC_PI_2 / (z * z);
        ((self.i * self.dk - self.di * self.k) - exact).abs() / exact.abs()
    }
}

pub fn bessel_pair(l: usize, z: f64) -> BesselPair {
    let (i_l, i_next) = if l < CLOSED_FORM_MAX_ORDER && z >= CLOSED_FORM_MIN_ARG {
        (scaled_i_closed(l, z), scaled_i_closed(l + 1, z))
    } else {
        let all = scaled_i_all(l + 1, z);
        (all[l], all[l + 1])
    };
    let k = scaled_k_all(l + 1, z);
    let lz = l as f64 / z;
    BesselPair {
        i: i_l,
        di: i_next + lz * i_l,
        k: k[l],
        dk: -k[l + 1] + lz * k[l],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_and_one_closed_forms() {
        for z in [0.01, 0.5, 3.0, 25.0] {
            let i = scaled_i_all(1, z);
            let i1 = (z.cosh() / z - z.sinh() / (z * z)) * (-z).exp();
            assert!((i[0] - (z.sinh() / z) * (-z).exp()).abs() < 1e-14 * i[0].abs().max(1e-300));
            assert!((i[1] - i1).abs() < 1e-10 * i1.abs(), "z = {z}");
            let k = scaled_k_all(1, z);
            assert!((k[0] - FRAC_PI_2 / z).abs() < 1e-15 * k[0]);
        }
    }

    #[test]
    fn recurrences_match_series() {
        for l in 0..=8 {
            for z in [12.0, 40.0, 400.0] {
                let i = scaled_i_all(l, z)[l];
                assert!(
                    (i - scaled_i_closed(l, z)).abs() < 1e-13 * i,
                    "l = {l}, z = {z}"
                );
                let k = scaled_k_all(l, z)[l];
                assert!((k - scaled_k_closed(l, z)).abs() < 1e-13 * k);
            }
        }
    }

    #[test]
    fn wronskian_identity() {
        for l in 0..=12 {
            for z in [1e-3, 0.2, 1.0, 7.5, 10.0, 20.0, 200.0, 2000.0] {
                let p = bessel_pair(l, z);
                assert!(
                    p.wronskian_defect(z) < 1e-12,
                    "l = {l}, z = {z}: {}",
                    p.wronskian_defect(z)
                );
            }
        }
    }
}
