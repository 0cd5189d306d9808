use faer::linalg::solvers::Solve;
use faer::sparse::{linalg::solvers::Llt, SparseColMat, Triplet};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::DiscreteOperator;
use crate::error::{Error, Result};

/// Relative Ritz residual `‖T y - θ y‖ / |θ|` accepted as converged.
pub const RITZ_TOL: f64 = 1e-10;
const MAX_RESTARTS: usize = 60;
const BLOCKS_PER_CYCLE: usize = 6;
const SEED: u64 = 0x5eed_1a2c;

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors (columns), orthonormal in the mass inner product.
    pub vectors: Mat<f64>,
    pub restarts: usize,
    pub residual: f64,
    pub shift: f64,
}

struct ShiftInvert {
    llt: Llt<usize, f64>,
    sqrt_mass: Vec<f64>,
    shift: f64,
}

impl ShiftInvert {
    fn new(op: &DiscreteOperator) -> Result<Self> {
        let n = op.size();
        let mut shift = op.potential_min - 1.0;
        let mut last_err = String::new();
        for _ in 0..6 {
            let k = op.stiffness.as_ref();
            let mut triplets = Vec::with_capacity(k.compute_nnz() + n);
            for j in 0..n {
                for (&i, &v) in k.row_idx_of_col_raw(j).iter().zip(k.val_of_col(j)) {
                    triplets.push(Triplet::new(i, j, v));
                }
                triplets.push(Triplet::new(j, j, -shift * op.mass[j]));
            }
            let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
                .map_err(|e| Error::Factorization(format!("{e:?}")))?;
            match shifted.sp_cholesky(Side::Lower) {
                Ok(llt) => {
                    return Ok(Self {
                        llt,
                        sqrt_mass: op.mass.iter().map(|w| w.sqrt()).collect(),
                        shift,
                    })
                }
                Err(e) => {
                    last_err = format!("{e:?}");
                    shift -= 10.0 * (1.0 + shift.abs());
                }
            }
        }
        Err(Error::Factorization(format!(
            "shifted stiffness is not positive definite: {last_err}"
        )))
    }

    /// `Y ↦ W^{1/2} (K - σW)^{-1} W^{1/2} Y`.
    fn apply(&self, y: &Mat<f64>) -> Mat<f64> {
        let mut x = Mat::from_fn(y.nrows(), y.ncols(), |i, j| self.sqrt_mass[i] * y[(i, j)]);
        self.llt.solve_in_place(x.as_mut());
        for j in 0..x.ncols() {
            for (v, w) in x.col_as_slice_mut(j).iter_mut().zip(&self.sqrt_mass) {
                *v *= w;
            }
        }
        x
    }
}

/// Orthonormalizes the columns of `z` against the first `k` columns of `q`
/// and against each other; deficient columns are replaced by random ones.
fn orthonormalize(q: &Mat<f64>, k: usize, z: &mut Mat<f64>, rng: &mut ChaCha8Rng) {
    for _ in 0..2 {
        if k > 0 {
            let basis = q.subcols(0, k);
            let coeffs = basis.transpose() * &*z;
            *z = &*z - basis * &coeffs;
        }
    }
    for j in 0..z.ncols() {
        for _ in 0..3 {
            let before = norm(z.col_as_slice(j));
            for _ in 0..2 {
                for i in 0..j {
                    let c = dot(z.col_as_slice(i), z.col_as_slice(j));
                    axpy(z, j, i, -c);
                }
                if k > 0 {
                    for i in 0..k {
                        let c = dot(q.col_as_slice(i), z.col_as_slice(j));
                        let qi = q.col_as_slice(i);
                        for (v, b) in z.col_as_slice_mut(j).iter_mut().zip(qi) {
                            *v -= c * b;
                        }
                    }
                }
            }
            let after = norm(z.col_as_slice(j));
            if after > 1e-8 * before.max(f64::MIN_POSITIVE) && after > 0.0 {
                z.col_as_slice_mut(j).iter_mut().for_each(|v| *v /= after);
                break;
            }
            for v in z.col_as_slice_mut(j) {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(z: &mut Mat<f64>, target: usize, source: usize, c: f64) {
    let src: Vec<f64> = z.col_as_slice(source).to_vec();
    for (v, s) in z.col_as_slice_mut(target).iter_mut().zip(&src) {
        *v += c * s;
    }
}

/// Lowest `count` eigenpairs by shift-invert block Lanczos with full
/// reorthogonalization and restarts from the leading Ritz block.
pub fn lowest_eigenpairs(op: &DiscreteOperator, count: usize) -> Result<Eigenpairs> {
    let n = op.size();
    if count == 0 || count > n {
        return Err(Error::Domain(format!(
            "cannot compute {count} eigenvalues of a {n}-node operator"
        )));
    }
    let inv = ShiftInvert::new(op)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let block = (count + 4).max(8).min(n);
    let max_cols = (BLOCKS_PER_CYCLE * block).min(n);
    let mut start = Mat::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let empty = Mat::<f64>::zeros(n, 0);
    orthonormalize(&empty, 0, &mut start, &mut rng);
    let mut worst = f64::INFINITY;
    for restart in 0..MAX_RESTARTS {
        let mut q = Mat::<f64>::zeros(n, max_cols);
        let mut tq = Mat::<f64>::zeros(n, max_cols);
        let mut filled = 0;
        let mut current = start.clone();
        while filled < max_cols {
            let width = current.ncols().min(max_cols - filled);
            for j in 0..width {
                q.col_as_slice_mut(filled + j)
                    .copy_from_slice(current.col_as_slice(j));
            }
            let image = inv.apply(&Mat::from_fn(n, width, |i, j| current[(i, j)]));
            for j in 0..width {
                tq.col_as_slice_mut(filled + j)
                    .copy_from_slice(image.col_as_slice(j));
            }
            filled += width;
            if filled >= max_cols {
                break;
            }
            let mut next = image;
            orthonormalize(&q, filled, &mut next, &mut rng);
            current = next;
        }
        let basis = q.subcols(0, filled);
        let images = tq.subcols(0, filled);
        let h = basis.transpose() * images;
        let h = Mat::from_fn(filled, filled, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence {
                iterations: restart,
                residual: f64::NAN,
            })?;
        let theta: Vec<f64> = (0..filled).map(|i| eig.S().column_vector()[i]).collect();
        // largest θ first
        let order: Vec<usize> = (0..filled).rev().collect();
        let s = eig.U();
        let ritz = Mat::from_fn(filled, block.min(filled), |i, j| s[(i, order[j])]);
        let y = basis * &ritz;
        let ty = images * &ritz;
        worst = 0.0;
        for j in 0..count {
            let t = theta[order[j]];
            let r: f64 = ty
                .col_as_slice(j)
                .iter()
                .zip(y.col_as_slice(j))
                .map(|(a, b)| (a - t * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r / t.abs());
        }
        if worst < RITZ_TOL {
            let mut pairs: Vec<(f64, usize)> = (0..count)
                .map(|j| (inv.shift + 1.0 / theta[order[j]], j))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let vectors = Mat::from_fn(n, count, |i, c| y[(i, pairs[c].1)] / inv.sqrt_mass[i]);
            return Ok(Eigenpairs {
                values: pairs.iter().map(|p| p.0).collect(),
                vectors,
                restarts: restart,
                residual: worst,
                shift: inv.shift,
            });
        }
        start = y;
    }
    Err(Error::NoConvergence {
        iterations: MAX_RESTARTS,
        residual: worst,
    })
}

/// Eigenvalues on a sequence of meshes with a Richardson estimate from the
/// two finest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub surface: String,
    pub resolutions: Vec<usize>,
    /// `values[m][j]`: eigenvalue `j` on mesh `m`.
    pub values: Vec<Vec<f64>>,
    /// Eigenvalues on the finest mesh.
    pub eigenvalues: Vec<f64>,
    pub extrapolated: Vec<f64>,
    /// `|μ_fine - μ_coarse| / 3` per eigenvalue.
    pub error_estimates: Vec<f64>,
    /// `(μ_{n/4} - μ_{n/2}) / (μ_{n/2} - μ_n)` when three meshes were used.
    pub convergence_ratios: Option<Vec<f64>>,
}

impl SpectralResult {
    pub fn from_levels(surface: String, resolutions: Vec<usize>, values: Vec<Vec<f64>>) -> Self {
        let m = values.len();
        let fine = values[m - 1].clone();
        let (extrapolated, error_estimates) = if m >= 2 {
            let coarse = &values[m - 2];
            (
                fine.iter()
                    .zip(coarse)
                    .map(|(f, c)| f + (f - c) / 3.0)
                    .collect(),
                fine.iter()
                    .zip(coarse)
                    .map(|(f, c)| (f - c).abs() / 3.0)
                    .collect(),
            )
        } else {
            (fine.clone(), vec![f64::NAN; fine.len()])
        };
        let convergence_ratios = (m >= 3).then(|| {
            (0..fine.len())
                .map(|j| {
                    (values[m - 3][j] - values[m - 2][j]) / (values[m - 2][j] - values[m - 1][j])
                })
                .collect()
        });
        Self {
            surface,
            resolutions,
            values,
            eigenvalues: fine,
            extrapolated,
            error_estimates,
            convergence_ratios,
        }
    }
}

/// Lowest `count` eigenvalues of one assembled operator.
pub fn eigen_lowest(op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
    Ok(lowest_eigenpairs(op, count)?.values)
}

/// Solves at each resolution in `resolutions` (ascending) with operators
/// from `build`, and forms the Richardson estimate from the last two.
pub fn refined_spectrum<F>(
    surface: &str,
    resolutions: &[usize],
    count: usize,
    build: F,
) -> Result<SpectralResult>
where
    F: Fn(usize) -> Result<DiscreteOperator>,
{
    if resolutions.is_empty() {
        return Err(Error::Mesh("no resolutions given".into()));
    }
    let values = resolutions
        .iter()
        .map(|&n| eigen_lowest(&build(n)?, count))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralResult::from_levels(
        surface.to_string(),
        resolutions.to_vec(),
        values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{assemble_s, SurfaceMesh};
    use crate::geometry::Surface;
    use std::f64::consts::PI;

    fn s_operator(surface: &Surface, n: usize) -> DiscreteOperator {
        assemble_s(&SurfaceMesh::new(surface, n).unwrap()).unwrap()
    }

    #[test]
    fn plane_box_ground_state() {
        let op = s_operator(&Surface::Plane { half_width: 10.0 }, 64);
        let v = eigen_lowest(&op, 3).unwrap();
        let exact = PI * PI / 200.0;
        assert!((v[0] / exact - 1.0).abs() < 0.01, "{v:?}");
        assert!((v[1] / (2.5 * exact) - 1.0).abs() < 0.01);
        assert!((v[1] - v[2]).abs() < 1e-9 * v[1]);
    }

    #[test]
    fn sphere_chart_reproduces_harmonics() {
        let op = s_operator(&Surface::Sphere { radius: 1.0 }, 64);
        let v = eigen_lowest(&op, 16).unwrap();
        let expected = crate::effective::sphere_surface_spectrum(1.0, 16);
        assert!(v[0].abs() < 1e-9);
        for (a, b) in v.iter().zip(&expected).skip(1) {
            assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
        }
    }

    #[test]
    fn torus_ground_state_is_negative() {
        let v = eigen_lowest(
            &s_operator(
                &Surface::Torus {
                    major: 3.0,
                    minor: 1.0,
                },
                32,
            ),
            3,
        )
        .unwrap();
        assert!(v[0] < -0.28 && v[0] > -0.29, "{v:?}");
        assert!((v[1] - v[2]).abs() < 1e-9);
    }

    #[test]
    fn eigenvectors_are_mass_orthonormal() {
        let op = s_operator(
            &Surface::Torus {
                major: 3.0,
                minor: 1.0,
            },
            16,
        );
        let pairs = lowest_eigenpairs(&op, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let ip: f64 = (0..op.size())
                    .map(|i| op.mass[i] * pairs.vectors[(i, a)] * pairs.vectors[(i, b)])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-8, "({a},{b}) {ip}");
            }
            let column: Vec<f64> = (0..op.size()).map(|i| pairs.vectors[(i, a)]).collect();
            assert!((op.rayleigh_quotient(&column) - pairs.values[a]).abs() < 1e-9);
        }
    }

    #[test]
    fn variational_bound_holds_for_trials() {
        let op = s_operator(
            &Surface::Torus {
                major: 3.0,
                minor: 1.0,
            },
            16,
        );
        let mu0 = eigen_lowest(&op, 1).unwrap()[0];
        for k in 0..5 {
            let x: Vec<f64> = (0..op.size())
                .map(|i| ((i * (k + 3)) as f64).sin() + 0.3)
                .collect();
            assert!(op.rayleigh_quotient(&x) >= mu0 - 1e-12);
        }
    }

    #[test]
    fn second_order_convergence() {
        let torus = Surface::Torus {
            major: 3.0,
            minor: 1.0,
        };
        let r = refined_spectrum("torus", &[16, 32, 64], 1, |n| Ok(s_operator(&torus, n))).unwrap();
        let ratio = r.convergence_ratios.as_ref().unwrap()[0];
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        assert!(r.error_estimates[0] < 1e-4);
    }
}
