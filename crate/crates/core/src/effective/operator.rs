use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use crate::geometry::SupNorms;

/// Which bracketing operator an assembly represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub surface: String,
    pub resolution: usize,
    pub d: f64,
    pub sign: Option<Sign>,
    /// Scale of the Laplace–Beltrami term.
    pub laplacian_scale: f64,
    /// Scale of the curvature potential.
    pub potential_scale: f64,
    /// Constant shift added to the potential.
    pub shift: f64,
}

/// Generalized symmetric eigenproblem `K x = μ W x` with diagonal `W`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub stiffness: SparseColMat<usize, f64>,
    pub mass: Vec<f64>,
    /// Smallest value of the potential part divided by the mass.
    pub potential_min: f64,
    pub meta: OperatorMeta,
}

impl DiscreteOperator {
    pub fn size(&self) -> usize {
        self.mass.len()
    }

    /// Largest `|K_ij - K_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let dense = self.stiffness.to_dense();
        let n = dense.nrows();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((dense[(i, j)] - dense[(j, i)]).abs());
                scale = scale.max(dense[(i, j)].abs());
            }
        }
        worst / scale
    }

    /// Rayleigh quotient `xᵀKx / xᵀWx`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let mut num = 0.0;
        let k = self.stiffness.as_ref();
        for j in 0..k.ncols() {
            let rows = k.row_idx_of_col_raw(j);
            let vals = k.val_of_col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                num += x[i] * v * x[j];
            }
        }
        let den: f64 = x.iter().zip(&self.mass).map(|(x, w)| w * x * x).sum();
        num / den
    }
}

fn assemble(
    mesh: &SurfaceMesh,
    laplacian: f64,
    potential: f64,
    shift: f64,
    d: f64,
    sign: Option<Sign>,
) -> Result<DiscreteOperator> {
    let n = mesh.len();
    let mut triplets = Vec::with_capacity(2 * mesh.flux.len() + n);
    for &(i, j, v) in &mesh.flux {
        triplets.push(Triplet::new(i, j, laplacian * v));
        if i != j {
            triplets.push(Triplet::new(j, i, laplacian * v));
        }
    }
    let mut potential_min = f64::INFINITY;
    for i in 0..n {
        let v = potential * mesh.potential[i] + shift;
        potential_min = potential_min.min(v);
        triplets.push(Triplet::new(i, i, v * mesh.mass[i]));
    }
    let stiffness = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Mesh(format!("sparse assembly failed: {e:?}")))?;
    Ok(DiscreteOperator {
        stiffness,
        mass: mesh.mass.clone(),
        potential_min,
        meta: OperatorMeta {
            surface: mesh.label.clone(),
            resolution: mesh.resolution,
            d,
            sign,
            laplacian_scale: laplacian,
            potential_scale: potential,
            shift,
        },
    })
}

/// `S = -Δ_Γ + K - M²`.
pub fn assemble_s(mesh: &SurfaceMesh) -> Result<DiscreteOperator> {
    assemble(mesh, 1.0, 1.0, 0.0, 0.0, None)
}

/// `U^±_d = -C_± Δ_Γ + C_±^{-2} (K - M²) + v^± d`.
pub fn assemble_u(
    mesh: &SurfaceMesh,
    d: f64,
    sign: Sign,
    norms: &SupNorms,
    v_pm: (f64, f64),
) -> Result<DiscreteOperator> {
    if !(d >= 0.0) || d >= norms.rho {
        return Err(Error::LayerWidth(format!(
            "half-width d = {d} must lie in [0, ρ = {})",
            norms.rho
        )));
    }
    let (c, v) = match sign {
        Sign::Plus => (norms.c_plus(d), v_pm.1),
        Sign::Minus => (norms.c_minus(d), v_pm.0),
    };
    assemble(mesh, c, 1.0 / (c * c), v * d, d, Some(sign))
}
