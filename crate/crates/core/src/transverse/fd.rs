use serde::{Deserialize, Serialize};

use super::{TransverseProblem, Variant};
use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSpectrum {
    pub intervals: usize,
    pub lowest: f64,
    pub negative_count: usize,
}

/// Lowest eigenvalue of the vertex-centred finite-difference discretization
/// with `n` intervals across `(-d, d)`.
pub fn fd_oracle(problem: &TransverseProblem, n: usize) -> Result<f64> {
    Ok(fd_spectrum(problem, n)?.lowest)
}

/// Each side carries its own interface node; the two interface rows and the
/// Robin end rows use half mass, with the one-sided derivative replaced by
/// the interface or boundary condition.
pub fn fd_spectrum(problem: &TransverseProblem, n: usize) -> Result<FdSpectrum> {
    problem.validate()?;
    if n < 200 {
        return Err(Error::Mesh(format!(
            "transverse mesh needs at least 200 intervals, got {n}"
        )));
    }
    let n = n + n % 2;
    let half = n / 2;
    let h = problem.d / half as f64;
    let h2 = 1.0 / (h * h);
    let (beta, m, theta) = (problem.beta, problem.interface_mean, problem.theta());
    if beta * m.abs() >= 1.0 {
        return Err(Error::Regime(format!(
            "interface coupling β|M| = {} ≥ 1 makes the discrete interface rows non-symmetrizable",
            beta * m.abs()
        )));
    }
    let robin = problem.variant == Variant::Minus;
    let side = if robin { half + 1 } else { half };
    let size = 2 * side;
    let mut diag = vec![2.0 * h2; size];
    let mut weights = vec![1.0; size];
    let mut lower = vec![-h2; size - 1];
    let mut upper = vec![-h2; size - 1];

    let (left_iface, right_iface) = (side - 1, side);
    diag[left_iface] = h2 - 1.0 / (h * beta) - m / h;
    diag[right_iface] = h2 - 1.0 / (h * beta) + m / h;
    weights[left_iface] = 0.5;
    weights[right_iface] = 0.5;
    upper[left_iface] = 1.0 / (h * beta) - m / h;
    lower[left_iface] = 1.0 / (h * beta) + m / h;
    if robin {
        for end in [0, size - 1] {
            diag[end] = h2 + theta / h;
            weights[end] = 0.5;
        }
    }
    let matrix = SymTridiagonal::from_pencil(&diag, &lower, &upper, &weights)?;
    Ok(FdSpectrum {
        intervals: n,
        lowest: matrix.eigenvalue(0),
        negative_count: matrix.count_below(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transverse::{line_eigenvalue, solve_transverse};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn plus_agrees_with_secular_root() {
        let p = TransverseProblem::plus(0.1, 0.3);
        let exact = solve_transverse(&p).unwrap().eigenvalue;
        let spec = fd_spectrum(&p, 2000).unwrap();
        assert!(rel(spec.lowest, exact) < 1e-5);
        assert_eq!(spec.negative_count, 1);
    }

    #[test]
    fn robin_agrees_with_secular_root() {
        let p = TransverseProblem::minus(0.1, 0.3, 0.3);
        let exact = solve_transverse(&p).unwrap().eigenvalue;
        assert!(rel(fd_oracle(&p, 2000).unwrap(), exact) < 1e-5);
    }

    #[test]
    fn interface_mean_only_perturbs_at_discretization_level() {
        let p = TransverseProblem::plus(0.1, 0.3);
        let exact = solve_transverse(&p).unwrap().eigenvalue;
        for m in [-2.0, 0.5, 3.0] {
            let v = fd_oracle(&p.with_interface_mean(m), 4000).unwrap();
            assert!(rel(v, exact) < 1e-5, "M = {m}: {v} vs {exact}");
        }
    }

    #[test]
    fn line_limit() {
        let beta = 0.1;
        let v = fd_oracle(&TransverseProblem::plus(beta, 20.0 * beta), 40_000).unwrap();
        assert!(rel(v, line_eigenvalue(beta).unwrap()) < 1e-6);
    }

    #[test]
    fn second_order_convergence() {
        let p = TransverseProblem::minus(0.1, 0.3, 0.0).with_interface_mean(0.7);
        let exact = solve_transverse(&p).unwrap().eigenvalue;
        let e1 = (fd_oracle(&p, 1000).unwrap() - exact).abs();
        let e2 = (fd_oracle(&p, 2000).unwrap() - exact).abs();
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn rejects_coarse_mesh() {
        assert!(fd_oracle(&TransverseProblem::plus(0.1, 0.3), 100).is_err());
    }
}
