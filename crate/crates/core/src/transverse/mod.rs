//! One-dimensional transverse operators with a δ′ interface at the origin.
//!
//! The operators act on `(-d, 0) ∪ (0, d)` with the interface condition
//! `f'(0-) = f'(0+) = -(f(0+) - f(0-))/β + M (f(0+) + f(0-))`, and either
//! Dirichlet ends (plus variant) or Robin ends `f'(±d) = ∓θ f(±d)` (minus
//! variant).

mod fd;
mod lemma;

pub use fd::{fd_oracle, fd_spectrum, FdSpectrum};
pub use lemma::{
    check_form_inequality, verify_lemma1, FormReport, FormTrial, Lemma1Report, Lemma1Row, TrialSet,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect_newton, geometric_grid, sign_changes};

/// Number of κ samples in the negative-eigenvalue scan.
pub const SCAN_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Dirichlet ends; bounds the layer operator from above.
    Plus,
    /// Robin ends; bounds the layer operator from below.
    Minus,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Variant::Plus),
            "minus" | "-" => Ok(Variant::Minus),
            other => Err(Error::Domain(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseProblem {
    pub d: f64,
    pub beta: f64,
    /// Mean curvature at the interface point.
    pub interface_mean: f64,
    /// Robin coefficient; `None` for the plus variant.
    pub robin_theta: Option<f64>,
    pub variant: Variant,
    /// `‖M‖∞ + d‖K‖∞` of the surface, used only for the regime flag.
    pub curvature_sup: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    /// `d/β > 2`.
    pub width_ratio: bool,
    /// `β (‖M‖∞ + d‖K‖∞) < 1`.
    pub weak_curvature: bool,
}

impl Regime {
    pub fn ok(&self) -> bool {
        self.width_ratio && self.weak_curvature
    }
}

impl TransverseProblem {
    pub fn plus(beta: f64, d: f64) -> Self {
        Self {
            d,
            beta,
            interface_mean: 0.0,
            robin_theta: None,
            variant: Variant::Plus,
            curvature_sup: 0.0,
        }
    }

    pub fn minus(beta: f64, d: f64, theta: f64) -> Self {
        Self {
            d,
            beta,
            interface_mean: 0.0,
            robin_theta: Some(theta),
            variant: Variant::Minus,
            curvature_sup: 0.0,
        }
    }

    pub fn new(variant: Variant, beta: f64, d: f64, theta: f64) -> Self {
        match variant {
            Variant::Plus => Self::plus(beta, d),
            Variant::Minus => Self::minus(beta, d, theta),
        }
    }

    pub fn with_interface_mean(mut self, m: f64) -> Self {
        self.interface_mean = m;
        self.curvature_sup = self.curvature_sup.max(m.abs());
        self
    }

    pub fn with_curvature_sup(mut self, sup: f64) -> Self {
        self.curvature_sup = sup;
        self
    }

    pub fn theta(&self) -> f64 {
        self.robin_theta.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Domain(format!(
                "half-width must be positive, got {}",
                self.d
            )));
        }
        if !self.interface_mean.is_finite() {
            return Err(Error::Domain(
                "interface mean curvature is not finite".into(),
            ));
        }
        match (self.variant, self.robin_theta) {
            (Variant::Plus, Some(_)) => Err(Error::Domain(
                "plus variant takes no Robin coefficient".into(),
            )),
            (Variant::Minus, None) => Err(Error::Domain(
                "minus variant needs a Robin coefficient".into(),
            )),
            (Variant::Minus, Some(t)) if !(t >= 0.0 && t.is_finite()) => Err(Error::Domain(
                format!("Robin coefficient must be non-negative, got {t}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn regime(&self) -> Regime {
        Regime {
            width_ratio: self.d / self.beta > 2.0,
            weak_curvature: self.beta * self.curvature_sup < 1.0,
        }
    }

    /// Closed interval guaranteed to contain the eigenvalue in the regime.
    pub fn lemma1_bracket(&self) -> [f64; 2] {
        let base = -4.0 / (self.beta * self.beta);
        let gap = lemma1_gap(self.beta, self.d);
        match self.variant {
            Variant::Plus => [base, base + gap],
            Variant::Minus => [base - gap, base],
        }
    }

    /// Secular function in κ, normalized so that it tends to `κ - 2/β` for
    /// large `κd`, together with its derivative.
    pub fn secular(&self, kappa: f64) -> (f64, f64) {
        let c = 2.0 / self.beta;
        let x = kappa * self.d;
        let t = x.tanh();
        let dt = self.d / x.cosh().powi(2);
        match self.variant {
            Variant::Plus => (kappa - c * t, 1.0 - c * dt),
            Variant::Minus => {
                let th = self.theta();
                let num = kappa * (kappa * t + th);
                let den = kappa + th * t;
                let dnum = 2.0 * kappa * t + kappa * kappa * dt + th;
                let dden = 1.0 + th * dt;
                (num / den - c, (dnum * den - num * dden) / (den * den))
            }
        }
    }

    /// Secular equation in the unnormalized product form.
    pub fn secular_product(&self, kappa: f64) -> f64 {
        let c = 2.0 / self.beta;
        let (s, ch) = ((kappa * self.d).sinh(), (kappa * self.d).cosh());
        match self.variant {
            Variant::Plus => kappa * ch - c * s,
            Variant::Minus => {
                let th = self.theta();
                kappa * (kappa * s + th * ch) - c * (kappa * ch + th * s)
            }
        }
    }

    /// Positive roots of the secular function found on a geometric grid of
    /// `points` samples over `(0, 4/β]`.
    pub fn count_negative(&self, points: usize) -> usize {
        let hi = 4.0 / self.beta;
        let grid = geometric_grid(hi * 1e-9, hi, points);
        sign_changes(|k| self.secular(k).0, &grid).len()
    }
}

/// Width `16 e^{-4d/β} / β²` of the Lemma 1 brackets.
pub fn lemma1_gap(beta: f64, d: f64) -> f64 {
    16.0 * (-4.0 * d / beta).exp() / (beta * beta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseResult {
    pub variant: Variant,
    pub beta: f64,
    pub d: f64,
    pub eigenvalue: f64,
    pub kappa: f64,
    pub lemma1_bracket: [f64; 2],
    pub n_negative: usize,
    /// Normalized secular residual `|f(κ)| / (2/β)` at the root.
    pub residual: f64,
    pub iterations: usize,
    pub regime: Regime,
}

impl TransverseResult {
    pub fn in_bracket(&self, rel_slack: f64) -> bool {
        let tol = rel_slack * self.eigenvalue.abs();
        self.eigenvalue >= self.lemma1_bracket[0] - tol
            && self.eigenvalue <= self.lemma1_bracket[1] + tol
    }
}

/// Eigenvalue `-4/β²` of the δ′ interaction on the whole line.
pub fn line_eigenvalue(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    Ok(-4.0 / (beta * beta))
}

const NEWTON_TOL: f64 = 1e-13;

fn finish(problem: &TransverseProblem, kappa: f64, iterations: usize) -> TransverseResult {
    let scale = 2.0 / problem.beta;
    TransverseResult {
        variant: problem.variant,
        beta: problem.beta,
        d: problem.d,
        eigenvalue: -kappa * kappa,
        kappa,
        lemma1_bracket: problem.lemma1_bracket(),
        n_negative: problem.count_negative(SCAN_POINTS),
        residual: problem.secular(kappa).0.abs() / scale,
        iterations,
        regime: problem.regime(),
    }
}

/// Solves for the unique negative eigenvalue, searching only the Lemma 1
/// bracket widened by 10% on each side.
pub fn solve_transverse(problem: &TransverseProblem) -> Result<TransverseResult> {
    problem.validate()?;
    let [lo, hi] = problem.lemma1_bracket();
    let pad = (0.1 * (hi - lo)).max(1e-12 * lo.abs());
    let (t_lo, t_hi) = (lo - pad, hi + pad);
    let k_hi = (-t_lo).sqrt();
    let k_lo = if t_hi < 0.0 {
        (-t_hi).sqrt()
    } else {
        k_hi * 1e-9
    };
    let scale = 2.0 / problem.beta;
    let root = bisect_newton(|k| problem.secular(k), k_lo, k_hi, NEWTON_TOL * scale)?;
    let result = finish(problem, root.x, root.iterations);
    if result.n_negative > 1 {
        return Err(Error::Multiplicity {
            count: result.n_negative,
        });
    }
    Ok(result)
}

/// Solves without assuming the Lemma 1 regime: the root is located by the
/// κ-scan over `(0, 4/β]` and must be unique.
pub fn solve_transverse_scan(problem: &TransverseProblem) -> Result<TransverseResult> {
    problem.validate()?;
    let hi = 4.0 / problem.beta;
    let grid = geometric_grid(hi * 1e-9, hi, SCAN_POINTS);
    let brackets = sign_changes(|k| problem.secular(k).0, &grid);
    match brackets.len() {
        0 => Err(Error::NoRoot { lo: grid[0], hi }),
        1 => {
            let (a, b) = brackets[0];
            let root = bisect_newton(
                |k| problem.secular(k),
                a,
                b,
                NEWTON_TOL * 2.0 / problem.beta,
            )?;
            Ok(finish(problem, root.x, root.iterations))
        }
        count => Err(Error::Multiplicity { count }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_eigenvalue_values() {
        assert_eq!(line_eigenvalue(0.1).unwrap(), -4.0 / (0.1 * 0.1));
        assert!((line_eigenvalue(0.1).unwrap() + 400.0).abs() < 1e-12);
        assert_eq!(line_eigenvalue(2.0).unwrap(), -1.0);
        assert!(line_eigenvalue(0.0).is_err());
        assert!(line_eigenvalue(-1.0).is_err());
    }

    #[test]
    fn line_eigenfunction_satisfies_interface() {
        // f = sign(x) e^{-2|x|/β}: f(0±) = ±1, f'(0±) = 2/β
        let beta = 0.3;
        let (fp, fm): (f64, f64) = (1.0, -1.0);
        let slope_plus = -2.0 / beta * fp;
        let slope_minus = -2.0 / beta * fm * -1.0;
        assert_eq!(slope_plus, slope_minus);
        assert!((slope_plus - (-(fp - fm) / beta)).abs() < 1e-14);
        // the mean-curvature term carries f(0+) + f(0-) = 0
        assert_eq!(fp + fm, 0.0);
        // -f'' = -(2/β)² f on each side
        let k: f64 = 2.0 / beta;
        assert!((-(k * k) - line_eigenvalue(beta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn d_to_infinity_limit() {
        let beta = 0.05;
        let r = solve_transverse(&TransverseProblem::plus(beta, 20.0 * beta)).unwrap();
        assert!((r.eigenvalue / -1600.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_example() {
        let r = solve_transverse(&TransverseProblem::plus(0.1, 0.3)).unwrap();
        assert_eq!(r.n_negative, 1);
        assert!(r.eigenvalue > -400.0 && r.eigenvalue < -399.99);
        // exact identity t + 4/β² = 16 q / (β² (1 + q)²), q = e^{-2κd}
        let q = (-2.0 * r.kappa * 0.3).exp();
        let excess = 16.0 * q / (0.01 * (1.0 + q).powi(2));
        assert!((r.eigenvalue + 400.0 - excess).abs() < 1e-9);
        // which sits above the stated upper endpoint by a few parts in 10⁹
        let over = r.eigenvalue - r.lemma1_bracket[1];
        assert!(over > 0.0 && over < 1e-8 * 400.0, "{over}");
        assert!(r.in_bracket(1e-8));
        assert!(r.residual < 1e-13);
        assert!(r.regime.ok());
    }

    #[test]
    fn minus_neumann_example() {
        let r = solve_transverse(&TransverseProblem::minus(0.1, 0.3, 0.0)).unwrap();
        assert_eq!(r.n_negative, 1);
        assert!(r.in_bracket(0.0));
        assert!(r.eigenvalue < -400.0);
    }

    #[test]
    fn interface_mean_does_not_enter() {
        let a = solve_transverse(&TransverseProblem::plus(0.1, 0.3)).unwrap();
        let b =
            solve_transverse(&TransverseProblem::plus(0.1, 0.3).with_interface_mean(0.5)).unwrap();
        assert!((a.eigenvalue - b.eigenvalue).abs() <= 1e-12 * a.eigenvalue.abs());
    }

    #[test]
    fn product_and_normalized_forms_share_roots() {
        for p in [
            TransverseProblem::plus(0.1, 0.4),
            TransverseProblem::minus(0.1, 0.4, 0.7),
        ] {
            let r = solve_transverse(&p).unwrap();
            let k = r.kappa;
            let scale = (k * p.d).cosh() * k * k;
            assert!(p.secular_product(k).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn robin_interpolates_between_neumann_and_dirichlet() {
        let (beta, d) = (0.1, 0.25);
        let neumann = solve_transverse(&TransverseProblem::minus(beta, d, 0.0))
            .unwrap()
            .eigenvalue;
        let robin = solve_transverse(&TransverseProblem::minus(beta, d, 5.0))
            .unwrap()
            .eigenvalue;
        let dirichlet = solve_transverse(&TransverseProblem::plus(beta, d))
            .unwrap()
            .eigenvalue;
        assert!(neumann < robin && robin < dirichlet);
    }

    #[test]
    fn out_of_regime_bracket_has_no_root() {
        let p = TransverseProblem::plus(0.1, 0.1);
        assert!(!p.regime().ok());
        let scan = solve_transverse_scan(&p).unwrap();
        assert_eq!(scan.n_negative, 1);
        assert!(scan.eigenvalue > p.lemma1_bracket()[1]);
    }

    #[test]
    fn shallow_plus_layer_has_no_bound_state() {
        // κ cosh κd = (2/β) sinh κd has no positive root when 2d/β ≤ 1
        let p = TransverseProblem::plus(1.0, 0.4);
        assert_eq!(p.count_negative(SCAN_POINTS), 0);
        assert!(matches!(
            solve_transverse_scan(&p),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn malformed_problems() {
        assert!(TransverseProblem::plus(0.0, 1.0).validate().is_err());
        assert!(TransverseProblem::minus(0.1, 1.0, -1.0).validate().is_err());
        let mut p = TransverseProblem::plus(0.1, 1.0);
        p.robin_theta = Some(1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn monotone_in_width() {
        let beta = 0.1;
        let mut last_plus = f64::INFINITY;
        let mut last_minus = f64::NEG_INFINITY;
        for i in 0..30 {
            let d = beta * (2.1 + 0.1 * i as f64);
            let tp = solve_transverse(&TransverseProblem::plus(beta, d))
                .unwrap()
                .eigenvalue;
            let tm = solve_transverse(&TransverseProblem::minus(beta, d, 0.0))
                .unwrap()
                .eigenvalue;
            assert!(tp <= last_plus);
            assert!(tm >= last_minus);
            last_plus = tp;
            last_minus = tm;
        }
    }
}
