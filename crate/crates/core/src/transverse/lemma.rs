use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    lemma1_gap, solve_transverse, solve_transverse_scan, TransverseProblem, TransverseResult,
};
use crate::error::{Error, Result};
use crate::quadrature::Composite;

/// Relative slack allowed in each inequality of the Lemma 1 chain.
pub const LEMMA1_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub beta: f64,
    pub d: f64,
    pub in_regime: bool,
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub n_negative_minus: usize,
    pub n_negative_plus: usize,
    /// Slacks of `lower ≤ t₋`, `t₋ ≤ -4/β²`, `-4/β² ≤ t₊`, `t₊ ≤ upper`.
    pub slack: [f64; 4],
    /// `|t ± 4/β²| β² e^{4d/β}` for the minus and plus eigenvalues.
    pub constant: [f64; 2],
    pub pass: bool,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub theta: f64,
    pub rows: Vec<Lemma1Row>,
    pub out_of_regime: usize,
    pub failures: usize,
    /// Largest observed constant in place of 16, over in-regime rows.
    pub observed_constant: f64,
}

impl Lemma1Report {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &Lemma1Row> {
        self.rows.iter().filter(|r| r.in_regime && !r.pass)
    }
}

fn lemma1_row(beta: f64, ratio: f64, theta: f64) -> Lemma1Row {
    let d = ratio * beta;
    let base = -4.0 / (beta * beta);
    let gap = lemma1_gap(beta, d);
    let plus = TransverseProblem::plus(beta, d);
    let minus = TransverseProblem::minus(beta, d, theta);
    let in_regime = plus.regime().width_ratio;
    let solve = |p: &TransverseProblem| -> Result<TransverseResult> {
        if in_regime {
            solve_transverse(p)
        } else {
            solve_transverse_scan(p)
        }
    };
    let rp = solve(&plus);
    let rm = solve(&minus);
    let mut row = Lemma1Row {
        beta,
        d,
        in_regime,
        t_minus: rm.as_ref().ok().map(|r| r.eigenvalue),
        t_plus: rp.as_ref().ok().map(|r| r.eigenvalue),
        lower: base - gap,
        upper: base + gap,
        n_negative_minus: minus.count_negative(super::SCAN_POINTS),
        n_negative_plus: plus.count_negative(super::SCAN_POINTS),
        slack: [f64::NAN; 4],
        constant: [f64::NAN; 2],
        pass: false,
        message: None,
    };
    match (rm, rp) {
        (Ok(m), Ok(p)) => {
            let (tm, tp) = (m.eigenvalue, p.eigenvalue);
            row.slack = [tm - (base - gap), base - tm, tp - base, base + gap - tp];
            let scale = beta * beta * (4.0 * d / beta).exp();
            row.constant = [(base - tm) * scale, (tp - base) * scale];
            let within = |s: f64, t: f64| s >= -LEMMA1_SLACK * t.abs();
            row.pass = within(row.slack[0], tm)
                && within(row.slack[1], tm)
                && within(row.slack[2], tp)
                && within(row.slack[3], tp)
                && row.n_negative_minus == 1
                && row.n_negative_plus == 1;
        }
        (m, p) => {
            let errs: Vec<String> = [m.err(), p.err()]
                .into_iter()
                .flatten()
                .map(|e| e.to_string())
                .collect();
            row.message = Some(errs.join("; "));
        }
    }
    if !in_regime {
        row.message
            .get_or_insert_with(|| format!("d/β = {ratio} ≤ 2: outside the validity regime"));
    }
    row
}

/// Checks the chain `-4/β² - g ≤ t₋ ≤ -4/β² ≤ t₊ ≤ -4/β² + g`,
/// `g = 16 e^{-4d/β}/β²`, with one negative eigenvalue per variant, on the
/// grid `β × (d/β)`. Points with `d/β ≤ 2` are reported but not asserted.
pub fn verify_lemma1(betas: &[f64], width_ratios: &[f64], theta: f64) -> Lemma1Report {
    let points: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| width_ratios.iter().map(move |&r| (b, r)))
        .collect();
    let rows: Vec<Lemma1Row> = points
        .par_iter()
        .map(|&(b, r)| lemma1_row(b, r, theta))
        .collect();
    let out_of_regime = rows.iter().filter(|r| !r.in_regime).count();
    let failures = rows.iter().filter(|r| r.in_regime && !r.pass).count();
    let observed_constant = rows
        .iter()
        .filter(|r| r.in_regime)
        .flat_map(|r| r.constant)
        .filter(|c| c.is_finite())
        .fold(0.0, f64::max);
    Lemma1Report {
        theta,
        rows,
        out_of_regime,
        failures,
        observed_constant,
    }
}

/// Trial function on `(-d, 0) ∪ (0, d)`: on each side a cubic in `u/d` plus
/// a decaying exponential `b e^{-c|u|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormTrial {
    pub left: [f64; 6],
    pub right: [f64; 6],
}

impl FormTrial {
    /// Continuous trial (no jump at the origin).
    pub fn continuous(poly: [f64; 4]) -> Self {
        Self {
            left: [poly[0], -poly[1], poly[2], -poly[3], 0.0, 0.0],
            right: [poly[0], poly[1], poly[2], poly[3], 0.0, 0.0],
        }
    }

    fn random(rng: &mut impl Rng, beta: f64) -> Self {
        let mut side = || {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..4.0 / beta),
            ]
        };
        Self {
            left: side(),
            right: side(),
        }
    }

    /// Value and derivative at `u`; the left side is evaluated in `|u|`
    /// so both sides share the same parametrization.
    pub fn eval(&self, u: f64, d: f64) -> (f64, f64) {
        let (c, sign) = if u < 0.0 {
            (&self.left, -1.0)
        } else {
            (&self.right, 1.0)
        };
        let x = u.abs() / d;
        let poly = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let dpoly = (c[1] + x * (2.0 * c[2] + 3.0 * x * c[3])) / d;
        let e = c[4] * (-c[5] * u.abs()).exp();
        (poly + e, sign * (dpoly - c[5] * e))
    }

    pub fn jump(&self) -> f64 {
        (self.right[0] + self.right[4]) - (self.left[0] + self.left[4])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialSet {
    Random { count: usize, seed: u64 },
    Explicit(Vec<FormTrial>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormReport {
    pub beta: f64,
    pub d: f64,
    pub bound: f64,
    pub trials: usize,
    pub violations: usize,
    /// Smallest `R(f) - bound` over trials, with `R` the Rayleigh quotient.
    pub min_margin: f64,
    pub t_minus_neumann: f64,
    pub neumann_respects_bound: bool,
    /// Relative mismatch between the Rayleigh quotient of the Neumann ground
    /// state and its eigenvalue.
    pub ground_state_error: f64,
}

impl FormReport {
    pub fn ok(&self, saturation_tol: f64) -> bool {
        self.violations == 0
            && self.neumann_respects_bound
            && self.ground_state_error < saturation_tol
    }
}

fn rayleigh(q: &Composite, beta: f64, jump: f64, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let mut grad = 0.0;
    let mut norm = 0.0;
    for (&u, &w) in q.points.iter().zip(&q.weights) {
        let (v, dv) = f(u);
        grad += w * dv * dv;
        norm += w * v * v;
    }
    (grad - jump * jump / beta, norm)
}

/// Checks `∫|f'|² - |f(0+) - f(0-)|²/β ≥ (-4/β² - 16 e^{-4d/β}/β²) ‖f‖²`
/// for every trial, that the Neumann eigenvalue respects the same bound, and
/// that the Neumann ground state saturates its own Rayleigh quotient.
pub fn check_form_inequality(beta: f64, d: f64, trials: &TrialSet) -> Result<FormReport> {
    if !(beta > 0.0 && d > 0.0) {
        return Err(Error::Domain(format!(
            "need beta, d > 0, got ({beta}, {d})"
        )));
    }
    if d / beta <= 2.0 {
        return Err(Error::Regime(format!("d/β = {} ≤ 2", d / beta)));
    }
    let bound = -4.0 / (beta * beta) - lemma1_gap(beta, d);
    let set: Vec<FormTrial> = match trials {
        TrialSet::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| FormTrial::random(&mut rng, beta))
                .collect()
        }
        TrialSet::Explicit(v) => v.clone(),
    };
    let panels = 64;
    let qr = Composite::new(0.0, d, panels, 16);
    let ql = Composite::new(-d, 0.0, panels, 16);
    let both = Composite {
        points: ql.points.iter().chain(&qr.points).copied().collect(),
        weights: ql.weights.iter().chain(&qr.weights).copied().collect(),
    };
    let margins: Vec<f64> = set
        .par_iter()
        .map(|t| {
            let (num, norm) = rayleigh(&both, beta, t.jump(), |u| t.eval(u, d));
            num / norm - bound
        })
        .collect();
    let tol = LEMMA1_SLACK * bound.abs();
    let violations = margins.iter().filter(|m| **m < -tol).count();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);

    let neumann = solve_transverse(&TransverseProblem::minus(beta, d, 0.0))?;
    let k = neumann.kappa;
    let ground = |u: f64| {
        let s = u.signum();
        let r = k * (d - u.abs());
        (s * r.cosh(), -k * r.sinh())
    };
    let (num, norm) = rayleigh(&both, beta, 2.0 * (k * d).cosh(), ground);
    let ground_state_error = ((num / norm) - neumann.eigenvalue).abs() / neumann.eigenvalue.abs();

    Ok(FormReport {
        beta,
        d,
        bound,
        trials: set.len(),
        violations,
        min_margin,
        t_minus_neumann: neumann.eigenvalue,
        neumann_respects_bound: neumann.eigenvalue >= bound - tol,
        ground_state_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_grid_reports_out_of_regime() {
        let r = verify_lemma1(&[0.1], &[1.0, 5.0], 0.0);
        assert_eq!(r.out_of_regime, 1);
        assert!(r.rows[0].message.as_deref().unwrap().contains("outside"));
        assert!(r.rows[1].pass);
    }

    #[test]
    fn bracket_width_formula() {
        let r = verify_lemma1(&[0.2], &[2.5], 0.0);
        let row = &r.rows[0];
        let width = 16.0 * (-10.0f64).exp() / 0.04;
        assert!(((row.upper - row.lower) - 2.0 * width).abs() < 1e-12 * width);
    }

    #[test]
    fn continuous_trial_is_nonnegative() {
        let trial = FormTrial::continuous([1.0, 0.5, -0.3, 0.2]);
        assert_eq!(trial.jump(), 0.0);
        let r = check_form_inequality(0.1, 0.3, &TrialSet::Explicit(vec![trial])).unwrap();
        assert!(r.min_margin + r.bound >= 0.0);
    }

    #[test]
    fn random_trials_and_saturation() {
        let r = check_form_inequality(
            0.1,
            0.3,
            &TrialSet::Random {
                count: 200,
                seed: 7,
            },
        )
        .unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.neumann_respects_bound);
        assert!(r.ground_state_error < 1e-8, "{}", r.ground_state_error);
    }

    #[test]
    fn trial_derivative_matches_difference_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = FormTrial::random(&mut rng, 0.1);
        for u in [-0.2, -0.05, 0.07, 0.25] {
            let h = 1e-6;
            let fd = (t.eval(u + h, 0.3).0 - t.eval(u - h, 0.3).0) / (2.0 * h);
            assert!((fd - t.eval(u, 0.3).1).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}
