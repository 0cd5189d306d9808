use deltalayer::asymptotics::BracketContext;
use deltalayer::effective::{
    assemble_s, assemble_u, eigen_lowest, estimate_v_pm, Sign, SpectrumSource, SurfaceMesh,
};
use deltalayer::geometry::{
    geometry_jet, layer_jet, sup_norms, ChartDomain, FdChart, SurfaceChart,
};
use deltalayer::sphere::{secular_function, secular_function_l0, sphere_eigenvalues};
use deltalayer::transverse::{check_form_inequality, TrialSet};
use deltalayer::{fd_oracle, solve_transverse, Surface, TransverseProblem};
use proptest::prelude::*;

fn surfaces() -> impl Strategy<Value = Surface> {
    prop_oneof![
        (0.3f64..5.0).prop_map(|radius| Surface::Sphere { radius }),
        (1.5f64..6.0, 0.2f64..0.9).prop_map(|(major, f)| Surface::Torus {
            major,
            minor: f * major * 0.6
        }),
        (-3.0f64..3.0, 0.5f64..2.0).prop_map(|(height, sigma)| Surface::Bump {
            height,
            sigma,
            truncation: 10.0
        }),
    ]
}

fn interior(surface: &Surface, a: f64, b: f64) -> [f64; 2] {
    let [x, y] = surface.domain().axes;
    [x.lo + (0.02 + 0.96 * a) * x.length(), y.lo + b * y.length()]
}

/// Eigenvalues of `g⁻¹G` for 2×2 symmetric matrices.
fn pencil(big: &[[f64; 2]; 2], g: &[[f64; 2]; 2]) -> (f64, f64) {
    let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    let p00 = (g[1][1] * big[0][0] - g[0][1] * big[1][0]) / det;
    let p01 = (g[1][1] * big[0][1] - g[0][1] * big[1][1]) / det;
    let p10 = (-g[1][0] * big[0][0] + g[0][0] * big[1][0]) / det;
    let p11 = (-g[1][0] * big[0][1] + g[0][0] * big[1][1]) / det;
    let mid = 0.5 * (p00 + p11);
    let rad = (0.25 * (p00 - p11).powi(2) + p01 * p10).max(0.0).sqrt();
    (mid - rad, mid + rad)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curvature_identities(surface in surfaces(), a in 0.0f64..1.0, b in 0.0f64..1.0, w in -1.0f64..1.0) {
        let s = interior(&surface, a, b);
        let jet = geometry_jet(&surface, s).unwrap();
        let split = (jet.principal[0] - jet.principal[1]).powi(2) / 4.0;
        prop_assert!((jet.effective_potential() + split).abs() < 1e-10);
        prop_assert!(jet.effective_potential() <= 1e-12);

        let rho = 1.0 / jet.principal[0].abs().max(jet.principal[1].abs()).max(1e-12);
        let d = 0.5 * rho.min(2.0);
        let layer = layer_jet(&surface, s, w * d, d).unwrap();
        let expected = jet.metric_det * layer.xi * layer.xi;
        prop_assert!((layer.metric_det - expected).abs() <= 1e-10 * expected);
        let (lo, hi) = pencil(&layer.metric, &jet.metric);
        let (cm, cp) = ((1.0 - d / rho).powi(2), (1.0 + d / rho).powi(2));
        prop_assert!(lo >= cm * (1.0 - 1e-10) && hi <= cp * (1.0 + 1e-10), "{lo} {hi} vs [{cm}, {cp}]");
    }

    #[test]
    fn curvatures_do_not_depend_on_the_chart(major in 2.0f64..5.0, minor in 0.3f64..1.5, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let torus = Surface::Torus { major, minor };
        let domain = torus.domain();
        let swapped = FdChart::new(
            "torus-swapped",
            ChartDomain { kind: domain.kind, axes: [domain.axes[1], domain.axes[0]] },
            move |s: [f64; 2]| torus.point([s[1], s[0]]),
        );
        let s = interior(&torus, a, b);
        let direct = geometry_jet(&torus, s).unwrap();
        let other = geometry_jet(&swapped, [s[1], s[0]]).unwrap();
        prop_assert!((direct.gauss - other.gauss).abs() < 1e-6);
        prop_assert!((direct.mean.abs() - other.mean.abs()).abs() < 1e-6);
    }

    #[test]
    fn one_negative_transverse_eigenvalue(beta in 0.005f64..0.2, ratio in 2.05f64..12.0, bt in 0.0f64..0.9) {
        let d = ratio * beta;
        let theta = bt / beta;
        for p in [TransverseProblem::plus(beta, d), TransverseProblem::minus(beta, d, theta)] {
            prop_assert_eq!(p.count_negative(10_000), 1);
            let t = solve_transverse(&p).unwrap();
            prop_assert!(t.eigenvalue < 0.0);
            prop_assert_eq!(t.n_negative, 1);
        }
    }

    #[test]
    fn transverse_eigenvalues_are_monotone_in_width(beta in 0.01f64..0.2, r1 in 2.1f64..8.0, dr in 0.05f64..4.0, theta in 0.0f64..5.0) {
        let (d1, d2) = (r1 * beta, (r1 + dr) * beta);
        let plus = |d| solve_transverse(&TransverseProblem::plus(beta, d)).unwrap().eigenvalue;
        let minus = |d| solve_transverse(&TransverseProblem::minus(beta, d, theta)).unwrap().eigenvalue;
        let tol = 1e-12 * 4.0 / (beta * beta);
        prop_assert!(plus(d2) <= plus(d1) + tol);
        prop_assert!(minus(d2) >= minus(d1) - tol);
    }

    #[test]
    fn interface_mean_leaves_roots_unchanged(beta in 0.01f64..0.2, ratio in 2.1f64..10.0, m in -3.0f64..3.0) {
        let d = ratio * beta;
        for p in [TransverseProblem::plus(beta, d), TransverseProblem::minus(beta, d, 0.7)] {
            let a = solve_transverse(&p).unwrap().eigenvalue;
            let b = solve_transverse(&p.clone().with_interface_mean(m)).unwrap().eigenvalue;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn sphere_l0_closed_form(radius in 0.3f64..5.0, beta in 0.01f64..1.0, x in 0.05f64..3.0) {
        let kappa = x * 2.0 / beta;
        let generic = secular_function(0, radius, beta, kappa);
        let closed = secular_function_l0(radius, beta, kappa);
        prop_assert!((generic - closed).abs() <= 1e-12 * (1.0 + generic.abs()));
    }

    #[test]
    fn sphere_levels_expand_by_multiplicity(radius in 0.5f64..3.0, beta in 0.01f64..0.3) {
        let s = sphere_eigenvalues(radius, beta, 5).unwrap();
        let expanded = s.expanded();
        prop_assert_eq!(expanded.len(), s.levels.iter().map(|l| 2 * l.l + 1).sum::<usize>());
        prop_assert!(expanded.windows(2).all(|w| w[0] <= w[1]));
        for level in &s.levels {
            prop_assert_eq!(level.multiplicity, 2 * level.l + 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn finite_differences_converge(beta in 0.02f64..0.2, ratio in 2.5f64..10.0, n in 400usize..2000, robin in any::<bool>()) {
        let d = ratio * beta;
        let p = if robin { TransverseProblem::minus(beta, d, 0.3) } else { TransverseProblem::plus(beta, d) };
        let exact = solve_transverse(&p).unwrap().eigenvalue;
        let fd = fd_oracle(&p, n).unwrap();
        prop_assert!((fd - exact).abs() / exact.abs() <= 5e3 / (n * n) as f64);
    }

    #[test]
    fn bracketing_operators_are_ordered(d in 0.01f64..0.6) {
        let torus = Surface::Torus { major: 3.0, minor: 1.0 };
        let mesh = SurfaceMesh::new(&torus, 12).unwrap();
        let norms = sup_norms(&torus, 16).unwrap();
        let v = estimate_v_pm(&torus, d, 8).unwrap();
        let mu = eigen_lowest(&assemble_s(&mesh).unwrap(), 3).unwrap();
        let lower = eigen_lowest(&assemble_u(&mesh, d, Sign::Minus, &norms, v.pair()).unwrap(), 3).unwrap();
        let upper = eigen_lowest(&assemble_u(&mesh, d, Sign::Plus, &norms, v.pair()).unwrap(), 3).unwrap();
        for j in 0..3 {
            prop_assert!(lower[j] <= mu[j] + 1e-9 && mu[j] <= upper[j] + 1e-9, "j={j}: {} {} {}", lower[j], mu[j], upper[j]);
        }
    }

    #[test]
    fn trial_quotients_bound_the_ground_state(seed in any::<u64>()) {
        let torus = Surface::Torus { major: 3.0, minor: 1.0 };
        let op = assemble_s(&SurfaceMesh::new(&torus, 12).unwrap()).unwrap();
        let mu0 = eigen_lowest(&op, 1).unwrap()[0];
        let mut state = seed | 1;
        let x: Vec<f64> = (0..op.size())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.3
            })
            .collect();
        prop_assert!(op.rayleigh_quotient(&x) >= mu0 - 1e-12);
    }

    #[test]
    fn random_trials_respect_the_form_bound(seed in any::<u64>(), beta in 0.02f64..0.2, ratio in 2.5f64..6.0) {
        let report = check_form_inequality(beta, ratio * beta, &TrialSet::Random { count: 25, seed }).unwrap();
        prop_assert_eq!(report.violations, 0);
    }

    #[test]
    fn bracket_rows_stay_in_regime(beta in 0.005f64..0.13) {
        let ctx = BracketContext::new(Surface::Sphere { radius: 1.0 }, SpectrumSource::Analytic, 16).unwrap();
        let b = ctx.bracket(beta, 2).unwrap();
        prop_assert!(b.regime.width_ratio > 2.0 && b.regime.coupling < 1.0 && b.regime.in_regime);
        prop_assert!(b.t_minus <= b.t_plus);
    }
}
