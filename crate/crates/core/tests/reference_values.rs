//! Values frozen from a 40-digit evaluation of the matching conditions:
//! `κ = (2/β) tanh κd` (Dirichlet ends), `κ(κT + θ)/(κ + θT) = 2/β` with
//! `T = tanh κd` (Robin ends), and for the sphere
//! `i′_l k_l − k′_l i_l + βκ i′_l k′_l = 0` at `z = κR` with the Wronskian
//! evaluated numerically.

use deltalayer::asymptotics::essential_threshold;
use deltalayer::geometry::{check_xi_bounds, geometry_jet, layer_jet, sup_norms};
use deltalayer::sphere::{form_bound, sphere_eigenvalues};
use deltalayer::{solve_transverse, Surface, TransverseProblem};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn dirichlet_transverse_roots() {
    for (beta, d, expected) in [
        (0.1, 0.3, -399.990_167_931_110_016_83),
        (0.05, 0.15, -1_599.960_671_724_440_067_3),
        (0.2, 0.5, -99.981_825_168_932_774_415),
    ] {
        let t = solve_transverse(&TransverseProblem::plus(beta, d))
            .unwrap()
            .eigenvalue;
        assert!(rel(t, expected) < 1e-13, "β={beta}: {t} vs {expected}");
    }
}

#[test]
fn robin_transverse_roots() {
    for (beta, d, theta, expected) in [
        (0.1, 0.3, 0.0, -400.009_829_411_195_125_89),
        (0.1, 0.3, 0.3, -400.009_538_928_238_47),
        (0.05, 0.2, 1.5, -1_600.000_668_158_569_634),
    ] {
        let t = solve_transverse(&TransverseProblem::minus(beta, d, theta))
            .unwrap()
            .eigenvalue;
        assert!(
            rel(t, expected) < 1e-13,
            "β={beta} θ={theta}: {t} vs {expected}"
        );
    }
}

#[test]
fn sphere_levels() {
    let table = [
        (
            1.0,
            0.1,
            [
                -401.997_512_422_417_757_6,
                -399.979_998_749_849_937_4,
                -395.945_244_446_681_587_84,
            ],
        ),
        (
            1.0,
            0.05,
            [
                -1_601.999_375_780_031_251_5,
                -1_599.994_999_980_468_425_9,
                -1_595.986_264_946_837_984_5,
            ],
        ),
        (
            2.0,
            0.1,
            [
                -400.499_843_945_007_812_87,
                -399.998_749_995_117_106_47,
                -398.996_566_236_709_496_12,
            ],
        ),
    ];
    for (radius, beta, expected) in table {
        let spectrum = sphere_eigenvalues(radius, beta, 2).unwrap();
        for (l, e) in expected.iter().enumerate() {
            let got = spectrum.level(l).unwrap().eigenvalue;
            assert!(
                rel(got, *e) < 1e-12,
                "R={radius} β={beta} l={l}: {got} vs {e}"
            );
        }
    }
}

#[test]
fn transverse_bracket_endpoints() {
    let t = solve_transverse(&TransverseProblem::plus(0.1, 0.3)).unwrap();
    assert!((t.lemma1_bracket[0] + 400.0).abs() < 1e-12);
    assert!((t.lemma1_bracket[1] - (-400.0 + 1600.0 * (-12.0f64).exp())).abs() < 1e-12);
    let lower = essential_threshold(0.1, 0.3).unwrap();
    assert!((lower + 400.009_830_739_765_33).abs() < 1e-10);
}

#[test]
fn torus_curvatures_at_outer_equator() {
    let torus = Surface::Torus {
        major: 3.0,
        minor: 1.0,
    };
    let jet = geometry_jet(&torus, [0.0, 1.234]).unwrap();
    assert!((jet.gauss - 0.25).abs() < 1e-14);
    assert!((jet.mean.abs() - 0.625).abs() < 1e-14);
    let norms = sup_norms(&torus, 64).unwrap();
    assert!((norms.rho - 1.0).abs() < 1e-12);
}

#[test]
fn sphere_layer_range() {
    let sphere = Surface::Sphere { radius: 1.0 };
    let norms = sup_norms(&sphere, 16).unwrap();
    let r = check_xi_bounds(&sphere, &norms, 0.3, 16).unwrap();
    assert!(r.ok());
    assert!((r.c_minus - 0.49).abs() < 1e-12 && (r.c_plus - 1.69).abs() < 1e-12);
    assert!((r.min_xi - 0.49).abs() < 1e-12 && (r.max_xi - 1.69).abs() < 1e-12);
    let inside = layer_jet(&sphere, [1.0, 0.0], -0.1, 0.3).unwrap();
    assert!((inside.xi - 0.81).abs() < 1e-14);
}

#[test]
fn sphere_characteristic_bound() {
    let bound = form_bound(&Surface::Sphere { radius: 1.0 }, 0.1, 256).unwrap();
    assert!((bound + 30.0).abs() < 1e-6, "{bound}");
}
