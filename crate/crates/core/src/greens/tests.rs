use super::*;
use crate::jets::factorial;
use proptest::prelude::*;

fn lattice(l: f64, theta_deg: f64) -> LatticeParams {
    LatticeParams::new(l, 1.0, theta_deg.to_radians()).unwrap()
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300)
}

const GP1_CASE3: [f64; 7] = [
    4.58950048195501219e-3,
    2.87496335595375802e-4,
    5.34000711486795013e-5,
    8.04424950033509681e-6,
    1.81695856537581356e-6,
    3.85940236789484453e-7,
    1.01462745513845670e-7,
];

// Row 0 carries +i: the imaginary part of G_p at x2 = y2 is a positive sum
// over propagating orders (checked against the Rayleigh series below).
const GP2_CASE3: [(f64, f64); 7] = [
    (-0.10148304460596892, 0.11649959556341243),
    (-5.88756711758876006e-2, -3.95322400189610373e-2),
    (8.24086297547586832e-2, -8.78537553799451330e-3),
    (-0.35032102818994892, -5.41610922784728846e-2),
    (1.6836376976675680, -3.57408830289739771e-2),
    (-11.472945059000484, -0.86202109848301356),
    (90.557897453939248, 2.0012446753682651),
];

#[test]
fn case3_tables() {
    let p = lattice(2.2, 60.0);
    let cfg = EwaldConfig::tables(SplittingMode::Adaptive);
    let w = Jet::variable(8.3, 6);
    let g1 = greens_gp1([0.2, 0.0], &w, &p, &cfg).unwrap();
    let g2 = greens_gp2([0.2, 0.0], &w, &p, &cfg).unwrap();
    for i in 0..=6 {
        let d1 = g1.derivative(i);
        assert!((d1.re - GP1_CASE3[i]).abs() <= 1e-12 * GP1_CASE3[i].abs(), "gp1 {i}: {d1}");
        assert!(d1.im.abs() < 1e-15);
        let want = C64::new(GP2_CASE3[i].0, GP2_CASE3[i].1);
        assert!(close(g2.derivative(i), want, 1e-12), "gp2 {i}: {}", g2.derivative(i));
    }
}

#[test]
fn case2_breakdown() {
    let p = lattice(2.2, 60.0);
    let cfg = EwaldConfig::tables(SplittingMode::Optimal);
    let w = Jet::variable(8.3, 6);
    let g1 = greens_gp1([0.2, 0.0], &w, &p, &cfg).unwrap();
    let g2 = greens_gp2([0.2, 0.0], &w, &p, &cfg).unwrap();
    assert!(close(g1.value(), C64::new(926357099.71404386, 14101447.720421363), 1e-10));
    assert!(close(g2.value(), C64::new(-926357099.81093872, -14101447.603922084), 1e-10));
    assert!(close(g1.derivative(6), C64::new(67280503922051.898, -2384854546114.0361), 1e-10));
    // The sum survives the cancellation only to a few digits.
    let sum = g1.value() + g2.value();
    let want = C64::new(GP1_CASE3[0] + GP2_CASE3[0].0, GP2_CASE3[0].1);
    assert!((sum - want).norm() < 1e-4);
}

#[test]
fn adaptive_splitting_bounds_magnitudes() {
    let p = lattice(2.2, 60.0);
    let cfg = EwaldConfig::tables(SplittingMode::Adaptive);
    let w = Jet::variable(8.3, 6);
    let g1 = greens_gp1([0.2, 0.0], &w, &p, &cfg).unwrap();
    let g2 = greens_gp2([0.2, 0.0], &w, &p, &cfg).unwrap();
    for i in 0..=6 {
        assert!(g1.derivative(i).norm() < 1e3 && g2.derivative(i).norm() < 1e3);
    }
}

#[test]
fn splitting_parameter_examples() {
    let p = lattice(2.2, 60.0);
    let opt = EwaldConfig {
        mode: SplittingMode::Optimal,
        ..EwaldConfig::default()
    };
    let ada = EwaldConfig::default();
    assert!((splitting_parameter(1.3, &p, &opt) - 0.805660841320689).abs() < 1e-12);
    assert!((splitting_parameter(8.3, &p, &ada) - 7.19).abs() < 5e-3);
    assert_eq!(splitting_parameter(1.0, &p, &ada), splitting_parameter(1.0, &p, &opt));
}

#[test]
fn index_set_examples() {
    let p = lattice(4.0, 85.0);
    let s = spectral_index_set(&Jet::variable(0.95, 3), &p).unwrap();
    assert_eq!((s.m_min, s.m_max), (0, 0));

    let p = lattice(4.0, 90.0);
    let s = spectral_index_set(&Jet::variable(2.0, 2), &p).unwrap();
    let i0 = s.index(0).unwrap();
    assert!(s.beta.value().norm() < 1e-15);
    assert!(close(s.ktilde[i0].value(), C64::new(2.0, 0.0), 1e-15));
    let kt = ktilde_jet(&p, 3, 2.0, 2).unwrap();
    assert!(kt.value().re == 0.0 && kt.value().im > 0.0);
}

#[test]
fn index_set_refuses_wood_anomaly() {
    // Normal incidence, L = 4: the first anomaly is at omega = 2 pi / 4.
    let p = lattice(4.0, 90.0);
    let w = Jet::variable(std::f64::consts::FRAC_PI_2, 1);
    assert!(matches!(spectral_index_set(&w, &p), Err(Error::WoodAnomaly { .. })));
    let cfg = EwaldConfig::default();
    assert!(matches!(
        greens_periodic([0.1, 0.2], &w, &p, &cfg),
        Err(Error::WoodAnomaly { .. })
    ));
}

#[test]
fn case1_term_counts_grow_slowly_with_order() {
    let p = lattice(2.2, 60.0);
    let cfg = EwaldConfig::tables(SplittingMode::Optimal);
    let count = |order| {
        let gf = GreenFunction::new(p, 1.3, order, &cfg).unwrap();
        let mut out = GreenJets::new(order);
        let a = gf.gp1([0.2, 0.0], &mut out).unwrap();
        let b = gf.gp2([0.2, 0.0], &mut out).unwrap();
        a.spatial + b.spectral
    };
    let (c0, c6) = (count(0), count(6));
    assert!(c6 <= 2 * c0, "{c0} vs {c6}");
}

// Rayleigh expansion summed naively; independent of the evaluator.
fn rayleigh(p: &LatticeParams, omega: f64, d: [f64; 2]) -> C64 {
    let k = omega / p.c;
    let mut s = C64::new(0.0, 0.0);
    for m in -4000i64..=4000 {
        let xi = p.xi(m, omega);
        let kt2 = k * k - xi * xi;
        let kt = if kt2 >= 0.0 {
            C64::new(kt2.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-kt2).sqrt())
        };
        s += (C64::i() * (xi * d[0] + kt * d[1].abs())).exp() / kt;
    }
    s * C64::i() / (2.0 * p.l)
}

#[test]
fn ewald_matches_rayleigh_series() {
    for &(l, th, w, d) in &[
        (2.2, 60.0, 8.3, [0.2, 0.05]),
        (2.2, 60.0, 1.3, [0.7, -0.1]),
        (4.0, 90.0, 0.95, [-1.3, 0.3]),
        (4.0, 85.0, 1.9, [2.1, 0.02]),
    ] {
        let p = lattice(l, th);
        let cfg = EwaldConfig {
            trunc_rel_tol: 1e-14,
            spectral_min: 0.0,
            ..EwaldConfig::default()
        };
        let g = greens_periodic(d, &Jet::variable(w, 0), &p, &cfg).unwrap();
        let r = rayleigh(&p, w, d);
        assert!(close(g.value(), r, 1e-9), "{l} {w} {d:?}: {} vs {r}", g.value());
    }
    // Continuity in x2 fixes the sign of Im G_p at x2 = y2.
    let p = lattice(2.2, 60.0);
    let r = rayleigh(&p, 8.3, [0.2, 0.002]);
    assert!((r.im - 0.11649959556341243).abs() < 2e-3);
}

#[test]
fn spectral_path_matches_ewald() {
    let p = lattice(4.0, 80.0);
    let cfg = EwaldConfig {
        trunc_rel_tol: 1e-13,
        ..EwaldConfig::default()
    };
    let gf = GreenFunction::new(p, 1.7, 5, &cfg).unwrap();
    let mut a = GreenJets::new(5);
    let mut b = GreenJets::new(5);
    for d in [[0.3, 1.2], [-2.5, -1.1], [3.9, 2.4]] {
        gf.eval(d, &mut a, Method::Ewald).unwrap();
        gf.eval(d, &mut b, Method::Spectral).unwrap();
        for q in 0..6 {
            let scale = a.max_abs(q);
            for i in 0..=5 {
                assert!((a.parts[q][i] - b.parts[q][i]).norm() <= 1e-10 * scale, "{d:?} {q} {i}");
            }
        }
    }
}

#[test]
fn quasi_periodicity() {
    let p = lattice(2.2, 60.0);
    let cfg = EwaldConfig {
        trunc_rel_tol: 1e-15,
        ..EwaldConfig::default()
    };
    let w = Jet::variable(1.3, 3);
    let beta = Jet::affine(1.3, 3, C64::new(p.dbeta(), 0.0), C64::new(0.0, 0.0));
    let phase = beta.scale(C64::i()).exp();
    for d in [[0.2, 0.1], [-0.5, 0.9]] {
        let g = greens_periodic(d, &w, &p, &cfg).unwrap();
        let gs = greens_periodic([d[0] + p.l, d[1]], &w, &p, &cfg).unwrap();
        let want = &phase * &g;
        for i in 0..=3 {
            assert!(close(gs.coeffs()[i], want.coeffs()[i], 1e-11));
        }
    }
}

#[test]
fn theta90_symmetric_orders_coincide() {
    let p = lattice(4.0, 90.0);
    let cfg = EwaldConfig::default();
    let gf = GreenFunction::new(p, 1.1, 0, &cfg).unwrap();
    let mut a = GreenJets::new(0);
    let mut b = GreenJets::new(0);
    gf.eval([0.8, 0.0], &mut a, Method::Ewald).unwrap();
    gf.eval([-0.8, 0.0], &mut b, Method::Ewald).unwrap();
    assert!(close(a.parts[0][0], b.parts[0][0], 1e-13));
}

#[test]
fn frequency_derivatives_match_finite_differences() {
    let p = lattice(4.0, 75.0);
    let cfg = EwaldConfig {
        trunc_rel_tol: 1e-15,
        spectral_min: 0.0,
        ..EwaldConfig::default()
    };
    let d = [0.9, 0.4];
    let w0 = 0.9;
    let jet = greens_periodic(d, &Jet::variable(w0, 2), &p, &cfg).unwrap();
    let f = |w: f64| greens_periodic(d, &Jet::variable(w, 0), &p, &cfg).unwrap().value();
    let fd1 = |h: f64| (f(w0 + h) - f(w0 - h)) / (2.0 * h);
    let fd2 = |h: f64| (f(w0 + h) - 2.0 * f(w0) + f(w0 - h)) / (h * h);
    let h = 1e-3;
    let d1 = (4.0 * fd1(h / 2.0) - fd1(h)) / 3.0;
    let d2 = (4.0 * fd2(h / 2.0) - fd2(h)) / 3.0;
    assert!(close(jet.derivative(1), d1, 1e-8));
    assert!(close(jet.derivative(2), d2, 1e-5));
}

#[test]
fn spatial_derivatives_match_finite_differences() {
    let p = lattice(4.0, 70.0);
    let cfg = EwaldConfig {
        trunc_rel_tol: 1e-15,
        ..EwaldConfig::default()
    };
    let gf = GreenFunction::new(p, 1.4, 1, &cfg).unwrap();
    let mut g = GreenJets::new(1);
    let eval = |d: [f64; 2], part: usize| {
        let mut t = GreenJets::new(1);
        gf.eval(d, &mut t, Method::Auto).unwrap();
        (t.parts[part][0], t.parts[part][1])
    };
    let rich = |d: [f64; 2], part: usize, axis: usize| {
        let fd = |h: f64| {
            let mut a = d;
            let mut b = d;
            a[axis] += h;
            b[axis] -= h;
            let (fa, ga) = eval(a, part);
            let (fb, gb) = eval(b, part);
            ((fa - fb) / (2.0 * h), (ga - gb) / (2.0 * h))
        };
        let (a1, b1) = fd(1e-3);
        let (a2, b2) = fd(5e-4);
        ((4.0 * a2 - a1) / 3.0, (4.0 * b2 - b1) / 3.0)
    };
    // Both sides of the spectral-path threshold.
    for d in [[0.4, 0.3], [-1.1, 1.6]] {
        gf.eval(d, &mut g, Method::Auto).unwrap();
        for (part, axis, target) in [(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 4), (2, 1, 5)] {
            let (v, dv) = rich(d, part, axis);
            assert!(close(g.parts[target][0], v, 1e-7), "{d:?} {target}");
            assert!(close(g.parts[target][1], dv, 1e-6), "{d:?} {target} deriv");
        }
    }
}

#[test]
fn kernel_with_zero_alpha_is_normal_derivative() {
    let p = lattice(4.0, 80.0);
    let cfg = EwaldConfig::default();
    let w = Jet::variable(1.0, 2);
    let zero = Jet::zero(1.0, 2);
    let ny = [0.6, 0.8];
    let k = greens_kernel_derivs([0.3, 0.2], [-0.1, -0.4], [1.0, 0.0], ny, &w, &zero, &p, &cfg).unwrap();
    let gf = GreenFunction::new(p, 1.0, 2, &cfg).unwrap();
    let mut g = GreenJets::new(2);
    gf.eval([0.4, 0.6], &mut g, Method::Auto).unwrap();
    let mut want = vec![C64::new(0.0, 0.0); 3];
    normal_derivative_y(&g, ny, &mut want);
    for (a, b) in k.coeffs().iter().zip(&want) {
        assert!(close(*a, *b, 1e-14));
    }
}

#[test]
fn truncation_independence() {
    let p = lattice(2.2, 60.0);
    let w = Jet::variable(2.5, 4);
    for tol in [1e-8, 1e-11] {
        let a = EwaldConfig {
            trunc_rel_tol: tol,
            spectral_min: 0.0,
            ..EwaldConfig::default()
        };
        let b = EwaldConfig {
            trunc_rel_tol: tol / 2.0,
            ..a
        };
        let ga = greens_periodic([0.3, 0.1], &w, &p, &a).unwrap();
        let gb = greens_periodic([0.3, 0.1], &w, &p, &b).unwrap();
        for i in 0..=4 {
            assert!((ga.coeffs()[i] - gb.coeffs()[i]).norm() <= 10.0 * tol * gb.max_abs());
        }
    }
}

#[test]
fn lattice_image_is_rejected() {
    let p = lattice(2.0, 60.0);
    let cfg = EwaldConfig {
        spectral_min: 0.0,
        ..EwaldConfig::default()
    };
    let r = greens_gp1([2.0, 0.0], &Jet::variable(1.0, 0), &p, &cfg);
    assert!(matches!(r, Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn splitting_invariance(
        w in 0.3f64..3.0,
        th in 40.0f64..90.0,
        d1 in -2.0f64..2.0,
        d2 in -0.9f64..0.9,
    ) {
        let p = lattice(4.0, th);
        let cfg = EwaldConfig { trunc_rel_tol: 1e-15, spectral_min: 0.0, ..EwaldConfig::default() };
        let e = splitting_parameter(w, &p, &cfg);
        let a = GreenFunction::with_splitting(p, w, 6, &cfg, e);
        let b = GreenFunction::with_splitting(p, w, 6, &cfg, 1.5 * e);
        prop_assume!(a.is_ok() && b.is_ok());
        prop_assume!(d1.hypot(d2) > 1e-3);
        let (a, b) = (a.unwrap(), b.unwrap());
        let mut ga = GreenJets::new(6);
        let mut gb = GreenJets::new(6);
        a.eval([d1, d2], &mut ga, Method::Ewald).unwrap();
        b.eval([d1, d2], &mut gb, Method::Ewald).unwrap();
        for i in 0..=6 {
            let (x, y) = (ga.parts[0][i] * factorial(i), gb.parts[0][i] * factorial(i));
            prop_assert!((x - y).norm() <= 1e-9 * y.norm().max(1e-3), "{} {} {}", i, x, y);
        }
    }
}

fn cell_vs_ewald(p: LatticeParams, omega: f64, points: &[[f64; 2]]) -> f64 {
    let mut cfg = EwaldConfig::default();
    let cell = CellExpansion::new(&p, omega, &cfg).unwrap().unwrap();
    cfg.trunc_rel_tol = 1e-14;
    let gf = GreenFunction::new(p, omega, 0, &cfg).unwrap();
    let mut a = GreenJets::new(0);
    let mut b = GreenJets::new(0);
    let mut worst = 0.0f64;
    for &d in points {
        assert!(cell.eval(d, &mut a).unwrap(), "{d:?} outside the cell radius");
        gf.eval(d, &mut b, Method::Ewald).unwrap();
        let scale = (0..6).fold(0.0f64, |m, i| m.max(b.parts[i][0].norm()));
        for i in 0..6 {
            worst = worst.max((a.parts[i][0] - b.parts[i][0]).norm() / scale);
        }
    }
    worst
}

fn cell_points(l: f64) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    for i in 0..40 {
        let t = i as f64 * 0.7;
        let r = 0.44 * l * ((i * 13 % 40) as f64 + 0.5) / 40.0;
        let shift = ((i % 5) as f64 - 2.0) * l;
        pts.push([shift + r * t.cos(), r * t.sin()]);
    }
    pts.push([1e-3, 2e-3]);
    pts
}

#[test]
fn cell_expansion_matches_ewald() {
    let cases = [
        (lattice(4.0, 90.0), 0.5),
        (lattice(4.0, 90.0), 1.9),
        (lattice(4.0, 85.0), 0.95),
        (lattice(2.2, 60.0), 2.0),
        (lattice(2.2, 60.0), 8.3),
        (lattice(1.0, 30.0), 1e-3),
    ];
    for (p, omega) in cases {
        let err = cell_vs_ewald(p, omega, &cell_points(p.l));
        assert!(err < 1e-11, "L={} omega={omega}: {err:e}", p.l);
    }
}

#[test]
fn cell_expansion_near_bessel_zeros() {
    // k L/2 at the first zeros of J_0 and J_1.
    let p = lattice(4.0, 70.0);
    for x in [2.404825557695773, 3.831705970207512] {
        let err = cell_vs_ewald(p, x / 2.0, &cell_points(4.0));
        assert!(err < 1e-11, "k rho0 = {x}: {err:e}");
    }
}

#[test]
fn cell_expansion_declines_outside() {
    let p = lattice(4.0, 90.0);
    let cell = CellExpansion::new(&p, 1.0, &EwaldConfig::default()).unwrap().unwrap();
    let mut g = GreenJets::new(0);
    assert!(!cell.eval([0.0, 1.9], &mut g).unwrap());
    assert!(!cell.eval([8.0, 0.0], &mut g).unwrap());
    assert!(cell.eval([8.0, 0.3], &mut g).unwrap());
    assert!(cell.eval([0.1, 0.0], &mut GreenJets::new(1)).is_err());
    assert!(CellExpansion::new(&p, 30.0, &EwaldConfig::default()).unwrap().is_none());
}
