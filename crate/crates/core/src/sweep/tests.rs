use super::*;
use crate::pade::fit;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::cell::Cell;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Mode-0 amplitude from a jet function; other propagating modes are dark.
struct Synthetic<F> {
    f: F,
    params: LatticeParams,
    calls: Cell<usize>,
}

impl<F: Fn(&Jet) -> Jet> Synthetic<F> {
    fn new(f: F, params: LatticeParams) -> Self {
        Self { f, params, calls: Cell::new(0) }
    }
}

impl<F: Fn(&Jet) -> Jet> CentreSolver for Synthetic<F> {
    fn solve(&self, omega: f64, order: usize) -> Result<CentreData> {
        self.calls.set(self.calls.get() + 1);
        let (lo, hi) = self.params.mode_range(omega);
        let w = Jet::variable(omega, order);
        let modes: Vec<i64> = (lo..=hi).collect();
        let transmitted = modes.iter().map(|&m| if m == 0 { (self.f)(&w) } else { Jet::zero(omega, order) }).collect();
        let reflected = modes.iter().map(|_| Jet::zero(omega, order)).collect();
        Ok(CentreData {
            modes,
            transmitted,
            reflected,
        })
    }
}

fn normal() -> LatticeParams {
    LatticeParams::new(4.0, 1.0, PI / 2.0).unwrap()
}

fn cfg(i_min: f64, i_max: f64) -> SweepConfig {
    SweepConfig {
        m: 2,
        n: 2,
        eps_t: 1e-3,
        i_min,
        i_max,
    }
}

fn check_cover(p: &BandPartition) {
    assert_eq!(p.borders[0], p.band[0]);
    assert_eq!(*p.borders.last().unwrap(), p.band[1]);
    assert_eq!(p.borders.len(), p.centres.len() + 1);
    assert_eq!(p.families.len(), p.centres.len());
    for (i, c) in p.centres.iter().enumerate() {
        assert!(p.borders[i] < p.borders[i + 1]);
        assert!(p.borders[i] < *c && *c < p.borders[i + 1]);
    }
    for a in &p.anomalies {
        assert!(p.borders.contains(a), "anomaly {a} is not a border");
        assert!(p.centres.iter().all(|c| (c - a).abs() > ANOMALY_GUARD * a));
    }
}

#[test]
fn anomalies_of_known_lattices() {
    let a = rayleigh_anomalies(0.0, 2.0, &normal());
    assert_eq!(a.len(), 1);
    assert!((a[0] - PI / 2.0).abs() < 1e-15);
    assert!(rayleigh_anomalies(0.0, 1.5, &normal()).is_empty());
    let p = LatticeParams::new(2.2, 1.0, PI / 3.0).unwrap();
    let a = rayleigh_anomalies(0.0, 6.0, &p);
    for w in [2.0 * PI / (2.2 * 0.5), 2.0 * PI / (2.2 * 1.5)] {
        assert!(a.iter().any(|x| (x - w).abs() < 1e-12), "{w} missing from {a:?}");
    }
    assert!(a.windows(2).all(|w| w[0] < w[1]));
    // strict interior
    assert!(rayleigh_anomalies(PI / 2.0, 2.0, &normal()).is_empty());
}

fn family(f: impl Fn(&Jet) -> Jet, w0: f64, m: usize, n: usize) -> PadeFamily {
    let jet = f(&Jet::variable(w0, m + n));
    PadeFamily::fit(vec![0], &[jet.clone()], &[Jet::zero(w0, m + n)], m, n).unwrap()
}

#[test]
fn need_split_on_constant_response() {
    let p = normal();
    let fam = family(|w| Jet::constant(w.centre(), w.order(), c(0.7, 0.1)), 0.6, 2, 2);
    assert!(!need_split(&fam, None, 1.2, &p, 1e-12));
    assert!(!need_split(&fam, Some(&fam), 0.1, &p, 1e-12));
}

#[test]
fn pole_checkpoint_fires_between_centre_and_border() {
    let p = normal();
    let alpha = c(1.3, 0.002);
    let f = move |w: &Jet| w.add_scalar(-alpha).recip().unwrap().scale(c(0.01, 0.0)).add_scalar(c(1.0, 0.0));
    let fam = family(f, 1.0, 1, 1);
    assert!((fam.transmitted[0].poles[0] - alpha).norm() < 1e-12);
    // The neighbour agrees at the border, so only the pole can trigger.
    assert!(need_split(&fam, Some(&fam), 1.45, &p, 1e-3));
    assert!(!need_split(&fam, Some(&fam), 1.2, &p, 1e-3));
    assert!(!need_split(&fam, Some(&fam), 1.45, &p, f64::INFINITY));
    // A border on a real pole is a hit, hence a split.
    let real = family(|w: &Jet| w.add_scalar(c(-1.2, 0.0)).recip().unwrap(), 1.0, 1, 1);
    assert!(need_split(&real, None, 1.2, &p, f64::INFINITY));
}

#[test]
fn smooth_response_keeps_the_anomaly_partition() {
    let p = normal();
    let s = Synthetic::new(|w: &Jet| Jet::constant(w.centre(), w.order(), c(1.0, 0.0)), p);
    let part = adaptive_partition([0.2, 2.0], &p, &cfg(0.01, 1.0), &s).unwrap();
    check_cover(&part);
    assert_eq!(part.borders, vec![0.2, PI / 2.0, 2.0]);
    assert_eq!(part.solves(), 2);
    assert_eq!(s.calls.get(), 2);
    assert!(part.warnings.is_empty());
}

#[test]
fn double_split_trisects_the_band() {
    let p = normal();
    let s = Synthetic::new(|w: &Jet| Jet::constant(w.centre(), w.order(), c(1.0, 0.0)), p);
    let part = adaptive_partition([0.0, 1.0], &p, &cfg(0.01, 0.4), &s).unwrap();
    check_cover(&part);
    let want_b = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    let want_c = [1.0 / 6.0, 0.5, 5.0 / 6.0];
    for (x, y) in part.borders.iter().zip(want_b) {
        assert!((x - y).abs() < 1e-15);
    }
    for (x, y) in part.centres.iter().zip(want_c) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn resonances_attract_centres() {
    // A sharp resonance at 0.8 in [0, 1.5].
    let p = normal();
    let f = |w: &Jet| {
        let d = w.add_scalar(c(-0.8, -0.01)).recip().unwrap().scale(c(0.0, 0.01));
        &d.add_scalar(c(0.5, 0.0)) * &w.scale(c(0.0, 4.0)).exp()
    };
    let s = Synthetic::new(f, p);
    let part = adaptive_partition([0.0, 1.5], &p, &cfg(0.01, 0.5), &s).unwrap();
    check_cover(&part);
    let near = part.centres.iter().filter(|c| (*c - 0.8).abs() < 0.2).count();
    // centres per unit frequency near the resonance and elsewhere
    assert!(near as f64 / 0.4 > 2.0 * (part.len() - near) as f64 / 1.1, "{:?}", part.centres);
    // The surrogate tracks the response between the centres.
    let grid: Vec<f64> = (0..301).map(|i| 0.005 * i as f64).collect();
    let mut worst = 0.0f64;
    for pt in sweep_eval(&part, &grid, &p) {
        let exact = f(&Jet::variable(pt.omega, 0)).value().norm_sqr();
        worst = worst.max((pt.t - exact).abs());
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn sweep_eval_uses_left_subbands_and_matches_centres() {
    let p = normal();
    let f = |w: &Jet| w.scale(c(0.0, 0.7)).exp().scale(c(0.8, 0.0));
    let s = Synthetic::new(f, p);
    let part = adaptive_partition([0.1, 1.4], &p, &cfg(0.01, 0.2), &s).unwrap();
    check_cover(&part);
    let pts = sweep_eval(&part, &part.centres, &p);
    for (i, pt) in pts.iter().enumerate() {
        assert_eq!(pt.subband, i);
        assert!((pt.t - 0.64).abs() < 1e-12);
    }
    let pts = sweep_eval(&part, &part.borders, &p);
    assert_eq!(pts[0].subband, 0);
    for (i, pt) in pts.iter().enumerate().skip(1) {
        assert_eq!(pt.subband, i - 1);
    }
    let grid: Vec<f64> = (0..200).map(|i| 0.1 + 1.3 * i as f64 / 199.0).collect();
    let idx: Vec<usize> = sweep_eval(&part, &grid, &p).iter().map(|q| q.subband).collect();
    assert!(idx.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn pole_hits_are_reported_as_nan() {
    let p = normal();
    let fam = PadeFamily {
        centre: 0.5,
        modes: vec![0],
        transmitted: vec![fit(&Jet::new(0.0, vec![c(1.0, 0.0); 3]).unwrap(), 1, 1).unwrap()],
        lower: vec![],
        reflected: vec![crate::pade::PadeModel::constant(0.5, c(0.0, 0.0))],
    };
    let part = BandPartition {
        band: [0.0, 2.0],
        borders: vec![0.0, 2.0],
        centres: vec![0.5],
        families: vec![fam],
        anomalies: vec![],
        solve_orders: vec![2],
        warnings: vec![],
        config: cfg(0.01, 1.0),
    };
    let pts = sweep_eval(&part, &[1.0, 1.5], &p);
    assert!(pts[0].t.is_nan());
    assert!((pts[1].t - 4.0).abs() < 1e-12);
}

#[test]
fn hopeless_criteria_hit_the_cap() {
    let p = normal();
    let f = |w: &Jet| w.scale(c(0.0, 3.0)).exp();
    let s = Synthetic::new(f, p);
    let mut bad = cfg(1e-12, 0.5);
    bad.eps_t = 1e-300;
    bad.m = 1;
    bad.n = 0;
    assert!(matches!(adaptive_partition([0.1, 1.0], &p, &bad, &s), Err(Error::Runaway { .. })));
}

#[test]
fn narrow_failures_are_accepted_with_a_warning() {
    let p = normal();
    let f = |w: &Jet| w.scale(c(3.0, 0.0)).exp();
    let s = Synthetic::new(f, p);
    let mut strict = cfg(0.05, 0.5);
    strict.eps_t = 1e-300;
    strict.m = 1;
    strict.n = 0;
    let part = adaptive_partition([0.1, 1.0], &p, &strict, &s).unwrap();
    check_cover(&part);
    assert!(!part.warnings.is_empty());
    for (i, c) in part.centres.iter().enumerate() {
        assert!(c - part.borders[i] <= 0.05 + 1e-15 && part.borders[i + 1] - c <= 0.05 + 1e-15);
    }
}

#[test]
fn config_validation() {
    assert!(SweepConfig::with_factors(3, 3, 1e-3, 1e-3, 1e-2).is_ok());
    let c = SweepConfig::with_factors(3, 3, 1e-3, 1e-3, 1e-2).unwrap();
    assert!((c.i_min - 0.036).abs() < 1e-15 && (c.i_max - 0.36).abs() < 1e-15);
    assert!(SweepConfig::with_factors(0, 3, 1e-3, 1e-3, 1e-2).is_err());
    assert!(SweepConfig::with_factors(3, 3, 0.0, 1e-3, 1e-2).is_err());
    assert!(SweepConfig::with_factors(3, 3, 1e-3, 1e-2, 1e-3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partitions_cover_the_band(
        theta in 0.3f64..PI / 2.0,
        l in 1.5f64..6.0,
        w1 in 0.0f64..1.0,
        width in 0.5f64..4.0,
        pole in (0.0f64..5.0, 0.005f64..0.5),
        amp in 0.01f64..0.3,
    ) {
        let p = LatticeParams::new(l, 1.0, theta).unwrap();
        let alpha = c(pole.0, pole.1);
        let f = move |w: &Jet| w.add_scalar(-alpha).recip().unwrap().scale(c(amp * pole.1, 0.0)).add_scalar(c(0.6, 0.2));
        let s = Synthetic::new(f, p);
        let cfg = SweepConfig { m: 2, n: 2, eps_t: 1e-3, i_min: 0.02, i_max: 0.3 };
        let part = adaptive_partition([w1, w1 + width], &p, &cfg, &s).unwrap();
        check_cover(&part);
        prop_assert_eq!(part.anomalies.clone(), rayleigh_anomalies(w1, w1 + width, &p));
        prop_assert_eq!(part.solves(), part.len());
        for (i, c) in part.centres.iter().enumerate() {
            prop_assert!(c - part.borders[i] <= cfg.i_max + 1e-12);
            prop_assert!(part.borders[i + 1] - c <= cfg.i_max + 1e-12);
        }
    }
}
