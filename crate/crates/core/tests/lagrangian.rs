use cascade_lab::eulerian::StepPolicy;
use cascade_lab::field::{build_field, convolve_spacetime, Extension, KernelSpec, Stage, VelocityField};
use cascade_lab::geometry::SetDescriptor;
use cascade_lab::lagrangian::{
    brownian_sup_frequency, feynman_kac_estimate, flow_deterministic, flow_lipschitz_estimate, flow_points,
    occupancy_statistics, purpose, signed_gap, stage_product, stream_id, uniformity_chi2, window_displacement_stat,
    ParticleEnsemble, Probe, RandomStream,
};
use cascade_lab::params::derive_schedule;
use cascade_lab::params::presets::desk_small;
use cascade_lab::params::schedule::CascadeSchedule;
use cascade_lab::LabError;
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

fn sched(q_max: usize) -> CascadeSchedule {
    derive_schedule(&desk_small(), q_max).unwrap().desk().unwrap().clone()
}

fn field(q_max: usize, ext: Extension) -> VelocityField {
    build_field(&sched(q_max), ext).unwrap()
}

fn still(ext: Extension) -> VelocityField {
    VelocityField { schedule: sched(1), extension: ext, segments: Vec::new(), sigma: None }
}

fn torus_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    signed_gap(a[0] - b[0]).hypot(signed_gap(a[1] - b[1]))
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let mut a = RandomStream::new(11, stream_id(purpose::FORWARD, 3));
    let mut b = RandomStream::new(11, stream_id(purpose::FORWARD, 3));
    let mut c = RandomStream::new(11, stream_id(purpose::FORWARD, 4));
    let xa: Vec<f64> = (0..100).map(|_| a.gaussian()).collect();
    let xb: Vec<f64> = (0..100).map(|_| b.gaussian()).collect();
    let xc: Vec<f64> = (0..100).map(|_| c.gaussian()).collect();
    assert_eq!(xa, xb);
    assert_ne!(xa, xc);
    // Restarting at a saved counter replays the tail.
    let mut d = RandomStream::new(11, 9);
    for _ in 0..17 {
        d.gaussian();
    }
    let mut e = RandomStream::at(11, 9, d.counter());
    assert_eq!(d.gaussian().to_bits(), e.gaussian().to_bits());
}

#[test]
fn idle_interval_is_the_identity() {
    let f = field(2, Extension::ForwardOnly);
    let t_end = 1.0 - f.schedule.levels[0].big_t_f64();
    for x in [[0.1, 0.7], [0.33, 0.02], [0.9, 0.5]] {
        assert_eq!(flow_deterministic(&f, x, 0.0, t_end).unwrap(), x);
    }
}

#[test]
fn flow_follows_the_slot_displacements() {
    let f = field(2, Extension::ForwardOnly);
    let lv = &f.schedule.levels[0];
    let (s2, s3) = (&lv.slots[2], &lv.slots[3]);
    let x = [0.123, 0.456];
    let y = flow_deterministic(&f, x, s2.lo_f64(), s3.hi_f64()).unwrap();
    let dh = f.slot_displacement(0, Stage::Mix2, x[1]).unwrap().value;
    let x1 = (x[0] + dh).rem_euclid(1.0);
    let dv = f.slot_displacement(0, Stage::Mix3, x1).unwrap().value;
    let expect = [x1, (x[1] + dv).rem_euclid(1.0)];
    assert!(torus_dist(y, expect) < 1e-12, "{y:?} vs {expect:?}");
}

#[test]
fn good_points_of_each_chessboard_land_in_the_next() {
    let f = field(3, Extension::ForwardOnly);
    let s = &f.schedule;
    for q in 0..2 {
        let (lv, nx) = (&s.levels[q], &s.levels[q + 1]);
        let a_q = SetDescriptor::a(lv.a_f64(), lv.restriction);
        let good = SetDescriptor::good(nx.a_f64(), nx.restriction);
        let mut init = RandomStream::new(5, 0);
        let mut pts = Vec::new();
        while pts.len() < 20_000 {
            let x = [init.uniform(), init.uniform()];
            if a_q.contains(x) && good.contains(x) {
                pts.push(x);
            }
        }
        let start = pts.clone();
        let (t0, t1) = (lv.slots[1].lo_f64(), lv.slots[3].hi_f64());
        flow_points(&f, &mut pts, t0, t1).unwrap();
        let target = SetDescriptor::a(nx.a_f64(), 0.0);
        let hit = pts.iter().filter(|x| target.contains(**x)).count() as f64 / pts.len() as f64;
        assert!(hit >= 0.99, "level {q}: {hit}");
        // Running the same interval backwards returns every point.
        flow_points(&f, &mut pts, t1, t0).unwrap();
        let worst = pts.iter().zip(&start).map(|(a, b)| torus_dist(*a, *b)).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }
}

#[test]
fn reflected_window_returns_every_point() {
    let f = field(2, Extension::Reflect);
    for q in 0..2 {
        let bt = f.schedule.levels[q].big_t_f64();
        for x in [[0.1, 0.7], [0.37, 0.2], [0.81, 0.55], [0.5, 0.5]] {
            let y = flow_deterministic(&f, x, 1.0 - bt, 1.0 + bt).unwrap();
            assert!(torus_dist(x, y) < 1e-10, "q = {q}: {x:?} -> {y:?}");
        }
    }
}

#[test]
fn zero_diffusivity_sde_is_the_flow_map() {
    let f = field(2, Extension::Reflect);
    let pol = StepPolicy::default();
    let mut ens = ParticleEnsemble::uniform(2000, 0.0, 0.0, 3).unwrap();
    let start = ens.positions.clone();
    ens.advance(&f, 1.6, None, &pol).unwrap();
    for (x, y) in start.iter().zip(&ens.positions) {
        let z = flow_deterministic(&f, *x, 0.0, 1.6).unwrap();
        assert!(torus_dist(*y, z) < 1e-10);
    }
}

#[test]
fn brownian_increments_have_the_heat_variance() {
    let f = still(Extension::ForwardOnly);
    let (kappa, t) = (1e-3, 0.3);
    let n = 100_000;
    let mut ens = ParticleEnsemble::from_points(vec![[0.5, 0.5]; n], kappa, 0.1, 21, purpose::FORWARD).unwrap();
    ens.advance(&f, 0.1 + t, None, &StepPolicy::default()).unwrap();
    let var = 2.0 * kappa * t;
    for axis in 0..2 {
        let s: f64 = ens.noise.iter().map(|w| w[axis] * w[axis]).sum::<f64>() / n as f64;
        let sd = var * (2.0 / n as f64).sqrt();
        assert!((s - var).abs() < 3.0 * sd, "axis {axis}: {s} vs {var}");
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let f = field(2, Extension::Reflect);
    let pol = StepPolicy::default();
    let run = || {
        let mut e = ParticleEnsemble::uniform(300, 1e-6, 0.0, 99).unwrap();
        e.advance(&f, 1.5, None, &pol).unwrap();
        e.positions.iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn uniform_ensembles_stay_uniform() {
    let f = field(2, Extension::Reflect);
    let pol = StepPolicy::default();
    let mut ens = ParticleEnsemble::uniform(1_000_000, 0.0, 0.0, 8).unwrap();
    for t in [0.9, 1.0 - f.schedule.levels[1].big_t_f64(), 1.4] {
        ens.advance(&f, t, None, &pol).unwrap();
        let u = uniformity_chi2(&ens.positions, 16);
        assert!(u.p_value > 0.01, "t = {t}: chi2 = {} (p = {})", u.statistic, u.p_value);
    }
    let mut ens = ParticleEnsemble::uniform(200_000, 1e-5, 0.0, 9).unwrap();
    ens.advance(&f, 0.95, None, &pol).unwrap();
    let u = uniformity_chi2(&ens.positions, 16);
    assert!(u.p_value > 0.01, "chi2 = {} (p = {})", u.statistic, u.p_value);
    let s = &f.schedule;
    let sets: Vec<SetDescriptor> = (0..3).map(|q| SetDescriptor::a(s.levels[q].a_f64(), 0.0)).collect();
    for o in occupancy_statistics(&ens, &sets) {
        assert!((o.fraction - o.measure).abs() < 3.0 * o.sigma, "{o:?}");
    }
}

#[test]
fn transverse_increments_are_exactly_gaussian() {
    let f = field(2, Extension::ForwardOnly);
    let seg = f.segment(0, Stage::Mix2, false).unwrap();
    let (a, b) = seg.support();
    let kappa = 1e-5;
    let n = 20_000;
    let mut ens = ParticleEnsemble::uniform(n, kappa, a, 4).unwrap();
    let start = ens.positions.clone();
    ens.advance(&f, b, None, &StepPolicy::default()).unwrap();
    // Kolmogorov–Smirnov distance of the vertical increments against N(0, 2κΔt).
    let law = Normal::new(0.0, (2.0 * kappa * (b - a)).sqrt()).unwrap();
    let mut d: Vec<f64> = start.iter().zip(&ens.positions).map(|(x, y)| signed_gap(y[1] - x[1])).collect();
    d.sort_by(f64::total_cmp);
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = law.cdf(*v);
            (c - i as f64 / n as f64).abs().max((c - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value 1.63/√n.
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS = {ks}");
}

#[test]
fn feynman_kac_reproduces_heat_decay() {
    let f = still(Extension::ForwardOnly);
    let (kappa, t) = (2e-3, 0.5);
    let theta = |x: [f64; 2]| (2.0 * PI * x[0]).sin();
    for (k, x) in [[0.2, 0.3], [0.6, 0.9], [0.85, 0.1]].into_iter().enumerate() {
        let e = feynman_kac_estimate(&f, &theta, x, t, kappa, 20_000, 40 + k as u64, &StepPolicy::default()).unwrap();
        let exact = (-kappa * 4.0 * PI * PI * t).exp() * theta(x);
        assert!((e.estimate - exact).abs() < 3.0 * e.std_error, "{e:?} vs {exact}");
    }
}

#[test]
fn feynman_kac_at_tiny_diffusivity_follows_the_backward_flow() {
    let f = field(2, Extension::ForwardOnly);
    let theta = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
    let t = 0.97;
    for x in [[0.3, 0.6], [0.71, 0.12]] {
        let e = feynman_kac_estimate(&f, &theta, x, t, 1e-12, 200, 1, &StepPolicy::default()).unwrap();
        let back = theta(flow_deterministic(&f, x, t, 0.0).unwrap());
        assert!((e.estimate - back).abs() <= 3.0 * e.std_error + 1e-9, "{e:?} vs {back}");
    }
    assert!(matches!(
        feynman_kac_estimate(&f, &theta, [0.1, 0.1], t, 1e-6, 50, 1, &StepPolicy::default()),
        Err(LabError::Contract(_))
    ));
}

#[test]
fn coarse_time_steps_are_refused() {
    let f = field(2, Extension::ForwardOnly);
    let mut ens = ParticleEnsemble::uniform(10, 1e-5, 0.0, 1).unwrap();
    let err = ens.advance(&f, 0.99, Some(0.05), &StepPolicy::default()).unwrap_err();
    assert!(matches!(err, LabError::Contract(_)), "{err}");
    let mut ens = ParticleEnsemble::uniform(10, 1e-5, 0.0, 1).unwrap();
    ens.advance(&f, 0.99, Some(1e-5), &StepPolicy::default()).unwrap();
}

#[test]
fn window_drift_vanishes_without_velocity_and_is_large_without_noise() {
    let pol = StepPolicy::default();
    let f0 = still(Extension::Reflect);
    let bt = f0.schedule.levels[0].big_t_f64();
    let mut ens = ParticleEnsemble::uniform(500, 1e-4, 1.0 - bt, 2).unwrap();
    let w = window_displacement_stat(&f0, &mut ens, 0, 1e-3, &pol).unwrap();
    assert!(w.window.iter().all(|d| *d == 0.0));
    assert_eq!(w.fraction_below, 1.0);

    // κ = 0: the drift over the forward half is the composed slot
    // displacement, of order a_q.
    let f = field(2, Extension::Reflect);
    let lv = &f.schedule.levels[0];
    let x = [0.13, 0.61];
    let mut ens = ParticleEnsemble::from_points(vec![x], 0.0, 1.0 - bt, 0, purpose::FORWARD).unwrap();
    let w = window_displacement_stat(&f, &mut ens, 0, lv.a_f64() / 6.0, &pol).unwrap();
    let dh = f.slot_displacement(0, Stage::Mix2, x[1]).unwrap().value;
    let x1 = x[0] + dh;
    let dv = f.slot_displacement(0, Stage::Mix3, x1).unwrap().value;
    let first = w.sub_windows[0].max;
    assert!((first - dh.hypot(dv)).abs() < 1e-12, "{first} vs {}", dh.hypot(dv));
    assert!(first > lv.a_f64() / 6.0);
}

#[test]
fn lipschitz_ratio_is_one_when_idle_and_bounded_in_a_shear() {
    let pol = StepPolicy::default();
    let f = field(2, Extension::ForwardOnly);
    let lv = &f.schedule.levels[0];
    let h = f.schedule.levels[1].a_f64() / 4.0;
    let probes: Vec<Probe> = [[0.1, 0.2], [0.4, 0.77], [0.66, 0.31]]
        .into_iter()
        .flat_map(|x| [Probe { x, dir: [1.0, 0.0], h }, Probe { x, dir: [0.0, 1.0], h }])
        .collect();
    let idle = flow_lipschitz_estimate(&f, 1e-5, 0.0, lv.slots[0].hi_f64().min(0.05), &probes, 20, 3, &pol).unwrap();
    for r in &idle.per_probe {
        assert!((r - 1.0).abs() < 1e-9, "{r}");
    }
    let (a, b) = f.segment(0, Stage::Mix2, false).unwrap().support();
    let est = flow_lipschitz_estimate(&f, 1e-5, b, a, &probes, 50, 3, &pol).unwrap();
    assert!(est.max_ratio <= est.bound, "{} > {}", est.max_ratio, est.bound);
    assert!(est.max_ratio <= est.sharp_bound * (1.0 + 1e-9));
    assert!((stage_product(&f, a, b, 3.0) - est.bound).abs() < 1e-12);
}

#[test]
fn brownian_exit_frequency_matches_the_series() {
    for (c, kappa, t) in [(0.05, 1e-3, 1.0), (0.1, 1e-3, 0.5), (0.02, 1e-4, 1.0)] {
        let b = brownian_sup_frequency(c, kappa, t, 20_000, 2000, 17).unwrap();
        // Discrete monitoring misses some excursions, biasing the frequency up
        // by O(√Δt); allow for it on the high side only.
        assert!(b.frequency >= b.exact - 3.0 * b.std_error, "{b:?}");
        assert!(b.frequency <= b.exact + 3.0 * b.std_error + 0.03, "{b:?}");
        assert!(b.frequency >= b.reflection_bound - 3.0 * b.std_error, "{b:?}");
    }
}

#[test]
fn convolved_flow_is_reversible_and_measure_preserving() {
    let f = field(2, Extension::ReflectWithSwap);
    let sigma = f.schedule.levels[1].a_f64() / 2.0;
    let g = convolve_spacetime(&f, &KernelSpec::default(), sigma).unwrap();
    assert!(g.has_overlaps());
    let mut ens = ParticleEnsemble::uniform(50_000, 0.0, 0.0, 6).unwrap();
    let start = ens.positions.clone();
    ens.advance(&g, 2.0, None, &StepPolicy::default()).unwrap();
    let u = uniformity_chi2(&ens.positions, 16);
    assert!(u.p_value > 0.01, "{u:?}");
    let mut pts = ens.positions.clone();
    flow_points(&g, &mut pts, 2.0, 0.0).unwrap();
    let worst = pts.iter().zip(&start).map(|(a, b)| torus_dist(*a, *b)).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}
