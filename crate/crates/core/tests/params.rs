use cascade_lab::params::groups::{goal_inequalities, kappa_for_dissipate};
use cascade_lab::params::presets::{desk, desk_small, strict_reference};
use cascade_lab::params::rational::{q, qi, to_f64, Q};
use cascade_lab::params::search::{search_parameters, SearchOutcome};
use cascade_lab::params::{
    derive_schedule, diffusivity_sequences, validate_constraints, Exponent, Mode, Schedule,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn strict_reference_passes_every_constraint() {
    let p = strict_reference();
    assert_eq!(p.gamma, q(1, 32));
    assert_eq!(p.m, 257);
    assert_eq!(p.a0.power, qi(102400));
    let r = validate_constraints(&p).unwrap();
    for e in &r.entries {
        assert!(e.holds, "{} failed: {}", e.name, e.margin);
    }
    assert!(r.passed);
    // The upper reach condition is an identity in exponent form.
    assert_eq!(r.get("diffusive_reach_upper").unwrap().margin, "0");
}

#[test]
fn supercritical_pair_fails_the_budget() {
    let mut p = strict_reference();
    p.alpha = qi(1);
    p.beta = q(1, 2);
    let r = validate_constraints(&p).unwrap();
    assert!(!r.get("subcritical").unwrap().holds);
    assert!(!r.passed);
}

#[test]
fn out_of_range_field_is_named() {
    let mut p = strict_reference();
    p.delta = q(1, 2);
    let err = validate_constraints(&p).unwrap_err().to_string();
    assert!(err.contains("delta"), "{err}");
}

/// Independent floating-point evaluation of the three budget inequalities.
fn float_budgets(alpha: f64, beta: f64, pc: f64, e: f64, d: f64) -> (f64, f64, f64) {
    let g = (1.0 + 3.0 * e * (1.0 + d)) * (1.0 + d) / (1.0 - d);
    let a = 1.0 - 2.0 * beta * g - alpha * (1.0 + e * d) * (1.0 + d) - d / 8.0;
    let b = 2.0 - pc * beta * g - d / 8.0;
    let c = d * d * d / 50.0 - e;
    (a, b, c)
}

#[test]
fn search_finds_admissible_pairs() {
    for (alpha, beta, fixed) in [
        (q(1, 3), q(1, 5), Some((Exponent::Finite(qi(3)), qi(3)))),
        (Q::zero(), Q::zero(), None),
        (q(1, 2), q(1, 5), None),
    ] {
        match search_parameters(&alpha, &beta, fixed).unwrap() {
            SearchOutcome::Found { params, report } => {
                assert!(report.passed);
                let (a, b, c) = float_budgets(
                    to_f64(&alpha),
                    to_f64(&beta),
                    to_f64(&params.p_circ),
                    to_f64(&params.epsilon),
                    to_f64(&params.delta),
                );
                assert!(a > 0.0 && b > 0.0 && c >= 0.0);
            }
            other => panic!("expected a parameter set, got {other:?}"),
        }
    }
}

#[test]
fn search_proves_infeasibility_at_the_supercritical_corner() {
    match search_parameters(&qi(1), &q(1, 2), None).unwrap() {
        SearchOutcome::Infeasible(why) => assert!(why.contains("supremum")),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn strict_schedule_is_symbolic() {
    let p = strict_reference();
    let Schedule::Strict(s) = derive_schedule(&p, 3).unwrap() else { panic!() };
    assert_eq!(s.exponent(1), q(5, 4));
    assert_eq!(s.exponent(2), q(25, 16));
    assert!(s.ln_big_t[0] < 0.0);
    assert!(s.ln_big_t.windows(2).all(|w| w[1] < w[0]));
    // a_1 = a_0^(5/4) in log form.
    assert!((s.ln_a[1] - 1.25 * s.ln_a[0]).abs() <= 1e-12 * s.ln_a[1].abs());
}

#[test]
fn desk_schedule_matches_direct_summation() {
    let p = desk(q(1, 4), vec![8], q(3, 2), 2);
    let Schedule::Desk(s) = derive_schedule(&p, 3).unwrap() else { panic!() };
    // Oracle: plain floating-point sums of the definitions.
    let a: Vec<f64> = (0..4).map(|j| 0.25 / 8f64.powi(j)).collect();
    let t: Vec<f64> = a.iter().map(|x| x.powf(1.5)).collect();
    let idle = 1.5 * (1.0 - 0.125);
    let tb: Vec<f64> = a.iter().enumerate().map(|(j, x)| if j % 2 == 0 { x.powf(idle) } else { 0.0 }).collect();
    let mut tail = 3.0 * t[3];
    let mut x = a[3];
    for j in 4..60 {
        x /= 8.0;
        tail += 3.0 * x.powf(1.5) + if j % 2 == 0 { x.powf(idle) } else { 0.0 };
    }
    let t3 = tb[3] + tail;
    let t0 = tb[0] + 3.0 * t[0] + tb[1] + 3.0 * t[1] + tb[2] + 3.0 * t[2] + t3;
    assert!((s.levels[0].big_t_f64() - t0).abs() < 1e-14);
    assert!(t0 < 1.0);
    for lv in &s.levels {
        assert_eq!(lv.lambda, Q::one() / (qi(2) * &lv.a));
        if lv.active {
            assert_eq!(lv.slots[2].len(), lv.t);
        }
    }
    // Tiling of (0, 2) \ {1}: lengths sum to 2 exactly and consecutive
    // intervals share endpoints.
    let all = s.all_intervals();
    let total: Q = all.iter().map(|(_, iv)| iv.len()).fold(Q::zero(), |acc, l| acc + l);
    assert_eq!(total, qi(2));
    for w in all.windows(2) {
        assert_eq!(w[0].1.hi, w[1].1.lo, "{} -> {}", w[0].0, w[1].0);
    }
    assert_eq!(all.first().unwrap().1.lo, Q::zero());
    assert_eq!(all.last().unwrap().1.hi, qi(2));
}

#[test]
fn schedule_refuses_cascades_that_do_not_fit() {
    let p = desk(q(1, 2), vec![4], q(1, 2), 2);
    let err = derive_schedule(&p, 2).unwrap_err().to_string();
    assert!(err.contains("does not fit"), "{err}");
}

#[test]
fn strict_diffusivities_meet_the_reach_conditions() {
    let p = strict_reference();
    let s = derive_schedule(&p, 4).unwrap();
    let d = diffusivity_sequences(&p, &s);
    assert_eq!(d.monotone, [true, true, true]);
    // Dissipate group for κ̃_q is a_q^e/4 with e ≤ −ε.
    let e = cascade_lab::params::diffusivity::strict_dissipate_exponent(
        &p,
        &cascade_lab::params::diffusivity::kappa_tilde_exponent(&p),
    );
    assert!(e <= -p.epsilon.clone());
}

#[test]
fn desk_groups_vanish_at_zero_and_tune_exactly() {
    let p = desk_small();
    let s = derive_schedule(&p, 3).unwrap();
    let Schedule::Desk(s) = s else { panic!() };
    let g = goal_inequalities(&s, 0.0, 1);
    assert_eq!((g.close_flows, g.dissipate, g.ito_tanaka, g.survive), (0.0, 0.0, 0.0, 0.0));
    let k = kappa_for_dissipate(&s, 2, 5.0);
    let g = goal_inequalities(&s, k, 2);
    assert!((g.dissipate - 5.0).abs() < 1e-12);
    let d = diffusivity_sequences(&p, &Schedule::Desk(s.clone()));
    assert!(d.kappa_tilde.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(p.mode, Mode::Desk);
}

proptest! {
    #[test]
    fn desk_schedules_are_monotone(ratio_k in 1u32..4, gnum in 3i64..8, m in 2u32..4) {
        let p = desk(q(1, 4), vec![4 * ratio_k], q(gnum, 2), m);
        if let Ok(Schedule::Desk(s)) = derive_schedule(&p, 3) {
            for w in s.levels.windows(2) {
                prop_assert!(w[1].a < w[0].a);
                prop_assert!(w[1].t < w[0].t);
                prop_assert!(w[1].big_t < w[0].big_t);
            }
            prop_assert!(s.levels[0].big_t < Q::one());
        }
    }
}
