//! Uniform-in-diffusivity regularity: the space-time Hölder norm across a κ
//! sweep, and flow-map Lipschitz factors per slot and per level.

use super::config::ExperimentConfig;
use super::report::{PlotData, Relation, RunReport, SweepPoint, Verdict};
use super::{grid_policy, initial_grid, snapshot_at, sweep_map};
use crate::error::Result;
use crate::eulerian::{evolve, holder_seminorm, lp_time_norm, StepPolicy};
use crate::field::{build_field, Extension};
use crate::lagrangian::{flow_lipschitz_estimate, purpose, stream_id, Probe, RandomStream};
use crate::params::rational::to_f64;
use crate::params::{diffusivity_sequences, Schedule};
use std::f64::consts::PI;

/// Uniformly spaced snapshot times added to the schedule endpoints.
const EXTRA_SNAPSHOTS: usize = 64;

pub fn run_regularity(cfg: &ExperimentConfig) -> Result<RunReport> {
    let params = cfg.params()?;
    let sched = cfg.schedule()?;
    let seq = diffusivity_sequences(&params, &Schedule::Desk(sched.clone()));
    let beta = to_f64(&params.beta);
    let p_circ = to_f64(&params.p_circ);
    let f = build_field(&sched, Extension::ForwardOnly)?;
    let theta0 = initial_grid(cfg, &sched)?;
    let th = &cfg.thresholds;

    let mut extra: Vec<f64> = (0..=EXTRA_SNAPSHOTS).map(|k| k as f64 / EXTRA_SNAPSHOTS as f64).collect();
    extra.extend(cfg.sweep.levels.iter().map(|&q| 1.0 - sched.levels[q].big_t_f64()));
    let policy = grid_policy(cfg, extra, true);

    let mut points: Vec<(String, Option<usize>, f64)> = vec![("kappa_zero".into(), None, 0.0)];
    for &q in &cfg.sweep.levels {
        points.push((format!("q{q}_conservative"), Some(q), seq.kappa[q]));
        points.push((format!("q{q}_dissipative"), Some(q), seq.kappa_tilde[q]));
    }

    let runs = sweep_map(&points, |(label, q, kappa)| {
        let ev = evolve(&theta0, &f, *kappa, 0.0, 1.0, &policy)?;
        let lp = lp_time_norm(&ev.snapshots, p_circ, beta);
        let mut sp = SweepPoint::new(label, *q, Some(*kappa), None);
        sp.set("lp_time_norm", lp.value);
        let mut csv = String::from("t,sup_norm,holder_seminorm\n");
        for s in &ev.snapshots {
            csv.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", s.time, s.sup_norm(), holder_seminorm(s, beta)));
        }
        for &lq in &cfg.sweep.levels {
            if let Some(s) = snapshot_at(&ev.snapshots, 1.0 - sched.levels[lq].big_t_f64()) {
                sp.set(&format!("holder_at_level{lq}_start"), holder_seminorm(s, beta));
            }
        }
        Ok((sp, csv))
    })?;

    let mut report = RunReport::new(cfg);
    let base = runs[0].0.get("lp_time_norm");
    let mut worst: f64 = 1.0;
    for (sp, csv) in runs {
        let mut sp = sp;
        let ratio = sp.get("lp_time_norm") / base;
        sp.set("ratio_to_kappa_zero", ratio);
        worst = worst.max(ratio);
        report.ledgers.push((sp.label.clone(), csv));
        report.sweep.push(sp);
    }
    report.verdicts.push(Verdict::new(
        "norm_uniformity",
        worst,
        Relation::AtMost,
        th.uniform_ratio,
        "the L^p° C^β norm of ϑ_κ is bounded uniformly in κ",
    ));
    report.plots.push(PlotData {
        name: "norm-vs-kappa".into(),
        x_label: "kappa".into(),
        y_label: "lp_time_norm".into(),
        points: report.sweep.iter().map(|s| (s.kappa.unwrap_or(0.0), s.get("lp_time_norm"))).collect(),
    });

    // Flow-map Lipschitz factors with a positive diffusivity and common noise.
    let kappa = seq.kappa[cfg.sweep.levels[0]];
    let sde_policy = StepPolicy::default();
    let delta = to_f64(&params.delta);
    let eps = to_f64(&params.epsilon);
    let levels: Vec<usize> = (0..sched.q_max).collect();
    let lips = sweep_map(&levels, |&j| {
        let lv = &sched.levels[j];
        let probes = probes_for(cfg, j, sched.levels[j + 1].a_f64() / 4.0);
        let mut sp = SweepPoint::new(format!("lipschitz_level{j}"), Some(j), Some(kappa), None);
        let mut slot_verdicts = Vec::new();
        for slot in [2, 3] {
            let iv = &lv.slots[slot];
            let est = flow_lipschitz_estimate(&f, kappa, iv.lo_f64(), iv.hi_f64(), &probes, cfg.ensemble.n_omega, cfg.seed, &sde_policy)?;
            sp.set(&format!("slot{slot}_max_ratio"), est.max_ratio);
            sp.set(&format!("slot{slot}_bound"), est.bound);
            slot_verdicts.push((slot, est.max_ratio, est.bound));
        }
        let (t0, t1) = (1.0 - lv.big_t_f64(), 1.0 - sched.levels[j + 1].big_t_f64());
        let est = flow_lipschitz_estimate(&f, kappa, t0, t1, &probes, cfg.ensemble.n_omega, cfg.seed, &sde_policy)?;
        sp.set("level_max_ratio", est.max_ratio);
        sp.set("level_bound", est.bound);
        sp.set("level_sharp_bound", est.sharp_bound);
        sp.set("power_bound", 16.0 * lv.lambda_f64().powf(delta + 2.0 * eps * delta * (1.0 + delta)));
        Ok((sp, slot_verdicts))
    })?;
    for (sp, slots) in lips {
        let j = sp.q.unwrap_or(0);
        for (slot, measured, bound) in slots {
            report.verdicts.push(Verdict::new(
                format!("lipschitz_slot_I{j}_{slot}"),
                measured,
                Relation::AtMost,
                bound,
                "one shear slot stretches the stochastic flow by at most 3 + ∫‖∇u‖",
            ));
        }
        report.verdicts.push(Verdict::new(
            format!("lipschitz_level{j}"),
            sp.get("level_max_ratio"),
            Relation::AtMost,
            sp.get("level_bound"),
            "a level composes its slot factors",
        ));
        report.sweep.push(sp);
    }
    report.notes.push(format!(
        "beta = {beta}, p_circ = {p_circ}; lipschitz diffusivity {kappa:.6e}; probe angle uniform in [0, 2pi)"
    ));
    Ok(report.finish())
}

fn probes_for(cfg: &ExperimentConfig, level: usize, h: f64) -> Vec<Probe> {
    let mut rng = RandomStream::new(cfg.seed, stream_id(purpose::INIT, 1 + level as u64));
    (0..cfg.ensemble.probes)
        .map(|_| {
            let x = [rng.uniform(), rng.uniform()];
            let a = 2.0 * PI * rng.uniform();
            Probe { x, dir: [a.cos(), a.sin()], h }
        })
        .collect()
}
