// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS, FAIL or N/A line, even when all of them pass.
//! Exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use epm_core::channel::{kraus_from_choi, time_reversed_channel, QuantumChannel, RANK_TOL};
use epm_core::dataio::{fit_parameters, synthetic_table, FitOptions, StateLabel};
use epm_core::linops::hermitian_eig;
use epm_core::montecarlo::{empirical_ledger, SamplingMode, ShotConfig};
use epm_core::thermo::{
    detailed_balance_ratio, entropy_terms, epm_characteristic_identity, heat_split, jensen_bounds,
    relative_entropy_identity, trajectory_pair, verify_integral_ft, verify_sigma_ft,
};
use epm_core::{
    DensityMatrix, EnergyLevels, EntropyLedger, Error, ProtocolChannels, PulseParams, PulsedDynamics, Superoperator,
};
use rayon::prelude::*;

const P_GRID: [f64; 4] = [0.0, 0.2, 0.38, 1.0];
const N_MAX: u32 = 20;

struct Verdict {
    pass: bool,
    applicable: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        applicable: true,
        detail: detail.into(),
    }
}

/// A criterion that has nothing to check. It neither passes nor fails.
fn not_applicable(detail: impl Into<String>) -> Verdict {
    Verdict {
        pass: true,
        applicable: false,
        detail: detail.into(),
    }
}

fn fitted() -> PulseParams {
    PulseParams::nv_defaults()
}

fn levels(params: &PulseParams) -> EnergyLevels {
    EnergyLevels::qubit(params.omega_tau)
}

fn protocol(params: PulseParams) -> (PulsedDynamics, Vec<ProtocolChannels>) {
    let dynamics = PulsedDynamics::new(params).expect("dynamics");
    let channels = (0..=N_MAX).map(|n| dynamics.channels(n).expect("channels")).collect();
    (dynamics, channels)
}

/// Ledger at a grid point, or `None` when `ρ₀` has a zero population and
/// no finite inverse temperature exists.
fn ledger(rho0: &DensityMatrix, lv: &EnergyLevels, ch: &ProtocolChannels) -> Option<EntropyLedger> {
    match entropy_terms(rho0, lv, &ch.forward, &ch.reversed) {
        Ok(l) => Some(l),
        Err(Error::InfiniteBeta { .. }) => None,
        Err(e) => panic!("ledger failed: {e}"),
    }
}

/// `(⟨ΔΣ⟩, ⟨e^{−ΔΣ}⟩)` from the definitions, needing no inverse temperature.
fn big_sigma_direct(rho0: &DensityMatrix, forward: &Superoperator) -> (f64, f64) {
    let p = forward.final_populations(rho0.matrix());
    let q = forward.final_populations(rho0.diagonal_part().matrix());
    let mut mean = 0.0;
    let mut exp_mean = 0.0;
    for f in 0..2 {
        if p[f] > 0.0 {
            let s = (p[f] / q[f]).ln();
            mean += p[f] * s;
            exp_mean += p[f] * (-s).exp();
        }
    }
    (mean, exp_mean)
}

fn max_detailed_balance_error(l: &EntropyLedger) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for f in 0..2 {
            match detailed_balance_ratio(l, i, f, 0.0) {
                Ok(d) => worst = worst.max((d.direct - d.exponential).abs() / d.direct.abs().max(1.0)),
                Err(Error::DivergentRatio { .. }) if l.forward_joint[i][f] == 0.0 => {}
                Err(e) => panic!("detailed balance: {e}"),
            }
        }
    }
    worst
}

fn criterion_1() -> Verdict {
    let params = fitted();
    let lv = levels(&params);
    let (_, channels) = protocol(params);
    let mut worst = [0.0f64; 5];
    let mut skipped = 0;
    for p in P_GRID {
        let rho0 = DensityMatrix::experimental(p).unwrap();
        for ch in &channels {
            let (_, exp_mean) = big_sigma_direct(&rho0, &ch.forward);
            worst[0] = worst[0].max((exp_mean - 1.0).abs());
            let h = heat_split(&rho0, &ch.forward, &lv);
            worst[4] = worst[4].max((h.epm_mean - h.tpm_mean - h.coherence_term).abs());
            let Some(l) = ledger(&rho0, &lv, ch) else {
                skipped += 1;
                continue;
            };
            worst[0] = worst[0].max((verify_sigma_ft(&l) - 1.0).abs());
            let (lhs, rhs) = verify_integral_ft(&l, 0.0);
            worst[1] = worst[1].max((lhs - rhs).abs());
            let c = epm_characteristic_identity(&rho0, &ch.forward, &lv, 0.0).unwrap();
            worst[2] = worst[2].max(c.residual());
            worst[3] = worst[3].max(max_detailed_balance_error(&l));
        }
    }
    let pass = worst[0] < 1e-12 && worst[1] < 1e-10 && worst[2] < 1e-10 && worst[3] < 1e-10 && worst[4] < 1e-10;
    verdict(
        pass,
        format!(
            "max residuals: <e^-dSigma>-1 {:.2e} (<1e-12), integral FT {:.2e}, char. function {:.2e}, detailed balance {:.2e}, heat split {:.2e} (<1e-10); {skipped} infinite-beta points ran the beta-free checks only",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn criterion_2() -> Verdict {
    let params = fitted();
    let lv = levels(&params);
    let (_, channels) = protocol(params);
    let mut min_mean_big_sigma = f64::INFINITY;
    let mut worst_bound_excess = f64::NEG_INFINITY;
    let mut tighter_everywhere = true;
    let mut min_gap = f64::INFINITY;
    for p in P_GRID {
        let rho0 = DensityMatrix::experimental(p).unwrap();
        for ch in &channels {
            let (mean, _) = big_sigma_direct(&rho0, &ch.forward);
            min_mean_big_sigma = min_mean_big_sigma.min(mean);
            let Some(l) = ledger(&rho0, &lv, ch) else { continue };
            min_mean_big_sigma = min_mean_big_sigma.min(l.mean_delta_big_sigma());
            let b = jensen_bounds(&l).unwrap();
            worst_bound_excess = worst_bound_excess
                .max(b.bound_charfn - b.beta_mean_de)
                .max(b.bound_entropy - b.beta_mean_de);
            if p == 0.38 {
                min_gap = min_gap.min(b.bound_entropy - b.bound_charfn);
                tighter_everywhere &= b.bound_entropy >= b.bound_charfn;
            }
        }
    }
    let pass = min_mean_big_sigma >= -1e-12 && worst_bound_excess <= 1e-10 && tighter_everywhere;
    verdict(
        pass,
        format!(
            "min <dSigma> {min_mean_big_sigma:.3e}; max(bound - beta<dE>) {worst_bound_excess:.3e}; at p=0.38 min(entropy bound - char-fn bound) {min_gap:.3e}"
        ),
    )
}

fn criterion_3() -> Verdict {
    let params = fitted();
    let (dynamics, channels) = protocol(params);
    let eig = hermitian_eig(&dynamics.one_cycle.choi()).unwrap();
    let min_eig = eig.values[3];
    let rank = eig.values.iter().filter(|v| **v > 1e-10).count();
    let kraus = kraus_from_choi(&dynamics.one_cycle, RANK_TOL).unwrap();
    let reconstruction = kraus.to_superoperator().matrix().max_abs_diff(dynamics.one_cycle.matrix());
    let star = dynamics.fixed_point.state;
    let one_cycle_reversed = time_reversed_channel(&kraus, &star).unwrap();
    let mut reversed_sets = vec![one_cycle_reversed];
    reversed_sets.extend(channels.iter().map(|c| c.reversed.clone()));
    let mut worst_tp: f64 = 0.0;
    let mut worst_cp: f64 = 0.0;
    let mut worst_fix: f64 = 0.0;
    for r in &reversed_sets {
        worst_tp = worst_tp.max(r.completeness_residual());
        let choi = hermitian_eig(&r.to_superoperator().choi()).unwrap();
        worst_cp = worst_cp.max(-choi.values[3]);
        worst_fix = worst_fix.max(r.apply(&star).distance(&star));
    }
    let pass = min_eig >= -1e-10
        && rank == 3
        && kraus.len() == 3
        && reconstruction < 1e-9
        && worst_tp < 1e-8
        && worst_cp < 1e-8
        && worst_fix < 1e-8;
    verdict(
        pass,
        format!(
            "Choi min eigenvalue {min_eig:.2e}, rank {rank}, Kraus count {}, reconstruction {reconstruction:.2e}; reversed (N=1 and N=0..20): TP {worst_tp:.2e}, CP {worst_cp:.2e}, fixes rho* {worst_fix:.2e}",
            kraus.len()
        ),
    )
}

/// Complex conjugation in the energy basis, the time-reversal operator.
fn time_reverse(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    let mut out = *m;
    for r in 0..2 {
        for c in 0..2 {
            out[(r, c)] = m[(r, c)].conj();
        }
    }
    DensityMatrix::from_unchecked(out)
}

fn criterion_4() -> Verdict {
    let params = PulseParams { p_abs: 0.0, ..fitted() };
    let lv = levels(&params);
    let (_, channels) = protocol(params);
    let mut asym: f64 = 0.0;
    let mut sigma_bar: f64 = 0.0;
    let mut big_sigma: f64 = 0.0;
    let mut sigma_plus_beta_de: f64 = 0.0;
    let mut sigma_at_zero_beta: f64 = 0.0;
    for p in P_GRID {
        let rho0 = DensityMatrix::experimental(p).unwrap();
        for ch in &channels {
            let rho_b = time_reverse(&ch.forward.apply(&rho0));
            let pair = trajectory_pair(&rho0, &rho_b, &ch.forward, &ch.reversed);
            asym = asym.max(pair.asymmetry());
            let back = ch.reversed.final_populations(rho_b.matrix());
            let r = relative_entropy_identity(&rho0.populations(), &back).unwrap();
            sigma_bar = sigma_bar.max(r.mean.abs()).max((r.exp_mean - 1.0).abs());
            let (mean, _) = big_sigma_direct(&rho0, &ch.forward);
            big_sigma = big_sigma.max(mean.abs());
            let Some(l) = ledger(&rho0, &lv, ch) else { continue };
            for i in 0..2 {
                for f in 0..2 {
                    if l.forward_joint[i][f] == 0.0 {
                        continue;
                    }
                    big_sigma = big_sigma.max(l.delta_big_sigma(i, f).abs());
                    sigma_plus_beta_de = sigma_plus_beta_de.max((l.delta_sigma[i][f] + l.beta * l.delta_e(i, f)).abs());
                    if l.beta == 0.0 {
                        sigma_at_zero_beta = sigma_at_zero_beta.max(l.delta_sigma[i][f].abs());
                    }
                }
            }
        }
    }
    let pass = asym < 1e-10 && sigma_bar < 1e-10 && big_sigma < 1e-10 && sigma_plus_beta_de < 1e-10 && sigma_at_zero_beta < 1e-10;
    verdict(
        pass,
        format!(
            "max |P_fwd(n,m) - P_bwd(m,n)| {asym:.2e}; initial entropy production {sigma_bar:.2e}; |dSigma| {big_sigma:.2e}; |dsigma + beta dE| {sigma_plus_beta_de:.2e}; |dsigma| at beta=0 {sigma_at_zero_beta:.2e}"
        ),
    )
}

fn criterion_5() -> Verdict {
    let truth = fitted();
    let start = Instant::now();
    let exact = synthetic_table(&truth, &StateLabel::ALL, N_MAX, &SamplingMode::Analytic).unwrap();
    let fit = fit_parameters(&exact, truth.alpha, truth.omega_tau, FitOptions::default()).unwrap();
    let noiseless_error = (fit.p_abs - truth.p_abs).abs().max((fit.p_d - truth.p_d).abs());
    let errors: Vec<f64> = (0..20u64)
        .map(|seed| {
            let mode = SamplingMode::Shots(ShotConfig::new(1_000_000, seed, 1).unwrap());
            let table = synthetic_table(&truth, &StateLabel::ALL, N_MAX, &mode).unwrap();
            let f = fit_parameters(&table, truth.alpha, truth.omega_tau, FitOptions::default()).unwrap();
            (f.p_abs - truth.p_abs).abs().max((f.p_d - truth.p_d).abs())
        })
        .collect();
    let elapsed = start.elapsed();
    let within = errors.iter().filter(|e| **e < 0.01).count();
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    let pass = noiseless_error < 1e-3 && within >= 18 && elapsed < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "noiseless error {noiseless_error:.2e} (<1e-3); noisy refits within 0.01: {within}/20 (>=18), worst {worst:.2e}; {:.1} s (<60 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Verdict {
    let params = fitted();
    let lv = levels(&params);
    let (_, channels) = protocol(params);
    let rho0 = DensityMatrix::plus_y();
    let seeds: Vec<(bool, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mode = SamplingMode::Shots(ShotConfig::new(1_000_000, seed, 1000).unwrap());
            let mut ok = true;
            let mut worst_z: f64 = 0.0;
            for ch in &channels {
                let l = empirical_ledger(&rho0, &lv, &ch.forward, &ch.reversed, &mode, ch.pulses as u64).unwrap();
                let e = l.exp_mean_big_sigma;
                let dev = (e.value - 1.0).abs();
                let z = if e.std_err > 0.0 { dev / e.std_err } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
                worst_z = worst_z.max(z);
                ok &= z <= 4.0;
            }
            (ok, worst_z)
        })
        .collect();
    let passing = seeds.iter().filter(|s| s.0).count();
    let worst = seeds.iter().map(|s| s.1).fold(0.0, f64::max);
    verdict(
        passing >= 99,
        format!("seeds with every N within 4 sigma: {passing}/100 (>=99); largest |z| {worst:.2}"),
    )
}

fn criterion_7() -> Verdict {
    let params = fitted();
    let lv = levels(&params);
    let dynamics = PulsedDynamics::new(params).unwrap();
    let lambda = dynamics.fixed_point.second_modulus;
    let long = 80u32;

    // Coherence-affected entropy production of |+y⟩: non-negative, with
    // increments decaying at the rate of the second eigenvalue.
    let plus_y = DensityMatrix::plus_y();
    let mean: Vec<f64> = (0..=long)
        .map(|n| {
            let ch = dynamics.channels(n).unwrap();
            ledger(&plus_y, &lv, &ch).unwrap().mean_delta_big_sigma()
        })
        .collect();
    let non_negative = mean.iter().all(|m| *m >= -1e-12);
    let increments: Vec<f64> = mean.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = (0..10).map(|n| increments[n] / lambda.powi(n as i32)).fold(0.0, f64::max);
    let bounded = increments
        .iter()
        .enumerate()
        .all(|(n, inc)| *inc <= 10.0 * scale * lambda.powi(n as i32) + 1e-15);
    let converged = increments[long as usize - 1] < 1e-8;

    // Pure-state population curves: common asymptote at the fixed point,
    // approached as a damped oscillation.
    let star = dynamics.fixed_point.state.populations()[1];
    let mut asymptote_error: f64 = 0.0;
    let mut oscillates = false;
    let mut envelope = true;
    for s in StateLabel::ALL {
        let rho = s.density();
        let dev: Vec<f64> = (0..=long).map(|n| dynamics.forward(n).apply(&rho).populations()[1] - star).collect();
        asymptote_error = asymptote_error.max(dev[long as usize].abs());
        oscillates |= dev.windows(2).any(|w| w[0] * w[1] < 0.0 && w[0].abs() > 1e-6);
        let c = dev[0].abs().max(dev[1].abs() / lambda).max(1e-300);
        envelope &= dev.iter().enumerate().all(|(n, d)| d.abs() <= 10.0 * c * lambda.powi(n as i32) + 1e-15);
    }

    // Per-outcome dSigma depends on the final outcome only.
    let mut branch_gap: f64 = 0.0;
    for p in P_GRID {
        let rho0 = DensityMatrix::experimental(p).unwrap();
        for n in 0..=N_MAX {
            let ch = dynamics.channels(n).unwrap();
            if let Some(l) = ledger(&rho0, &lv, &ch) {
                for f in 0..2 {
                    branch_gap = branch_gap.max((l.delta_big_sigma(0, f) - l.delta_big_sigma(1, f)).abs());
                }
            }
        }
    }

    let pass = non_negative && bounded && converged && asymptote_error < 1e-9 && oscillates && envelope && branch_gap == 0.0;
    verdict(
        pass,
        format!(
            "<dSigma>(N) for |+y>: non-negative {non_negative}, increments within spectral-gap envelope {bounded}, last increment {:.2e}; population curves: asymptote error {asymptote_error:.2e}, oscillating {oscillates}, damped {envelope}; max |dSigma(0,f) - dSigma(1,f)| {branch_gap:.1e}",
            increments[long as usize - 1]
        ),
    )
}

fn criterion_8() -> Verdict {
    not_applicable("no measured data tables exist to compare against; the identity and shape checks above stand in")
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("exact fluctuation identities", criterion_1),
        ("positivity and energy bounds", criterion_2),
        ("channel machinery", criterion_3),
        ("unitary limit", criterion_4),
        ("fit self-consistency", criterion_5),
        ("Monte Carlo consistency", criterion_6),
        ("qualitative curve shapes", criterion_7),
        ("experimental data points", criterion_8),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let mut pass = outcome.pass;
        let mut detail = outcome.detail;
        let secs = start.elapsed().as_secs_f64();
        if k == 0 && secs >= 5.0 {
            pass = false;
            detail.push_str("; runtime over 5 s");
        }
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {} ({name}): {} [{secs:.2} s] {detail}",
            k + 1,
            match (outcome.applicable, pass) {
                (false, _) => "N/A",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            }
        );
    }
    if failures > 0 {
        println!("acceptance: {failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all applicable criteria passed");
}
