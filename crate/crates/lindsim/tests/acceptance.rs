//! End-to-end acceptance suite. Each test prints one pass/fail line.

mod common;

use common::{ground_projector, random_density, random_model, rng};
use lindsim::channels::{
    approx_kraus, build_dissipation, correction_matrix, kraus_transfer, oaa_block_encodings,
};
use lindsim::model::two_level_atom;
use lindsim::oracle::{exact_evolve, exact_expectation, rk4_evolve};
use lindsim::sampler::{
    correction_norm, enumerate_xg, enumerate_xr, gamma_envelope, segment_weights,
    truncation_order, AsymPair,
};
use lindsim::simulator::{estimate, Mode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng as _;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn report(criterion: u32, what: &str, pass: bool) {
    println!(
        "criterion {criterion} ({what}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {what}");
}

fn mean_transfer(branches: &[(f64, AsymPair)]) -> DMatrix<Complex64> {
    let mut acc: Option<DMatrix<Complex64>> = None;
    for (p, pair) in branches {
        let t = pair.transfer_matrix().unwrap() * c(*p);
        acc = Some(match acc {
            None => t,
            Some(a) => a + t,
        });
    }
    acc.unwrap()
}

const TAUS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 3.0];
const T_GRID: [f64; 6] = [0.1, 1.0, 2.0, 3.0, 4.0, 5.0];

fn auto_r(m: &lindsim::model::LindbladModel, t: f64) -> u64 {
    let norm = m.pauli_norm();
    ((2.0 * norm * norm * t * t).ceil() as u64).max(1)
}

#[test]
fn criterion_1_sampler_expectation_identities() {
    let mut r = rng(1001);
    let mut models = vec![two_level_atom()];
    for _ in 0..3 {
        models.push(random_model(2, 2, 2, 2, &mut r));
    }
    let mut ok = true;
    for m in &models {
        let g = m.transfer_matrix().unwrap().g;
        let mean = mean_transfer(&enumerate_xg(m)) * c(m.pauli_norm());
        ok &= (mean - g).norm() <= 1e-10;
        for k in 1..=m.k_count() {
            for tau in TAUS {
                let ops = build_dissipation(m, k, tau).unwrap();
                let expect = correction_matrix(&ops) / c(correction_norm(tau));
                let mean = mean_transfer(&enumerate_xr(m, k, tau).unwrap());
                ok &= (mean - expect).norm() <= 1e-10;
            }
        }
    }
    report(1, "sampler expectation identities", ok);
}

#[test]
fn criterion_2_exact_recovery_identity() {
    let mut r = rng(1002);
    let models = vec![two_level_atom(), random_model(2, 1, 2, 2, &mut r)];
    let mut ok = true;
    for m in &models {
        for k in 1..=m.k_count() {
            for tau in TAUS {
                let ops = build_dissipation(m, k, tau).unwrap();
                let kp = approx_kraus(&ops).unwrap();
                let split = kraus_transfer(&[&ops.b0, &ops.b1])
                    - kraus_transfer(&[&kp.bp0, &kp.bp1])
                    - correction_matrix(&ops);
                ok &= split.norm() <= 1e-10;
                let dim = ops.b0.nrows();
                let defect = DMatrix::<Complex64>::identity(dim, dim)
                    - kp.bp0.adjoint() * &kp.bp0
                    - kp.bp1.adjoint() * &kp.bp1;
                let eigs = nalgebra::SymmetricEigen::new(defect).eigenvalues;
                ok &= eigs.iter().all(|&e| e >= -1e-12 && e <= 1.0);
            }
        }
    }
    report(2, "exact recovery identity and CPTN bound", ok);
}

#[test]
fn criterion_3_oaa_block_encodings() {
    let m = two_level_atom();
    let mut ok = true;
    for tau in TAUS {
        let rep = oaa_block_encodings(&m, 1, tau).unwrap();
        ok &= rep.all_pass();
        for finding in rep.census_findings() {
            println!("criterion 3 finding: {finding}");
        }
    }
    report(3, "OAA block-encoding verification", ok);
}

#[test]
fn criterion_4_coefficient_norm_bound() {
    let mut r = rng(1004);
    let mut ok = true;
    for _ in 0..20 {
        let n = 1 + r.gen_range(0..2usize);
        let m = random_model(n, 2, r.gen_range(1..3usize), 2, &mut r);
        let t = r.gen_range(0.05..1.0);
        let norm = m.pauli_norm();
        let seg = ((t * norm).ceil() as u64 + r.gen_range(0..8u64)).max(1);
        let q = truncation_order(seg, 0.01).unwrap();
        let w = segment_weights(&m, t, seg, q).unwrap();
        let c_total = w.iter().sum::<f64>().powi(seg as i32);
        let bound = (2.0 * norm * norm * t * t / seg as f64).exp();
        ok &= c_total <= bound + 1e-12;
    }
    let m = two_level_atom();
    for t in T_GRID {
        let seg = auto_r(&m, t);
        let q = truncation_order(seg, 0.01).unwrap();
        let w = segment_weights(&m, t, seg, q).unwrap();
        let c_total = w.iter().sum::<f64>().powi(seg as i32);
        ok &= c_total < 1.5;
    }
    report(4, "coefficient-norm bound", ok);
}

#[test]
fn criterion_5_truncation_order_bound() {
    let m = two_level_atom();
    let mut ok = true;
    for t in T_GRID {
        let q = truncation_order(auto_r(&m, t), 0.01).unwrap();
        ok &= q <= 11;
    }
    report(5, "truncation order bounded by 11", ok);
}

#[test]
fn criterion_6_gamma_inequality() {
    let mut ok = true;
    for step in 0..=100 {
        let x = step as f64 / 100.0;
        let mut sum = 0.0;
        let mut fact = 1.0;
        for l in 0..=50u32 {
            if l > 0 {
                fact *= (2.0 * f64::from(l) - 1.0) * 2.0 * f64::from(l);
            }
            sum += x.powi(2 * l as i32) / fact * gamma_envelope(x / (2.0 * f64::from(l) + 1.0));
        }
        ok &= sum <= (1.66 * x * x).exp() + 1e-12;
    }
    report(6, "gamma inequality", ok);
}

#[test]
fn criterion_7_end_to_end_bias_exact_mode() {
    let m = two_level_atom();
    let rho0 = ground_projector(1);
    let o = ground_projector(1);
    let t = 1.0;
    let seg = auto_r(&m, t);
    let truth = exact_expectation(&m, &rho0, &o, t).unwrap();
    let n = 100_000u64;
    let rep = estimate(&m, &rho0, &o, t, seg, 0.01, n, 7001, Mode::Exact, true).unwrap();
    let mean = rep.values.iter().sum::<f64>() / n as f64;
    let var = rep
        .values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n as f64 - 1.0);
    let sigma_phi = rep.c_total * (var / n as f64).sqrt();
    let ok = (rep.phi - truth).abs() <= 0.01 + 3.0 * sigma_phi;
    println!(
        "criterion 7 detail: phi={:.6} truth={:.6} radius={:.6}",
        rep.phi,
        truth,
        0.01 + 3.0 * sigma_phi
    );
    report(7, "end-to-end bias, exact mode", ok);
}

#[test]
fn criterion_8_figure_reproduction_shots_mode() {
    let m = two_level_atom();
    let rho0 = ground_projector(1);
    let o = ground_projector(1);
    let n = 20_000u64;
    let mut ok = true;
    for (idx, &t) in T_GRID.iter().enumerate() {
        let seg = auto_r(&m, t);
        let rep = estimate(
            &m,
            &rho0,
            &o,
            t,
            seg,
            0.01,
            n,
            8001 + idx as u64,
            Mode::Shots,
            true,
        )
        .unwrap();
        let truth = exact_expectation(&m, &rho0, &o, t).unwrap();
        let radius = 0.01 + rep.c_total * ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
        let err = (rep.phi - truth).abs();
        println!("criterion 8 detail: t={t} err={err:.5} radius={radius:.5}");
        ok &= err <= radius;
    }
    report(8, "figure reproduction, shots mode", ok);
}

#[test]
fn criterion_9_oracle_self_checks() {
    let mut r = rng(1009);
    let mut models = vec![two_level_atom()];
    for _ in 0..3 {
        models.push(random_model(2, 2, 2, 2, &mut r));
    }
    let mut ok = true;
    for m in &models {
        let d = 1usize << m.n();
        let rho0 = random_density(d, &mut r);
        // Semigroup: evolving 0.7 then 0.5 equals evolving 1.2.
        let step = exact_evolve(m, &exact_evolve(m, &rho0, 0.7).unwrap(), 0.5).unwrap();
        let whole = exact_evolve(m, &rho0, 1.2).unwrap();
        ok &= (&step - &whole).norm() <= 1e-9;
        // Trace preservation.
        ok &= (whole.trace().re - 1.0).abs() <= 1e-9;
        // RK4 cross-validation.
        let rk4 = rk4_evolve(m, &rho0, 0.8, 1e-3).unwrap();
        let exact = exact_evolve(m, &rho0, 0.8).unwrap();
        ok &= (rk4 - exact).norm() <= 1e-6;
    }
    report(9, "oracle self-checks", ok);
}
