//! Dense density-matrix engine on system + one Hadamard-test ancilla.
//!
//! The ancilla is the most significant qubit, so the state splits into four
//! system-sized blocks A_ab = ⟨a|_anc ρ |b⟩_anc. Type-I pairs act as
//! anti-controlled/controlled Pauli conjugations, type-III rotations as
//! one-sided exponentials, type-II blocks as the two-operator Kraus map on the
//! system factor. Phases of type-I pairs are deferred to the final phase gate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::channels::{approx_kraus, build_dissipation, KrausPair};
use crate::model::LindbladModel;
use crate::sampler::{
    collapse_type1_runs, sample_circuit, stream_rng, CircuitBlock, SampledCircuit, Side,
};
use crate::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Possibly subnormalized state on n system qubits plus the ancilla.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_sys: usize,
    pub mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn qubits(&self) -> usize {
        self.n_sys + 1
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    fn block(&self, a: usize, b: usize) -> DMatrix<Complex64> {
        let d = 1usize << self.n_sys;
        self.mat.view((a * d, b * d), (d, d)).into_owned()
    }

    fn set_block(&mut self, a: usize, b: usize, m: &DMatrix<Complex64>) {
        let d = 1usize << self.n_sys;
        self.mat.view_mut((a * d, b * d), (d, d)).copy_from(m);
    }
}

/// Validate ρ0 and prepare |+⟩⟨+|_anc ⊗ ρ0.
pub fn init_state(rho0: &DMatrix<Complex64>) -> Result<DensityMatrix, Error> {
    let d = rho0.nrows();
    if d == 0 || !d.is_power_of_two() || rho0.ncols() != d {
        return Err(Error::Config("state must be square with power-of-two size".into()));
    }
    let n_sys = d.trailing_zeros() as usize;
    if (rho0 - rho0.adjoint()).norm() > 1e-9 {
        return Err(Error::Config("initial state is not Hermitian".into()));
    }
    let tr = rho0.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Config(format!("initial state trace {tr} is not 1")));
    }
    let eig = nalgebra::SymmetricEigen::new(rho0.clone());
    if eig.eigenvalues.iter().any(|&e| e < -1e-9) {
        return Err(Error::Config("initial state has a negative eigenvalue".into()));
    }
    let half = rho0 * c(0.5);
    let mut mat = DMatrix::from_element(2 * d, 2 * d, c(0.0));
    for a in 0..2 {
        for b in 0..2 {
            mat.view_mut((a * d, b * d), (d, d)).copy_from(&half);
        }
    }
    Ok(DensityMatrix { n_sys, mat })
}

fn conjugate_blocks(
    s: &mut DensityMatrix,
    u0: &DMatrix<Complex64>,
    u1: &DMatrix<Complex64>,
) {
    // ρ ↦ (|0⟩⟨0|⊗U0 + |1⟩⟨1|⊗U1) ρ (·)†
    let us = [u0, u1];
    for a in 0..2 {
        for b in 0..2 {
            let m = us[a] * s.block(a, b) * us[b].adjoint();
            s.set_block(a, b, &m);
        }
    }
}

/// Apply a type-I pair (phase excluded; it lives in the final phase gate).
pub fn apply_asym_pair(s: &mut DensityMatrix, blk: &CircuitBlock) -> Result<(), Error> {
    let CircuitBlock::AsymPauliPair { p_ket, p_bra, .. } = blk else {
        return Err(Error::Config("expected a type-I block".into()));
    };
    let p = p_ket.to_matrix()?;
    let q = p_bra.to_matrix()?;
    conjugate_blocks(s, &p, &q);
    Ok(())
}

/// Apply a type-III controlled rotation.
pub fn apply_controlled_rotation(s: &mut DensityMatrix, blk: &CircuitBlock) -> Result<(), Error> {
    let CircuitBlock::ControlledRotation { p, angle, sign, side } = blk else {
        return Err(Error::Config("expected a type-III block".into()));
    };
    let d = 1usize << s.n_sys;
    let id = DMatrix::identity(d, d);
    // exp(−i·angle·sign·P) = cos(angle)·1 − i·sign·sin(angle)·P
    let u = &id * c(angle.cos()) + p.to_matrix()? * Complex64::new(0.0, -sign * angle.sin());
    match side {
        Side::Ket => conjugate_blocks(s, &u, &id),
        Side::Bra => conjugate_blocks(s, &id, &u),
    }
    Ok(())
}

/// Apply the CPTN dissipative map exactly; the trace may decrease.
pub fn apply_dissipative_exact(s: &mut DensityMatrix, kp: &KrausPair) {
    let d = 1usize << s.n_sys;
    let mut out = DMatrix::from_element(2 * d, 2 * d, c(0.0));
    for b in [&kp.bp0, &kp.bp1] {
        for i in 0..2 {
            for j in 0..2 {
                let m = b * s.block(i, j) * b.adjoint();
                out.view_mut((i * d, j * d), (d, d))
                    .zip_apply(&m, |o, v| *o += v);
            }
        }
    }
    s.mat = out;
}

/// Trajectory version: sample the success POVM; on success the state is
/// renormalized, on failure the trajectory is worthless (value 0).
pub fn apply_dissipative_trajectory<R: Rng>(
    s: &mut DensityMatrix,
    kp: &KrausPair,
    rng: &mut R,
) -> Result<bool, Error> {
    let before = s.trace();
    apply_dissipative_exact(s, kp);
    let p = s.trace() / before;
    if p < -1e-12 || p > 1.0 + 1e-12 {
        return Err(Error::Numeric(format!("corrupted success probability {p}")));
    }
    if rng.gen::<f64>() < p {
        s.mat /= c(p);
        Ok(true)
    } else {
        Ok(false)
    }
}

fn apply_final_phase(s: &mut DensityMatrix, phi: f64) {
    let e = Complex64::from_polar(1.0, phi);
    let b01 = s.block(0, 1) * e;
    let b10 = s.block(1, 0) * e.conj();
    s.set_block(0, 1, &b01);
    s.set_block(1, 0, &b10);
}

/// Per-model executor holding a cache of dissipative Kraus pairs.
#[derive(Clone)]
pub struct Engine<'a> {
    model: &'a LindbladModel,
    kraus_cache: HashMap<(usize, u64), KrausPair>,
}

impl<'a> Engine<'a> {
    pub fn new(model: &'a LindbladModel) -> Self {
        Engine {
            model,
            kraus_cache: HashMap::new(),
        }
    }

    pub fn model(&self) -> &LindbladModel {
        self.model
    }

    /// Precompute the Kraus pairs for every (jump, truncation level) used by
    /// circuits at the given run parameters.
    pub fn prefill(&mut self, t: f64, r: u64, q: u32) -> Result<(), Error> {
        for k in 1..=self.model.k_count() {
            for l in 0..=q {
                let tau = self.model.tau(t, r, l);
                self.kraus(k, tau)?;
            }
        }
        Ok(())
    }

    fn kraus(&mut self, k: usize, tau: f64) -> Result<&KrausPair, Error> {
        let key = (k, tau.to_bits());
        if !self.kraus_cache.contains_key(&key) {
            let kp = approx_kraus(&build_dissipation(self.model, k, tau)?)?;
            self.kraus_cache.insert(key, kp);
        }
        Ok(&self.kraus_cache[&key])
    }

    /// Exact per-circuit value Tr[(X ⊗ O) ρ_final].
    pub fn expectation_exact(
        &mut self,
        circuit: &SampledCircuit,
        rho0: &DMatrix<Complex64>,
        o: &DMatrix<Complex64>,
    ) -> Result<f64, Error> {
        check_observable(o)?;
        let mut s = init_state(rho0)?;
        for blk in &circuit.blocks {
            match blk {
                CircuitBlock::AsymPauliPair { .. } => apply_asym_pair(&mut s, blk)?,
                CircuitBlock::ControlledRotation { .. } => {
                    apply_controlled_rotation(&mut s, blk)?
                }
                CircuitBlock::Dissipative { k, tau } => {
                    let kp = self.kraus(*k, *tau)?.clone();
                    apply_dissipative_exact(&mut s, &kp);
                }
                CircuitBlock::FinalPhase { phi } => apply_final_phase(&mut s, *phi),
            }
        }
        // Tr[(X⊗O)ρ] = Tr[O A_01] + Tr[O A_10] = 2 Re Tr[O A_01].
        let val = (o * s.block(0, 1)).trace() + (o * s.block(1, 0)).trace();
        if val.im.abs() > 1e-10 {
            return Err(Error::Numeric(format!(
                "expectation has imaginary part {:.2e}",
                val.im
            )));
        }
        Ok(val.re)
    }

    /// One Monte Carlo trajectory of the circuit.
    pub fn run_trajectory<R: Rng>(
        &mut self,
        circuit: &SampledCircuit,
        rho0: &DMatrix<Complex64>,
        basis: &MeasurementBasis,
        rng: &mut R,
    ) -> Result<TrajectoryOutcome, Error> {
        let mut s = init_state(rho0)?;
        let mut failures = 0usize;
        for blk in &circuit.blocks {
            match blk {
                CircuitBlock::AsymPauliPair { .. } => apply_asym_pair(&mut s, blk)?,
                CircuitBlock::ControlledRotation { .. } => {
                    apply_controlled_rotation(&mut s, blk)?
                }
                CircuitBlock::Dissipative { k, tau } => {
                    let kp = self.kraus(*k, *tau)?.clone();
                    if !apply_dissipative_trajectory(&mut s, &kp, rng)? {
                        failures += 1;
                        return Ok(TrajectoryOutcome {
                            value: 0.0,
                            terminated_early: true,
                            midcircuit_failures: failures,
                        });
                    }
                }
                CircuitBlock::FinalPhase { phi } => apply_final_phase(&mut s, *phi),
            }
        }
        let value = basis.sample_joint(&s, rng)?;
        Ok(TrajectoryOutcome {
            value,
            terminated_early: false,
            midcircuit_failures: failures,
        })
    }
}

/// Final-measurement outcome of one trajectory.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryOutcome {
    pub value: f64,
    pub terminated_early: bool,
    pub midcircuit_failures: usize,
}

/// Precomputed eigenbasis of the observable, grouped by eigenvalue.
pub struct MeasurementBasis {
    vectors: Vec<DVector<Complex64>>,
    values: Vec<f64>,
    pub op_norm: f64,
}

fn check_observable(o: &DMatrix<Complex64>) -> Result<(), Error> {
    if (o - o.adjoint()).norm() > 1e-9 {
        return Err(Error::Config("observable must be Hermitian".into()));
    }
    Ok(())
}

impl MeasurementBasis {
    pub fn new(o: &DMatrix<Complex64>) -> Result<Self, Error> {
        check_observable(o)?;
        let eig = nalgebra::SymmetricEigen::new(o.clone());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        // Cluster numerically degenerate eigenvalues.
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        for v in values.iter_mut() {
            for rep in &sorted {
                if (*v - rep).abs() <= 1e-9 {
                    *v = *rep;
                    break;
                }
            }
        }
        let vectors = (0..o.nrows())
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let op_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(MeasurementBasis {
            vectors,
            values,
            op_norm,
        })
    }

    /// Sample the joint X_anc ⊗ O eigenbasis measurement; returns b_X·b_O.
    fn sample_joint<R: Rng>(&self, s: &DensityMatrix, rng: &mut R) -> Result<f64, Error> {
        let d = 1usize << s.n_sys();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut probs = Vec::with_capacity(2 * self.vectors.len());
        let mut outcomes = Vec::with_capacity(2 * self.vectors.len());
        for (v, &o_val) in self.vectors.iter().zip(&self.values) {
            for sign in [1.0f64, -1.0] {
                let mut w = DVector::from_element(2 * d, c(0.0));
                for i in 0..d {
                    w[i] = v[i] * c(inv_sqrt2);
                    w[d + i] = v[i] * c(sign * inv_sqrt2);
                }
                let p = (w.adjoint() * &s.mat * &w)[(0, 0)].re;
                if p < -1e-9 {
                    return Err(Error::Numeric(format!("negative outcome probability {p}")));
                }
                probs.push(p.max(0.0));
                outcomes.push(sign * o_val);
            }
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::Numeric("vanishing final-measurement norm".into()));
        }
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for (p, out) in probs.iter().zip(&outcomes) {
            acc += p;
            if u < acc {
                return Ok(*out);
            }
        }
        Ok(*outcomes.last().unwrap())
    }
}

/// Estimation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Shots,
}

/// Result of an estimation run.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub phi: f64,
    pub c_total: f64,
    pub q_order: u32,
    pub r: u64,
    pub n_samples: u64,
    /// Per-circuit (exact mode) or per-trajectory (shots mode) raw values,
    /// before the C rescaling.
    pub values: Vec<f64>,
    pub hoeffding_95: f64,
}

/// Sample N circuits and average their estimator values, rescaled by C.
#[allow(clippy::too_many_arguments)]
pub fn estimate(
    m: &LindbladModel,
    rho0: &DMatrix<Complex64>,
    o: &DMatrix<Complex64>,
    t: f64,
    r: u64,
    delta: f64,
    n_samples: u64,
    seed: u64,
    mode: Mode,
    collapse: bool,
) -> Result<EstimateReport, Error> {
    let basis = MeasurementBasis::new(o)?;
    let q_order = crate::sampler::truncation_order(r, delta)?;
    let weights = crate::sampler::segment_weights(m, t, r, q_order)?;
    let c_total = weights.iter().sum::<f64>().powi(r as i32);
    let mut base_engine = Engine::new(m);
    base_engine.prefill(t, r, q_order)?;
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64, Error> {
            let mut rng = stream_rng(seed, i + 1);
            let mut circuit = sample_circuit(m, t, r, delta, &mut rng)?;
            if collapse {
                circuit = collapse_type1_runs(&circuit);
            }
            let mut engine = base_engine.clone();
            match mode {
                Mode::Exact => engine.expectation_exact(&circuit, rho0, o),
                Mode::Shots => Ok(engine
                    .run_trajectory(&circuit, rho0, &basis, &mut rng)?
                    .value),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = values.iter().sum::<f64>() / n_samples as f64;
    let hoeffding_95 =
        c_total * basis.op_norm * ((2.0f64 / 0.05).ln() / (2.0 * n_samples as f64)).sqrt();
    Ok(EstimateReport {
        phi: c_total * mean,
        c_total,
        q_order,
        r,
        n_samples,
        values,
        hoeffding_95,
    })
}
