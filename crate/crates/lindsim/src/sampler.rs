//! Randomized circuit sampling: the probability machinery (segment weights,
//! truncation order) and the samplers producing circuit IR blocks.
//!
//! Every sampler has a deterministic twin that enumerates all branches as
//! (probability, value) pairs, so the expectation identities behind the
//! decomposition can be asserted exactly instead of statistically.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;

use crate::model::LindbladModel;
use crate::pauli::{canonical_phase, multiply, PauliString, PhasedPauli};
use crate::Error;

/// Which conjugation side a one-sided unitary acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Ket,
    Bra,
}

/// One block of the randomized circuit.
#[derive(Clone, Debug)]
pub enum CircuitBlock {
    /// Type I: the superoperator e^{iθ} P_ket • P_bra†, realized as an
    /// anti-controlled P_ket / controlled P_bra pair on the Hadamard-test
    /// ancilla. θ is folded into the final phase gate.
    AsymPauliPair {
        p_ket: PauliString,
        p_bra: PauliString,
        theta: f64,
    },
    /// Type III: exp(−i·angle·sign·P) applied on one conjugation side.
    ControlledRotation {
        p: PauliString,
        angle: f64,
        sign: f64,
        side: Side,
    },
    /// Type II: the effective CPTN dissipative block for jump k at step size tau.
    Dissipative { k: usize, tau: f64 },
    /// Phase(e^{iφ}) on the ancilla, appended exactly once, last.
    FinalPhase { phi: f64 },
}

/// A sampled circuit together with its global weight C.
#[derive(Clone, Debug)]
pub struct SampledCircuit {
    pub blocks: Vec<CircuitBlock>,
    pub c_total: f64,
    pub q_order: u32,
    pub r: u64,
    /// Seed recorded for bit-exact replay when sampled through
    /// [`sample_circuit_seeded`].
    pub seed: Option<u64>,
}

impl fmt::Display for SampledCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# r={} Q={} C={:.12e}",
            self.r, self.q_order, self.c_total
        )?;
        for b in &self.blocks {
            match b {
                CircuitBlock::AsymPauliPair {
                    p_ket,
                    p_bra,
                    theta,
                } => writeln!(
                    f,
                    "pair ket={} bra={} theta={:.12}",
                    p_ket.label(),
                    p_bra.label(),
                    theta
                )?,
                CircuitBlock::ControlledRotation {
                    p,
                    angle,
                    sign,
                    side,
                } => writeln!(
                    f,
                    "rot p={} angle={:.12} sign={} side={:?}",
                    p.label(),
                    angle,
                    sign,
                    side
                )?,
                CircuitBlock::Dissipative { k, tau } => {
                    writeln!(f, "diss k={k} tau={tau:.12}")?
                }
                CircuitBlock::FinalPhase { phi } => writeln!(f, "phase phi={phi:.12}")?,
            }
        }
        Ok(())
    }
}

/// A type-I pair in standard form: the superoperator e^{iθ} P_ket • P_bra†,
/// with transfer matrix e^{iθ} conj(P_bra) ⊗ P_ket.
#[derive(Clone, Copy, Debug)]
pub struct AsymPair {
    pub p_ket: PauliString,
    pub p_bra: PauliString,
    pub theta: f64,
}

impl AsymPair {
    /// Standard form of the superoperator K • B† for phased operators K, B:
    /// bare strings with θ = phase(K) − phase(B).
    pub fn from_phased(ket: &PhasedPauli, bra: &PhasedPauli) -> Self {
        AsymPair {
            p_ket: ket.pauli,
            p_bra: bra.pauli,
            theta: canonical_phase(ket.phase() - bra.phase()),
        }
    }

    /// Dense transfer matrix e^{iθ} conj(P_bra) ⊗ P_ket.
    pub fn transfer_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        let ket = self.p_ket.to_matrix()?;
        let bra_conj = self.p_bra.to_matrix()?.map(|v| v.conj());
        Ok(bra_conj.kronecker(&ket) * Complex64::from_polar(1.0, self.theta))
    }

    pub fn into_block(self) -> CircuitBlock {
        CircuitBlock::AsymPauliPair {
            p_ket: self.p_ket,
            p_bra: self.p_bra,
            theta: self.theta,
        }
    }
}

/// Q = ⌈ln(3r/2Δ) / ln ln(3r/2Δ)⌉.
pub fn truncation_order(r: u64, delta: f64) -> Result<u32, Error> {
    if !(delta > 0.0 && delta < 1.0 / std::f64::consts::E) {
        return Err(Error::Config(format!(
            "delta must lie in (0, 1/e), got {delta}"
        )));
    }
    let arg = 3.0 * r as f64 / (2.0 * delta);
    if arg.ln() <= 1.0 {
        return Err(Error::Config(
            "3r/(2 delta) too small for the truncation formula".into(),
        ));
    }
    Ok((arg.ln() / arg.ln().ln()).ceil() as u32)
}

/// ‖R‖ at step size τ: τ²/4 + τ³/2 + 5τ⁴/64 + τ⁵/32 + τ⁶/256.
pub fn correction_norm(tau: f64) -> f64 {
    assert!(tau >= 0.0);
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    let t6 = t5 * tau;
    t2 / 4.0 + t3 / 2.0 + 5.0 * t4 / 64.0 + t5 / 32.0 + t6 / 256.0
}

/// γ(t) = 1 + t²/2 + t³/2 + 5t⁴/64 + t⁵/32 + t⁶/256, the per-segment envelope
/// appearing in the weight bound.
pub fn gamma_envelope(t: f64) -> f64 {
    1.0 + t * t / 4.0 + correction_norm(t)
}

/// Rotation angle θ_l = arccos((1+τ²)^{−1/2}).
pub fn rotation_angle(tau: f64) -> f64 {
    (1.0 / (1.0 + tau * tau).sqrt()).acos()
}

/// Segment weights C_0..C_Q.
pub fn segment_weights(
    m: &LindbladModel,
    t: f64,
    r: u64,
    q: u32,
) -> Result<Vec<f64>, Error> {
    let norm = m.pauli_norm();
    if (r as f64) < t * norm {
        return Err(Error::Config(format!(
            "segment count r={r} violates r >= t*pauli_norm = {}",
            t * norm
        )));
    }
    let alpha = m.alpha();
    let alpha0 = m.alpha0();
    let x = (t / r as f64) * norm;
    let mut weights = Vec::with_capacity(q as usize + 1);
    let mut fact = 1.0; // (2l)!
    for l in 0..=q {
        if l > 0 {
            fact *= (2.0 * f64::from(l) - 1.0) * 2.0 * f64::from(l);
        }
        let tau = m.tau(t, r, l);
        let mut inner = 2.0 * (alpha0 / alpha) * (1.0 + tau * tau).sqrt();
        for jump in m.jumps() {
            let ak2 = jump.alpha_k() * jump.alpha_k();
            inner += (ak2 / alpha) * (1.0 + correction_norm(tau) + tau * tau / 4.0);
        }
        weights.push(x.powi(2 * l as i32) / fact * inner);
    }
    Ok(weights)
}

/// Draw an index from unnormalized nonnegative weights.
fn draw_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// An RNG stream derived from (seed, stream); independent streams share a seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ---------------------------------------------------------------------------
// Generator sampler: X_G with E[X_G] = G / pauli_norm.
// ---------------------------------------------------------------------------

/// Deterministic value of one generator-sampler branch.
///
/// `k` = 0 for the Hamiltonian branch (then `case` in {1,2} and `j2` unused);
/// `k` >= 1 for jump branches (`case` in {1,2,3}).
fn xg_branch(m: &LindbladModel, k: usize, case: u8, j1: usize, j2: usize) -> AsymPair {
    let n = m.n();
    let ident = PhasedPauli::identity(n);
    if k == 0 {
        let (_, p) = m.hamiltonian().terms()[j1];
        let theta = if m.h_signs()[j1] >= 0.0 { 0.0 } else { PI };
        match case {
            // e^{i(θ_{0j} − π/2)} 1 ⊗ P_{0j}
            1 => AsymPair::from_phased(
                &PhasedPauli::with_phase(p, theta - PI / 2.0),
                &ident,
            ),
            // e^{i(θ_{0j} + π/2)} P_{0j}ᵀ ⊗ 1 = conj(B) ⊗ 1
            2 => {
                let b = crate::pauli::entrywise_conjugate(
                    &crate::pauli::transpose(&PhasedPauli::bare(p)).rotated(theta + PI / 2.0),
                );
                AsymPair::from_phased(&ident, &b)
            }
            _ => unreachable!(),
        }
    } else {
        let jump = &m.jumps()[k - 1];
        let (_, p1) = jump.terms().terms()[j1];
        let (_, p2) = jump.terms().terms()[j2];
        let th1 = jump.phases()[j1];
        let th2 = jump.phases()[j2];
        match case {
            // e^{i(−θ1+θ2)} conj(P1) ⊗ P2 = conj(e^{iθ1}P1) ⊗ e^{iθ2}P2
            1 => AsymPair::from_phased(
                &PhasedPauli::with_phase(p2, th2),
                &PhasedPauli::with_phase(p1, th1),
            ),
            // e^{i(−θ1+θ2+π)} 1 ⊗ P1 P2
            2 => {
                let ket = multiply(
                    &PhasedPauli::with_phase(p1, -th1 + PI),
                    &PhasedPauli::with_phase(p2, th2),
                )
                .unwrap();
                AsymPair::from_phased(&ket, &ident)
            }
            // e^{i(θ1−θ2+π)} P1ᵀ conj(P2) ⊗ 1 = conj(e^{i(−θ1+θ2−π)} P1 P2) ⊗ 1
            3 => {
                let bra = multiply(
                    &PhasedPauli::with_phase(p1, -th1 - PI),
                    &PhasedPauli::with_phase(p2, th2),
                )
                .unwrap();
                AsymPair::from_phased(&ident, &bra)
            }
            _ => unreachable!(),
        }
    }
}

/// Random draw of X_G.
pub fn sample_xg<R: Rng>(m: &LindbladModel, rng: &mut R) -> AsymPair {
    let norm = m.pauli_norm();
    let mut k_weights = vec![2.0 * m.alpha0() / norm];
    for jump in m.jumps() {
        k_weights.push(2.0 * jump.alpha_k() * jump.alpha_k() / norm);
    }
    let k = draw_index(&k_weights, rng);
    if k == 0 {
        let case = if rng.gen::<f64>() < 0.5 { 1 } else { 2 };
        let j = draw_index(m.h_probs(), rng);
        xg_branch(m, 0, case, j, 0)
    } else {
        let u = rng.gen::<f64>();
        let case = if u < 0.5 {
            1
        } else if u < 0.75 {
            2
        } else {
            3
        };
        let jump = &m.jumps()[k - 1];
        let j1 = draw_index(jump.probs(), rng);
        let j2 = draw_index(jump.probs(), rng);
        xg_branch(m, k, case, j1, j2)
    }
}

/// All generator-sampler branches as (probability, value) pairs.
pub fn enumerate_xg(m: &LindbladModel) -> Vec<(f64, AsymPair)> {
    let norm = m.pauli_norm();
    let mut out = Vec::new();
    let p_h = 2.0 * m.alpha0() / norm;
    if p_h > 0.0 {
        for case in [1u8, 2] {
            for (j, pj) in m.h_probs().iter().enumerate() {
                out.push((p_h * 0.5 * pj, xg_branch(m, 0, case, j, 0)));
            }
        }
    }
    for (ki, jump) in m.jumps().iter().enumerate() {
        let p_k = 2.0 * jump.alpha_k() * jump.alpha_k() / norm;
        for (case, p_case) in [(1u8, 0.5), (2, 0.25), (3, 0.25)] {
            for (j1, p1) in jump.probs().iter().enumerate() {
                for (j2, p2) in jump.probs().iter().enumerate() {
                    out.push((
                        p_k * p_case * p1 * p2,
                        xg_branch(m, ki + 1, case, j1, j2),
                    ));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Correction sampler: X_R with E[X_R] = R_{kl} / ‖R_kl‖.
// ---------------------------------------------------------------------------

/// Factor index into a jump operator extended by the virtual term 0 = i·1
/// with zero angle. `sign` scales the term's angle in the accumulated phase.
fn xr_factor(m: &LindbladModel, k: usize, j: usize, sign: f64) -> PhasedPauli {
    if j == 0 {
        // P_{k0} := i·1, θ_{k0} := 0.
        PhasedPauli::identity(m.n()).quarter_rotated(1)
    } else {
        let jump = &m.jumps()[k - 1];
        let (_, p) = jump.terms().terms()[j - 1];
        PhasedPauli::with_phase(p, sign * jump.phases()[j - 1])
    }
}

/// Index draws of one correction-sampler branch: the head indices of the bra and ket
/// factors plus the four-fold tail draws attached per the `i` case.
#[derive(Clone, Debug)]
struct XrIndices {
    case_i: u8,
    bra_head: Vec<usize>,
    ket_head: Vec<usize>,
    bra_tail: Vec<usize>,
    ket_tail: Vec<usize>,
}

fn xr_value(m: &LindbladModel, k: usize, ix: &XrIndices) -> AsymPair {
    let build = |head: &[usize], tail: &[usize]| -> PhasedPauli {
        let mut acc: Option<PhasedPauli> = None;
        let head_signs: &[f64] = if head.len() == 2 { &[-1.0, 1.0] } else { &[1.0] };
        let factors = head
            .iter()
            .zip(head_signs)
            .chain(tail.iter().zip(&[-1.0, 1.0, -1.0, 1.0]));
        for (&j, &s) in factors {
            let f = xr_factor(m, k, j, s);
            acc = Some(match acc {
                None => f,
                Some(a) => multiply(&a, &f).unwrap(),
            });
        }
        acc.unwrap()
    };
    let bra = build(&ix.bra_head, &ix.bra_tail);
    let mut ket = build(&ix.ket_head, &ix.ket_tail);
    if ix.case_i == 2 {
        // Restores the minus sign of the second-order correction term.
        ket = ket.rotated(PI);
    }
    AsymPair::from_phased(&ket, &bra)
}

fn xr_distributions(m: &LindbladModel, k: usize, tau: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // p_λ ∝ {(1+τ/2)², τ}; p_i ∝ {1, 1, τ²/8}; head pair distribution for λ=0:
    // (0,0) with weight 1, (m1,m2) with weight (τ/2)p_{m1}p_{m2}, all over 1+τ/2.
    let lam = vec![(1.0 + tau / 2.0).powi(2), tau];
    let cas = vec![1.0, 1.0, tau * tau / 8.0];
    let probs = m.jumps()[k - 1].probs().to_vec();
    (lam, cas, probs)
}

/// Draw the λ=0 head pair: Some((j1, j2)) over the extended index set, where 0
/// is the virtual identity term.
fn draw_pair_head<R: Rng>(probs: &[f64], tau: f64, rng: &mut R) -> (usize, usize) {
    let p_ident = 1.0 / (1.0 + tau / 2.0);
    if rng.gen::<f64>() < p_ident {
        (0, 0)
    } else {
        (draw_index(probs, rng) + 1, draw_index(probs, rng) + 1)
    }
}

fn xr_head_needs_tail(case_i: u8) -> (bool, bool) {
    // (bra has a four-factor tail, ket has a four-factor tail)
    match case_i {
        0 => (false, true),
        1 => (true, false),
        2 => (true, true),
        _ => unreachable!(),
    }
}

/// Random draw of X_R for jump k at step size tau.
pub fn sample_xr<R: Rng>(
    m: &LindbladModel,
    k: usize,
    tau: f64,
    rng: &mut R,
) -> Result<AsymPair, Error> {
    check_xr_args(m, k, tau)?;
    let (lam_w, cas_w, probs) = xr_distributions(m, k, tau);
    let lambda = draw_index(&lam_w, rng) as u8;
    let case_i = draw_index(&cas_w, rng) as u8;
    let head = |rng: &mut R| -> Vec<usize> {
        if lambda == 0 {
            let (a, b) = draw_pair_head(&probs, tau, rng);
            vec![a, b]
        } else {
            vec![draw_index(&probs, rng) + 1]
        }
    };
    let tail = |rng: &mut R| -> Vec<usize> {
        (0..4).map(|_| draw_index(&probs, rng) + 1).collect()
    };
    let (bra_t, ket_t) = xr_head_needs_tail(case_i);
    let ix = XrIndices {
        case_i,
        bra_head: head(rng),
        ket_head: head(rng),
        bra_tail: if bra_t { tail(rng) } else { vec![] },
        ket_tail: if ket_t { tail(rng) } else { vec![] },
    };
    Ok(xr_value(m, k, &ix))
}

fn check_xr_args(m: &LindbladModel, k: usize, tau: f64) -> Result<(), Error> {
    if k == 0 || k > m.k_count() {
        return Err(Error::Config(format!("jump index {k} out of range")));
    }
    if !(tau > 0.0 && tau <= 3.0) {
        return Err(Error::Config(format!(
            "tau must lie in (0, 3] for the correction sampler, got {tau}"
        )));
    }
    Ok(())
}

/// All correction-sampler branches as (probability, value) pairs.
pub fn enumerate_xr(
    m: &LindbladModel,
    k: usize,
    tau: f64,
) -> Result<Vec<(f64, AsymPair)>, Error> {
    check_xr_args(m, k, tau)?;
    let (lam_w, cas_w, probs) = xr_distributions(m, k, tau);
    let lam_total: f64 = lam_w.iter().sum();
    let cas_total: f64 = cas_w.iter().sum();
    let mm = probs.len();

    // Head alternatives with probabilities for each λ.
    let heads = |lambda: u8| -> Vec<(f64, Vec<usize>)> {
        if lambda == 0 {
            let mut hs = vec![(1.0 / (1.0 + tau / 2.0), vec![0, 0])];
            for a in 0..mm {
                for b in 0..mm {
                    hs.push((
                        (tau / 2.0) / (1.0 + tau / 2.0) * probs[a] * probs[b],
                        vec![a + 1, b + 1],
                    ));
                }
            }
            hs
        } else {
            (0..mm).map(|j| (probs[j], vec![j + 1])).collect()
        }
    };
    let tails: Vec<(f64, Vec<usize>)> = {
        let mut ts = Vec::new();
        for a in 0..mm {
            for b in 0..mm {
                for c in 0..mm {
                    for d in 0..mm {
                        ts.push((
                            probs[a] * probs[b] * probs[c] * probs[d],
                            vec![a + 1, b + 1, c + 1, d + 1],
                        ));
                    }
                }
            }
        }
        ts
    };
    let no_tail = vec![(1.0, Vec::<usize>::new())];

    let mut out = Vec::new();
    for lambda in 0..2u8 {
        let p_lam = lam_w[lambda as usize] / lam_total;
        for case_i in 0..3u8 {
            let p_cas = cas_w[case_i as usize] / cas_total;
            if p_lam * p_cas == 0.0 {
                continue;
            }
            let (bra_t, ket_t) = xr_head_needs_tail(case_i);
            let bra_tails = if bra_t { &tails } else { &no_tail };
            let ket_tails = if ket_t { &tails } else { &no_tail };
            for (pbh, bh) in heads(lambda).iter() {
                for (pkh, kh) in heads(lambda).iter() {
                    for (pbt, bt) in bra_tails {
                        for (pkt, kt) in ket_tails {
                            let ix = XrIndices {
                                case_i,
                                bra_head: bh.clone(),
                                ket_head: kh.clone(),
                                bra_tail: bt.clone(),
                                ket_tail: kt.clone(),
                            };
                            out.push((
                                p_lam * p_cas * pbh * pkh * pbt * pkt,
                                xr_value(m, k, &ix),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The full circuit distribution.
// ---------------------------------------------------------------------------

/// Sample one randomized circuit for r segments of duration t/r each.
pub fn sample_circuit<R: Rng>(
    m: &LindbladModel,
    t: f64,
    r: u64,
    delta: f64,
    rng: &mut R,
) -> Result<SampledCircuit, Error> {
    let q = truncation_order(r, delta)?;
    let weights = segment_weights(m, t, r, q)?;
    let c_seg: f64 = weights.iter().sum();
    let alpha = m.alpha();
    let alpha0 = m.alpha0();

    let mut blocks = Vec::new();
    let mut phi = 0.0;
    for _ in 0..r {
        let l = draw_index(&weights, rng) as u32;
        let tau = m.tau(t, r, l);
        // q_{kl}: Hamiltonian branch then each jump.
        let mut kq = vec![2.0 * (alpha0 / alpha) * (1.0 + tau * tau).sqrt()];
        for jump in m.jumps() {
            let ak2 = jump.alpha_k() * jump.alpha_k();
            kq.push((ak2 / alpha) * (1.0 + correction_norm(tau) + tau * tau / 4.0));
        }
        let k = draw_index(&kq, rng);
        if k == 0 {
            // Type-III rotation on the ket (ν=1) or bra (ν=2) side.
            let side = if rng.gen::<f64>() < 0.5 {
                Side::Ket
            } else {
                Side::Bra
            };
            let j = draw_index(m.h_probs(), rng);
            let (_, p) = m.hamiltonian().terms()[j];
            blocks.push(CircuitBlock::ControlledRotation {
                p,
                angle: rotation_angle(tau),
                sign: m.h_signs()[j],
                side,
            });
        } else {
            let nu_w = vec![1.0, correction_norm(tau), tau * tau / 4.0];
            match draw_index(&nu_w, rng) {
                0 => blocks.push(CircuitBlock::Dissipative { k, tau }),
                1 => {
                    let pair = sample_xr(m, k, tau, rng)?;
                    phi += pair.theta;
                    blocks.push(pair.into_block());
                }
                _ => {
                    // Γ_{kl,3}: e^{i(−θ1+θ2−θ3+θ4+π)} P_{j1}P_{j2} • P_{j3}P_{j4}.
                    let jump = &m.jumps()[k - 1];
                    let js: Vec<usize> =
                        (0..4).map(|_| draw_index(jump.probs(), rng)).collect();
                    let term = |j: usize, s: f64| {
                        let (_, p) = jump.terms().terms()[j];
                        PhasedPauli::with_phase(p, s * jump.phases()[j])
                    };
                    let ket = multiply(&term(js[0], -1.0), &term(js[1], 1.0))
                        .unwrap()
                        .rotated(PI);
                    // • P_{j3}P_{j4} is • B† with B = (P_{j3}P_{j4})† = P_{j4}P_{j3},
                    // and the −θ3+θ4 phase belongs to the superoperator.
                    let bra = multiply(&term(js[3], 1.0), &term(js[2], -1.0)).unwrap();
                    let pair = AsymPair::from_phased(&ket, &bra);
                    phi += pair.theta;
                    blocks.push(pair.into_block());
                }
            }
        }
        for _ in 0..2 * l {
            let pair = sample_xg(m, rng);
            phi += pair.theta;
            blocks.push(pair.into_block());
        }
    }
    blocks.push(CircuitBlock::FinalPhase {
        phi: canonical_phase(phi),
    });
    Ok(SampledCircuit {
        blocks,
        c_total: c_seg.powi(r as i32),
        q_order: q,
        r,
        seed: None,
    })
}

/// Like [`sample_circuit`] but drawing from a fresh stream of `seed`, recorded
/// in the result for replay.
pub fn sample_circuit_seeded(
    m: &LindbladModel,
    t: f64,
    r: u64,
    delta: f64,
    seed: u64,
) -> Result<SampledCircuit, Error> {
    let mut rng = stream_rng(seed, 0);
    let mut c = sample_circuit(m, t, r, delta, &mut rng)?;
    c.seed = Some(seed);
    Ok(c)
}

/// Replace maximal consecutive runs of type-I pairs by their single product
/// pair; the extra Pauli-product phases are folded into the final phase gate.
pub fn collapse_type1_runs(c: &SampledCircuit) -> SampledCircuit {
    let mut blocks: Vec<CircuitBlock> = Vec::with_capacity(c.blocks.len());
    let mut extra_phi = 0.0;
    let mut run: Option<(PhasedPauli, PhasedPauli, f64)> = None;

    let flush = |run: &mut Option<(PhasedPauli, PhasedPauli, f64)>,
                 blocks: &mut Vec<CircuitBlock>,
                 extra_phi: &mut f64| {
        if let Some((ket, bra, theta_sum)) = run.take() {
            let folded = canonical_phase(ket.phase() - bra.phase());
            *extra_phi += folded;
            blocks.push(CircuitBlock::AsymPauliPair {
                p_ket: ket.pauli,
                p_bra: bra.pauli,
                theta: canonical_phase(theta_sum + folded),
            });
        }
    };

    for b in &c.blocks {
        match b {
            CircuitBlock::AsymPauliPair {
                p_ket,
                p_bra,
                theta,
            } => {
                run = Some(match run {
                    None => (
                        PhasedPauli::bare(*p_ket),
                        PhasedPauli::bare(*p_bra),
                        *theta,
                    ),
                    Some((ket, bra, ts)) => (
                        // Later blocks act on the left.
                        multiply(&PhasedPauli::bare(*p_ket), &ket).unwrap(),
                        multiply(&PhasedPauli::bare(*p_bra), &bra).unwrap(),
                        ts + theta,
                    ),
                });
            }
            CircuitBlock::FinalPhase { phi } => {
                flush(&mut run, &mut blocks, &mut extra_phi);
                blocks.push(CircuitBlock::FinalPhase {
                    phi: canonical_phase(phi + extra_phi),
                });
            }
            other => {
                flush(&mut run, &mut blocks, &mut extra_phi);
                blocks.push(other.clone());
            }
        }
    }
    SampledCircuit {
        blocks,
        c_total: c.c_total,
        q_order: c.q_order,
        r: c.r,
        seed: c.seed,
    }
}
