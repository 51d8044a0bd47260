//! Shared test helpers: random models, random states, dense utilities.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use lindsim::model::LindbladModel;
use lindsim::pauli::PauliString;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let label: String = (0..n)
        .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
        .collect();
    PauliString::parse(&label).unwrap()
}

/// Distinct random Pauli strings.
fn random_paulis<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = Vec::new();
    while out.len() < count {
        let p = random_pauli(n, rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// A random model with n qubits, a Hamiltonian of `h_terms` strings, and
/// `jumps` jump operators of `m_terms` strings each.
pub fn random_model<R: Rng>(
    n: usize,
    h_terms: usize,
    jumps: usize,
    m_terms: usize,
    rng: &mut R,
) -> LindbladModel {
    let h = random_paulis(n, h_terms, rng)
        .into_iter()
        .map(|p| (rng.gen_range(-1.0..1.0), p))
        .collect();
    let js = (0..jumps)
        .map(|_| {
            random_paulis(n, m_terms, rng)
                .into_iter()
                .map(|p| {
                    (
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        p,
                    )
                })
                .collect()
        })
        .collect();
    LindbladModel::new(n, h, js).unwrap()
}

/// A random density matrix (positive, unit trace).
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// A random Hermitian matrix with entries of order 1.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * c(0.5)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &DMatrix<Complex64>) -> f64 {
    nalgebra::SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .sum()
}

/// Dense transfer matrix of a whole circuit, treating pair blocks as bare
/// (their phases live in the final phase gate, as in the engine).
pub fn circuit_transfer(
    m: &LindbladModel,
    circ: &lindsim::sampler::SampledCircuit,
) -> DMatrix<Complex64> {
    use lindsim::channels::{approx_kraus, build_dissipation, kraus_transfer};
    use lindsim::sampler::{CircuitBlock, Side};
    let d = 1usize << m.n();
    let id = DMatrix::<Complex64>::identity(d, d);
    let mut s = DMatrix::<Complex64>::identity(d * d, d * d);
    for b in &circ.blocks {
        let step = match b {
            CircuitBlock::AsymPauliPair { p_ket, p_bra, .. } => {
                let ket = p_ket.to_matrix().unwrap();
                let bra_c = p_bra.to_matrix().unwrap().map(|v| v.conj());
                bra_c.kronecker(&ket)
            }
            CircuitBlock::ControlledRotation {
                p,
                angle,
                sign,
                side,
            } => {
                let pm = p.to_matrix().unwrap();
                let u = &id * c(angle.cos()) + pm * Complex64::new(0.0, -sign * angle.sin());
                match side {
                    Side::Ket => id.kronecker(&u),
                    Side::Bra => u.map(|v| v.conj()).kronecker(&id),
                }
            }
            CircuitBlock::Dissipative { k, tau } => {
                let kp = approx_kraus(&build_dissipation(m, *k, *tau).unwrap()).unwrap();
                kraus_transfer(&[&kp.bp0, &kp.bp1])
            }
            CircuitBlock::FinalPhase { phi } => {
                s *= Complex64::from_polar(1.0, *phi);
                continue;
            }
        };
        s = step * s;
    }
    s
}

/// |0…0⟩⟨0…0| on n qubits.
pub fn ground_projector(n: usize) -> DMatrix<Complex64> {
    let d = 1usize << n;
    let mut m = DMatrix::from_element(d, d, c(0.0));
    m[(0, 0)] = c(1.0);
    m
}
