//! Lindblad input model: Hamiltonian and jump operators as Pauli sums, the
//! derived scalar coefficients used by the samplers, and the exact transfer
//! matrix of the generator.
//!
//! Vectorization is column-stacking throughout: |A⟩⟩ = Σ ⟨i|A|j⟩ |j⟩|i⟩, so a
//! superoperator A•B† has transfer matrix conj(B)⊗A.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::pauli::{check_dense_limit, PauliString, PauliSum};
use crate::Error;

/// One jump operator L_k = Σ_j α_{kj} P_{kj} with its sampling distribution.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    terms: PauliSum,
    alpha_k: f64,
    probs: Vec<f64>,
    phases: Vec<f64>,
}

impl JumpOperator {
    fn new(terms: PauliSum) -> Result<Self, Error> {
        let alpha_k = terms.l1_norm();
        if !(alpha_k > 0.0) {
            return Err(Error::Model("zero-norm jump operator".into()));
        }
        let probs: Vec<f64> = terms.terms().iter().map(|(c, _)| c.norm() / alpha_k).collect();
        let phases: Vec<f64> = terms.terms().iter().map(|(c, _)| c.arg()).collect();
        Ok(JumpOperator {
            terms,
            alpha_k,
            probs,
            phases,
        })
    }

    pub fn terms(&self) -> &PauliSum {
        &self.terms
    }

    /// α_k = Σ_j |α_{kj}|.
    pub fn alpha_k(&self) -> f64 {
        self.alpha_k
    }

    /// p_{kj} = |α_{kj}|/α_k, aligned with `terms()`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// θ_{kj} = arg(α_{kj}), aligned with `terms()`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Dense L_k.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        self.terms.to_matrix()
    }
}

/// The full input model with eagerly computed derived scalars.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    n: usize,
    hamiltonian: PauliSum,
    alpha0: f64,
    h_probs: Vec<f64>,
    h_signs: Vec<f64>,
    jumps: Vec<JumpOperator>,
    m_max: usize,
}

impl LindbladModel {
    pub fn new(
        n: usize,
        hamiltonian_terms: Vec<(f64, PauliString)>,
        jump_terms: Vec<Vec<(Complex64, PauliString)>>,
    ) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Model("qubit count must be positive".into()));
        }
        let h_terms = hamiltonian_terms
            .into_iter()
            .map(|(c, p)| (Complex64::new(c, 0.0), p))
            .collect();
        let hamiltonian = PauliSum::new(n, h_terms)?;
        let alpha0 = hamiltonian.l1_norm();
        let h_probs = if alpha0 > 0.0 {
            hamiltonian
                .terms()
                .iter()
                .map(|(c, _)| c.re.abs() / alpha0)
                .collect()
        } else {
            vec![]
        };
        let h_signs = hamiltonian
            .terms()
            .iter()
            .map(|(c, _)| if c.re >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let jumps = jump_terms
            .into_iter()
            .map(|ts| JumpOperator::new(PauliSum::new(n, ts)?))
            .collect::<Result<Vec<_>, _>>()?;
        let m_max = jumps.iter().map(|j| j.terms().len()).max().unwrap_or(0);
        if hamiltonian.is_empty() && jumps.is_empty() {
            return Err(Error::Model("empty model".into()));
        }
        Ok(LindbladModel {
            n,
            hamiltonian,
            alpha0,
            h_probs,
            h_signs,
            jumps,
            m_max,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    /// α_0 = Σ_j |α_{0j}|.
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// p_{0j} = |α_{0j}|/α_0, aligned with `hamiltonian().terms()`.
    pub fn h_probs(&self) -> &[f64] {
        &self.h_probs
    }

    /// sgn(α_{0j}) ∈ {+1, −1}, aligned with `hamiltonian().terms()`.
    pub fn h_signs(&self) -> &[f64] {
        &self.h_signs
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn k_count(&self) -> usize {
        self.jumps.len()
    }

    /// M = max term count over jump operators.
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// ‖L‖_pauli = 2(α_0 + Σ_k α_k²).
    pub fn pauli_norm(&self) -> f64 {
        2.0 * (self.alpha0 + self.jumps.iter().map(|j| j.alpha_k * j.alpha_k).sum::<f64>())
    }

    /// α = 2α_0 + Σ_k α_k².
    pub fn alpha(&self) -> f64 {
        2.0 * self.alpha0 + self.jumps.iter().map(|j| j.alpha_k * j.alpha_k).sum::<f64>()
    }

    /// τ_l = α·(t/r)/(2l+1).
    pub fn tau(&self, t: f64, r: u64, l: u32) -> f64 {
        assert!(t >= 0.0 && r >= 1);
        self.alpha() * (t / r as f64) / (2.0 * f64::from(l) + 1.0)
    }

    /// Dense H.
    pub fn h_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        self.hamiltonian.to_matrix()
    }

    /// Transfer matrix G of the generator.
    pub fn transfer_matrix(&self) -> Result<TransferMatrix, Error> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let i = Complex64::new(0.0, 1.0);
        let h = self.h_matrix()?;
        let mut g = kron(&id, &h) * (-i) + kron(&h.transpose(), &id) * i;
        for jump in &self.jumps {
            let l = jump.to_matrix()?;
            let l_conj = l.map(|v| v.conj());
            let ldl = l.adjoint() * &l;
            let half = Complex64::new(0.5, 0.0);
            g += kron(&l_conj, &l);
            g -= kron(&id, &ldl) * half;
            g -= kron(&ldl.transpose(), &id) * half;
        }
        Ok(TransferMatrix { g })
    }
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Dense transfer matrix G (4^n square).
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub g: DMatrix<Complex64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealCoeff {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianTermDoc {
    pauli: String,
    coeff: RealCoeff,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpTermDoc {
    pauli: String,
    coeff: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    n: usize,
    #[serde(default)]
    hamiltonian: Vec<HamiltonianTermDoc>,
    #[serde(default)]
    jumps: Vec<Vec<JumpTermDoc>>,
}

/// Load a model from its TOML document. Unknown fields are rejected.
pub fn load_model(text: &str) -> Result<LindbladModel, Error> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut h_terms = Vec::new();
    for term in &doc.hamiltonian {
        let p = parse_label(&term.pauli, doc.n)?;
        let c = match term.coeff {
            RealCoeff::Real(re) => re,
            RealCoeff::Pair([re, im]) => {
                if im != 0.0 {
                    return Err(Error::Model(
                        "Hamiltonian coefficients must be real".into(),
                    ));
                }
                re
            }
        };
        h_terms.push((c, p));
    }
    let mut jump_terms = Vec::new();
    for jump in &doc.jumps {
        let mut terms = Vec::new();
        for term in jump {
            let p = parse_label(&term.pauli, doc.n)?;
            terms.push((Complex64::new(term.coeff[0], term.coeff[1]), p));
        }
        jump_terms.push(terms);
    }
    LindbladModel::new(doc.n, h_terms, jump_terms)
}

/// Load a model document from disk.
pub fn load_model_path(path: &std::path::Path) -> Result<LindbladModel, Error> {
    load_model(&std::fs::read_to_string(path)?)
}

fn parse_label(label: &str, n: usize) -> Result<PauliString, Error> {
    let p = PauliString::parse(label)?;
    if p.n() != n {
        return Err(Error::Model(format!(
            "label '{label}' has {} qubits, model declares {n}",
            p.n()
        )));
    }
    Ok(p)
}

/// The worked two-level-atom model: H = −½Z − ½X, L = (X − iY)/2.
pub fn two_level_atom() -> LindbladModel {
    let z = PauliString::parse("Z").unwrap();
    let x = PauliString::parse("X").unwrap();
    let y = PauliString::parse("Y").unwrap();
    LindbladModel::new(
        1,
        vec![(-0.5, z), (-0.5, x)],
        vec![vec![
            (Complex64::new(0.5, 0.0), x),
            (Complex64::new(0.0, -0.5), y),
        ]],
    )
    .unwrap()
}
