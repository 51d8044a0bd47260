//! Batch driver: load a model, run the estimator and the exact oracle over a
//! time grid, emit a CSV table with an audit header.
//!
//! The initial state is always |0…0⟩⟨0…0| on the system register.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::model::{load_model_path, LindbladModel};
use crate::oracle::exact_expectation;
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::{estimate, Mode};
use crate::Error;

/// Segment-count rule: fixed r or the auto rule max(⌈2‖L‖²t²⌉, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentRule {
    Auto,
    Fixed(u64),
}

impl SegmentRule {
    pub fn parse(s: &str) -> Result<Self, Error> {
        if s == "auto" {
            Ok(SegmentRule::Auto)
        } else {
            s.parse::<u64>()
                .map(SegmentRule::Fixed)
                .map_err(|_| Error::Config(format!("segments must be 'auto' or an integer, got '{s}'")))
        }
    }

    pub fn resolve(&self, m: &LindbladModel, t: f64) -> u64 {
        match self {
            SegmentRule::Fixed(r) => *r,
            SegmentRule::Auto => {
                let norm = m.pauli_norm();
                ((2.0 * norm * norm * t * t).ceil() as u64).max(1)
            }
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: PathBuf,
    pub times: Vec<f64>,
    pub segments: SegmentRule,
    pub delta: f64,
    pub shots: u64,
    pub mode: Mode,
    pub seed: u64,
    pub observable: String,
    pub out: Option<PathBuf>,
    pub collapse: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.delta > 0.0 && self.delta < 1.0 / std::f64::consts::E) {
            return Err(Error::Config("delta must lie in (0, 1/e)".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Config("at least one time point required".into()));
        }
        if self.times.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::Config("times must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Canonical text form used for the audit hash.
    fn canonical(&self) -> String {
        format!(
            "model={};times={:?};segments={:?};delta={};shots={};mode={:?};seed={};observable={};collapse={}",
            self.model.display(),
            self.times,
            self.segments,
            self.delta,
            self.shots,
            self.mode,
            self.seed,
            self.observable,
            self.collapse
        )
    }

    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableTermDoc {
    pauli: String,
    coeff: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableDoc {
    n: usize,
    terms: Vec<ObservableTermDoc>,
}

/// Parse an observable spec: the literal "proj0…0" shorthand for the
/// all-zeros projector, or a path to a Pauli-sum document.
pub fn parse_observable(spec: &str, n: usize) -> Result<DMatrix<Complex64>, Error> {
    if spec.starts_with("proj") {
        let zeros = &spec[4..];
        if !zeros.is_empty() && zeros.chars().any(|c| c != '0') {
            return Err(Error::Parse(format!(
                "projector shorthand must be 'proj' followed by zeros, got '{spec}'"
            )));
        }
        if !zeros.is_empty() && zeros.len() != n {
            return Err(Error::Parse(format!(
                "projector '{spec}' names {} qubits, model has {n}",
                zeros.len()
            )));
        }
        let d = 1usize << n;
        let mut o = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        o[(0, 0)] = Complex64::new(1.0, 0.0);
        return Ok(o);
    }
    parse_observable_document(
        &std::fs::read_to_string(Path::new(spec))?,
        Some(n),
    )
}

/// Parse a Pauli-sum observable document (real coefficients only, so the sum
/// is Hermitian by construction).
pub fn parse_observable_document(
    text: &str,
    expect_n: Option<usize>,
) -> Result<DMatrix<Complex64>, Error> {
    let doc: ObservableDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(n) = expect_n {
        if doc.n != n {
            return Err(Error::Config(format!(
                "observable is on {} qubits, model has {n}",
                doc.n
            )));
        }
    }
    let mut terms = Vec::new();
    for term in &doc.terms {
        let p = PauliString::parse(&term.pauli)?;
        if p.n() != doc.n {
            return Err(Error::Model(format!(
                "observable label '{}' has {} qubits, document declares {}",
                term.pauli,
                p.n(),
                doc.n
            )));
        }
        terms.push((Complex64::new(term.coeff, 0.0), p));
    }
    PauliSum::new(doc.n, terms)?.to_matrix()
}

/// Run the full time grid and return the CSV text.
pub fn run(config: &RunConfig) -> Result<String, Error> {
    config.validate()?;
    let model = load_model_path(&config.model)?;
    let o = parse_observable(&config.observable, model.n())?;
    let d = 1usize << model.n();
    let mut rho0 = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    rho0[(0, 0)] = Complex64::new(1.0, 0.0);

    let mut out = String::new();
    out.push_str(&format!("# lindsim v{}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# config_hash={}\n", config.config_hash()));
    out.push_str(&format!("# seed={}\n", config.seed));
    out.push_str("t,r,Q,C,estimate,exact,abs_error,hoeffding_95\n");
    for (idx, &t) in config.times.iter().enumerate() {
        let r = config.segments.resolve(&model, t);
        let report = estimate(
            &model,
            &rho0,
            &o,
            t,
            r,
            config.delta,
            config.shots,
            config.seed.wrapping_add(idx as u64),
            config.mode,
            config.collapse,
        )?;
        let exact = exact_expectation(&model, &rho0, &o, t)?;
        out.push_str(&format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            t,
            r,
            report.q_order,
            report.c_total,
            report.phi,
            exact,
            (report.phi - exact).abs(),
            report.hoeffding_95
        ));
    }
    if let Some(path) = &config.out {
        std::fs::write(path, &out)?;
    }
    Ok(out)
}
