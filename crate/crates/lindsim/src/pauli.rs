//! Phased Pauli strings and Pauli sums.
//!
//! Pauli strings are stored in symplectic form: one X bit and one Z bit per
//! qubit, packed into `u64` masks. A qubit with bits (x, z) carries the letter
//! (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z. The bare operator behind the bit pattern
//! is `i^{|x∧z|} X^x Z^z`, which makes every letter Hermitian.
//!
//! [`PhasedPauli`] tracks an additional unit-complex phase. The part of the
//! phase generated by Pauli multiplication is held as an exact quarter-turn
//! integer so products never accumulate floating-point drift; arbitrary input
//! phases live in a separate radian accumulator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::{Error, DENSE_LIMIT};

const TAU: f64 = 2.0 * PI;

/// Reduce an angle to [0, 2π).
pub fn canonical_phase(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// An n-qubit Pauli string without phase. Qubit 0 is the leftmost label
/// character and the most significant factor of the Kronecker product.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "at most 64 qubits");
        PauliString { n, x: 0, z: 0 }
    }

    /// Build from raw symplectic masks; bits at positions >= n must be clear.
    pub fn from_bits(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64);
        if n < 64 {
            assert!(x >> n == 0 && z >> n == 0, "stray bits beyond qubit count");
        }
        PauliString { n, x, z }
    }

    /// Parse a big-endian label over {I, X, Y, Z}.
    pub fn parse(label: &str) -> Result<Self, Error> {
        let mut x = 0u64;
        let mut z = 0u64;
        let mut n = 0usize;
        for (i, c) in label.chars().enumerate() {
            if i >= 64 {
                return Err(Error::Parse("label longer than 64 qubits".into()));
            }
            let (xb, zb) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid Pauli letter '{other}' at index {i}"
                    )))
                }
            };
            x |= xb << i;
            z |= zb << i;
            n += 1;
        }
        if n == 0 {
            return Err(Error::Parse("empty Pauli label".into()));
        }
        Ok(PauliString { n, x, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        debug_assert!(qubit < self.n);
        (self.x >> qubit) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        debug_assert!(qubit < self.n);
        (self.z >> qubit) & 1 == 1
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Label string, qubit 0 leftmost.
    pub fn label(&self) -> String {
        (0..self.n)
            .map(|q| match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect()
    }

    /// Dense 2^n matrix of the bare string.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        check_dense_limit(self.n)?;
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for q in 0..self.n {
            m = kron(&m, &letter_matrix(self.x_bit(q), self.z_bit(q)));
        }
        Ok(m)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

fn letter_matrix(x: bool, z: bool) -> DMatrix<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match (x, z) {
        (false, false) => DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
        (true, false) => DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        (true, true) => DMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]),
        (false, true) => DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
    }
}

/// Kronecker product with the left factor most significant.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

pub(crate) fn check_dense_limit(n: usize) -> Result<(), Error> {
    if n > DENSE_LIMIT {
        Err(Error::Capacity(format!(
            "{n} qubits exceeds the dense limit of {DENSE_LIMIT}"
        )))
    } else {
        Ok(())
    }
}

/// A Pauli string together with a unit complex phase e^{iθ}.
///
/// θ is split as `quarter`·π/2 + `extra`: the quarter-turn integer absorbs all
/// phase generated by Pauli group multiplication exactly, while `extra` carries
/// phases supplied from outside.
#[derive(Clone, Copy, Debug)]
pub struct PhasedPauli {
    pub pauli: PauliString,
    quarter: u8,
    extra: f64,
}

impl PhasedPauli {
    /// Phase-free string.
    pub fn bare(pauli: PauliString) -> Self {
        PhasedPauli {
            pauli,
            quarter: 0,
            extra: 0.0,
        }
    }

    pub fn with_phase(pauli: PauliString, theta: f64) -> Self {
        PhasedPauli {
            pauli,
            quarter: 0,
            extra: theta,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::bare(PauliString::identity(n))
    }

    pub fn n(&self) -> usize {
        self.pauli.n()
    }

    /// Phase angle canonicalized to [0, 2π).
    pub fn phase(&self) -> f64 {
        canonical_phase(f64::from(self.quarter) * FRAC_PI_2 + self.extra)
    }

    /// Phase as a unit complex number.
    pub fn phase_factor(&self) -> Complex64 {
        // Quarter turns map to exact unit values.
        let q = match self.quarter {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            3 => Complex64::new(0.0, -1.0),
            _ => unreachable!(),
        };
        if self.extra == 0.0 {
            q
        } else {
            q * Complex64::from_polar(1.0, self.extra)
        }
    }

    /// Add an external phase in radians.
    pub fn rotated(mut self, theta: f64) -> Self {
        self.extra += theta;
        self
    }

    /// Multiply by i^k exactly.
    pub fn quarter_rotated(mut self, k: u8) -> Self {
        self.quarter = (self.quarter + k) % 4;
        self
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        Ok(self.pauli.to_matrix()? * self.phase_factor())
    }
}

/// Exact group product: matrix(multiply(a, b)) == matrix(a)·matrix(b).
pub fn multiply(a: &PhasedPauli, b: &PhasedPauli) -> Result<PhasedPauli, Error> {
    if a.n() != b.n() {
        return Err(Error::Model(format!(
            "Pauli size mismatch: {} vs {} qubits",
            a.n(),
            b.n()
        )));
    }
    let (pa, pb) = (&a.pauli, &b.pauli);
    let cx = pa.x ^ pb.x;
    let cz = pa.z ^ pb.z;
    // i^{w(a)} X^{ax}Z^{az} · i^{w(b)} X^{bx}Z^{bz}
    //   = i^{w(a)+w(b)} (−1)^{|az∧bx|} X^{cx}Z^{cz}
    //   = i^{w(a)+w(b)+2|az∧bx|−w(c)} · (bare product string)
    let quarters = pa.y_count() + pb.y_count() + 2 * (pa.z & pb.x).count_ones()
        + 4 * (cx & cz).count_ones()  // keep the subtraction nonnegative mod 4
        - (cx & cz).count_ones();
    Ok(PhasedPauli {
        pauli: PauliString {
            n: pa.n,
            x: cx,
            z: cz,
        },
        quarter: ((u32::from(a.quarter) + u32::from(b.quarter) + quarters) % 4) as u8,
        extra: a.extra + b.extra,
    })
}

/// Entrywise complex conjugate. For a bare string this is (−1)^{#Y} times the
/// string; the tracked phase is negated.
pub fn entrywise_conjugate(p: &PhasedPauli) -> PhasedPauli {
    let flips = (2 * p.pauli.y_count()) % 4;
    PhasedPauli {
        pauli: p.pauli,
        quarter: (((4 - u32::from(p.quarter) % 4) + flips) % 4) as u8,
        extra: -p.extra,
    }
}

/// Matrix transpose. For a bare string this is (−1)^{#Y} times the string; the
/// tracked phase is kept.
pub fn transpose(p: &PhasedPauli) -> PhasedPauli {
    let flips = (2 * p.pauli.y_count()) % 4;
    PhasedPauli {
        pauli: p.pauli,
        quarter: ((u32::from(p.quarter) + flips) % 4) as u8,
        extra: p.extra,
    }
}

/// A complex-weighted sum of Pauli strings on a common qubit count.
#[derive(Clone, Debug)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    /// Merge duplicate strings and drop exact zeros. Term order is the sorted
    /// symplectic order, so construction is deterministic.
    pub fn new(n: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self, Error> {
        let mut merged: Vec<(Complex64, PauliString)> = Vec::new();
        let mut sorted = terms;
        for (_, p) in &sorted {
            if p.n() != n {
                return Err(Error::Model(format!(
                    "term on {} qubits in a {}-qubit sum",
                    p.n(),
                    n
                )));
            }
        }
        sorted.sort_by_key(|(_, p)| *p);
        for (c, p) in sorted {
            match merged.last_mut() {
                Some((lc, lp)) if *lp == p => *lc += c,
                _ => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.re != 0.0 || c.im != 0.0);
        Ok(PauliSum { n, terms: merged })
    }

    pub fn empty(n: usize) -> Self {
        PauliSum { n, terms: vec![] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, Error> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (c, p) in &self.terms {
            m += p.to_matrix()? * *c;
        }
        Ok(m)
    }
}

/// Parse one (label, coefficient) pair into a PauliSum term.
pub fn parse_term(label: &str, coeff: Complex64) -> Result<(Complex64, PauliString), Error> {
    Ok((coeff, PauliString::parse(label)?))
}
