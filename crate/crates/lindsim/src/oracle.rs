//! Ground-truth Lindblad propagation: dense matrix exponential of the transfer
//! matrix, plus independent integrators (Euler, RK4) used to cross-validate it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::LindbladModel;
use crate::pauli::check_dense_limit;
use crate::Error;

/// Column-stacking vectorization: |A⟩⟩[j·d + i] = ⟨i|A|j⟩.
pub fn vec_density(a: &DMatrix<Complex64>) -> nalgebra::DVector<Complex64> {
    let d = a.nrows();
    let mut v = nalgebra::DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = a[(i, j)];
        }
    }
    v
}

/// Inverse of [`vec_density`].
pub fn unvec_density(v: &nalgebra::DVector<Complex64>) -> DMatrix<Complex64> {
    let d2 = v.len();
    let d = (d2 as f64).sqrt().round() as usize;
    assert_eq!(d * d, d2, "vector length must be a square");
    let mut a = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        for i in 0..d {
            a[(i, j)] = v[j * d + i];
        }
    }
    a
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn matrix_exponential(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, Error> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite entry in matrix".into()));
    }
    assert_eq!(a.nrows(), a.ncols());
    let norm = one_norm(a);
    let theta13 = 5.371920351148152;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(s as i32), 0.0);
    let mut e = pade13(&scaled)?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade13(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, Error> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let d = a.nrows();
    let id = DMatrix::<Complex64>::identity(d, d);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let c = |k: usize| Complex64::new(B[k], 0.0);
    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9))
        + &a6 * c(7)
        + &a4 * c(5)
        + &a2 * c(3)
        + &id * c(1);
    let u = a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8))
        + &a6 * c(6)
        + &a4 * c(4)
        + &a2 * c(2)
        + &id * c(0);
    let lhs = &v - &u;
    let rhs = &v + &u;
    lhs.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular denominator in Pade solve".into()))
}

/// e^{tG} for a fixed model and time, built once and reused.
#[derive(Clone, Debug)]
pub struct PropagatorCache {
    pub t: f64,
    pub exp_tg: DMatrix<Complex64>,
}

impl PropagatorCache {
    pub fn new(m: &LindbladModel, t: f64) -> Result<Self, Error> {
        check_dense_limit(m.n())?;
        let g = m.transfer_matrix()?.g;
        let exp_tg = matrix_exponential(&(g * Complex64::new(t, 0.0)))?;
        Ok(PropagatorCache { t, exp_tg })
    }
}

/// Evolve a density matrix exactly: unvec(e^{tG} vec(ρ0)).
pub fn exact_evolve(
    m: &LindbladModel,
    rho0: &DMatrix<Complex64>,
    t: f64,
) -> Result<DMatrix<Complex64>, Error> {
    if t < 0.0 {
        return Err(Error::Config("negative evolution time".into()));
    }
    let cache = PropagatorCache::new(m, t)?;
    let rho_t = unvec_density(&(&cache.exp_tg * vec_density(rho0)));
    let herm_dev = (&rho_t - rho_t.adjoint()).norm();
    if herm_dev > 1e-9 {
        return Err(Error::Numeric(format!(
            "evolved state lost Hermiticity by {herm_dev:.2e}"
        )));
    }
    let trace = rho_t.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::Numeric(format!(
            "evolved state trace {trace} deviates from 1"
        )));
    }
    Ok(rho_t)
}

/// Tr[O · exact_evolve(m, ρ0, t)], asserted real.
pub fn exact_expectation(
    m: &LindbladModel,
    rho0: &DMatrix<Complex64>,
    o: &DMatrix<Complex64>,
    t: f64,
) -> Result<f64, Error> {
    let rho_t = exact_evolve(m, rho0, t)?;
    let val = (o * rho_t).trace();
    if val.im.abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "expectation has imaginary part {:.2e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// dρ/dt = −i[H,ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}).
pub fn lindblad_rhs(
    h: &DMatrix<Complex64>,
    ls: &[DMatrix<Complex64>],
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let mut out = (h * rho - rho * h) * (-i);
    for l in ls {
        let ldag = l.adjoint();
        let ldl = &ldag * l;
        out += l * rho * &ldag - (&ldl * rho + rho * &ldl) * half;
    }
    out
}

fn model_matrices(
    m: &LindbladModel,
) -> Result<(DMatrix<Complex64>, Vec<DMatrix<Complex64>>), Error> {
    let h = m.h_matrix()?;
    let ls = m
        .jumps()
        .iter()
        .map(|j| j.to_matrix())
        .collect::<Result<Vec<_>, _>>()?;
    Ok((h, ls))
}

/// Fixed-step fourth-order Runge-Kutta integration of the master equation.
pub fn rk4_evolve(
    m: &LindbladModel,
    rho0: &DMatrix<Complex64>,
    t: f64,
    dt: f64,
) -> Result<DMatrix<Complex64>, Error> {
    let (h, ls) = model_matrices(m)?;
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let dtc = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(&h, &ls, &rho);
        let k2 = lindblad_rhs(&h, &ls, &(&rho + &k1 * (dtc * half)));
        let k3 = lindblad_rhs(&h, &ls, &(&rho + &k2 * (dtc * half)));
        let k4 = lindblad_rhs(&h, &ls, &(&rho + &k3 * dtc));
        rho += (k1 + k2 * two + k3 * two + k4) * (dtc * sixth);
    }
    Ok(rho)
}

/// Fixed-step forward-Euler integration; slow but independent of everything.
pub fn euler_evolve(
    m: &LindbladModel,
    rho0: &DMatrix<Complex64>,
    t: f64,
    dt: f64,
) -> Result<DMatrix<Complex64>, Error> {
    let (h, ls) = model_matrices(m)?;
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let dtc = Complex64::new(dt, 0.0);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k = lindblad_rhs(&h, &ls, &rho);
        rho += k * dtc;
    }
    Ok(rho)
}

/// Choi matrix of a superoperator given as a transfer matrix:
/// Choi = Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|).
pub fn choi_matrix(s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d2 = s.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    assert_eq!(d * d, d2);
    let mut choi = DMatrix::from_element(d2, d2, Complex64::new(0.0, 0.0));
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = s[(l * d + k, j * d + i)];
                }
            }
        }
    }
    choi
}
