//! Reference evolution `e^{-iHt}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::PauliSum;
use crate::state::StateVector;

/// Largest qubit count the automatic mode diagonalizes densely.
pub const AUTO_DENSE_MAX: usize = 8;

pub const KRYLOV_MAX_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    DenseEig,
    Krylov,
}

#[derive(Clone, Debug)]
pub struct ExactEvolver {
    mode: EvolutionMode,
    h: PauliSum,
    tolerance: f64,
    eig: Option<(Vec<f64>, CMatrix)>,
}

pub fn exact_unitary_dense(h: &PauliSum, t: f64) -> Result<CMatrix> {
    if h.n() > crate::DENSE_CAP {
        return Err(Error::cap(format!(
            "dense unitary at n = {} exceeds cap {}",
            h.n(),
            crate::DENSE_CAP
        )));
    }
    Ok(linalg::expm_hermitian(&h.to_dense(), t))
}

impl ExactEvolver {
    pub fn dense(h: &PauliSum) -> Result<Self> {
        if h.n() > crate::DENSE_CAP {
            return Err(Error::cap(format!(
                "dense evolution at n = {} exceeds cap {}",
                h.n(),
                crate::DENSE_CAP
            )));
        }
        let eig = linalg::hermitian_eig(&h.to_dense());
        Ok(ExactEvolver {
            mode: EvolutionMode::DenseEig,
            h: h.clone(),
            tolerance: 0.0,
            eig: Some(eig),
        })
    }

    pub fn krylov(h: &PauliSum, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::arg("Krylov tolerance must be positive"));
        }
        Ok(ExactEvolver {
            mode: EvolutionMode::Krylov,
            h: h.clone(),
            tolerance,
            eig: None,
        })
    }

    /// Dense at small `n`, Krylov with tolerance `1e-10` otherwise.
    pub fn auto(h: &PauliSum) -> Result<Self> {
        if h.n() <= AUTO_DENSE_MAX {
            Self::dense(h)
        } else {
            Self::krylov(h, 1e-10)
        }
    }

    pub fn mode(&self) -> EvolutionMode {
        self.mode
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.h
    }

    /// Cached `e^{-iHt}` for repeated dense application.
    pub fn unitary(&self, t: f64) -> Option<CMatrix> {
        self.eig
            .as_ref()
            .map(|(vals, vecs)| linalg::unitary_from_eig(vals, vecs, t))
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.n() != self.h.n() {
            return Err(Error::Dimension {
                expected: self.h.dim(),
                found: psi.dim(),
            });
        }
        match &self.eig {
            Some((vals, vecs)) => Ok(StateVector::new(apply_eig(vals, vecs, psi, t))?),
            None => {
                let mut out = psi.clone();
                krylov_evolve(&self.h, &mut out, t, self.tolerance)?;
                Ok(out)
            }
        }
    }
}

fn apply_eig(vals: &[f64], vecs: &CMatrix, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let d = vals.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let col = vecs.column(k);
        let s: Complex64 = col.iter().zip(psi).map(|(v, p)| v.conj() * p).sum();
        *c = s * Complex64::from_polar(1.0, -vals[k] * t);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (k, c) in coeffs.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(vecs.column(k).iter()) {
            *o += v * c;
        }
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `e^{-i τ T} e_1` for the real symmetric tridiagonal `T`.
fn tridiag_exp(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let v = eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(v, -eig.eigenvalues[k] * tau)
                })
                .sum()
        })
        .collect()
}

/// In-place `ψ ← e^{-iHt} ψ` by restarted Lanczos with adaptive steps.
pub fn krylov_evolve(h: &PauliSum, psi: &mut [Complex64], t: f64, tol: f64) -> Result<()> {
    let total = t.abs();
    if total == 0.0 {
        return Ok(());
    }
    let sign = t.signum();
    let d = psi.len();
    let mut done = 0.0;
    let mut w = vec![Complex64::new(0.0, 0.0); d];
    let mut iterations = 0usize;
    while done < total {
        let beta0 = crate::pauli::norm(psi);
        if beta0 == 0.0 {
            return Ok(());
        }
        let remaining = total - done;
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|v| v / beta0).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut breakdown = false;
        let mut residual_beta = 0.0;
        for j in 0..KRYLOV_MAX_DIM {
            h.apply_into(&basis[j], &mut w)?;
            iterations += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = crate::pauli::norm(&w);
            let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
            if b <= 1e-13 * scale {
                breakdown = true;
                break;
            }
            residual_beta = b;
            let y = tridiag_exp(&alpha, &beta, remaining);
            if b * y[j].norm() <= tol * remaining / total {
                break;
            }
            if j + 1 == KRYLOV_MAX_DIM {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        // Basis length equals alpha length; beta holds the couplings between them.
        let m = alpha.len();
        beta.truncate(m.saturating_sub(1));
        let mut dt = remaining;
        let mut y = tridiag_exp(&alpha, &beta, dt);
        if !breakdown {
            let mut halvings = 0;
            while residual_beta * y[m - 1].norm() > tol * dt / total {
                dt *= 0.5;
                halvings += 1;
                if halvings > 60 {
                    return Err(Error::Convergence {
                        iterations,
                        residual: residual_beta * y[m - 1].norm(),
                    });
                }
                y = tridiag_exp(&alpha, &beta, dt);
            }
        }
        if sign < 0.0 {
            y = tridiag_exp(&alpha, &beta, -dt);
        }
        psi.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (q, c) in basis.iter().zip(&y) {
            let c = c * beta0;
            psi.iter_mut().zip(q).for_each(|(p, v)| *p += c * v);
        }
        done += dt;
        if remaining - dt < 1e-15 * total {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::heisenberg_1d;

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = crate::rng::from_seed(seed);
        let amps = (0..1usize << n)
            .map(|_| {
                Complex64::new(
                    crate::rng::uniform(&mut rng, -1.0, 1.0),
                    crate::rng::uniform(&mut rng, -1.0, 1.0),
                )
            })
            .collect();
        let mut s = StateVector::new(amps).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn eigenstate_phase() {
        let h = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
        for ev in [ExactEvolver::dense(&h).unwrap(), ExactEvolver::krylov(&h, 1e-12).unwrap()] {
            let out = ev.evolve(&StateVector::zero_state(1), 0.8).unwrap();
            assert!((out[0] - Complex64::from_polar(1.0, -0.8)).norm() < 1e-12);
            assert!(out[1].norm() < 1e-12);
        }
    }

    #[test]
    fn bond_eigenphases() {
        let h = PauliSum::from_labels(&[("XX", 1.0), ("YY", 1.0), ("ZZ", 1.0)]).unwrap();
        let (vals, _) = linalg::hermitian_eig(&h.to_dense());
        let want = [-3.0, 1.0, 1.0, 1.0];
        for (a, b) in vals.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = exact_unitary_dense(&h, 0.4).unwrap();
        let v = exact_unitary_dense(&h, -0.4).unwrap();
        assert!(linalg::max_abs_diff(&(u * v), &CMatrix::identity(4, 4)) < 1e-10);
    }

    #[test]
    fn krylov_matches_dense() {
        let h = heisenberg_1d(6, 3).unwrap().total();
        let psi = random_state(6, 9);
        let a = ExactEvolver::dense(&h).unwrap().evolve(&psi, 6.0).unwrap();
        let b = ExactEvolver::krylov(&h, 1e-10).unwrap().evolve(&psi, 6.0).unwrap();
        assert!(a.distance(&b) < 1e-8);
        let back = ExactEvolver::krylov(&h, 1e-10).unwrap().evolve(&b, -6.0).unwrap();
        assert!(back.distance(&psi) < 1e-8);
    }

    #[test]
    fn composition_and_energy() {
        let h = heisenberg_1d(5, 4).unwrap().total();
        let psi = random_state(5, 2);
        let ev = ExactEvolver::krylov(&h, 1e-11).unwrap();
        let a = ev.evolve(&ev.evolve(&psi, 1.3).unwrap(), 2.1).unwrap();
        let b = ev.evolve(&psi, 3.4).unwrap();
        assert!(a.distance(&b) < 1e-8);
        let energy = |s: &StateVector| dot(s, &h.apply(s).unwrap()).re;
        assert!((energy(&psi) - energy(&b)).abs() <= 1e-8 * energy(&psi).abs().max(1.0));
        assert!((b.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_time_and_mismatch() {
        let h = heisenberg_1d(3, 1).unwrap().total();
        let psi = random_state(3, 1);
        let ev = ExactEvolver::krylov(&h, 1e-10).unwrap();
        assert_eq!(ev.evolve(&psi, 0.0).unwrap(), psi);
        assert!(ev.evolve(&random_state(2, 1), 1.0).is_err());
    }
}
