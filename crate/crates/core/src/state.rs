use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense amplitude vector of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let d = amps.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::arg(format!("state length {d} is not a power of two")));
        }
        Ok(StateVector {
            n: d.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn zero_state(n: usize) -> Self {
        StateVector::basis(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        crate::pauli::norm(&self.amps)
    }

    pub fn normalize(&mut self) {
        crate::pauli::normalize(&mut self.amps);
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `‖self − other‖₂`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for StateVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.amps
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}
