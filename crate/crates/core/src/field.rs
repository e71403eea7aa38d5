use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::euler::EulerState;

/// Nodal solution values, laid out `[element][node][variable]` with
/// `dim + 2` conserved variables per node.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    dim: usize,
    degree: usize,
    num_elements: usize,
    nodes_per_element: usize,
    nvar: usize,
    data: Vec<f64>,
    pub time: f64,
}

impl SolutionField {
    pub fn zeros(dim: usize, degree: usize, num_elements: usize) -> Self {
        let nodes_per_element = (degree + 1).pow(dim as u32);
        let nvar = dim + 2;
        Self {
            dim,
            degree,
            num_elements,
            nodes_per_element,
            nvar,
            data: vec![0.0; num_elements * nodes_per_element * nvar],
            time: 0.0,
        }
    }

    pub fn from_data(dim: usize, degree: usize, num_elements: usize, data: Vec<f64>) -> Result<Self> {
        let mut f = Self::zeros(dim, degree, 0);
        f.num_elements = num_elements;
        if data.len() != num_elements * f.nodes_per_element * f.nvar {
            return Err(Error::invalid("field data length does not match mesh and degree"));
        }
        f.data = data;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn num_elements(&self) -> usize {
        self.num_elements
    }
    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }
    pub fn nvar(&self) -> usize {
        self.nvar
    }
    /// Element stride in the flat data.
    pub fn element_len(&self) -> usize {
        self.nodes_per_element * self.nvar
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn element(&self, e: usize) -> &[f64] {
        let len = self.element_len();
        &self.data[e * len..(e + 1) * len]
    }
    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let len = self.element_len();
        &mut self.data[e * len..(e + 1) * len]
    }

    pub fn state(&self, e: usize, node: usize) -> EulerState {
        let off = (e * self.nodes_per_element + node) * self.nvar;
        EulerState::read(&self.data[off..off + self.nvar], self.dim)
    }

    pub fn set_state(&mut self, e: usize, node: usize, u: EulerState) {
        let off = (e * self.nodes_per_element + node) * self.nvar;
        let dim = self.dim;
        u.write(&mut self.data[off..off + self.nvar], dim);
    }

    /// Same shape, same metadata.
    pub fn is_compatible(&self, other: &Self) -> bool {
        self.dim == other.dim && self.degree == other.degree && self.num_elements == other.num_elements
    }
}
