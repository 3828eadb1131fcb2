//! Higher-order hierarchical (HoH) operators.
//!
//! For a hub order `h` and a fringe order `f`, the incidence matrix `B` links
//! each hub simplex to the fringe simplices nested with it. A random walker
//! steps from a hub to a uniformly chosen incident fringe simplex and back to a
//! uniformly chosen incident hub. Symmetrising that two-step walk gives
//!
//! ```text
//! A = D_hub^{-1/2} B D_fringe^{-1} Bᵀ D_hub^{-1/2}
//! ```
//!
//! with `D_hub`, `D_fringe` the row and column sums of `B`, and the convention
//! that zero degrees invert to zero. `A` is symmetric positive semidefinite with
//! spectrum in `[0, 1]`.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct HohOperator {
    pub hub_order: usize,
    pub fringe_order: usize,
    pub adjacency: CsrMatrix,
    pub hub_degrees: Vec<f64>,
    pub fringe_degrees: Vec<f64>,
}

/// Row sums of an incidence matrix.
pub fn hub_degrees(incidence: &CsrMatrix) -> Vec<f64> {
    incidence.row_sums()
}

/// Column sums of an incidence matrix.
pub fn fringe_degrees(incidence: &CsrMatrix) -> Vec<f64> {
    incidence.col_sums()
}

fn inverse_power(degrees: &[f64], power: f64) -> Vec<f64> {
    degrees.iter().map(|&d| if d > 0.0 { d.powf(power) } else { 0.0 }).collect()
}

/// Builds the normalised two-step adjacency from a hub × fringe incidence.
pub fn hoh_adjacency(incidence: &CsrMatrix) -> HohOperator {
    let hub = hub_degrees(incidence);
    let fringe = fringe_degrees(incidence);
    let half = incidence
        .scale(&inverse_power(&hub, -0.5), &inverse_power(&fringe, -0.5))
        .expect("diagonals sized from the matrix");
    HohOperator {
        hub_order: 0,
        fringe_order: 0,
        adjacency: half.gram(),
        hub_degrees: hub,
        fringe_degrees: fringe,
    }
}

/// `L = I - A`.
pub fn hoh_laplacian(op: &HohOperator) -> CsrMatrix {
    let n = op.adjacency.rows();
    CsrMatrix::identity(n)
        .add_scaled(1.0, &op.adjacency, -1.0)
        .expect("adjacency is square")
}

impl HohOperator {
    pub fn build(complex: &SimplicialComplex, hub: usize, fringe: usize) -> Result<Self> {
        let incidence = complex.incidence_matrix(hub, fringe)?;
        Ok(HohOperator { hub_order: hub, fringe_order: fringe, ..hoh_adjacency(&incidence) })
    }

    pub fn laplacian(&self) -> CsrMatrix {
        hoh_laplacian(self)
    }
}

/// The operators for one hub order, one per fringe order, built once and
/// reused for every forward pass.
#[derive(Debug, Clone)]
pub struct HohOperators {
    hub_order: usize,
    operators: BTreeMap<usize, HohOperator>,
}

impl HohOperators {
    /// Builds `A_{h,f}` for every `f` in `fringes`.
    pub fn build(complex: &SimplicialComplex, hub: usize, fringes: &[usize]) -> Result<Self> {
        complex.layer(hub)?;
        let mut operators = BTreeMap::new();
        for &f in fringes {
            operators.insert(f, HohOperator::build(complex, hub, f)?);
        }
        Ok(HohOperators { hub_order: hub, operators })
    }

    /// Every non-empty layer up to `max_order` other than the hub.
    pub fn available_fringes(complex: &SimplicialComplex, hub: usize, max_order: usize) -> Vec<usize> {
        (0..=max_order.min(complex.max_order()))
            .filter(|&f| f != hub && complex.count(f).unwrap_or(0) > 0)
            .collect()
    }

    pub fn from_operators(hub_order: usize, ops: impl IntoIterator<Item = HohOperator>) -> Self {
        HohOperators {
            hub_order,
            operators: ops.into_iter().map(|op| (op.fringe_order, op)).collect(),
        }
    }

    pub fn hub_order(&self) -> usize {
        self.hub_order
    }

    pub fn get(&self, fringe: usize) -> Option<&HohOperator> {
        self.operators.get(&fringe)
    }

    pub fn fringe_orders(&self) -> Vec<usize> {
        self.operators.keys().copied().collect()
    }

    pub fn hub_count(&self) -> Option<usize> {
        self.operators.values().next().map(|op| op.adjacency.rows())
    }
}

/// Returns `[T_0(A)X, T_1(A)X, ..., T_K(A)X]` using the Chebyshev recurrence
/// `T_k = 2 A T_{k-1} - T_{k-2}`.
pub fn chebyshev_apply(a: &CsrMatrix, x: ArrayView2<'_, f64>, order: usize) -> Result<Vec<Array2<f64>>> {
    if a.rows() != a.cols() || a.cols() != x.nrows() {
        return Err(Error::Shape(format!(
            "Chebyshev filter of a {}x{} operator on {} rows",
            a.rows(),
            a.cols(),
            x.nrows()
        )));
    }
    let mut terms = Vec::with_capacity(order + 1);
    terms.push(x.to_owned());
    if order >= 1 {
        terms.push(a.mul_dense(x)?);
    }
    for k in 2..=order {
        let mut next = a.mul_dense(terms[k - 1].view())?;
        next *= 2.0;
        next -= &terms[k - 2];
        terms.push(next);
    }
    Ok(terms)
}
