//! Complex linear algebra over tensor products of qudits.

mod eigen;
mod matrix;
mod state;

pub use eigen::{eigh, Eigen, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use matrix::{DensityOperator, HermitianObservable, Matrix, DEGENERACY_GAP, HERMITIAN_TOL};
pub use state::{
    apply_embedded, bell_phi_plus, inner_product, max_entangled, partial_trace, project_onto,
    tensor_product, tensor_product_with_budget, StateVector, DEFAULT_AMPLITUDE_BUDGET, NORM_TOL,
};

pub(crate) use state::{front_order, permute_axes, strides};
