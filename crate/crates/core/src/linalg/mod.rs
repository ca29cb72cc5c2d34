pub mod dense;
pub mod eigen;
pub mod mm;
pub mod qr;
pub mod skyline;
pub mod sparse;

pub use dense::{DenseCholesky, DenseMatrix};
pub use eigen::{generalized_eig_sym, symmetric_eigen, tridiagonal_eigenvalues, EigenReport};
pub use qr::{pivoted_qr, PivotedQr};
pub use skyline::{factorize, FactorKind, Factorization, Ordering};
pub use sparse::{CsrMatrix, SparseSymMatrix, SymAssembler};
