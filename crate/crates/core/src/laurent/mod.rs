//! Exact symbols of stencils as rational Laurent polynomials in the
//! translation factors `t_x`, `t_y`, and the certification built on them.

pub mod certify;
pub mod linalg;
pub mod poly;
pub mod taylor;

pub use certify::{
    consistency_nullspace, cross_consistency, cross_product, is_symmetric_divergence, moore_symmetry_scan,
    operator_identity_check, operator_identity_check_with, same_span, symmetric_moore_divergence, IdentityCheck,
    MooreMember, MooreScan, NullspaceReport, SearchConstraints,
};
pub use poly::{rational_from_f64, rational_to_f64, ratio, LaurentPoly, LaurentRow, Rational};
pub use taylor::{taylor_expand, TaylorKey, TaylorSeries};
