//! Exact linear algebra over the integers and over prime fields.

mod fp;
mod homology;
mod matrix;
mod modules;
mod resolution;
mod snf;
mod twisted;


pub use fp::{fp_inv, fp_nullspace, fp_rank, FpHomologyBasis, FpSubspace};
pub use homology::{
    cohomology, homology, homology_with_witnesses, induced_map_on_homology, ChainComplex, CochainComplex,
    ChainComplexZ, FGAbGroup, HomologyWitnesses, InducedMap, Ring,
};
pub use matrix::{dense_mul, dense_to_sparse, identity_dense, DenseMat, SparseIntMatrix};
pub use modules::{hom_over_group_ring, tensor_over_group_ring, tor1_over_group_ring, GroupRingModule, IntMat};
pub use resolution::{
    free_resolution_over_group_algebra, lift, AlgebraTerm, ChainLift, FreeComplex, GroupTable, Restriction,
};
pub use snf::{
    integer_image_basis, integer_kernel, invariant_factors, lattice_quotient, smith_normal_form,
    solve_integer, SmithForm,
};
pub use twisted::{twisted_chains, twisted_cochains, twisted_cohomology, twisted_homology, FreeGComplex, FreeTerm};
