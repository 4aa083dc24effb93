// linalg.hpp — Dense linear-algebra kit: column-stacking vectorization, spans
// as orthonormal column frames in C^{d^2}, SVD-based rank/nullspace decisions,
// spectral partitions of nonnormal matrices, and seeded randomness.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qms/types.hpp"

namespace qms::linalg {

// --- vectorization (column stacking, fixed convention project-wide) ---------
// vec(X) stacks columns, so vec(AXB) = (B^T ⊗ A) vec(X).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index rows, Index cols);
Matrix kron(const Matrix& a, const Matrix& b);

Complex hs_inner(const Matrix& a, const Matrix& b); // tr(a† b)
Matrix hermitize(const Matrix& a);                  // (a + a†)/2

// --- matrix functions --------------------------------------------------------
Matrix expm(const Matrix& a);
// e^{i t h} for Hermitian h, via eigendecomposition.
Matrix unitary_exp(const Matrix& h, double t);
// (1/T) ∫_0^T e^{sG} ds, exact through a block matrix exponential.
Matrix semigroup_time_average(const Matrix& gen, double total_time);

double trace_norm(const Matrix& a);
// Choi matrix Σ_ij E_ij ⊗ S(E_ij) of the superoperator with matrix `superop`.
Matrix choi_matrix(const Matrix& superop, Index d);

// --- spans -------------------------------------------------------------------
// A span is a d^2 × k matrix with orthonormal columns (HS-orthonormal frame).
Matrix orthonormal_columns(const Matrix& cols, double rel_tol);
Matrix span_of(const std::vector<Matrix>& mats, double rel_tol);
std::vector<Matrix> span_to_matrices(const Matrix& span, Index d);

Matrix nullspace(const Matrix& a, double rel_tol, double scale_floor = 0.0);
Matrix range_basis(const Matrix& a, double rel_tol);
Index svd_rank(const Matrix& a, double rel_tol);

// Largest principal-angle sine between equal-dimensional spans (returns 1 when
// the dimensions differ).
double span_distance(const Matrix& a, const Matrix& b);
bool spans_equal(const Matrix& a, const Matrix& b, double tol);
// max over columns v of `sub` of ‖v − P_big v‖.
double containment_residual(const Matrix& sub, const Matrix& big);
Matrix span_intersection(const Matrix& a, const Matrix& b, double rel_tol);
// ‖(I − P)v‖ for a single vector.
double projection_residual(const Vector& v, const Matrix& span);

// --- Hermitian real structure -------------------------------------------------
// Isometry between Hermitian d×d matrices and R^{d^2} (HS-norm preserving).
RealVector herm_to_real(const Matrix& h);
Matrix real_to_herm(const RealVector& v, Index d);
// Hermitian HS-orthonormal basis of a *-closed span.
std::vector<Matrix> hermitian_basis(const Matrix& span, Index d, double rel_tol);

// --- partial traces over a fixed n ⊗ m factorization --------------------------
Matrix partial_trace_first(const Matrix& x, Index n, Index m);  // → m×m
Matrix partial_trace_second(const Matrix& x, Index n, Index m); // → n×n

// --- seeded randomness ---------------------------------------------------------
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0);
Matrix random_ginibre(Index rows, Index cols, std::mt19937_64& rng);
Matrix random_unitary(Index d, std::mt19937_64& rng);
Matrix random_hermitian(Index d, std::mt19937_64& rng);

// --- spectral partition of a general (nonnormal) matrix ------------------------
// Eigenvalues are clustered, and per cluster we compute the eigenvector basis
// ker(M − λ) together with the generalized eigenspace (power iterated until the
// nullity stabilizes).
struct ClusterSpace {
    Complex value;
    Index algebraic_mult = 0;
    Matrix eigvecs;    // columns: ker(M − λ)
    Matrix gen_space;  // columns: generalized eigenspace
    bool semisimple = true;
};

struct SpectralPartition {
    Vector eigenvalues; // raw, sorted by (Re, Im)
    std::vector<ClusterSpace> clusters;
};

SpectralPartition analyze_spectrum(const Matrix& m, double cluster_tol, double rank_tol);

// Basis of ⊕ gen_space over clusters accepted by `select`.
Matrix selected_subspace(const SpectralPartition& sp,
                         const std::function<bool(const Complex&)>& select,
                         double rank_tol);

// Projector onto the selected generalized eigenspaces along the rest.
// Validates idempotency and commutation with `m`.
Matrix spectral_projector(const Matrix& m, const SpectralPartition& sp,
                          const std::function<bool(const Complex&)>& select,
                          double rank_tol);

} // namespace qms::linalg
