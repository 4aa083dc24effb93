// algebra.hpp — Numerical toolkit for unital *-subalgebras of M_d(C):
// generated algebras, commutants, centers, minimal central projections, and
// explicit atomic factor decompositions ⊕_i B(k_i) ⊗ 1_{m_i} with the
// realizing unitary.
#pragma once

#include <cstdint>
#include <vector>

#include "qms/linalg.hpp"
#include "qms/types.hpp"

namespace qms {

// HS-orthonormal frame spanning a unital *-subalgebra of d×d matrices.
struct StarAlgebra {
    Index dim = 0; // ambient d
    Matrix span;   // d²×k, orthonormal columns

    Index size() const { return span.cols(); }
    Matrix element(Index i) const { return linalg::unvec(span.col(i), dim, dim); }
    std::vector<Matrix> elements() const { return linalg::span_to_matrices(span, dim); }

    struct Residuals {
        double identity = 0.0;       // ‖1 − P 1‖ / ‖1‖
        double adjoint = 0.0;        // worst basis-element adjoint residual
        double multiplication = 0.0; // worst pairwise-product residual
    };
    Residuals verify(Index max_pairs = -1) const;

    static StarAlgebra from_matrices(Index d, const std::vector<Matrix>& mats, double rank_tol);
};

struct Block {
    Index n = 0; // factor size, B(k) with dim k = n
    Index m = 0; // multiplicity
};

// Unitary frame realizing an algebra as ⊕_i B(k_i) ⊗ 1_{m_i}. Rows of
// `unitary` are grouped per block; within block i the row index is
// q·m_i + j with q the factor index and j the multiplicity index.
struct BlockStructure {
    Index dim = 0;
    Matrix unitary; // d×d, maps h-coordinates to block coordinates
    std::vector<Block> blocks;
    std::vector<Matrix> central_projections; // in h-coordinates

    Index block_offset(size_t i) const;
    double unitary_defect() const;
    // Off-pattern mass of U x U† against the ⊕ (B(k_i) ⊗ 1_{m_i}) pattern.
    double off_pattern_mass(const Matrix& x) const;
};

// Smallest unital, *-closed, multiplication-closed span containing the
// generators.
StarAlgebra generated_algebra(const std::vector<Matrix>& generators, Index d,
                              const Tolerances& tol = {});

// {x : [x, a] = 0 = [x, a†] for all a in the set}. The empty set commutes
// with everything, so commutant({}) = M_d.
StarAlgebra commutant(const std::vector<Matrix>& set, Index d, const Tolerances& tol = {});
StarAlgebra commutant(const StarAlgebra& algebra, const Tolerances& tol = {});

StarAlgebra center(const StarAlgebra& algebra, const Tolerances& tol = {});

// Minimal projections of the center, via spectral idempotents of a seeded
// random Hermitian central element; retries on ambiguous clustering.
std::vector<Matrix> minimal_central_projections(const StarAlgebra& algebra,
                                                std::uint64_t seed,
                                                const Tolerances& tol = {});

struct FactorShape {
    Index n = 0;
    Index m = 0;
    Matrix columns; // d×(n·m) orthonormal, ordered (q, j) ↦ q·m + j
};

// Tensor form of the compression p·algebra·p (which must be a factor).
FactorShape factor_decomposition(const StarAlgebra& algebra, const Matrix& p,
                                 std::uint64_t seed, const Tolerances& tol = {});

BlockStructure atomic_decomposition(const StarAlgebra& algebra, std::uint64_t seed,
                                    const Tolerances& tol = {});

// σ-weighted partial trace: tr(E_σ(X) η) = tr(X (η ⊗ σ)) for all η on C^n.
Matrix sigma_expectation(const Matrix& X, const Matrix& sigma, Index n, Index m);

} // namespace qms
