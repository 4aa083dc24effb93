// structure.hpp — Decoherence-free and fixed-point algebras of a GKSL model,
// per-block operator extraction, reduced semigroups, and the two-way
// derivations between the decompositions of F(T) and N(T).
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qms/algebra.hpp"
#include "qms/model.hpp"

namespace qms {

// Per-block operator data of a model relative to a block decomposition:
// U L U† = ⊕ (1 ⊗ M_ℓ) and U H U† = ⊕ (K ⊗ 1 + 1 ⊗ M0), with tr(M0) = 0.
struct BlockOperators {
    BlockStructure blocks;
    std::vector<Matrix> K;                        // n_i × n_i Hermitian
    std::vector<Matrix> M0;                       // m_i × m_i Hermitian, traceless
    std::vector<std::vector<Matrix>> jump_parts;  // per block, per jump
    double residual = 0.0;                        // worst block-pattern fit residual
};

struct KSpectrum {
    std::vector<double> eigenvalues;      // distinct, ascending
    std::vector<Matrix> projections;      // spectral projections, n_i × n_i
    std::vector<Index> multiplicities;
};

struct SpectrumOfK {
    std::vector<KSpectrum> per_block;
};

// N(T) = commutant of the iterated commutators δ_H^n(L_ℓ), δ_H^n(L_ℓ†),
// with n grown until the family's span stabilizes.
StarAlgebra compute_NT(const GkslModel& model, const Tolerances& tol = {});

// F(T) = commutant of {H, L_ℓ, L_ℓ†}. The identification with the fixed
// points of T_t assumes a faithful invariant state; callers flag that
// hypothesis separately.
StarAlgebra compute_FT(const GkslModel& model, const Tolerances& tol = {});

// Fits the model's operators to the block pattern of `blocks` (normally the
// atomic decomposition of N(T) or F(T)); throws StructureError when the fit
// residual shows the operators do not respect the pattern.
BlockOperators extract_block_operators(const GkslModel& model, const BlockStructure& blocks,
                                       const Tolerances& tol = {});

// GKSL model on the multiplicity space of block i: H = M0, jumps = {M_ℓ}.
GkslModel reduced_semigroup(const BlockOperators& ops, size_t block_index);

SpectrumOfK spectrum_of_K(const BlockOperators& ops, const Tolerances& tol = {});

struct FtPrediction {
    StarAlgebra algebra;        // predicted F(T), in h-coordinates
    std::vector<Block> blocks;  // (dim S_j, dim f_j), sorted like BlockStructure blocks
};

// F(T) from the N(T) decomposition: one block per eigenspace of each K_i.
FtPrediction ft_from_nt(const SpectrumOfK& spectrum, const BlockStructure& nt_blocks,
                        const Tolerances& tol = {});

struct NtPrediction {
    std::vector<std::vector<size_t>> classes; // partition of F(T)-block indices
    std::vector<Block> blocks;                // predicted N(T) shapes, sorted
    std::vector<std::string> inconsistencies; // tier disagreements, dim clashes
    // per unordered pair {j,k}, j<k: tier results
    std::vector<std::array<size_t, 2>> pairs;
    std::vector<bool> spectra_match;
    std::vector<bool> linked;
};

// N(T) from the F(T) decomposition via the block-equivalence relation.
// Tier (a): equal multiplicity dimension and matching reduced-generator
// spectra (necessary filter). Tier (b): linkage through off-diagonal
// compressions of the directly computed N(T) (decides the partition).
NtPrediction nt_from_ft(const BlockStructure& ft_blocks,
                        const std::vector<GkslModel>& block_models,
                        const StarAlgebra& nt_direct, const Tolerances& tol = {});

// Optional exhaustive check for small multiplicity spaces (m ≤ 3): search for
// a unitary V with 𝓛_b ∘ Ad_V = Ad_V ∘ 𝓛_a; returns V on success.
std::optional<Matrix> find_lindblad_intertwiner(const GkslModel& a, const GkslModel& b,
                                                std::uint64_t seed, const Tolerances& tol = {});

// Assembles the span of the predicted N(T) from the class partition: diagonal
// parts B(S_j) ⊗ 1_{f_j} plus, for merged classes, the off-diagonal elements
// y ⊗ V_k† V_j built from per-block intertwiners onto a class representative.
// Requires every multiplicity dimension in a merged class to be ≤ 3; throws
// DegeneracyError when an intertwiner cannot be found.
Matrix predicted_nt_span(const BlockStructure& ft_blocks,
                         const std::vector<GkslModel>& block_models, const NtPrediction& pred,
                         std::uint64_t seed, const Tolerances& tol = {});

struct AutomorphismReport {
    double max_action_dev = 0.0;  // ‖T_t(x) − e^{itH} x e^{−itH}‖
    double max_mult_dev = 0.0;    // ‖T_t(x†x) − T_t(x)† T_t(x)‖
    double max_group_dev = 0.0;   // ‖T_{−t}(T_t(x)) − x‖ (group extension)
    std::vector<double> t_samples;
};

AutomorphismReport verify_automorphism_action(const GkslModel& model, const StarAlgebra& nt,
                                              const std::vector<double>& t_samples,
                                              const Tolerances& tol = {});

} // namespace qms
