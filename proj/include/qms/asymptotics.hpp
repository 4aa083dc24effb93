// asymptotics.hpp — Spectral analysis of the generator and its predual:
// peripheral/decaying splitting, invariant and reversible states, conditional
// expectations onto F(T) and N(T), and the decoherence verdict.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qms/model.hpp"
#include "qms/structure.hpp"

namespace qms {

// Classified eigendata of a d²×d² generator matrix.
struct SpectralSplit {
    std::vector<Complex> eigenvalues; // one entry per cluster
    std::vector<Index> multiplicities;
    std::vector<bool> peripheral;     // |Re λ| ≤ tol_spec_abs
    Matrix eigvec_basis;              // peripheral eigenvectors only (M_r / R(T) span)
    Matrix peripheral_basis;          // peripheral generalized eigenspace
    Matrix decaying_basis;            // complementary generalized eigenspace
    bool jordan_ok = true;            // peripheral part semisimple
    double tol_spec_abs = 0.0;
    double gap = 0.0;                       // smallest nonzero |Re λ|; 0 if none
    double min_peripheral_phase = 0.0;      // smallest nonzero |Im λ| on the axis; 0 if none
};

SpectralSplit generator_spectrum(const Superoperator& gen, const Tolerances& tol = {});

struct InvariantStates {
    Index kernel_dim = 0;
    std::vector<Matrix> kernel_basis;    // ker 𝓛* as matrices
    std::vector<Matrix> hermitian_basis; // same span, Hermitian frame
    std::vector<Density> states;         // invariant densities found in the kernel
    Matrix max_support_candidate;        // P₀_*(1/d), Hermitian, trace one
};

InvariantStates invariant_states(const GkslModel& model, const Tolerances& tol = {});

struct FaithfulSearch {
    std::optional<Density> state; // present iff the candidate is strictly positive
    Matrix candidate;
    double min_eigenvalue = 0.0;
};

// Maximal-support invariant state P₀_*(1/d); faithful iff strictly positive.
FaithfulSearch faithful_invariant_state(const GkslModel& model, const Tolerances& tol = {});

struct ReversibleSpace {
    Matrix rt_basis;       // span of peripheral eigenvectors of 𝓛*
    Matrix decaying_basis; // complementary generalized eigenspace
    bool faithful_checked = false;
    double m0_pairing_max = 0.0;  // max |tr(σ x)| over R(T) × M0 bases
    Index nt_dim = 0;
    Index nt_pairing_rank = 0;    // rank of the tr(σ x) pairing R(T) × N(T)
    bool equals_nt_predual = false;
};

ReversibleSpace reversible_subspace(const GkslModel& model, const Tolerances& tol = {});

struct ConditionalExpectation {
    Superoperator projection;
    double idempotency = 0.0;  // ‖E² − E‖
    double unitality = 0.0;    // ‖E(1) − 1‖
    double state_compat = 0.0; // max |tr(ρ E(x)) − tr(ρ x)| over a basis
    double range_match = 1.0;  // span distance to the target algebra
    double kernel_match = 1.0; // span distance of the kernel to M0 (E_N only)
    double kernel_pairing = 0.0; // max |tr(ρ x y)| over kernel × algebra (E_N only)
    std::optional<double> cesaro_agreement; // ‖E − E_time-average‖, when a gap exists
    bool advisory = false;     // no faithful invariant state
};

// Spectral projection onto ker 𝓛 along the rest, cross-validated against an
// exact time average of the semigroup.
ConditionalExpectation conditional_expectation_FT(const GkslModel& model,
                                                  const Tolerances& tol = {});

// Projection onto the peripheral eigenspace along the decaying space.
ConditionalExpectation conditional_expectation_NT(const GkslModel& model,
                                                  const Tolerances& tol = {});

struct Eq14Report {
    double max_dev = 0.0;
    int samples = 0;
    bool advisory = false;
};

// T_{*t}(σ) = E_{N*}(e^{−itH} σ e^{itH}) on the reversible subspace.
Eq14Report predual_evolution_check(const GkslModel& model, const std::vector<double>& t_samples,
                                   const Tolerances& tol = {}, int max_sigmas = 10);

struct EIDReport {
    bool faithful_state_found = false;
    Index nt_dim = 0;
    Index mr_dim = 0;
    Index m0_dim = 0;
    Index ft_dim = 0;
    bool nt_equals_mr = false;
    double nt_mr_distance = 1.0;
    Index nt_ms_intersection_dim = 0;
    bool eid1_complete = false;     // B(h) = N(T) ⊕ M0
    double eid2_decay = 0.0;        // max ‖T_t(x)‖ over M0 basis at the decay horizon
    bool eid_holds = false;
    bool mr_multiplicatively_closed = true;
    double mr_nonclosure_residual = 0.0;
    std::optional<int> peripheral_group_order; // only probed when F(T) = C1
    bool jordan_ok = true;
    double gap = 0.0;
    std::vector<std::string> advisories;
};

EIDReport eid_verdict(const GkslModel& model, const Tolerances& tol = {});

struct ReversibleStateDecomposition {
    std::vector<double> weights;   // tr(η p_i)
    std::vector<Matrix> sigma;     // k_i-side densities (empty matrix when weight ≈ 0)
    std::vector<Matrix> tau;       // unique invariant state of each reduced semigroup
    double off_block_mass = 0.0;
    double reconstruction_error = 0.0;
    std::vector<std::string> violations;
};

// η = Σ tr(η p_i) σ_i ⊗ τ_{m_i} for reversible states, checked constructively.
ReversibleStateDecomposition reversible_state_structure(const Density& eta,
                                                        const BlockStructure& nt_blocks,
                                                        const BlockOperators& ops,
                                                        const Tolerances& tol = {});

struct InvariantFormReport {
    double max_reconstruction_error = 0.0;
    double weight_sum_dev = 0.0;
    int states_checked = 0;
    std::vector<std::string> notes;
};

// Every invariant state is Σ_j σ_j ⊗ τ_{f_j} over the F(T) blocks.
InvariantFormReport invariant_state_form_check(const GkslModel& model,
                                               const BlockStructure& ft_blocks,
                                               const Tolerances& tol = {});

} // namespace qms
