// model.hpp — GKSL model data, validation, and the generator / predual
// generator / semigroup maps as superoperators on vectorized d×d operators.
#pragma once

#include <string>
#include <vector>

#include "qms/linalg.hpp"
#include "qms/types.hpp"

namespace qms {

// (H, {L_ℓ}) data. H is Hermitian (ħ = 1); jumps are arbitrary d×d.
struct GkslModel {
    Index dim = 0;
    Matrix hamiltonian;
    std::vector<Matrix> jumps;
    std::vector<std::string> labels;

    // Shape checks plus Hermiticity repair: ‖H − H†‖ ≤ tol.eq·‖H‖ is
    // symmetrized away, anything larger is rejected.
    GkslModel validated(const Tolerances& tol = {}) const;
    double hermiticity_defect() const; // ‖H − H†‖ / max(1, ‖H‖)
};

// Dense d²×d² matrix acting on column-stacked d×d operators.
struct Superoperator {
    Index dim = 0;
    Matrix matrix;

    Matrix apply(const Matrix& x) const;
    double norm() const { return matrix.norm(); }
    static Superoperator identity(Index d);
};

struct Density {
    Matrix matrix;

    static Density validated(const Matrix& m, const Tolerances& tol = {});
};

// Heisenberg generator 𝓛(x) = i[H,x] − ½ Σ (L†L x − 2 L† x L + x L†L).
Superoperator build_generator(const GkslModel& model, const Tolerances& tol = {});

// Predual generator 𝓛*(ρ) = −i[H,ρ] + Σ (L ρ L† − ½{L†L, ρ}); its matrix is
// the HS-adjoint of the generator matrix.
Superoperator build_predual_generator(const GkslModel& model, const Tolerances& tol = {});

// e^{t·gen}. Negative t is the group extension and must be requested
// explicitly.
Superoperator semigroup_map(const Superoperator& gen, double t, bool allow_negative = false);

struct MinimalityReport {
    bool minimal = false;
    Index family_size = 0; // {1, L_1, ..., L_k}
    Index rank = 0;
    double smallest_kept_sv = 0.0;
};

// Theorem-level minimality: {1, L_1, …, L_k} linearly independent.
MinimalityReport validate_minimality(const GkslModel& model, const Tolerances& tol = {});

} // namespace qms
