// fixtures.cpp — Bundled reference models
#include "qms/fixtures.hpp"

#include <cmath>

namespace qms::fixtures {

namespace {

Matrix unit(Index d, Index i, Index j)
{
    Matrix e = Matrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

std::vector<Fixture> build()
{
    std::vector<Fixture> out;

    {
        // Three-level model, H = ω e11 (ω = 1), one jump e23. No faithful
        // invariant state; the decoherence-free algebra is strictly smaller
        // than the span of peripheral eigenvectors.
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = unit(3, 0, 0);
        m.jumps = {unit(3, 1, 2)};
        m.labels = {"e23"};
        out.push_back({"example_2_6",
                       "3-level, H = omega*e11 (omega = 1), jump e23; no faithful invariant "
                       "state; peripheral span strictly exceeds the decoherence-free algebra",
                       std::move(m)});
    }
    {
        // Generic three-level cascade: level 3 decays into the absorbing
        // levels 1 and 2. Rate convention gamma_33 = gamma_31 + gamma_32
        // (dissipative sign; the convention that flips the sign of Re G is a
        // known slip in some statements of this model). gamma_31 = gamma_32
        // = 1, kappa_3 = 1. Self-check: Σ L†L = -(G + G†).
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = unit(3, 2, 2); // kappa_3 e33
        m.jumps = {unit(3, 0, 2), unit(3, 1, 2)};
        m.labels = {"L31", "L32"};
        out.push_back({"example_4_3",
                       "generic 3-level cascade with absorbing levels 1,2; rates gamma_31 = "
                       "gamma_32 = 1, kappa_3 = 1, gamma_33 = gamma_31 + gamma_32 (dissipative "
                       "sign); no faithful invariant state, R(T) exceeds the predual of N(T)",
                       std::move(m)});
    }
    {
        GkslModel m;
        m.dim = 2;
        m.hamiltonian = Matrix::Zero(2, 2);
        Matrix sx(2, 2), sy(2, 2), sz(2, 2);
        sx << 0, 1, 1, 0;
        sy << 0, Complex(0, -1), Complex(0, 1), 0;
        sz << 1, 0, 0, -1;
        m.jumps = {sx, sy, sz};
        m.labels = {"sigma_x", "sigma_y", "sigma_z"};
        out.push_back({"depolarizing_qubit",
                       "qubit with all three Pauli jumps and H = 0; faithful invariant state "
                       "1/2, trivial decoherence-free algebra, full decoherence",
                       std::move(m)});
    }
    {
        GkslModel m;
        m.dim = 2;
        m.hamiltonian = Matrix::Zero(2, 2);
        m.jumps = {unit(2, 0, 1)}; // lowering operator
        m.labels = {"sigma_minus"};
        out.push_back({"amplitude_damping_qubit",
                       "qubit amplitude damping, H = 0; unique invariant state is the ground "
                       "state projector, which is not faithful",
                       std::move(m)});
    }
    {
        // C² ⊗ C² with H = diag(1,2) ⊗ 1 + 1 ⊗ M0 and jumps 1 ⊗ M. The
        // multiplicity side pumps both ways, so its unique invariant state is
        // faithful. The two fixed-point blocks carry identical reduced
        // dynamics and merge into one decoherence-free block.
        const Index n = 2, m_dim = 2;
        Matrix k = Matrix::Zero(n, n);
        k(0, 0) = 1.0;
        k(1, 1) = 2.0;
        Matrix m0(m_dim, m_dim);
        m0 << 0.3, Complex(0.1, 0.05), Complex(0.1, -0.05), -0.3;
        Matrix lower = unit(m_dim, 0, 1);
        Matrix raise = 0.5 * unit(m_dim, 1, 0);
        const Matrix id_n = Matrix::Identity(n, n);
        const Matrix id_m = Matrix::Identity(m_dim, m_dim);
        GkslModel m;
        m.dim = n * m_dim;
        m.hamiltonian = linalg::kron(k, id_m) + linalg::kron(id_n, m0);
        m.jumps = {linalg::kron(id_n, lower), linalg::kron(id_n, raise)};
        m.labels = {"1 x lower", "1 x raise"};
        out.push_back({"tensor_K12",
                       "C2 x C2 with H = diag(1,2) x 1 + 1 x M0 and jumps 1 x M; faithful "
                       "invariant state, fixed-point blocks (1,2)+(1,2) merging into the "
                       "decoherence-free block (2,2)",
                       std::move(m)});
    }
    {
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = Matrix::Zero(3, 3);
        m.hamiltonian(1, 1) = 1.0;
        m.hamiltonian(2, 2) = 3.0;
        out.push_back({"unitary_only",
                       "3-level purely Hamiltonian model (no jumps), nondegenerate spectrum; "
                       "everything is decoherence-free and the fixed points are the diagonal",
                       std::move(m)});
    }
    return out;
}

} // namespace

const std::vector<Fixture>& all()
{
    static const std::vector<Fixture> fixtures = build();
    return fixtures;
}

const Fixture& get(const std::string& name)
{
    for (const Fixture& f : all())
        if (f.name == name) return f;
    throw ValidationError("unknown fixture: " + name);
}

std::vector<std::string> names()
{
    std::vector<std::string> out;
    for (const Fixture& f : all()) out.push_back(f.name);
    return out;
}

} // namespace qms::fixtures
