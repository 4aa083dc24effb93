#include <doctest.h>

#include "qms/asymptotics.hpp"
#include "qms/fixtures.hpp"
#include "test_helpers.hpp"

using namespace qms;
using namespace qmstest;

TEST_CASE("spectrum of the zero generator is all peripheral")
{
    Superoperator zero{2, Matrix::Zero(4, 4)};
    SpectralSplit split = generator_spectrum(zero);
    CHECK(split.eigvec_basis.cols() == 4);
    CHECK(split.decaying_basis.cols() == 0);
    CHECK(split.jordan_ok);
}

TEST_CASE("cascade generator spectrum: the hand-computed peripheral eigendata")
{
    const GkslModel& m = fixtures::get("example_2_6").model;
    SpectralSplit split = generator_spectrum(build_generator(m));
    CHECK(split.eigvec_basis.cols() == 4); // e11, e22+e33, e12, e21
    CHECK(split.decaying_basis.cols() == 5);

    Matrix expected = linalg::span_of(
        {unit(3, 0, 0), unit(3, 1, 1) + unit(3, 2, 2), unit(3, 0, 1), unit(3, 1, 0)}, 1e-10);
    CHECK(linalg::spans_equal(split.eigvec_basis, expected, 1e-8));

    // eigenvalue iω carries e12 (ω = 1 in the fixture)
    bool found_plus = false, found_minus = false;
    for (size_t c = 0; c < split.eigenvalues.size(); ++c) {
        if (!split.peripheral[c]) continue;
        if (std::abs(split.eigenvalues[c] - Complex(0, 1)) < 1e-8) found_plus = true;
        if (std::abs(split.eigenvalues[c] - Complex(0, -1)) < 1e-8) found_minus = true;
    }
    CHECK(found_plus);
    CHECK(found_minus);
}

TEST_CASE("depolarizing qubit: peripheral scalars, decaying traceless part")
{
    const GkslModel& m = fixtures::get("depolarizing_qubit").model;
    SpectralSplit split = generator_spectrum(build_generator(m));
    CHECK(split.eigvec_basis.cols() == 1);
    CHECK(split.decaying_basis.cols() == 3);
    Matrix scalars = linalg::span_of({Matrix::Identity(2, 2)}, 1e-10);
    CHECK(linalg::spans_equal(split.eigvec_basis, scalars, 1e-9));
    // 𝓛(σ_a) = −4 σ_a for each Pauli
    for (size_t c = 0; c < split.eigenvalues.size(); ++c)
        if (!split.peripheral[c])
            CHECK(std::abs(split.eigenvalues[c] - Complex(-4, 0)) < 1e-9);
}

TEST_CASE("invariant states of the fixtures")
{
    { // jumps = []: every density commuting with H
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = Matrix::Zero(3, 3);
        m.hamiltonian(1, 1) = 1.0;
        m.hamiltonian(2, 2) = 3.0;
        InvariantStates inv = invariant_states(m);
        CHECK(inv.kernel_dim == 3); // diagonal functionals (nondegenerate H)
    }
    { // cascade: invariant functionals span{e11, e22}
        InvariantStates inv = invariant_states(fixtures::get("example_2_6").model);
        CHECK(inv.kernel_dim == 2);
        Matrix expected = linalg::span_of({unit(3, 0, 0), unit(3, 1, 1)}, 1e-10);
        Matrix kernel = linalg::span_of(inv.kernel_basis, 1e-10);
        CHECK(linalg::spans_equal(kernel, expected, 1e-8));
    }
    { // generic 3-level: e11 invariant, all invariant states avoid level 3
        InvariantStates inv = invariant_states(fixtures::get("example_4_3").model);
        Superoperator pre = build_predual_generator(fixtures::get("example_4_3").model);
        CHECK(pre.apply(unit(3, 0, 0)).norm() < 1e-12);
        for (const Density& s : inv.states) CHECK(std::abs(s.matrix(2, 2)) < 1e-10);
        CHECK(std::abs(inv.max_support_candidate(2, 2)) < 1e-10);
    }
}

TEST_CASE("faithful invariant state detection")
{
    FaithfulSearch depol = faithful_invariant_state(fixtures::get("depolarizing_qubit").model);
    REQUIRE(depol.state.has_value());
    CHECK((depol.state->matrix - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-9);

    CHECK_FALSE(faithful_invariant_state(fixtures::get("example_2_6").model).state.has_value());
    CHECK_FALSE(faithful_invariant_state(fixtures::get("example_4_3").model).state.has_value());
    CHECK_FALSE(
        faithful_invariant_state(fixtures::get("amplitude_damping_qubit").model).state.has_value());
    CHECK(faithful_invariant_state(fixtures::get("tensor_K12").model).state.has_value());
}

TEST_CASE("reversible subspace: unitary dynamics keep everything reversible")
{
    GkslModel m;
    m.dim = 2;
    m.hamiltonian = pauli_z();
    ReversibleSpace rev = reversible_subspace(m);
    CHECK(rev.rt_basis.cols() == 4);
    CHECK(rev.equals_nt_predual);
}

TEST_CASE("reversible subspace of the generic 3-level model exceeds the N(T) predual")
{
    ReversibleSpace rev = reversible_subspace(fixtures::get("example_4_3").model);
    CHECK(rev.rt_basis.cols() >= 2);
    CHECK(rev.nt_dim == 1);
    CHECK_FALSE(rev.equals_nt_predual);
}

TEST_CASE("reversible subspace of the depolarizing qubit is the invariant line")
{
    ReversibleSpace rev = reversible_subspace(fixtures::get("depolarizing_qubit").model);
    CHECK(rev.rt_basis.cols() == 1);
    CHECK(rev.equals_nt_predual);
    CHECK(rev.m0_pairing_max < 1e-8);
}

TEST_CASE("conditional expectation onto F(T): zero generator and depolarizing")
{
    GkslModel trivial;
    trivial.dim = 2;
    trivial.hamiltonian = Matrix::Zero(2, 2);
    ConditionalExpectation e0 = conditional_expectation_FT(trivial);
    CHECK((e0.projection.matrix - Matrix::Identity(4, 4)).norm() < 1e-10);

    ConditionalExpectation ed = conditional_expectation_FT(fixtures::get("depolarizing_qubit").model);
    CHECK(ed.idempotency < 1e-8);
    CHECK(ed.unitality < 1e-10);
    CHECK(ed.state_compat < 1e-9);
    CHECK(ed.range_match < 1e-7);
    // E(x) = tr(x)/2 · 1
    auto rng = linalg::seeded_engine(3);
    const Matrix x = linalg::random_ginibre(2, 2, rng);
    const Matrix expected = x.trace() / 2.0 * Matrix::Identity(2, 2);
    CHECK((ed.projection.apply(x) - expected).norm() < 1e-9);
    REQUIRE(ed.cesaro_agreement.has_value());
    CHECK(*ed.cesaro_agreement < 1e-6);
}

TEST_CASE("spectral and time-average expectations agree on random unital models")
{
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        GkslModel m = random_unital_model(3, 2, seed);
        ConditionalExpectation e = conditional_expectation_FT(m);
        CHECK(e.idempotency < 1e-8);
        CHECK(e.unitality < 1e-8);
        CHECK(e.state_compat < 1e-8);
        if (e.cesaro_agreement.has_value()) CHECK(*e.cesaro_agreement < 1e-6);
    }
}

TEST_CASE("conditional expectation onto N(T)")
{
    ConditionalExpectation en = conditional_expectation_NT(fixtures::get("depolarizing_qubit").model);
    CHECK(en.idempotency < 1e-8);
    CHECK(en.unitality < 1e-10);
    CHECK(en.range_match < 1e-7);
    CHECK(en.kernel_match < 1e-7);
    CHECK(en.kernel_pairing < 1e-9);

    // tensor model: E_N acts as the identity on B(C²) ⊗ 1
    const GkslModel& tensor = fixtures::get("tensor_K12").model;
    ConditionalExpectation et = conditional_expectation_NT(tensor);
    StarAlgebra nt = compute_NT(tensor);
    for (Index c = 0; c < nt.size(); ++c) {
        const Matrix x = nt.element(c);
        CHECK((et.projection.apply(x) - x).norm() < 1e-7);
    }
    CHECK(et.kernel_pairing < 1e-8);
}

TEST_CASE("predual evolution through the expectation")
{
    Eq14Report depol = predual_evolution_check(fixtures::get("depolarizing_qubit").model, {0.1, 1.0});
    CHECK_FALSE(depol.advisory);
    CHECK(depol.max_dev < 1e-8);

    Eq14Report tensor = predual_evolution_check(fixtures::get("tensor_K12").model, {0.1, 1.0});
    CHECK_FALSE(tensor.advisory);
    CHECK(tensor.max_dev < 1e-8);
}

TEST_CASE("decoherence verdicts across the fixtures")
{
    { // depolarizing: full decoherence
        EIDReport e = eid_verdict(fixtures::get("depolarizing_qubit").model);
        CHECK(e.faithful_state_found);
        CHECK(e.eid_holds);
        CHECK(e.nt_dim == 1);
        CHECK(e.mr_dim == 1);
        CHECK(e.nt_equals_mr);
        CHECK(e.eid1_complete);
        CHECK(e.eid2_decay < 1e-8);
        REQUIRE(e.peripheral_group_order.has_value());
        CHECK(*e.peripheral_group_order == 1);
    }
    { // cascade: no faithful state, peripheral span strictly bigger than N(T)
        EIDReport e = eid_verdict(fixtures::get("example_2_6").model);
        CHECK_FALSE(e.faithful_state_found);
        CHECK_FALSE(e.eid_holds);
        CHECK(e.nt_dim == 2);
        CHECK(e.mr_dim == 4);
        CHECK_FALSE(e.nt_equals_mr);
        CHECK_FALSE(e.mr_multiplicatively_closed);
        CHECK(e.mr_nonclosure_residual > 0.5);
    }
    { // unitary dynamics with nondegenerate H: everything reversible
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = Matrix::Zero(3, 3);
        m.hamiltonian(1, 1) = 1.0;
        m.hamiltonian(2, 2) = 3.0;
        EIDReport e = eid_verdict(m);
        CHECK(e.faithful_state_found);
        CHECK(e.eid_holds);
        CHECK(e.m0_dim == 0);
        CHECK(e.nt_dim == 9);
        CHECK(e.mr_dim == 9);
    }
}

TEST_CASE("reversible state structure on a single factor block")
{
    // depolarizing qubit: single block (1,2) ... actually N(T) = C1 gives (1,2)
    const GkslModel& m = fixtures::get("depolarizing_qubit").model;
    StarAlgebra nt = compute_NT(m);
    BlockStructure bs = atomic_decomposition(nt, 0);
    BlockOperators ops = extract_block_operators(m, bs);
    Density eta{0.5 * Matrix::Identity(2, 2)};
    ReversibleStateDecomposition dec = reversible_state_structure(eta, bs, ops);
    CHECK(dec.off_block_mass < 1e-12);
    CHECK(dec.reconstruction_error < 1e-8);
    CHECK(dec.violations.empty());
}

TEST_CASE("reversible state structure on the tensor model")
{
    const GkslModel& m = fixtures::get("tensor_K12").model;
    StarAlgebra nt = compute_NT(m);
    BlockStructure bs = atomic_decomposition(nt, 0);
    BlockOperators ops = extract_block_operators(m, bs);

    // build a reversible density: σ ⊗ τ with τ the reduced invariant state
    GkslModel reduced = reduced_semigroup(ops, 0);
    InvariantStates rinv = invariant_states(reduced);
    REQUIRE(rinv.kernel_dim == 1);
    const Matrix tau = rinv.max_support_candidate;
    Matrix sigma(2, 2);
    sigma << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
    const Matrix eta_tilde = linalg::kron(sigma, tau);
    Density eta{bs.unitary.adjoint() * eta_tilde * bs.unitary};

    ReversibleStateDecomposition dec = reversible_state_structure(eta, bs, ops);
    CHECK(dec.off_block_mass < 1e-10);
    CHECK(dec.reconstruction_error < 1e-8);
    CHECK(dec.violations.empty());

    // negative control: inject off-block mass and expect a violation report
    const GkslModel& cascade = fixtures::get("example_2_6").model;
    StarAlgebra nt2 = compute_NT(cascade);
    BlockStructure bs2 = atomic_decomposition(nt2, 0);
    BlockOperators ops2 = extract_block_operators(cascade, bs2);
    Matrix bad = Matrix::Identity(3, 3) / 3.0;
    bad(0, 1) = 0.05; // couples the (1,1) block to the (1,2) block
    bad(1, 0) = 0.05;
    ReversibleStateDecomposition dec2 =
        reversible_state_structure(Density{bad}, bs2, ops2);
    CHECK(dec2.off_block_mass ==
          doctest::Approx(0.05 * std::sqrt(2.0)).epsilon(1e-8));
    CHECK_FALSE(dec2.violations.empty());
}

TEST_CASE("invariant state form over the F(T) blocks")
{
    { // depolarizing: single block, τ = 1/2
        const GkslModel& m = fixtures::get("depolarizing_qubit").model;
        BlockStructure ftb = atomic_decomposition(compute_FT(m), 0);
        InvariantFormReport rep = invariant_state_form_check(m, ftb);
        CHECK(rep.states_checked >= 1);
        CHECK(rep.max_reconstruction_error < 1e-8);
        CHECK(rep.weight_sum_dev < 1e-8);
    }
    { // tensor model: two F(T) blocks
        const GkslModel& m = fixtures::get("tensor_K12").model;
        BlockStructure ftb = atomic_decomposition(compute_FT(m), 0);
        InvariantFormReport rep = invariant_state_form_check(m, ftb);
        CHECK(rep.states_checked >= 1);
        CHECK(rep.max_reconstruction_error < 1e-7);
        CHECK(rep.weight_sum_dev < 1e-7);
    }
    { // pure unitary model: uniform mixture over the H eigenprojections
        GkslModel m;
        m.dim = 3;
        m.hamiltonian = Matrix::Zero(3, 3);
        m.hamiltonian(1, 1) = 1.0;
        m.hamiltonian(2, 2) = 3.0;
        BlockStructure ftb = atomic_decomposition(compute_FT(m), 0);
        InvariantFormReport rep = invariant_state_form_check(m, ftb);
        CHECK(rep.max_reconstruction_error < 1e-7);
    }
}

TEST_CASE("eid verdicts on seeded random unital models")
{
    for (std::uint64_t seed = 100; seed < 104; ++seed) {
        GkslModel m = random_unital_model(3, 2, seed);
        EIDReport e = eid_verdict(m);
        CHECK(e.faithful_state_found);
        CHECK(e.eid_holds);
        CHECK(e.nt_equals_mr);
        CHECK(e.nt_ms_intersection_dim == 0);
        CHECK(e.eid1_complete);
        CHECK(e.jordan_ok);
    }
}

TEST_CASE("dissipativity: spectra stay in the closed left half plane with a faithful state")
{
    for (std::uint64_t seed = 300; seed < 304; ++seed) {
        GkslModel m = random_unital_model(3, 2, seed);
        SpectralSplit split = generator_spectrum(build_generator(m));
        for (const Complex& v : split.eigenvalues)
            CHECK(v.real() <= split.tol_spec_abs);
        // eigenvalue 0 present (unitality)
        bool has_zero = false;
        for (const Complex& v : split.eigenvalues)
            if (std::abs(v) <= split.tol_spec_abs) has_zero = true;
        CHECK(has_zero);
    }
}

TEST_CASE("spectra of generator and predual are conjugate multisets")
{
    GkslModel m = random_model(3, 2, 2718);
    SpectralSplit a = generator_spectrum(build_generator(m));
    SpectralSplit b = generator_spectrum(build_predual_generator(m));
    // 𝓛* has the conjugate spectrum; both sets are conjugation-closed
    std::vector<Complex> ea, eb;
    for (size_t c = 0; c < a.eigenvalues.size(); ++c)
        for (Index k = 0; k < a.multiplicities[c]; ++k) ea.push_back(a.eigenvalues[c]);
    for (size_t c = 0; c < b.eigenvalues.size(); ++c)
        for (Index k = 0; k < b.multiplicities[c]; ++k) eb.push_back(std::conj(b.eigenvalues[c]));
    REQUIRE(ea.size() == eb.size());
    // greedy nearest matching (lexicographic sorting transposes near-ties)
    auto multisets_match = [](const std::vector<Complex>& xs, const std::vector<Complex>& ys) {
        std::vector<bool> used(ys.size(), false);
        double worst = 0.0;
        for (const Complex& x : xs) {
            double best = 1e300;
            size_t at = 0;
            for (size_t j = 0; j < ys.size(); ++j) {
                if (used[j]) continue;
                const double dist = std::abs(x - ys[j]);
                if (dist < best) {
                    best = dist;
                    at = j;
                }
            }
            used[at] = true;
            worst = std::max(worst, best);
        }
        return worst;
    };
    CHECK(multisets_match(ea, eb) < 1e-7);
    // Hermiticity preservation makes the spectrum self-conjugate
    std::vector<Complex> ea_conj;
    for (const Complex& x : ea) ea_conj.push_back(std::conj(x));
    CHECK(multisets_match(ea, ea_conj) < 1e-7);
    CHECK(a.eigvec_basis.cols() == b.eigvec_basis.cols()); // dim M_r = dim R(T)
}

TEST_CASE("expectations stay positive on random positive inputs")
{
    const GkslModel& m = fixtures::get("tensor_K12").model;
    ConditionalExpectation e = conditional_expectation_NT(m);
    auto rng = linalg::seeded_engine(606);
    for (int k = 0; k < 100; ++k) {
        Matrix g = linalg::random_ginibre(4, 4, rng);
        Matrix pos = g * g.adjoint();
        Matrix out = linalg::hermitize(e.projection.apply(pos));
        Eigen::SelfAdjointEigenSolver<Matrix> es(out);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, pos.norm()));
    }
}
