// acceptance_main.cpp — End-to-end acceptance suite. Each criterion prints
// one PASS/FAIL line; the process exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qms/asymptotics.hpp"
#include "qms/fixtures.hpp"
#include "qms/report.hpp"
#include "test_helpers.hpp"

using namespace qms;
using namespace qmstest;

namespace {

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool leq(double value, double bound, const std::string& label, std::string& detail)
{
    if (value <= bound) return true;
    detail += " [" + label + " = " + std::to_string(value) + " > " + std::to_string(bound) + "]";
    return false;
}

std::vector<GkslModel> tensor_suite()
{
    std::vector<GkslModel> models;
    for (std::uint64_t s = 0; s < 10; ++s) models.push_back(random_tensor_model(2, 2, 9000 + s));
    for (std::uint64_t s = 0; s < 10; ++s) models.push_back(random_tensor_model(2, 3, 9500 + s));
    return models;
}

std::vector<GkslModel> unital_suite()
{
    std::vector<GkslModel> models;
    for (std::uint64_t s = 0; s < 10; ++s) models.push_back(random_unital_model(3, 2, 4000 + s));
    for (std::uint64_t s = 0; s < 10; ++s) models.push_back(random_unital_model(4, 2, 4500 + s));
    return models;
}

// reversible densities: the faithful state plus positivity-preserving tilts
// along peripheral directions of the predual
std::vector<Matrix> reversible_densities(const Matrix& rho, const Matrix& rt_basis, Index d,
                                         Index max_tilts)
{
    std::vector<Matrix> states{rho};
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const double floor = es.eigenvalues().minCoeff();
    for (Index c = 0; c < std::min(rt_basis.cols(), max_tilts); ++c) {
        const Matrix h = linalg::hermitize(linalg::unvec(rt_basis.col(c), d, d));
        if (h.norm() < 1e-12) continue;
        Matrix candidate = rho + (0.4 * floor / h.norm()) * h;
        candidate /= candidate.trace().real();
        if (linalg::projection_residual(linalg::vec(candidate), rt_basis) <
            1e-9 * candidate.norm())
            states.push_back(candidate);
    }
    return states;
}

} // namespace

int main()
{
    const Tolerances tol;
    std::vector<Criterion> criteria;

    criteria.push_back({"01 example_2_6 reproduction", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const GkslModel& m = fixtures::get("example_2_6").model;
        bool ok = true;
        StarAlgebra nt = compute_NT(m, tol);
        Matrix expected = linalg::span_of({unit(3, 0, 0), unit(3, 1, 1) + unit(3, 2, 2)}, 1e-12);
        ok &= nt.size() == 2;
        ok &= leq(linalg::span_distance(nt.span, expected), 1e-8, "nt distance", detail);
        BlockStructure bs = atomic_decomposition(nt, 0, tol);
        ok &= bs.blocks.size() == 2 && bs.blocks[0].n == 1 && bs.blocks[0].m == 1 &&
              bs.blocks[1].n == 1 && bs.blocks[1].m == 2;
        InvariantStates inv = invariant_states(m, tol);
        Matrix kernel_expected = linalg::span_of({unit(3, 0, 0), unit(3, 1, 1)}, 1e-12);
        ok &= inv.kernel_dim == 2;
        ok &= leq(linalg::span_distance(linalg::span_of(inv.kernel_basis, 1e-12),
                                        kernel_expected),
                  1e-8, "invariant functionals", detail);
        ok &= !faithful_invariant_state(m, tol).state.has_value();
        ok &= leq(seconds_since(t0), 1.0, "runtime", detail);
        return ok;
    }});

    criteria.push_back({"02 example_3_2 reproduction (M_r of the same model)", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const GkslModel& m = fixtures::get("example_2_6").model;
        bool ok = true;
        SpectralSplit split = generator_spectrum(build_generator(m, tol), tol);
        Matrix expected = linalg::span_of({unit(3, 0, 0), unit(3, 0, 1), unit(3, 1, 0),
                                           unit(3, 1, 1) + unit(3, 2, 2)},
                                          1e-12);
        ok &= split.eigvec_basis.cols() == 4;
        ok &= leq(linalg::span_distance(split.eigvec_basis, expected), 1e-8, "mr", detail);
        StarAlgebra nt = compute_NT(m, tol);
        ok &= nt.size() < split.eigvec_basis.cols();
        ok &= leq(linalg::containment_residual(nt.span, split.eigvec_basis), 1e-8,
                  "nt inside mr", detail);
        // multiplicative non-closure witness: e21 · e12 = e22 leaves M_r
        const Matrix witness = unit(3, 1, 0) * unit(3, 0, 1);
        const double residual =
            linalg::projection_residual(linalg::vec(witness), split.eigvec_basis);
        if (residual <= 0.5) {
            detail += " [witness residual " + std::to_string(residual) + " <= 0.5]";
            ok = false;
        }
        ok &= leq(seconds_since(t0), 1.0, "runtime", detail);
        return ok;
    }});

    criteria.push_back({"03 example_4_3 reproduction", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const GkslModel& m = fixtures::get("example_4_3").model;
        bool ok = true;
        StarAlgebra nt = compute_NT(m, tol);
        ok &= nt.size() == 1;
        Superoperator pre = build_predual_generator(m, tol);
        ok &= leq(pre.apply(unit(3, 0, 0)).norm(), 1e-12, "e11 invariance", detail);
        InvariantStates inv = invariant_states(m, tol);
        for (const Density& s : inv.states)
            ok &= leq(std::abs(s.matrix(2, 2)), 1e-10, "mass on e3", detail);
        ok &= leq(std::abs(inv.max_support_candidate(2, 2)), 1e-10, "candidate mass on e3",
                  detail);
        ReversibleSpace rev = reversible_subspace(m, tol);
        ok &= rev.rt_basis.cols() >= 2;
        ok &= rev.nt_dim == 1;
        if (rev.equals_nt_predual) {
            detail += " [R(T) = N(T)_* unexpectedly]";
            ok = false;
        }
        ok &= leq(seconds_since(t0), 1.0, "runtime", detail);
        return ok;
    }});

    criteria.push_back({"04 block round-trip on 20 tensor models", [&](std::string& detail) {
        bool ok = true;
        for (const GkslModel& model : tensor_suite()) {
            StarAlgebra nt = compute_NT(model, tol);
            BlockStructure bs = atomic_decomposition(nt, 0, tol);
            BlockOperators ops = extract_block_operators(model, bs, tol);
            ok &= leq(ops.residual, 1e-8, "extraction residual", detail);
            Superoperator gen = build_generator(model, tol);
            for (double t : {0.1, 1.0}) {
                Superoperator map = semigroup_map(gen, t);
                for (size_t i = 0; i < bs.blocks.size(); ++i) {
                    const Index o = bs.block_offset(i);
                    const Index n = bs.blocks[i].n;
                    const Index mm = bs.blocks[i].m;
                    auto rng = linalg::seeded_engine(31337, i);
                    const Matrix x = linalg::random_ginibre(n, n, rng);
                    const Matrix y = linalg::random_ginibre(mm, mm, rng);
                    Matrix tilde = Matrix::Zero(model.dim, model.dim);
                    tilde.block(o, o, n * mm, n * mm) = linalg::kron(x, y);
                    const Matrix lhs = map.apply(bs.unitary.adjoint() * tilde * bs.unitary);
                    GkslModel reduced = reduced_semigroup(ops, i);
                    Superoperator rmap = semigroup_map(build_generator(reduced, tol), t);
                    const Matrix uk = linalg::unitary_exp(ops.K[i], t);
                    Matrix rhs_t = Matrix::Zero(model.dim, model.dim);
                    rhs_t.block(o, o, n * mm, n * mm) =
                        linalg::kron(uk * x * uk.adjoint(), rmap.apply(y));
                    const Matrix rhs = bs.unitary.adjoint() * rhs_t * bs.unitary;
                    ok &= leq((lhs - rhs).norm(), 1e-7, "factorization", detail);
                }
            }
            if (!ok) break;
        }
        return ok;
    }});

    criteria.push_back({"05 decoherence splitting on 20 unital models", [&](std::string& detail) {
        bool ok = true;
        for (const GkslModel& model : unital_suite()) {
            const Index d2 = model.dim * model.dim;
            StarAlgebra nt = compute_NT(model, tol);
            SpectralSplit split = generator_spectrum(build_generator(model, tol), tol);
            ok &= nt.size() == split.eigvec_basis.cols() &&
                  leq(linalg::span_distance(nt.span, split.eigvec_basis), 1e-7, "N(T) vs M_r",
                      detail);
            const Index inter =
                linalg::span_intersection(nt.span, split.decaying_basis, 1e-7).cols();
            if (inter != 0) {
                detail += " [N(T) ∩ M_s has dim " + std::to_string(inter) + "]";
                ok = false;
            }
            if (nt.size() + split.decaying_basis.cols() != d2) {
                detail += " [dim sum mismatch]";
                ok = false;
            }
            Matrix joint(d2, nt.size() + split.decaying_basis.cols());
            joint.leftCols(nt.size()) = nt.span;
            joint.rightCols(split.decaying_basis.cols()) = split.decaying_basis;
            if (linalg::svd_rank(joint, 1e-7) != d2) {
                detail += " [N(T) ⊕ M0 not direct]";
                ok = false;
            }
            if (!ok) break;
        }
        return ok;
    }});

    criteria.push_back({"06 reversible-state structure", [&](std::string& detail) {
        bool ok = true;
        std::vector<GkslModel> models = unital_suite();
        {
            std::vector<GkslModel> tensors = tensor_suite();
            models.insert(models.end(), tensors.begin(), tensors.end());
        }
        for (const GkslModel& model : models) {
            const Index d = model.dim;
            FaithfulSearch faithful = faithful_invariant_state(model, tol);
            if (!faithful.state.has_value()) {
                detail += " [suite model lost its faithful state]";
                ok = false;
                break;
            }
            SpectralSplit gen_split = generator_spectrum(build_generator(model, tol), tol);
            SpectralSplit pre_split = generator_spectrum(build_predual_generator(model, tol), tol);
            // R(T) ⊥ M0
            double pairing = 0.0;
            for (Index a = 0; a < pre_split.eigvec_basis.cols(); ++a) {
                const Matrix sigma = linalg::unvec(pre_split.eigvec_basis.col(a), d, d);
                for (Index b = 0; b < gen_split.decaying_basis.cols(); ++b)
                    pairing = std::max(pairing,
                                       std::abs((sigma * linalg::unvec(
                                                             gen_split.decaying_basis.col(b), d,
                                                             d))
                                                    .trace()));
            }
            ok &= leq(pairing, 1e-8, "R(T)·M0 pairing", detail);

            StarAlgebra nt = compute_NT(model, tol);
            BlockStructure bs = atomic_decomposition(nt, 0, tol);
            BlockOperators ops = extract_block_operators(model, bs, tol);
            // peripheral eigenvectors of the predual are block diagonal
            double off = 0.0;
            for (Index a = 0; a < pre_split.eigvec_basis.cols(); ++a) {
                const Matrix sigma = linalg::unvec(pre_split.eigvec_basis.col(a), d, d);
                for (size_t i = 0; i < bs.blocks.size(); ++i)
                    for (size_t j = 0; j < bs.blocks.size(); ++j)
                        if (i != j)
                            off = std::max(off, (bs.central_projections[i] * sigma *
                                                 bs.central_projections[j])
                                                    .norm());
            }
            ok &= leq(off, 1e-8, "off-block mass", detail);

            for (const Matrix& state :
                 reversible_densities(faithful.state->matrix, pre_split.eigvec_basis, d, 4)) {
                ReversibleStateDecomposition dec =
                    reversible_state_structure(Density{state}, bs, ops, tol);
                ok &= leq(dec.reconstruction_error, 1e-7, "reconstruction", detail);
                if (!dec.violations.empty()) {
                    detail += " [" + dec.violations.front() + "]";
                    ok = false;
                }
            }
            if (!ok) break;
        }
        return ok;
    }});

    criteria.push_back({"07 fixed-point structure predictions", [&](std::string& detail) {
        bool ok = true;
        std::vector<GkslModel> models = unital_suite();
        {
            std::vector<GkslModel> tensors = tensor_suite();
            models.insert(models.end(), tensors.begin(), tensors.end());
        }
        for (const GkslModel& model : models) {
            StarAlgebra nt = compute_NT(model, tol);
            StarAlgebra ft = compute_FT(model, tol);
            BlockStructure ntb = atomic_decomposition(nt, 0, tol);
            BlockOperators ntops = extract_block_operators(model, ntb, tol);
            FtPrediction ftp = ft_from_nt(spectrum_of_K(ntops, tol), ntb, tol);
            ok &= ftp.algebra.size() == ft.size() &&
                  leq(linalg::span_distance(ftp.algebra.span, ft.span), 1e-7,
                      "ft prediction", detail);

            BlockStructure ftb = atomic_decomposition(ft, 1, tol);
            BlockOperators ftops = extract_block_operators(model, ftb, tol);
            std::vector<GkslModel> block_models;
            for (size_t j = 0; j < ftb.blocks.size(); ++j)
                block_models.push_back(reduced_semigroup(ftops, j));
            NtPrediction pred = nt_from_ft(ftb, block_models, nt, tol);
            if (!pred.inconsistencies.empty()) {
                detail += " [" + pred.inconsistencies.front() + "]";
                ok = false;
            }
            Matrix predicted = predicted_nt_span(ftb, block_models, pred, 5, tol);
            ok &= predicted.cols() == nt.size() &&
                  leq(linalg::span_distance(predicted, nt.span), 1e-7, "nt prediction", detail);
            if (!ok) break;
        }
        if (ok) { // K = diag(1,2) fixture: blocks and the merge
            const GkslModel& m = fixtures::get("tensor_K12").model;
            StarAlgebra nt = compute_NT(m, tol);
            StarAlgebra ft = compute_FT(m, tol);
            BlockStructure ftb = atomic_decomposition(ft, 1, tol);
            BlockStructure ntb = atomic_decomposition(nt, 0, tol);
            ok &= ftb.blocks.size() == 2 && ftb.blocks[0].n == 1 && ftb.blocks[0].m == 2 &&
                  ftb.blocks[1].n == 1 && ftb.blocks[1].m == 2;
            ok &= ntb.blocks.size() == 1 && ntb.blocks[0].n == 2 && ntb.blocks[0].m == 2;
            BlockOperators ftops = extract_block_operators(m, ftb, tol);
            std::vector<GkslModel> block_models;
            for (size_t j = 0; j < ftb.blocks.size(); ++j)
                block_models.push_back(reduced_semigroup(ftops, j));
            NtPrediction pred = nt_from_ft(ftb, block_models, nt, tol);
            if (!(pred.classes.size() == 1 && pred.classes[0].size() == 2)) {
                detail += " [tensor_K12 classes did not merge]";
                ok = false;
            }
        }
        return ok;
    }});

    criteria.push_back({"08 conditional expectations", [&](std::string& detail) {
        bool ok = true;
        std::vector<GkslModel> models = unital_suite();
        models.push_back(fixtures::get("depolarizing_qubit").model);
        models.push_back(fixtures::get("tensor_K12").model);
        models.push_back(fixtures::get("unitary_only").model);
        for (const GkslModel& model : models) {
            ConditionalExpectation eft = conditional_expectation_FT(model, tol);
            ok &= leq(eft.idempotency, 1e-8, "E_FT idempotency", detail);
            ok &= leq(eft.unitality, 1e-8, "E_FT unitality", detail);
            ok &= leq(eft.state_compat, 1e-8, "E_FT state compatibility", detail);
            ok &= leq(eft.range_match, 1e-7, "E_FT range", detail);
            SpectralSplit split = generator_spectrum(build_generator(model, tol), tol);
            if (split.gap >= 1e-3 && eft.cesaro_agreement.has_value())
                ok &= leq(*eft.cesaro_agreement, 1e-6, "Cesàro agreement", detail);
            ConditionalExpectation ent = conditional_expectation_NT(model, tol);
            ok &= leq(ent.idempotency, 1e-8, "E_NT idempotency", detail);
            ok &= leq(ent.unitality, 1e-8, "E_NT unitality", detail);
            ok &= leq(ent.state_compat, 1e-8, "E_NT state compatibility", detail);
            ok &= leq(ent.range_match, 1e-7, "E_NT range", detail);
            ok &= leq(ent.kernel_match, 1e-7, "E_NT kernel", detail);
            ok &= leq(ent.kernel_pairing, 1e-8, "kernel pairing", detail);
            if (!ok) break;
        }
        return ok;
    }});

    criteria.push_back({"09 predual evolution identity", [&](std::string& detail) {
        bool ok = true;
        std::vector<GkslModel> models = unital_suite();
        {
            std::vector<GkslModel> tensors = tensor_suite();
            models.insert(models.end(), tensors.begin(), tensors.end());
        }
        models.push_back(fixtures::get("depolarizing_qubit").model);
        for (const GkslModel& model : models) {
            Eq14Report rep = predual_evolution_check(model, {0.1, 1.0}, tol, 10);
            if (rep.advisory) {
                detail += " [model unexpectedly lacks a faithful state]";
                ok = false;
                break;
            }
            ok &= leq(rep.max_dev, 1e-8, "identity deviation", detail);
            if (!ok) break;
        }
        return ok;
    }});

    criteria.push_back({"10 bicommutant self-tests (50 algebras, d ≤ 12)", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        const std::vector<std::vector<Block>> patterns = {
            {{1, 1}, {1, 2}},         // d = 3
            {{2, 2}},                 // d = 4
            {{2, 1}, {1, 3}},         // d = 5
            {{2, 2}, {1, 2}},         // d = 6
            {{1, 4}, {1, 3}},         // d = 7
            {{2, 3}, {1, 2}},         // d = 8
            {{3, 2}, {1, 2}, {1, 1}}, // d = 9
            {{3, 2}, {2, 2}},         // d = 10
            {{2, 4}, {1, 3}, {1, 1}}, // d = 12
            {{3, 3}, {1, 2}, {1, 1}}, // d = 12
        };
        int count = 0;
        for (std::uint64_t round = 0; round < 5 && ok; ++round) {
            for (size_t p = 0; p < patterns.size() && ok; ++p) {
                const std::uint64_t seed = 100000 + round * 97 + p;
                Index d = 0;
                for (const Block& b : patterns[p]) d += b.n * b.m;
                auto rng = linalg::seeded_engine(seed);
                const Matrix u = linalg::random_unitary(d, rng);
                std::vector<Matrix> basis;
                Index offset = 0;
                for (const Block& b : patterns[p]) {
                    for (Index i = 0; i < b.n; ++i)
                        for (Index j = 0; j < b.n; ++j) {
                            Matrix x = Matrix::Zero(d, d);
                            x.block(offset, offset, b.n * b.m, b.n * b.m) =
                                linalg::kron(unit(b.n, i, j), Matrix::Identity(b.m, b.m));
                            basis.push_back(u * x * u.adjoint());
                        }
                    offset += b.n * b.m;
                }
                StarAlgebra a = StarAlgebra::from_matrices(d, basis, tol.rank);
                StarAlgebra bicomm = commutant(commutant(a, tol), tol);
                if (!(a.size() == bicomm.size() &&
                      linalg::span_distance(a.span, bicomm.span) <= 1e-8)) {
                    detail += " [bicommutant mismatch at seed " + std::to_string(seed) + "]";
                    ok = false;
                    break;
                }
                BlockStructure bs = atomic_decomposition(a, seed, tol);
                Index sum = 0;
                for (const Block& b : bs.blocks) sum += b.n * b.m;
                if (sum != d) {
                    detail += " [Σ n·m = " + std::to_string(sum) + " ≠ " + std::to_string(d) +
                              "]";
                    ok = false;
                }
                ++count;
            }
        }
        if (count != 50) {
            detail += " [ran " + std::to_string(count) + " algebras]";
            ok = false;
        }
        ok &= leq(seconds_since(t0), 60.0, "runtime", detail);
        return ok;
    }});

    int failures = 0;
    const auto suite_start = std::chrono::steady_clock::now();
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail += std::string(" [exception: ") + e.what() + "]";
        }
        std::printf("criterion %s: %s (%.2fs)%s\n", c.name.c_str(), ok ? "PASS" : "FAIL",
                    seconds_since(t0), detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("acceptance: %d/%zu criteria passed (%.2fs total)\n",
                static_cast<int>(criteria.size()) - failures, criteria.size(),
                seconds_since(suite_start));
    return failures == 0 ? 0 : 1;
}
