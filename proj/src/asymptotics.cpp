// asymptotics.cpp — Spectral splittings, invariant/reversible states, and
// conditional expectations
#include "qms/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qms {

using linalg::hermitize;
using linalg::unvec;
using linalg::vec;

namespace {

double cluster_radius(const Tolerances& tol, double scale)
{
    return 10.0 * tol.eq * std::max(1.0, scale);
}

SpectralSplit split_from_partition(const linalg::SpectralPartition& sp, double tol_spec_abs,
                                   double rank_tol)
{
    SpectralSplit split;
    split.tol_spec_abs = tol_spec_abs;
    auto peripheral = [&](const Complex& v) { return std::abs(v.real()) <= tol_spec_abs; };

    std::vector<Matrix> eigvec_parts;
    double gap = 0.0;
    double min_phase = 0.0;
    for (const auto& c : sp.clusters) {
        const bool per = peripheral(c.value);
        split.eigenvalues.push_back(c.value);
        split.multiplicities.push_back(c.algebraic_mult);
        split.peripheral.push_back(per);
        if (per) {
            eigvec_parts.push_back(c.eigvecs);
            if (!c.semisimple) split.jordan_ok = false;
            const double phase = std::abs(c.value.imag());
            if (phase > tol_spec_abs && (min_phase == 0.0 || phase < min_phase))
                min_phase = phase;
        } else {
            const double re = std::abs(c.value.real());
            if (gap == 0.0 || re < gap) gap = re;
        }
    }
    split.gap = gap;
    split.min_peripheral_phase = min_phase;

    Index rows = sp.eigenvalues.size();
    Index cols = 0;
    for (const auto& p : eigvec_parts) cols += p.cols();
    Matrix stacked(rows, cols);
    Index at = 0;
    for (const auto& p : eigvec_parts) {
        stacked.middleCols(at, p.cols()) = p;
        at += p.cols();
    }
    split.eigvec_basis = linalg::orthonormal_columns(stacked, rank_tol);
    return split;
}

} // namespace

SpectralSplit generator_spectrum(const Superoperator& gen, const Tolerances& tol)
{
    const double scale = std::max(1.0, gen.norm());
    const double tol_spec_abs = tol.spec * scale;
    linalg::SpectralPartition sp =
        linalg::analyze_spectrum(gen.matrix, cluster_radius(tol, scale), tol.rank);
    SpectralSplit split = split_from_partition(sp, tol_spec_abs, tol.rank);
    auto peripheral = [&](const Complex& v) { return std::abs(v.real()) <= tol_spec_abs; };
    split.peripheral_basis = linalg::selected_subspace(sp, peripheral, tol.rank);
    split.decaying_basis = linalg::selected_subspace(
        sp, [&](const Complex& v) { return !peripheral(v); }, tol.rank);
    return split;
}

namespace {

// Spectral projector of `m` onto the clusters selected by `select`.
Matrix projector_onto(const Matrix& m, const std::function<bool(const Complex&)>& select,
                      const Tolerances& tol)
{
    const double scale = std::max(1.0, m.norm());
    linalg::SpectralPartition sp =
        linalg::analyze_spectrum(m, cluster_radius(tol, scale), tol.rank);
    return linalg::spectral_projector(m, sp, select, tol.rank);
}

} // namespace

InvariantStates invariant_states(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    Superoperator predual = build_predual_generator(model, tol);

    InvariantStates out;
    Matrix kernel = linalg::nullspace(predual.matrix, tol.rank);
    if (kernel.cols() == 0)
        throw DegeneracyError("invariant_states: empty kernel of a trace-preserving generator");
    out.kernel_dim = kernel.cols();
    out.kernel_basis = linalg::span_to_matrices(kernel, d);
    out.hermitian_basis = linalg::hermitian_basis(kernel, d, tol.rank);

    const double scale = std::max(1.0, predual.norm());
    Matrix p0 = projector_onto(
        predual.matrix,
        [&](const Complex& v) { return std::abs(v) <= cluster_radius(tol, scale); }, tol);
    Matrix candidate = hermitize(unvec(p0 * vec(Matrix::Identity(d, d) / static_cast<double>(d)),
                                       d, d));
    const double candidate_trace = candidate.trace().real();
    if (std::abs(candidate_trace - 1.0) > 1e-6)
        throw DegeneracyError("invariant_states: trace leaked through the ergodic projection");
    candidate /= candidate_trace;
    out.max_support_candidate = candidate;

    // extract invariant densities: positive/negative parts of the Hermitian
    // kernel frame that are themselves invariant, plus the ergodic candidate
    std::vector<Matrix> candidates{candidate};
    for (const Matrix& h : out.hermitian_basis) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Matrix pos = Matrix::Zero(d, d);
        Matrix neg = Matrix::Zero(d, d);
        for (Index i = 0; i < d; ++i) {
            const double lambda = es.eigenvalues()(i);
            const Matrix rank1 = es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
            if (lambda > 100.0 * tol.pos) pos += lambda * rank1;
            if (lambda < -100.0 * tol.pos) neg -= lambda * rank1;
        }
        for (Matrix part : {pos, neg}) {
            const double tr = part.trace().real();
            if (tr < 1e-9) continue;
            part /= tr;
            if (unvec(predual.matrix * vec(part), d, d).norm() > 1e3 * tol.eq * scale) continue;
            candidates.push_back(part);
        }
    }
    for (const Matrix& c : candidates) {
        bool fresh = true;
        for (const Density& s : out.states)
            if ((s.matrix - c).norm() < 1e-8) fresh = false;
        if (fresh) out.states.push_back(Density{c});
    }
    return out;
}

FaithfulSearch faithful_invariant_state(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    InvariantStates inv = invariant_states(model, tol);
    FaithfulSearch search;
    search.candidate = inv.max_support_candidate;
    Eigen::SelfAdjointEigenSolver<Matrix> es(search.candidate);
    search.min_eigenvalue = es.eigenvalues().minCoeff();
    if (search.min_eigenvalue > tol.pos) search.state = Density{search.candidate};
    return search;
}

ReversibleSpace reversible_subspace(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    Superoperator predual = build_predual_generator(model, tol);
    SpectralSplit split = generator_spectrum(predual, tol);

    ReversibleSpace out;
    out.rt_basis = split.eigvec_basis;
    out.decaying_basis = split.decaying_basis;

    FaithfulSearch faithful = faithful_invariant_state(model, tol);
    StarAlgebra nt = compute_NT(model, tol);
    out.nt_dim = nt.size();

    // pairing matrix tr(σ x) between R(T) and N(T)
    Matrix pairing(out.rt_basis.cols(), nt.size());
    for (Index a = 0; a < out.rt_basis.cols(); ++a) {
        const Matrix sigma = unvec(out.rt_basis.col(a), d, d);
        for (Index b = 0; b < nt.size(); ++b)
            pairing(a, b) = (sigma * nt.element(b)).trace();
    }
    out.nt_pairing_rank = linalg::svd_rank(pairing, 1e-6);
    out.equals_nt_predual =
        (out.rt_basis.cols() == nt.size()) && (out.nt_pairing_rank == nt.size());

    if (faithful.state.has_value()) {
        out.faithful_checked = true;
        Superoperator gen = build_generator(model, tol);
        SpectralSplit gen_split = generator_spectrum(gen, tol);
        for (Index a = 0; a < out.rt_basis.cols(); ++a) {
            const Matrix sigma = unvec(out.rt_basis.col(a), d, d);
            for (Index b = 0; b < gen_split.decaying_basis.cols(); ++b) {
                const Matrix x = unvec(gen_split.decaying_basis.col(b), d, d);
                out.m0_pairing_max =
                    std::max(out.m0_pairing_max, std::abs((sigma * x).trace()));
            }
        }
    }
    return out;
}

namespace {

ConditionalExpectation expectation_common(const GkslModel& model, const Matrix& proj,
                                          const Matrix& target_span, const Tolerances& tol)
{
    const Index d = model.dim;
    ConditionalExpectation ce;
    ce.projection = Superoperator{d, proj};
    ce.idempotency = (proj * proj - proj).norm();
    ce.unitality = (unvec(proj * vec(Matrix::Identity(d, d)), d, d) -
                    Matrix::Identity(d, d))
                       .norm();
    ce.range_match = linalg::span_distance(linalg::range_basis(proj, 1e-7), target_span);

    FaithfulSearch faithful = faithful_invariant_state(model, tol);
    ce.advisory = !faithful.state.has_value();
    if (faithful.state.has_value()) {
        const Matrix& rho = faithful.state->matrix;
        for (Index c = 0; c < d * d; ++c) {
            Matrix x = Matrix::Zero(d, d);
            x(c % d, c / d) = 1.0; // basis element E_ij with vec-index c
            const Matrix ex = unvec(proj * vec(x), d, d);
            ce.state_compat =
                std::max(ce.state_compat, std::abs(((ex - x) * rho).trace()));
        }
    }
    return ce;
}

} // namespace

ConditionalExpectation conditional_expectation_FT(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    Superoperator gen = build_generator(model, tol);
    const double scale = std::max(1.0, gen.norm());
    const double tol_spec_abs = tol.spec * scale;

    Matrix proj = projector_onto(
        gen.matrix, [&](const Complex& v) { return std::abs(v) <= cluster_radius(tol, scale); },
        tol);
    StarAlgebra ft = compute_FT(model, tol);
    ConditionalExpectation ce = expectation_common(model, proj, ft.span, tol);

    // Cross-validation via an iterated exact time average: on every nonzero
    // eigenvalue μ the mean C(T) = (1/T)∫ e^{sG} ds contracts by
    // |(e^{Tμ}−1)/(Tμ)| ≤ max(1/(T·gap), 2/(T·θ_min)) < 1, so a fixed power
    // of C(T) converges geometrically to the ergodic projection without ever
    // touching the spectral machinery.
    SpectralSplit split = generator_spectrum(gen, tol);
    if (split.gap > tol_spec_abs) {
        double slowest = split.gap;
        if (split.min_peripheral_phase > 0.0)
            slowest = std::min(slowest, split.min_peripheral_phase);
        const double horizon = 50.0 / slowest;
        Matrix mean = linalg::semigroup_time_average(gen.matrix, horizon);
        Matrix iterated = mean;
        for (int k = 1; k < 8; ++k) iterated = iterated * mean;
        ce.cesaro_agreement = (iterated - proj).norm();
    }
    return ce;
}

ConditionalExpectation conditional_expectation_NT(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    Superoperator gen = build_generator(model, tol);
    const double scale = std::max(1.0, gen.norm());
    const double tol_spec_abs = tol.spec * scale;

    Matrix proj = projector_onto(
        gen.matrix,
        [&](const Complex& v) { return std::abs(v.real()) <= tol_spec_abs; }, tol);
    StarAlgebra nt = compute_NT(model, tol);
    ConditionalExpectation ce = expectation_common(model, proj, nt.span, tol);

    SpectralSplit split = generator_spectrum(gen, tol);
    const Index d = model.dim;
    Matrix kernel_basis = linalg::nullspace(proj, 1e-7);
    ce.kernel_match = linalg::span_distance(kernel_basis, split.decaying_basis);

    FaithfulSearch faithful = faithful_invariant_state(model, tol);
    if (faithful.state.has_value()) {
        // kernel characterization: tr(ρ x y) = 0 for x in Ker E, y in N(T)
        const Matrix& rho = faithful.state->matrix;
        for (Index a = 0; a < kernel_basis.cols(); ++a) {
            const Matrix x = unvec(kernel_basis.col(a), d, d);
            for (Index b = 0; b < nt.size(); ++b)
                ce.kernel_pairing = std::max(
                    ce.kernel_pairing, std::abs((rho * x * nt.element(b)).trace()));
        }
    }
    return ce;
}

Eq14Report predual_evolution_check(const GkslModel& raw, const std::vector<double>& t_samples,
                                   const Tolerances& tol, int max_sigmas)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    Superoperator predual = build_predual_generator(model, tol);
    SpectralSplit split = generator_spectrum(predual, tol);
    ConditionalExpectation en = conditional_expectation_NT(model, tol);
    const Matrix en_predual = en.projection.matrix.adjoint();

    Eq14Report report;
    report.advisory = en.advisory;
    const Index count = std::min<Index>(split.eigvec_basis.cols(), max_sigmas);
    for (double t : t_samples) {
        Superoperator map = semigroup_map(predual, t);
        const Matrix u = linalg::unitary_exp(model.hamiltonian, -t); // e^{−itH}
        for (Index i = 0; i < count; ++i) {
            const Matrix sigma = unvec(split.eigvec_basis.col(i), d, d);
            const Matrix lhs = map.apply(sigma);
            const Matrix rhs = unvec(en_predual * vec(u * sigma * u.adjoint()), d, d);
            report.max_dev = std::max(report.max_dev, (lhs - rhs).norm());
            ++report.samples;
        }
    }
    return report;
}

EIDReport eid_verdict(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    Superoperator gen = build_generator(model, tol);
    SpectralSplit split = generator_spectrum(gen, tol);
    StarAlgebra nt = compute_NT(model, tol);
    StarAlgebra ft = compute_FT(model, tol);
    FaithfulSearch faithful = faithful_invariant_state(model, tol);

    EIDReport report;
    report.faithful_state_found = faithful.state.has_value();
    report.nt_dim = nt.size();
    report.mr_dim = split.eigvec_basis.cols();
    report.m0_dim = split.decaying_basis.cols();
    report.ft_dim = ft.size();
    report.jordan_ok = split.jordan_ok;
    report.gap = split.gap;

    report.nt_mr_distance = (nt.size() == split.eigvec_basis.cols())
                                ? linalg::span_distance(nt.span, split.eigvec_basis)
                                : 1.0;
    report.nt_equals_mr = report.nt_mr_distance <= 100.0 * tol.eq;

    report.nt_ms_intersection_dim =
        linalg::span_intersection(nt.span, split.decaying_basis, 1e-7).cols();

    // EID1: B(h) = N(T) ⊕ M0 — dimensions add up and the union spans
    const bool dims_fit = nt.size() + split.decaying_basis.cols() == d * d;
    bool union_full = false;
    if (dims_fit) {
        Matrix joint(d * d, nt.size() + split.decaying_basis.cols());
        joint.leftCols(nt.size()) = nt.span;
        joint.rightCols(split.decaying_basis.cols()) = split.decaying_basis;
        union_full = linalg::svd_rank(joint, 1e-7) == d * d;
    }
    report.eid1_complete = dims_fit && union_full;

    // EID2 proxy: decaying basis elements actually contract at the horizon
    if (split.gap > 0.0 && split.decaying_basis.cols() > 0) {
        Superoperator horizon_map = semigroup_map(gen, 50.0 / split.gap);
        double worst = 0.0;
        for (Index c = 0; c < split.decaying_basis.cols(); ++c) {
            const Matrix x = unvec(split.decaying_basis.col(c), d, d);
            worst = std::max(worst, horizon_map.apply(x).norm());
        }
        report.eid2_decay = worst;
    }

    report.eid_holds = report.faithful_state_found && report.nt_equals_mr &&
                       report.nt_ms_intersection_dim == 0;
    if (!report.faithful_state_found) {
        report.advisories.push_back("no faithful invariant state: decoherence verdict and the "
                                    "M_s identification are not claimed, M0 is reported alone");
    } else if (report.nt_equals_mr != (report.nt_ms_intersection_dim == 0)) {
        report.advisories.push_back("N(T)=M_r and N(T)∩M_s={0} disagree numerically");
    }

    // multiplicative closure of the peripheral eigenvector span
    {
        const Index k = split.eigvec_basis.cols();
        const Index cap = 64;
        double worst = 0.0;
        for (Index a = 0; a < std::min(k, cap); ++a) {
            const Matrix xa = unvec(split.eigvec_basis.col(a), d, d);
            for (Index b = 0; b < std::min(k, cap); ++b) {
                const Matrix xb = unvec(split.eigvec_basis.col(b), d, d);
                worst = std::max(worst, linalg::projection_residual(vec(xa * xb),
                                                                    split.eigvec_basis));
            }
        }
        if (k > cap)
            report.advisories.push_back("M_r closure sampled on the first 64 basis elements");
        report.mr_nonclosure_residual = worst;
        report.mr_multiplicatively_closed = worst <= 1e3 * tol.eq;
    }

    // peripheral point group (only probed for trivial fixed-point algebra)
    if (report.faithful_state_found && ft.size() == 1) {
        std::vector<double> phases;
        for (size_t c = 0; c < split.eigenvalues.size(); ++c)
            if (split.peripheral[c]) phases.push_back(split.eigenvalues[c].imag());
        for (Index h = 1; h <= d * d; ++h) {
            bool fits = true;
            for (double theta : phases) {
                const double turns = theta * static_cast<double>(h) / (2.0 * M_PI);
                if (std::abs(turns - std::round(turns)) > 1e-6 * static_cast<double>(h)) {
                    fits = false;
                    break;
                }
            }
            if (fits) {
                report.peripheral_group_order = static_cast<int>(h);
                break;
            }
        }
    }
    return report;
}

ReversibleStateDecomposition reversible_state_structure(const Density& eta,
                                                        const BlockStructure& nt_blocks,
                                                        const BlockOperators& ops,
                                                        const Tolerances& tol)
{
    const Index d = nt_blocks.dim;
    if (eta.matrix.rows() != d) throw ShapeError("reversible_state_structure: size mismatch");

    ReversibleStateDecomposition out;
    double off2 = 0.0;
    for (size_t i = 0; i < nt_blocks.blocks.size(); ++i)
        for (size_t j = 0; j < nt_blocks.blocks.size(); ++j)
            if (i != j)
                off2 += (nt_blocks.central_projections[i] * eta.matrix *
                         nt_blocks.central_projections[j])
                            .squaredNorm();
    out.off_block_mass = std::sqrt(off2);
    if (out.off_block_mass > 1e3 * tol.eq)
        out.violations.push_back("state has off-block mass " +
                                 std::to_string(out.off_block_mass));

    const Matrix eta_tilde = nt_blocks.unitary * eta.matrix * nt_blocks.unitary.adjoint();
    Matrix reconstruction = Matrix::Zero(d, d);
    for (size_t i = 0; i < nt_blocks.blocks.size(); ++i) {
        const Index o = nt_blocks.block_offset(i);
        const Index n = nt_blocks.blocks[i].n;
        const Index m = nt_blocks.blocks[i].m;
        const double weight =
            (nt_blocks.central_projections[i] * eta.matrix).trace().real();
        out.weights.push_back(weight);

        GkslModel reduced = reduced_semigroup(ops, i);
        InvariantStates inv = invariant_states(reduced, tol);
        if (inv.kernel_dim != 1)
            out.violations.push_back("block " + std::to_string(i) +
                                     ": reduced semigroup invariant state not unique (kernel "
                                     "dim " + std::to_string(inv.kernel_dim) + ")");
        Matrix tau = inv.max_support_candidate;
        out.tau.push_back(tau);

        if (weight <= 1e3 * tol.eq) {
            out.sigma.emplace_back();
            continue;
        }
        const Matrix block = eta_tilde.block(o, o, n * m, n * m);
        Matrix sigma = sigma_expectation(block, tau, n, m);
        const double strace = sigma.trace().real();
        if (std::abs(strace) < 1e-12) {
            out.sigma.emplace_back();
            out.violations.push_back("block " + std::to_string(i) +
                                     ": factor-side extraction degenerate");
            continue;
        }
        sigma = hermitize(sigma / strace);
        out.sigma.push_back(sigma);
        Matrix tilde = Matrix::Zero(d, d);
        tilde.block(o, o, n * m, n * m) = weight * linalg::kron(sigma, tau);
        reconstruction += nt_blocks.unitary.adjoint() * tilde * nt_blocks.unitary;
    }
    out.reconstruction_error = (reconstruction - eta.matrix).norm();
    return out;
}

InvariantFormReport invariant_state_form_check(const GkslModel& raw,
                                               const BlockStructure& ft_blocks,
                                               const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    BlockOperators ops = extract_block_operators(model, ft_blocks, tol);
    InvariantStates inv = invariant_states(model, tol);

    InvariantFormReport report;
    std::vector<Matrix> taus;
    std::vector<double> tau_purity;
    for (size_t j = 0; j < ft_blocks.blocks.size(); ++j) {
        GkslModel reduced = reduced_semigroup(ops, j);
        InvariantStates reduced_inv = invariant_states(reduced, tol);
        if (reduced_inv.kernel_dim != 1)
            report.notes.push_back("block " + std::to_string(j) +
                                   ": reduced invariant state not unique");
        taus.push_back(reduced_inv.max_support_candidate);
        tau_purity.push_back((taus.back() * taus.back()).trace().real());
    }

    for (const Density& state : inv.states) {
        const Matrix eta_tilde = ft_blocks.unitary * state.matrix * ft_blocks.unitary.adjoint();
        Matrix reconstruction = Matrix::Zero(d, d);
        double weight_sum = 0.0;
        for (size_t j = 0; j < ft_blocks.blocks.size(); ++j) {
            const Index o = ft_blocks.block_offset(j);
            const Index n = ft_blocks.blocks[j].n;
            const Index m = ft_blocks.blocks[j].m;
            const Matrix block = eta_tilde.block(o, o, n * m, n * m);
            // tr_f(η_j (1 ⊗ τ)) / tr(τ²) recovers σ_j with its weight
            Matrix sigma = sigma_expectation(block, taus[j], n, m) / tau_purity[j];
            weight_sum += sigma.trace().real();
            Matrix tilde = Matrix::Zero(d, d);
            tilde.block(o, o, n * m, n * m) = linalg::kron(sigma, taus[j]);
            reconstruction += ft_blocks.unitary.adjoint() * tilde * ft_blocks.unitary;
        }
        report.max_reconstruction_error =
            std::max(report.max_reconstruction_error, (reconstruction - state.matrix).norm());
        report.weight_sum_dev = std::max(report.weight_sum_dev, std::abs(weight_sum - 1.0));
        ++report.states_checked;
    }
    return report;
}

} // namespace qms
