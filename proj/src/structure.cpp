// structure.cpp — N(T)/F(T) computation and block-level structure extraction
#include "qms/structure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qms {

using linalg::hermitize;
using linalg::kron;
using linalg::partial_trace_first;
using linalg::partial_trace_second;
using linalg::unvec;
using linalg::vec;

StarAlgebra compute_NT(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    if (model.jumps.empty()) return commutant(std::vector<Matrix>{}, d, tol);

    std::vector<Matrix> level;
    for (const Matrix& jump : model.jumps) {
        level.push_back(jump);
        level.push_back(jump.adjoint());
    }
    Matrix span = linalg::span_of(level, tol.rank);
    // grow with δ_H until the span stabilizes (bounded by d²)
    for (Index n = 1; n <= d * d; ++n) {
        for (Matrix& x : level) x = model.hamiltonian * x - x * model.hamiltonian;
        std::vector<Matrix> extended = linalg::span_to_matrices(span, d);
        for (const Matrix& x : level) extended.push_back(x);
        Matrix next = linalg::span_of(extended, tol.rank);
        if (next.cols() == span.cols()) break;
        span = std::move(next);
    }
    return commutant(linalg::span_to_matrices(span, d), d, tol);
}

StarAlgebra compute_FT(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    std::vector<Matrix> set{model.hamiltonian};
    for (const Matrix& jump : model.jumps) set.push_back(jump);
    return commutant(set, model.dim, tol);
}

namespace {

struct TensorFit {
    Matrix factor; // n×n (K-like) part, absent for jumps
    Matrix mult;   // m×m part
    double residual = 0.0;
};

// Least-squares fit of X to 1_n ⊗ M.
TensorFit fit_identity_tensor(const Matrix& x, Index n, Index m)
{
    TensorFit fit;
    fit.mult = Matrix::Zero(m, m);
    for (Index q = 0; q < n; ++q) fit.mult += x.block(q * m, q * m, m, m);
    fit.mult /= static_cast<double>(n);
    fit.residual = (x - kron(Matrix::Identity(n, n), fit.mult)).norm();
    return fit;
}

// Least-squares fit of X to K ⊗ 1_m + 1_n ⊗ M0 with tr(M0) = 0 (scalar part
// absorbed into K).
TensorFit fit_hamiltonian_tensor(const Matrix& x, Index n, Index m)
{
    TensorFit fit;
    fit.factor = partial_trace_second(x, n, m) / static_cast<double>(m);
    Matrix m0 = (partial_trace_first(x, n, m) -
                 fit.factor.trace() * Matrix::Identity(m, m)) /
                static_cast<double>(n);
    fit.mult = m0;
    fit.residual = (x - kron(fit.factor, Matrix::Identity(m, m)) -
                    kron(Matrix::Identity(n, n), fit.mult))
                       .norm();
    return fit;
}

double off_diagonal_block_mass(const Matrix& y, const BlockStructure& bs)
{
    double mass2 = 0.0;
    for (size_t i = 0; i < bs.blocks.size(); ++i) {
        const Index oi = bs.block_offset(i);
        const Index si = bs.blocks[i].n * bs.blocks[i].m;
        for (size_t j = 0; j < bs.blocks.size(); ++j) {
            if (i == j) continue;
            const Index oj = bs.block_offset(j);
            const Index sj = bs.blocks[j].n * bs.blocks[j].m;
            mass2 += y.block(oi, oj, si, sj).squaredNorm();
        }
    }
    return std::sqrt(mass2);
}

} // namespace

BlockOperators extract_block_operators(const GkslModel& raw, const BlockStructure& blocks,
                                       const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    if (model.dim != blocks.dim) throw ShapeError("extract_block_operators: dimension mismatch");

    BlockOperators ops;
    ops.blocks = blocks;
    double residual = 0.0;
    double scale = std::max(1.0, model.hamiltonian.norm());

    const Matrix h_tilde = blocks.unitary * model.hamiltonian * blocks.unitary.adjoint();
    residual = std::max(residual, off_diagonal_block_mass(h_tilde, blocks) / scale);
    for (size_t i = 0; i < blocks.blocks.size(); ++i) {
        const Index o = blocks.block_offset(i);
        const Index n = blocks.blocks[i].n;
        const Index m = blocks.blocks[i].m;
        TensorFit fit = fit_hamiltonian_tensor(h_tilde.block(o, o, n * m, n * m), n, m);
        residual = std::max(residual, fit.residual / scale);
        ops.K.push_back(hermitize(fit.factor));
        ops.M0.push_back(hermitize(fit.mult));
        ops.jump_parts.emplace_back();
    }

    for (const Matrix& jump : model.jumps) {
        const Matrix l_tilde = blocks.unitary * jump * blocks.unitary.adjoint();
        const double lscale = std::max(1.0, jump.norm());
        residual = std::max(residual, off_diagonal_block_mass(l_tilde, blocks) / lscale);
        for (size_t i = 0; i < blocks.blocks.size(); ++i) {
            const Index o = blocks.block_offset(i);
            const Index n = blocks.blocks[i].n;
            const Index m = blocks.blocks[i].m;
            TensorFit fit = fit_identity_tensor(l_tilde.block(o, o, n * m, n * m), n, m);
            residual = std::max(residual, fit.residual / lscale);
            ops.jump_parts[i].push_back(fit.mult);
        }
    }

    ops.residual = residual;
    if (residual > 1e3 * tol.eq)
        throw StructureError("extract_block_operators: operators do not respect the block "
                             "pattern (residual " + std::to_string(residual) + ")");
    return ops;
}

GkslModel reduced_semigroup(const BlockOperators& ops, size_t block_index)
{
    if (block_index >= ops.blocks.blocks.size())
        throw ShapeError("reduced_semigroup: block index out of range");
    GkslModel model;
    model.dim = ops.blocks.blocks[block_index].m;
    model.hamiltonian = ops.M0[block_index];
    model.jumps = ops.jump_parts[block_index];
    return model;
}

SpectrumOfK spectrum_of_K(const BlockOperators& ops, const Tolerances& tol)
{
    SpectrumOfK out;
    for (const Matrix& k : ops.K) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(k);
        const RealVector evals = es.eigenvalues();
        const Index n = k.rows();
        const double sep = 10.0 * tol.eq * std::max(1.0, k.norm());
        KSpectrum spec;
        Index begin = 0;
        for (Index i = 1; i <= n; ++i) {
            if (i == n || evals(i) - evals(i - 1) > sep) {
                double mean = 0.0;
                Matrix proj = Matrix::Zero(n, n);
                for (Index c = begin; c < i; ++c) {
                    mean += evals(c);
                    proj += es.eigenvectors().col(c) * es.eigenvectors().col(c).adjoint();
                }
                spec.eigenvalues.push_back(mean / static_cast<double>(i - begin));
                spec.projections.push_back(std::move(proj));
                spec.multiplicities.push_back(i - begin);
                begin = i;
            }
        }
        // adjacent clusters must stay separated; otherwise the clustering is ambiguous
        for (size_t j = 1; j < spec.eigenvalues.size(); ++j)
            if (spec.eigenvalues[j] - spec.eigenvalues[j - 1] <= sep)
                throw DegeneracyError("spectrum_of_K: eigenvalue clusters not separated");
        out.per_block.push_back(std::move(spec));
    }
    return out;
}

FtPrediction ft_from_nt(const SpectrumOfK& spectrum, const BlockStructure& nt_blocks,
                        const Tolerances& tol)
{
    if (spectrum.per_block.size() != nt_blocks.blocks.size())
        throw ShapeError("ft_from_nt: spectrum and blocks disagree");
    const Index d = nt_blocks.dim;

    std::vector<Matrix> basis;
    std::vector<Block> shapes;
    for (size_t i = 0; i < nt_blocks.blocks.size(); ++i) {
        const Index o = nt_blocks.block_offset(i);
        const Index n = nt_blocks.blocks[i].n;
        const Index m = nt_blocks.blocks[i].m;
        const KSpectrum& spec = spectrum.per_block[i];
        for (size_t j = 0; j < spec.projections.size(); ++j) {
            // ONB of the eigenspace S_j
            Matrix evecs = linalg::orthonormal_columns(spec.projections[j], tol.rank);
            const Index s = evecs.cols();
            shapes.push_back({s, m});
            for (Index a = 0; a < s; ++a) {
                for (Index b = 0; b < s; ++b) {
                    Matrix unit = evecs.col(a) * evecs.col(b).adjoint(); // on k_i
                    Matrix tilde = Matrix::Zero(d, d);
                    tilde.block(o, o, n * m, n * m) = kron(unit, Matrix::Identity(m, m));
                    basis.push_back(nt_blocks.unitary.adjoint() * tilde * nt_blocks.unitary);
                }
            }
        }
    }
    std::sort(shapes.begin(), shapes.end(), [](const Block& a, const Block& b) {
        if (a.n != b.n) return a.n < b.n;
        return a.m < b.m;
    });
    FtPrediction pred;
    pred.algebra = StarAlgebra::from_matrices(d, basis, tol.rank);
    pred.blocks = std::move(shapes);
    return pred;
}

namespace {

// Multiset comparison of two eigenvalue lists by greedy nearest matching
// (lexicographic sorting transposes conjugate pairs at near-ties).
bool spectra_close(const Vector& a, const Vector& b, double tol)
{
    if (a.size() != b.size()) return false;
    std::vector<bool> used(static_cast<size_t>(b.size()), false);
    for (Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        Index at = -1;
        for (Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<size_t>(j)]) continue;
            const double dist = std::abs(a(i) - b(j));
            if (dist < best) {
                best = dist;
                at = j;
            }
        }
        if (at < 0 || best > tol) return false;
        used[static_cast<size_t>(at)] = true;
    }
    return true;
}

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n)
    {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

} // namespace

NtPrediction nt_from_ft(const BlockStructure& ft_blocks,
                        const std::vector<GkslModel>& block_models,
                        const StarAlgebra& nt_direct, const Tolerances& tol)
{
    const size_t count = ft_blocks.blocks.size();
    if (block_models.size() != count)
        throw ShapeError("nt_from_ft: one reduced model per F(T) block required");

    std::vector<Vector> spectra;
    double scale = 1.0;
    for (const GkslModel& m : block_models) {
        Superoperator gen = build_generator(m, tol);
        Eigen::ComplexEigenSolver<Matrix> ces(gen.matrix, false);
        spectra.push_back(ces.eigenvalues());
        scale = std::max(scale, gen.norm());
    }

    // linkage mass through the directly computed N(T): Σ_x ‖p_j x p_k‖²
    std::vector<Matrix> projections = ft_blocks.central_projections;
    auto linkage_mass = [&](size_t j, size_t k) {
        double mass = 0.0;
        for (Index c = 0; c < nt_direct.size(); ++c) {
            const Matrix x = nt_direct.element(c);
            mass += (projections[j] * x * projections[k]).squaredNorm();
        }
        return mass;
    };

    NtPrediction pred;
    UnionFind uf(count);
    for (size_t j = 0; j < count; ++j) {
        for (size_t k = j + 1; k < count; ++k) {
            const bool dims_ok = ft_blocks.blocks[j].m == ft_blocks.blocks[k].m;
            const bool spec_ok =
                dims_ok && spectra_close(spectra[j], spectra[k], 1e3 * tol.eq * scale);
            const bool link = linkage_mass(j, k) > 0.5;
            pred.pairs.push_back({j, k});
            pred.spectra_match.push_back(spec_ok);
            pred.linked.push_back(link);
            if (link) uf.unite(j, k);
            if (link && !spec_ok)
                pred.inconsistencies.push_back(
                    "blocks " + std::to_string(j) + "," + std::to_string(k) +
                    ": N(T) links them but reduced spectra differ");
            if (spec_ok && !link)
                pred.inconsistencies.push_back(
                    "blocks " + std::to_string(j) + "," + std::to_string(k) +
                    ": reduced spectra coincide without N(T) linkage (treated as inequivalent)");
        }
    }

    std::vector<std::vector<size_t>> classes;
    for (size_t root = 0; root < count; ++root) {
        if (uf.find(root) != root) continue;
        std::vector<size_t> members;
        for (size_t j = 0; j < count; ++j)
            if (uf.find(j) == root) members.push_back(j);
        classes.push_back(std::move(members));
    }

    for (const auto& members : classes) {
        Index k_dim = 0;
        const Index m_dim = ft_blocks.blocks[members.front()].m;
        for (size_t j : members) {
            k_dim += ft_blocks.blocks[j].n;
            if (ft_blocks.blocks[j].m != m_dim)
                pred.inconsistencies.push_back("class with block " + std::to_string(j) +
                                               ": multiplicity dimensions disagree");
        }
        pred.blocks.push_back({k_dim, m_dim});
    }
    std::sort(pred.blocks.begin(), pred.blocks.end(), [](const Block& a, const Block& b) {
        if (a.n != b.n) return a.n < b.n;
        return a.m < b.m;
    });
    pred.classes = std::move(classes);
    return pred;
}

namespace {

bool intertwines(const Matrix& ga, const Matrix& gb, const Matrix& v, double tol_abs)
{
    const Matrix ad = kron(v.conjugate(), v);
    return (gb * ad - ad * ga).norm() <= tol_abs;
}

// Alternating projection between the intertwiner nullspace and rank-one Choi
// matrices; fallback for degenerate invariant-state spectra.
std::optional<Matrix> intertwiner_by_projection(const Matrix& ga, const Matrix& gb, Index m,
                                                std::uint64_t seed, double tol_abs,
                                                double rank_tol)
{
    const Index m2 = m * m;
    Matrix sylvester =
        kron(Matrix::Identity(m2, m2), gb) - kron(ga.transpose(), Matrix::Identity(m2, m2));
    Matrix null = linalg::nullspace(sylvester, std::max(rank_tol, 1e-12));
    if (null.cols() == 0) return std::nullopt;
    auto rng = linalg::seeded_engine(seed, 0xadull);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int restart = 0; restart < 12; ++restart) {
        Vector coeff(null.cols());
        for (Index i = 0; i < coeff.size(); ++i) coeff(i) = Complex(n01(rng), n01(rng));
        Vector w_vec = null * coeff;
        for (int iter = 0; iter < 400; ++iter) {
            Matrix choi = linalg::choi_matrix(unvec(w_vec, m2, m2), m);
            Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(choi));
            Vector v = es.eigenvectors().col(m2 - 1) *
                       std::sqrt(std::max(0.0, es.eigenvalues()(m2 - 1)));
            Matrix ad = kron(unvec(v, m, m).conjugate(), unvec(v, m, m));
            w_vec = null * (null.adjoint() * vec(ad));
        }
        Matrix choi = linalg::choi_matrix(unvec(w_vec, m2, m2), m);
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(choi));
        Matrix cand = unvec(es.eigenvectors().col(m2 - 1), m, m);
        Eigen::JacobiSVD<Matrix> svd(cand, Eigen::ComputeFullU | Eigen::ComputeFullV);
        if (svd.singularValues().minCoeff() < 1e-3) continue;
        Matrix unitary = svd.matrixU() * svd.matrixV().adjoint();
        if (intertwines(ga, gb, unitary, tol_abs)) return unitary;
    }
    return std::nullopt;
}

} // namespace

std::optional<Matrix> find_lindblad_intertwiner(const GkslModel& a, const GkslModel& b,
                                                std::uint64_t seed, const Tolerances& tol)
{
    if (a.dim != b.dim || a.dim > 3) return std::nullopt;
    const Index m = a.dim;
    const Matrix ga = build_generator(a, tol).matrix;
    const Matrix gb = build_generator(b, tol).matrix;
    const double tol_abs = 1e-6 * std::max({1.0, ga.norm(), gb.norm()});

    // Primary route: any intertwining unitary must map the unique invariant
    // state of `a` to that of `b`, so V = U_b Φ U_a† with Φ a phase matrix in
    // the invariant-state eigenframes. The intertwining residual is linear in
    // the relative-phase products u_rc = φ_r φ̄_c, so u solves a small
    // least-squares problem and the phases are read off its rank-one factor.
    const Matrix ka = linalg::nullspace(build_predual_generator(a, tol).matrix, tol.rank);
    const Matrix kb = linalg::nullspace(build_predual_generator(b, tol).matrix, tol.rank);
    if (ka.cols() == 1 && kb.cols() == 1) {
        Matrix tau_a = hermitize(unvec(ka.col(0), m, m));
        Matrix tau_b = hermitize(unvec(kb.col(0), m, m));
        tau_a /= tau_a.trace().real();
        tau_b /= tau_b.trace().real();
        Eigen::SelfAdjointEigenSolver<Matrix> ea(tau_a);
        Eigen::SelfAdjointEigenSolver<Matrix> eb(tau_b);
        const double spec_gap_ok_tol = 1e-7;
        bool spectra_match = true;
        bool nondegenerate = true;
        for (Index i = 0; i < m; ++i) {
            if (std::abs(ea.eigenvalues()(i) - eb.eigenvalues()(i)) > 1e-6)
                spectra_match = false;
            if (i > 0 && ea.eigenvalues()(i) - ea.eigenvalues()(i - 1) < spec_gap_ok_tol)
                nondegenerate = false;
        }
        if (spectra_match && nondegenerate) {
            const Matrix frame = kron((eb.eigenvectors().conjugate()),
                                      eb.eigenvectors()); // Ad_{U_b}
            const Matrix coframe = kron(ea.eigenvectors().conjugate(),
                                        ea.eigenvectors()); // Ad_{U_a}
            // residual of gb·AdV − AdV·ga as a linear map of the m² entries
            // of the diagonal u: AdV = frame · diag(u) · coframe†
            const Index m2 = m * m;
            Matrix lhs = gb * frame;           // (m²)×(m²)
            Matrix rhs = frame;                // columns get scaled by u
            Matrix co = coframe.adjoint();
            Matrix ga_co = co * ga;
            Matrix system(m2 * m2, m2);
            for (Index u_idx = 0; u_idx < m2; ++u_idx) {
                Matrix contrib = lhs.col(u_idx) * co.row(u_idx) -
                                 rhs.col(u_idx) * ga_co.row(u_idx);
                system.col(u_idx) = vec(contrib);
            }
            Matrix u_null = linalg::nullspace(system, 1e-8, 1.0);
            for (Index c = 0; c < u_null.cols(); ++c) {
                // u_rc = φ_r φ̄_c: rank-one with unimodular diagonal structure
                Matrix u_mat = unvec(u_null.col(c), m, m);
                Eigen::JacobiSVD<Matrix> usvd(u_mat, Eigen::ComputeFullU);
                Vector phi = usvd.matrixU().col(0);
                for (Index i = 0; i < m; ++i) {
                    const double mag = std::abs(phi(i));
                    phi(i) = mag > 1e-9 ? phi(i) / mag : Complex(1.0, 0.0);
                }
                const Matrix v = eb.eigenvectors() * phi.asDiagonal() *
                                 ea.eigenvectors().adjoint();
                if (intertwines(ga, gb, v, tol_abs)) return v;
            }
        }
    }
    return intertwiner_by_projection(ga, gb, m, seed, tol_abs, tol.rank);
}

Matrix predicted_nt_span(const BlockStructure& ft_blocks,
                         const std::vector<GkslModel>& block_models, const NtPrediction& pred,
                         std::uint64_t seed, const Tolerances& tol)
{
    const Index d = ft_blocks.dim;
    std::vector<Matrix> basis;
    for (const auto& members : pred.classes) {
        const size_t rep = members.front();
        std::vector<Matrix> to_rep(members.size()); // V_j : f_j → f_rep
        for (size_t idx = 0; idx < members.size(); ++idx) {
            const size_t j = members[idx];
            if (j == rep) {
                to_rep[idx] = Matrix::Identity(ft_blocks.blocks[j].m, ft_blocks.blocks[j].m);
                continue;
            }
            auto v = find_lindblad_intertwiner(block_models[j], block_models[rep], seed, tol);
            if (!v.has_value())
                throw DegeneracyError("predicted_nt_span: no intertwiner for blocks " +
                                      std::to_string(j) + " -> " + std::to_string(rep));
            to_rep[idx] = *v;
        }
        for (size_t ki = 0; ki < members.size(); ++ki) {
            for (size_t ji = 0; ji < members.size(); ++ji) {
                const size_t k = members[ki];
                const size_t j = members[ji];
                const Index nk = ft_blocks.blocks[k].n;
                const Index nj = ft_blocks.blocks[j].n;
                const Matrix mult = to_rep[ki].adjoint() * to_rep[ji]; // f_j → f_k
                for (Index a = 0; a < nk; ++a)
                    for (Index b = 0; b < nj; ++b) {
                        Matrix y = Matrix::Zero(nk, nj);
                        y(a, b) = 1.0;
                        Matrix tilde = Matrix::Zero(d, d);
                        tilde.block(ft_blocks.block_offset(k), ft_blocks.block_offset(j),
                                    nk * mult.rows(), nj * mult.cols()) = kron(y, mult);
                        basis.push_back(ft_blocks.unitary.adjoint() * tilde *
                                        ft_blocks.unitary);
                    }
            }
        }
    }
    return linalg::span_of(basis, tol.rank);
}

AutomorphismReport verify_automorphism_action(const GkslModel& raw, const StarAlgebra& nt,
                                              const std::vector<double>& t_samples,
                                              const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    Superoperator gen = build_generator(model, tol);
    AutomorphismReport report;
    report.t_samples = t_samples;
    const Matrix& s = nt.span;
    for (double t : t_samples) {
        Superoperator map = semigroup_map(gen, t);
        const Matrix u = linalg::unitary_exp(model.hamiltonian, t);
        // restricted map on the invariant span; surjectivity is checked by
        // solving the well-conditioned restricted system instead of applying
        // e^{-tL} to the full space (which amplifies roundoff by e^{t·gap})
        const Matrix restricted = s.adjoint() * (map.matrix * s);
        Eigen::PartialPivLU<Matrix> lu(restricted);
        for (Index i = 0; i < nt.size(); ++i) {
            const Matrix x = nt.element(i);
            const Matrix tx = map.apply(x);
            report.max_action_dev =
                std::max(report.max_action_dev, (tx - u * x * u.adjoint()).norm());
            report.max_mult_dev = std::max(
                report.max_mult_dev, (map.apply(x.adjoint() * x) - tx.adjoint() * tx).norm());
            const Vector preimage = s * lu.solve(s.adjoint() * vec(x));
            report.max_group_dev = std::max(
                report.max_group_dev, (map.matrix * preimage - vec(x)).norm());
        }
    }
    return report;
}

} // namespace qms
