// algebra.cpp — Commutants, generated algebras, and atomic decompositions
#include "qms/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qms {

using linalg::hermitize;
using linalg::kron;
using linalg::nullspace;
using linalg::orthonormal_columns;
using linalg::span_intersection;
using linalg::unvec;
using linalg::vec;

namespace {

Matrix identity_span_column(Index d)
{
    return vec(Matrix::Identity(d, d));
}

// Deterministic tie-break for projections of equal rank.
double trace_fingerprint(const Matrix& p)
{
    double f = 0.0;
    for (Index i = 0; i < p.rows(); ++i) f += (static_cast<double>(i) + 1.0) * p(i, i).real();
    return f;
}

// Stack of Sylvester maps x ↦ a x − x a over the *-closure of the set.
Matrix commutation_stack(const std::vector<Matrix>& set, Index d)
{
    const Matrix id = Matrix::Identity(d, d);
    Matrix stacked(2 * static_cast<Index>(set.size()) * d * d, d * d);
    Index row = 0;
    for (const Matrix& a : set) {
        const double s = std::max(1.0, a.norm());
        stacked.middleRows(row, d * d) = (kron(id, a) - kron(a.transpose(), id)) / s;
        row += d * d;
        const Matrix ad = a.adjoint();
        stacked.middleRows(row, d * d) = (kron(id, ad) - kron(ad.transpose(), id)) / s;
        row += d * d;
    }
    return stacked;
}

double worst_commutation(const Matrix& candidate_span, const std::vector<Matrix>& set, Index d)
{
    double worst = 0.0;
    for (Index c = 0; c < candidate_span.cols(); ++c) {
        const Matrix x = unvec(candidate_span.col(c), d, d);
        for (const Matrix& a : set) {
            const double s = std::max(1.0, a.norm());
            worst = std::max(worst, (a * x - x * a).norm() / s);
            const Matrix ad = a.adjoint();
            worst = std::max(worst, (ad * x - x * ad).norm() / s);
        }
    }
    return worst;
}

} // namespace

StarAlgebra::Residuals StarAlgebra::verify(Index max_pairs) const
{
    Residuals r;
    const Matrix one = identity_span_column(dim);
    r.identity = linalg::projection_residual(one, span) / one.norm();
    const Index k = size();
    for (Index i = 0; i < k; ++i) {
        const Matrix bi = element(i);
        r.adjoint = std::max(r.adjoint, linalg::projection_residual(vec(bi.adjoint()), span));
    }
    Index pairs_checked = 0;
    for (Index i = 0; i < k; ++i) {
        const Matrix bi = element(i);
        for (Index j = 0; j < k; ++j) {
            if (max_pairs >= 0 && pairs_checked >= max_pairs) return r;
            const Matrix prod = bi * element(j);
            r.multiplication =
                std::max(r.multiplication, linalg::projection_residual(vec(prod), span));
            ++pairs_checked;
        }
    }
    return r;
}

StarAlgebra StarAlgebra::from_matrices(Index d, const std::vector<Matrix>& mats, double rank_tol)
{
    return StarAlgebra{d, linalg::span_of(mats, rank_tol)};
}

Index BlockStructure::block_offset(size_t i) const
{
    Index offset = 0;
    for (size_t b = 0; b < i; ++b) offset += blocks[b].n * blocks[b].m;
    return offset;
}

double BlockStructure::unitary_defect() const
{
    return (unitary.adjoint() * unitary - Matrix::Identity(dim, dim)).norm();
}

double BlockStructure::off_pattern_mass(const Matrix& x) const
{
    const Matrix y = unitary * x * unitary.adjoint();
    double off2 = 0.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        const Index oi = block_offset(i);
        const Index ni = blocks[i].n;
        const Index mi = blocks[i].m;
        // residual of the diagonal block against its best a ⊗ 1_m fit
        const Matrix sub = y.block(oi, oi, ni * mi, ni * mi);
        Matrix a = Matrix::Zero(ni, ni);
        for (Index q = 0; q < ni; ++q)
            for (Index r = 0; r < ni; ++r)
                a(q, r) = sub.block(q * mi, r * mi, mi, mi).trace() / static_cast<double>(mi);
        off2 += (sub - linalg::kron(a, Matrix::Identity(mi, mi))).squaredNorm();
        // inter-block rectangles
        for (size_t j = 0; j < blocks.size(); ++j) {
            if (i == j) continue;
            off2 += y.block(oi, block_offset(j), ni * mi, blocks[j].n * blocks[j].m)
                        .squaredNorm();
        }
    }
    return std::sqrt(off2);
}

StarAlgebra generated_algebra(const std::vector<Matrix>& generators, Index d,
                              const Tolerances& tol)
{
    std::vector<Matrix> work;
    work.push_back(Matrix::Identity(d, d));
    for (const Matrix& g : generators) {
        if (g.rows() != d || g.cols() != d)
            throw ShapeError("generated_algebra: generator size mismatch");
        work.push_back(g);
        work.push_back(g.adjoint());
    }
    Matrix span = linalg::span_of(work, tol.rank);
    // alternate {products, adjoints} and re-orthonormalize until stable
    for (Index round = 0; round <= d * d; ++round) {
        const Index before = span.cols();
        std::vector<Matrix> next = linalg::span_to_matrices(span, d);
        const size_t base = next.size();
        for (size_t i = 0; i < base; ++i) {
            next.push_back(next[i].adjoint());
            for (size_t j = 0; j < base; ++j) next.push_back(next[i] * next[j]);
        }
        span = linalg::span_of(next, tol.rank);
        if (span.cols() == before) break;
    }
    return StarAlgebra{d, std::move(span)};
}

StarAlgebra commutant(const std::vector<Matrix>& set, Index d, const Tolerances& tol)
{
    for (const Matrix& a : set)
        if (a.rows() != d || a.cols() != d) throw ShapeError("commutant: element size mismatch");
    if (set.empty()) return StarAlgebra{d, Matrix::Identity(d * d, d * d)};

    // Small sets: the stacked Sylvester nullspace directly. Blocks are
    // normalized, so the stack has unit scale and the cutoff gets a floor
    // (a stack that is numerically zero must yield the full commutant).
    if (set.size() <= 10)
        return StarAlgebra{d, nullspace(commutation_stack(set, d), tol.rank, 1.0)};

    // Large sets: the commutant of one or two generic self-adjoint-closed
    // combinations contains the answer; the exact elementwise verification
    // below certifies it (and falls back to the full stack when a draw is
    // degenerate).
    auto rng = linalg::seeded_engine(0x51a7eb5ull);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<Matrix> probes;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Matrix g = Matrix::Zero(d, d);
        for (const Matrix& a : set) {
            g += Complex(n01(rng), n01(rng)) * a;
            g += Complex(n01(rng), n01(rng)) * a.adjoint();
        }
        probes.push_back(g);
        Matrix candidate = nullspace(commutation_stack(probes, d), tol.rank, 1.0);
        if (worst_commutation(candidate, set, d) <= 1e4 * tol.rank)
            return StarAlgebra{d, std::move(candidate)};
    }
    return StarAlgebra{d, nullspace(commutation_stack(set, d), tol.rank, 1.0)};
}

StarAlgebra commutant(const StarAlgebra& algebra, const Tolerances& tol)
{
    return commutant(algebra.elements(), algebra.dim, tol);
}

StarAlgebra center(const StarAlgebra& algebra, const Tolerances& tol)
{
    StarAlgebra comm = commutant(algebra, tol);
    Matrix inter = span_intersection(algebra.span, comm.span, tol.rank);
    return StarAlgebra{algebra.dim, std::move(inter)};
}

namespace {

std::vector<Matrix> projections_from_center(const StarAlgebra& z, Index d, std::uint64_t seed,
                                            const Tolerances& tol);

} // namespace

std::vector<Matrix> minimal_central_projections(const StarAlgebra& algebra, std::uint64_t seed,
                                                const Tolerances& tol)
{
    return projections_from_center(center(algebra, tol), algebra.dim, seed, tol);
}

namespace {

std::vector<Matrix> projections_from_center(const StarAlgebra& z, Index d, std::uint64_t seed,
                                            const Tolerances& tol)
{
    const Index zdim = z.size();
    if (zdim == 0) throw StructureError("minimal_central_projections: empty center");
    std::vector<Matrix> herm = linalg::hermitian_basis(z.span, d, tol.rank);

    for (int attempt = 0; attempt < 8; ++attempt) {
        auto rng = linalg::seeded_engine(seed, static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> n01(0.0, 1.0);
        Matrix h = Matrix::Zero(d, d);
        for (const Matrix& b : herm) h += n01(rng) * b;
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        const RealVector evals = es.eigenvalues();
        const double sep = 10.0 * tol.eq * std::max(1.0, h.norm());

        std::vector<std::pair<Index, Index>> clusters; // [begin, end)
        Index begin = 0;
        for (Index i = 1; i <= d; ++i) {
            if (i == d || evals(i) - evals(i - 1) > sep) {
                clusters.emplace_back(begin, i);
                begin = i;
            }
        }
        if (static_cast<Index>(clusters.size()) != zdim) continue;

        std::vector<Matrix> projections;
        bool ok = true;
        for (const auto& [b, e] : clusters) {
            Matrix p = Matrix::Zero(d, d);
            for (Index c = b; c < e; ++c)
                p += es.eigenvectors().col(c) * es.eigenvectors().col(c).adjoint();
            if (linalg::projection_residual(vec(p), z.span) > 1e3 * tol.eq * p.norm()) {
                ok = false; // spectral idempotent escaped the center: not an algebra?
                break;
            }
            projections.push_back(std::move(p));
        }
        if (!ok)
            throw StructureError(
                "minimal_central_projections: spectral idempotent left the center");
        std::sort(projections.begin(), projections.end(), [](const Matrix& a, const Matrix& b) {
            const double ra = a.trace().real();
            const double rb = b.trace().real();
            if (std::abs(ra - rb) > 0.5) return ra < rb;
            return trace_fingerprint(a) < trace_fingerprint(b);
        });
        return projections;
    }
    throw DegeneracyError("minimal_central_projections: eigenvalue clustering stayed ambiguous "
                          "after retries (center dim " + std::to_string(zdim) + ")");
}

} // namespace

FactorShape factor_decomposition(const StarAlgebra& algebra, const Matrix& p, std::uint64_t seed,
                                 const Tolerances& tol)
{
    const Index d = algebra.dim;
    if (p.rows() != d || p.cols() != d) throw ShapeError("factor_decomposition: projection size");
    const double rank_real = p.trace().real();
    const Index r = static_cast<Index>(std::llround(rank_real));
    if (r <= 0 || std::abs(rank_real - static_cast<double>(r)) > 1e-6)
        throw StructureError("factor_decomposition: projection has non-integer trace");

    // Orthonormal basis of range(p).
    Eigen::SelfAdjointEigenSolver<Matrix> pes(hermitize(p));
    Matrix q_p(d, r);
    Index col = 0;
    for (Index i = 0; i < d; ++i)
        if (pes.eigenvalues()(i) > 0.5) {
            if (col >= r) throw StructureError("factor_decomposition: projection rank mismatch");
            q_p.col(col++) = pes.eigenvectors().col(i);
        }
    if (col != r) throw StructureError("factor_decomposition: projection rank mismatch");

    // Compressed algebra on range(p).
    std::vector<Matrix> compressed;
    for (Index i = 0; i < algebra.size(); ++i)
        compressed.push_back(q_p.adjoint() * algebra.element(i) * q_p);
    Matrix span_p = linalg::span_of(compressed, tol.rank);
    const Index k_p = span_p.cols();
    StarAlgebra a_p{r, span_p};

    StarAlgebra z_p = center(a_p, tol);
    if (z_p.size() != 1)
        throw StructureError("factor_decomposition: compressed algebra is not a factor (center "
                             "dim " + std::to_string(z_p.size()) + ")");

    const Index n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(k_p))));
    if (n * n != k_p)
        throw DegeneracyError("factor_decomposition: factor dimension " + std::to_string(k_p) +
                              " is not a perfect square");
    if (r % n != 0)
        throw DegeneracyError("factor_decomposition: rank " + std::to_string(r) +
                              " not divisible by factor size " + std::to_string(n));
    const Index m = r / n;

    if (n == 1) return FactorShape{1, r, q_p};

    // Minimal projection: lowest-rank spectral projection of a seeded random
    // Hermitian element of the compressed algebra; rank must come out at m.
    std::vector<Matrix> herm = linalg::hermitian_basis(span_p, r, tol.rank);
    Matrix e;
    bool found = false;
    for (int attempt = 0; attempt < 8 && !found; ++attempt) {
        auto rng = linalg::seeded_engine(seed ^ 0xfac70full, static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> n01(0.0, 1.0);
        Matrix h = Matrix::Zero(r, r);
        for (const Matrix& b : herm) h += n01(rng) * b;
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        const RealVector evals = es.eigenvalues();
        const double sep = 10.0 * tol.eq * std::max(1.0, h.norm());
        Index begin = 0;
        std::vector<std::pair<Index, Index>> clusters;
        for (Index i = 1; i <= r; ++i) {
            if (i == r || evals(i) - evals(i - 1) > sep) {
                clusters.emplace_back(begin, i);
                begin = i;
            }
        }
        if (static_cast<Index>(clusters.size()) != n) continue; // generic element separates n
        if (clusters.front().second - clusters.front().first != m) continue;
        Matrix cand = Matrix::Zero(r, r);
        for (Index c = clusters.front().first; c < clusters.front().second; ++c)
            cand += es.eigenvectors().col(c) * es.eigenvectors().col(c).adjoint();
        if (linalg::projection_residual(vec(cand), span_p) > 1e3 * tol.eq * cand.norm()) continue;
        e = std::move(cand);
        found = true;
    }
    if (!found)
        throw DegeneracyError("factor_decomposition: could not isolate a rank-" +
                              std::to_string(m) + " minimal projection");

    // ONB of range(e).
    Eigen::SelfAdjointEigenSolver<Matrix> ees(e);
    Matrix xi(r, m);
    col = 0;
    for (Index i = 0; i < r; ++i)
        if (ees.eigenvalues()(i) > 0.5) xi.col(col++) = ees.eigenvectors().col(i);
    if (col != m) throw DegeneracyError("factor_decomposition: minimal projection rank drifted");

    // Partial isometries v_q with v_q† v_q = e, ranges mutually orthogonal.
    // In a factor, w = (1 − f) a e has w†w ∈ C·e, so the polar part is the
    // next isometry; pick the algebra element giving the best-conditioned w.
    std::vector<Matrix> isometries{e};
    Matrix f_acc = e;
    std::vector<Matrix> pool = a_p.elements();
    {
        auto rng = linalg::seeded_engine(seed ^ 0x15077e7ull);
        std::normal_distribution<double> n01(0.0, 1.0);
        for (int extra = 0; extra < 4; ++extra) {
            Matrix g = Matrix::Zero(r, r);
            for (const Matrix& b : pool)
                if (g.size() == b.size()) g += Complex(n01(rng), n01(rng)) * b;
            pool.push_back(g);
        }
    }
    for (Index q = 1; q < n; ++q) {
        const Matrix rest = Matrix::Identity(r, r) - f_acc;
        Matrix best_w;
        double best_score = -1.0;
        for (const Matrix& a : pool) {
            Matrix w = rest * a * e;
            Eigen::JacobiSVD<Matrix> svd(w);
            const double score = svd.singularValues().size() >= m
                                     ? svd.singularValues()(m - 1)
                                     : 0.0;
            if (score > best_score) {
                best_score = score;
                best_w = std::move(w);
            }
        }
        if (best_score <= 1e3 * tol.rank)
            throw DegeneracyError("factor_decomposition: no usable partial isometry found");
        Eigen::JacobiSVD<Matrix> svd(best_w, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Matrix v = svd.matrixU().leftCols(m) * svd.matrixV().leftCols(m).adjoint();
        if ((v.adjoint() * v - e).norm() > 1e-6 * std::sqrt(static_cast<double>(m)))
            throw DegeneracyError("factor_decomposition: partial isometry support drifted");
        isometries.push_back(v);
        f_acc += v * v.adjoint();
    }
    if ((f_acc - Matrix::Identity(r, r)).norm() > 1e-6 * std::sqrt(static_cast<double>(r)))
        throw DegeneracyError("factor_decomposition: matrix units do not resolve the identity");

    Matrix columns(d, n * m);
    for (Index q = 0; q < n; ++q)
        for (Index j = 0; j < m; ++j)
            columns.col(q * m + j) = q_p * (isometries[static_cast<size_t>(q)] * xi.col(j));
    return FactorShape{n, m, std::move(columns)};
}

BlockStructure atomic_decomposition(const StarAlgebra& algebra, std::uint64_t seed,
                                    const Tolerances& tol)
{
    const Index d = algebra.dim;
    // one commutant pass feeds both the center and the dimension cross-check
    StarAlgebra comm = commutant(algebra, tol);
    StarAlgebra z{d, span_intersection(algebra.span, comm.span, tol.rank)};
    std::vector<Matrix> projections = projections_from_center(z, d, seed, tol);

    struct Piece {
        FactorShape shape;
        Matrix projection;
        double fingerprint;
    };
    std::vector<Piece> pieces;
    for (size_t i = 0; i < projections.size(); ++i) {
        FactorShape shape =
            factor_decomposition(algebra, projections[i], seed + 101 * (i + 1), tol);
        pieces.push_back({std::move(shape), projections[i], trace_fingerprint(projections[i])});
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
        if (a.shape.n != b.shape.n) return a.shape.n < b.shape.n;
        if (a.shape.m != b.shape.m) return a.shape.m < b.shape.m;
        return a.fingerprint < b.fingerprint;
    });

    BlockStructure bs;
    bs.dim = d;
    bs.unitary = Matrix::Zero(d, d);
    Index row = 0;
    Index total = 0;
    for (const Piece& piece : pieces) {
        bs.blocks.push_back({piece.shape.n, piece.shape.m});
        bs.central_projections.push_back(piece.projection);
        bs.unitary.middleRows(row, piece.shape.columns.cols()) = piece.shape.columns.adjoint();
        row += piece.shape.columns.cols();
        total += piece.shape.n * piece.shape.m;
    }
    if (total != d)
        throw StructureError("atomic_decomposition: block dimensions sum to " +
                             std::to_string(total) + " instead of " + std::to_string(d));
    if (bs.unitary_defect() > 1e-7 * static_cast<double>(d))
        throw DegeneracyError("atomic_decomposition: assembled frame is not unitary");

    // Structural cross-checks: dim(A) = Σ n², dim(A') = Σ m², and every basis
    // element must conjugate into the block pattern.
    Index sum_n2 = 0;
    Index sum_m2 = 0;
    for (const Block& b : bs.blocks) {
        sum_n2 += b.n * b.n;
        sum_m2 += b.m * b.m;
    }
    if (sum_n2 != algebra.size())
        throw StructureError("atomic_decomposition: dim(A) = " + std::to_string(algebra.size()) +
                             " but blocks give " + std::to_string(sum_n2));
    if (sum_m2 != comm.size())
        throw StructureError("atomic_decomposition: dim(A') = " + std::to_string(comm.size()) +
                             " but blocks give " + std::to_string(sum_m2));
    double off = 0.0;
    for (Index i = 0; i < algebra.size(); ++i)
        off = std::max(off, bs.off_pattern_mass(algebra.element(i)));
    if (off > 1e-7)
        throw StructureError("atomic_decomposition: off-pattern mass " + std::to_string(off));
    return bs;
}

Matrix sigma_expectation(const Matrix& X, const Matrix& sigma, Index n, Index m)
{
    if (X.rows() != n * m || X.cols() != n * m)
        throw ShapeError("sigma_expectation: operator must live on C^n ⊗ C^m");
    if (sigma.rows() != m || sigma.cols() != m)
        throw ShapeError("sigma_expectation: state must live on C^m");
    Matrix out(n, n);
    for (Index q = 0; q < n; ++q)
        for (Index r = 0; r < n; ++r)
            out(q, r) = (X.block(q * m, r * m, m, m) * sigma).trace();
    return out;
}

} // namespace qms
