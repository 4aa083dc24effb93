// linalg.cpp — Implementation of the dense linear-algebra kit
#include "qms/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace qms::linalg {

Vector vec(const Matrix& x)
{
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols)
{
    if (v.size() != rows * cols) throw ShapeError("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Complex hs_inner(const Matrix& a, const Matrix& b)
{
    return (a.adjoint() * b).trace();
}

Matrix hermitize(const Matrix& a)
{
    return 0.5 * (a + a.adjoint());
}

Matrix expm(const Matrix& a)
{
    return a.exp();
}

Matrix unitary_exp(const Matrix& h, double t)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
    Vector phases(es.eigenvalues().size());
    for (Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, t * es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix semigroup_time_average(const Matrix& gen, double total_time)
{
    const Index n = gen.rows();
    if (total_time <= 0.0) throw ShapeError("semigroup_time_average: nonpositive horizon");
    // exp(T [[G, I], [0, 0]]) has ∫_0^T e^{sG} ds in the top-right block.
    Matrix block = Matrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = gen;
    block.topRightCorner(n, n) = Matrix::Identity(n, n);
    Matrix e = expm(total_time * block);
    return e.topRightCorner(n, n) / total_time;
}

double trace_norm(const Matrix& a)
{
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

Matrix choi_matrix(const Matrix& superop, Index d)
{
    if (superop.rows() != d * d || superop.cols() != d * d)
        throw ShapeError("choi_matrix: superoperator must be d^2 x d^2");
    Matrix choi = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            Matrix eij = Matrix::Zero(d, d);
            eij(i, j) = 1.0;
            Matrix image = unvec(superop * vec(eij), d, d);
            choi.block(i * d, j * d, d, d) = image;
        }
    }
    return choi;
}

Matrix orthonormal_columns(const Matrix& cols, double rel_tol)
{
    if (cols.cols() == 0) return Matrix(cols.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return Matrix(cols.rows(), 0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

Matrix span_of(const std::vector<Matrix>& mats, double rel_tol)
{
    if (mats.empty()) return Matrix(0, 0);
    const Index d2 = mats.front().size();
    Matrix cols(d2, static_cast<Index>(mats.size()));
    for (Index k = 0; k < cols.cols(); ++k) {
        if (mats[static_cast<size_t>(k)].size() != d2)
            throw ShapeError("span_of: inconsistent matrix sizes");
        cols.col(k) = vec(mats[static_cast<size_t>(k)]);
    }
    return orthonormal_columns(cols, rel_tol);
}

std::vector<Matrix> span_to_matrices(const Matrix& span, Index d)
{
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(span.cols()));
    for (Index k = 0; k < span.cols(); ++k) out.push_back(unvec(span.col(k), d, d));
    return out;
}

Matrix nullspace(const Matrix& a, double rel_tol, double scale_floor)
{
    if (a.rows() == 0 || a.cols() == 0) return Matrix::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // the floor keeps the cutoff honest when `a` is numerically zero relative
    // to the known scale of its construction
    const double cutoff = rel_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, scale_floor);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

Matrix range_basis(const Matrix& a, double rel_tol)
{
    return orthonormal_columns(a, rel_tol);
}

Index svd_rank(const Matrix& a, double rel_tol)
{
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
    return rank;
}

double span_distance(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.cols()) return 1.0;
    if (a.cols() == 0) return 0.0;
    // largest principal-angle sine, computed from the projection residuals
    // directly (stable near zero angle, unlike sqrt(1 − cos²))
    const Matrix res_a = a - b * (b.adjoint() * a);
    const Matrix res_b = b - a * (a.adjoint() * b);
    Eigen::JacobiSVD<Matrix> sa(res_a);
    Eigen::JacobiSVD<Matrix> sb(res_b);
    double s = 0.0;
    if (sa.singularValues().size() > 0) s = std::max(s, sa.singularValues()(0));
    if (sb.singularValues().size() > 0) s = std::max(s, sb.singularValues()(0));
    return std::min(1.0, s);
}

bool spans_equal(const Matrix& a, const Matrix& b, double tol)
{
    return a.cols() == b.cols() && span_distance(a, b) <= tol;
}

double containment_residual(const Matrix& sub, const Matrix& big)
{
    double worst = 0.0;
    for (Index k = 0; k < sub.cols(); ++k)
        worst = std::max(worst, (sub.col(k) - big * (big.adjoint() * sub.col(k))).norm());
    return worst;
}

Matrix span_intersection(const Matrix& a, const Matrix& b, double rel_tol)
{
    const Index n = a.rows();
    if (a.cols() == 0 || b.cols() == 0) return Matrix(n, 0);
    Matrix stacked(2 * n, n);
    stacked.topRows(n) = Matrix::Identity(n, n) - a * a.adjoint();
    stacked.bottomRows(n) = Matrix::Identity(n, n) - b * b.adjoint();
    return nullspace(stacked, rel_tol, 1.0); // complement projectors have unit scale
}

double projection_residual(const Vector& v, const Matrix& span)
{
    if (span.cols() == 0) return v.norm();
    return (v - span * (span.adjoint() * v)).norm();
}

RealVector herm_to_real(const Matrix& h)
{
    const Index d = h.rows();
    RealVector out(d * d);
    Index k = 0;
    const double s = std::sqrt(2.0);
    for (Index i = 0; i < d; ++i) {
        out(k++) = h(i, i).real();
        for (Index j = i + 1; j < d; ++j) {
            out(k++) = s * h(i, j).real();
            out(k++) = s * h(i, j).imag();
        }
    }
    return out;
}

Matrix real_to_herm(const RealVector& v, Index d)
{
    Matrix h = Matrix::Zero(d, d);
    Index k = 0;
    const double s = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < d; ++i) {
        h(i, i) = v(k++);
        for (Index j = i + 1; j < d; ++j) {
            const double re = v(k++) * s;
            const double im = v(k++) * s;
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    }
    return h;
}

std::vector<Matrix> hermitian_basis(const Matrix& span, Index d, double rel_tol)
{
    if (span.cols() == 0) return {};
    RealMatrix cols(d * d, 2 * span.cols());
    Index k = 0;
    for (Index c = 0; c < span.cols(); ++c) {
        Matrix b = unvec(span.col(c), d, d);
        cols.col(k++) = herm_to_real(hermitize(b));
        cols.col(k++) = herm_to_real(hermitize(Complex(0.0, -1.0) * b));
    }
    Eigen::JacobiSVD<RealMatrix> svd(cols, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(rank));
    for (Index c = 0; c < rank; ++c)
        out.push_back(real_to_herm(svd.matrixU().col(c), d));
    return out;
}

Matrix partial_trace_first(const Matrix& x, Index n, Index m)
{
    if (x.rows() != n * m || x.cols() != n * m)
        throw ShapeError("partial_trace_first: size mismatch");
    Matrix out = Matrix::Zero(m, m);
    for (Index q = 0; q < n; ++q) out += x.block(q * m, q * m, m, m);
    return out;
}

Matrix partial_trace_second(const Matrix& x, Index n, Index m)
{
    if (x.rows() != n * m || x.cols() != n * m)
        throw ShapeError("partial_trace_second: size mismatch");
    Matrix out = Matrix::Zero(n, n);
    for (Index q = 0; q < n; ++q)
        for (Index r = 0; r < n; ++r)
            out(q, r) = x.block(q * m, r * m, m, m).trace();
    return out;
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 mixing so that (seed, stream) pairs give independent engines
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return std::mt19937_64(z ^ (z >> 31));
}

Matrix random_ginibre(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = n01(rng);
            const double im = n01(rng);
            g(i, j) = Complex(re, im);
        }
    return g;
}

Matrix random_unitary(Index d, std::mt19937_64& rng)
{
    Matrix g = random_ginibre(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < d; ++i) {
        Complex phase = r(i, i);
        const double a = std::abs(phase);
        q.col(i) *= (a > 0.0) ? phase / a : Complex(1.0, 0.0);
    }
    return q;
}

Matrix random_hermitian(Index d, std::mt19937_64& rng)
{
    return hermitize(random_ginibre(d, d, rng));
}

namespace {

// Generalized eigenspace of (m − λ): iterate powers until the nullity stops
// growing. Each factor is normalized to keep the dynamic range sane.
Matrix generalized_kernel(const Matrix& m, const Complex& lambda, Index mult_cap,
                          double rank_tol, Matrix* plain_kernel, bool* semisimple)
{
    const Index n = m.rows();
    Matrix shifted = m - lambda * Matrix::Identity(n, n);
    const double scale = shifted.norm();
    if (scale > 0.0) shifted /= scale;
    Matrix power = shifted;
    Matrix kernel = nullspace(power, rank_tol);
    if (plain_kernel) *plain_kernel = kernel;
    if (semisimple) *semisimple = true;
    Index previous = kernel.cols();
    for (Index k = 2; k <= std::max<Index>(mult_cap, 1) && previous < mult_cap; ++k) {
        power = power * shifted;
        Matrix next = nullspace(power, rank_tol);
        if (next.cols() <= previous) break;
        kernel = next;
        previous = next.cols();
        if (semisimple) *semisimple = false;
    }
    return kernel;
}

} // namespace

SpectralPartition analyze_spectrum(const Matrix& m, double cluster_tol, double rank_tol)
{
    const Index n = m.rows();
    if (m.cols() != n) throw ShapeError("analyze_spectrum: square matrix required");
    Eigen::ComplexEigenSolver<Matrix> ces(m, /*computeEigenvectors=*/false);
    if (ces.info() != Eigen::Success)
        throw DegeneracyError("analyze_spectrum: eigenvalue iteration failed");
    std::vector<Complex> eigs(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) eigs[static_cast<size_t>(i)] = ces.eigenvalues()(i);
    std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    double radius = cluster_tol;
    for (int attempt = 0; attempt < 6; ++attempt) {
        // single-linkage clustering on the sorted list
        std::vector<std::vector<Complex>> groups;
        for (const Complex& ev : eigs) {
            bool placed = false;
            for (auto& g : groups) {
                for (const Complex& member : g) {
                    if (std::abs(ev - member) <= radius) {
                        g.push_back(ev);
                        placed = true;
                        break;
                    }
                }
                if (placed) break;
            }
            if (!placed) groups.push_back({ev});
        }

        SpectralPartition sp;
        sp.eigenvalues = Eigen::Map<const Vector>(eigs.data(), n);
        Index total = 0;
        bool consistent = true;
        for (const auto& g : groups) {
            ClusterSpace cs;
            Complex mean(0.0, 0.0);
            for (const Complex& ev : g) mean += ev;
            cs.value = mean / static_cast<double>(g.size());
            cs.algebraic_mult = static_cast<Index>(g.size());
            cs.gen_space = generalized_kernel(m, cs.value, cs.algebraic_mult, rank_tol,
                                              &cs.eigvecs, &cs.semisimple);
            if (cs.gen_space.cols() != cs.algebraic_mult) {
                consistent = false;
                break;
            }
            total += cs.gen_space.cols();
            sp.clusters.push_back(std::move(cs));
        }
        if (consistent && total == n) return sp;
        radius *= 10.0; // clusters split too finely (or overlapped); coarsen and retry
    }
    throw DegeneracyError("analyze_spectrum: eigenvalue clustering stayed inconsistent");
}

Matrix selected_subspace(const SpectralPartition& sp,
                         const std::function<bool(const Complex&)>& select,
                         double rank_tol)
{
    std::vector<Matrix> parts;
    Index rows = 0;
    Index cols = 0;
    for (const auto& c : sp.clusters) {
        if (!select(c.value)) continue;
        parts.push_back(c.gen_space);
        rows = c.gen_space.rows();
        cols += c.gen_space.cols();
    }
    if (parts.empty()) return Matrix(sp.eigenvalues.size(), 0);
    Matrix stacked(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
        stacked.middleCols(at, p.cols()) = p;
        at += p.cols();
    }
    Matrix ortho = orthonormal_columns(stacked, rank_tol);
    if (ortho.cols() != cols)
        throw DegeneracyError("selected_subspace: generalized eigenspaces overlap numerically");
    return ortho;
}

Matrix spectral_projector(const Matrix& m, const SpectralPartition& sp,
                          const std::function<bool(const Complex&)>& select,
                          double rank_tol)
{
    const Index n = m.rows();
    Matrix sel = selected_subspace(sp, select, rank_tol);
    Matrix rest = selected_subspace(sp, [&](const Complex& v) { return !select(v); }, rank_tol);
    if (sel.cols() + rest.cols() != n)
        throw DegeneracyError("spectral_projector: subspaces do not fill the space");
    Matrix basis(n, n);
    basis.leftCols(sel.cols()) = sel;
    basis.rightCols(rest.cols()) = rest;
    Matrix target = Matrix::Zero(n, n);
    target.leftCols(sel.cols()) = sel;
    Matrix proj = basis.partialPivLu().solve(Matrix::Identity(n, n));
    proj = target * proj;
    const double scale = std::max(1.0, proj.norm());
    if ((proj * proj - proj).norm() > 1e-7 * scale * scale)
        throw DegeneracyError("spectral_projector: projector badly conditioned");
    if ((m * proj - proj * m).norm() > 1e-6 * std::max(1.0, m.norm()) * scale)
        throw DegeneracyError("spectral_projector: projector does not commute with matrix");
    return proj;
}

} // namespace qms::linalg
