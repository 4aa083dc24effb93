// model.cpp — GKSL validation and superoperator assembly
#include "qms/model.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qms {

using linalg::kron;
using linalg::unvec;
using linalg::vec;

double GkslModel::hermiticity_defect() const
{
    return (hamiltonian - hamiltonian.adjoint()).norm() / std::max(1.0, hamiltonian.norm());
}

GkslModel GkslModel::validated(const Tolerances& tol) const
{
    if (dim <= 0) throw ShapeError("GkslModel: dim must be positive");
    if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
        throw ShapeError("GkslModel: hamiltonian must be dim x dim");
    for (size_t k = 0; k < jumps.size(); ++k) {
        if (jumps[k].rows() != dim || jumps[k].cols() != dim)
            throw ShapeError("GkslModel: jump " + std::to_string(k) + " must be dim x dim");
        if (!jumps[k].allFinite())
            throw ValidationError("GkslModel: jump " + std::to_string(k) + " has non-finite entries");
    }
    if (!hamiltonian.allFinite())
        throw ValidationError("GkslModel: hamiltonian has non-finite entries");
    const double defect = (hamiltonian - hamiltonian.adjoint()).norm();
    if (defect > tol.eq * std::max(1.0, hamiltonian.norm()))
        throw ValidationError("GkslModel: hamiltonian is not Hermitian (defect " +
                              std::to_string(defect) + ")");
    GkslModel repaired = *this;
    repaired.hamiltonian = linalg::hermitize(hamiltonian);
    return repaired;
}

Matrix Superoperator::apply(const Matrix& x) const
{
    if (x.rows() != dim || x.cols() != dim) throw ShapeError("Superoperator::apply: size mismatch");
    return unvec(matrix * vec(x), dim, dim);
}

Superoperator Superoperator::identity(Index d)
{
    return Superoperator{d, Matrix::Identity(d * d, d * d)};
}

Density Density::validated(const Matrix& m, const Tolerances& tol)
{
    if (m.rows() != m.cols()) throw ShapeError("Density: square matrix required");
    const double herm_defect = (m - m.adjoint()).norm();
    if (herm_defect > tol.eq * std::max(1.0, m.norm()))
        throw ValidationError("Density: matrix is not Hermitian");
    Matrix h = linalg::hermitize(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.eigenvalues().minCoeff() < -100.0 * tol.pos)
        throw ValidationError("Density: matrix is not positive semidefinite");
    if (std::abs(h.trace().real() - 1.0) > tol.eq * 100.0 || std::abs(h.trace().imag()) > tol.eq)
        throw ValidationError("Density: trace must be 1");
    return Density{h};
}

Superoperator build_generator(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    const Matrix id = Matrix::Identity(d, d);
    const Complex i_unit(0.0, 1.0);

    // i[H, x] → i (I ⊗ H − H^T ⊗ I)
    Matrix gen = i_unit * (kron(id, model.hamiltonian) - kron(model.hamiltonian.transpose(), id));
    for (const Matrix& jump : model.jumps) {
        const Matrix ll = jump.adjoint() * jump;
        gen -= 0.5 * (kron(id, ll) + kron(ll.transpose(), id));
        gen += kron(jump.transpose(), jump.adjoint()); // L† x L
    }
    return Superoperator{d, std::move(gen)};
}

Superoperator build_predual_generator(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    const Matrix id = Matrix::Identity(d, d);
    const Complex i_unit(0.0, 1.0);

    Matrix gen = -i_unit * (kron(id, model.hamiltonian) - kron(model.hamiltonian.transpose(), id));
    for (const Matrix& jump : model.jumps) {
        const Matrix ll = jump.adjoint() * jump;
        gen -= 0.5 * (kron(id, ll) + kron(ll.transpose(), id));
        gen += kron(jump.conjugate(), jump); // L ρ L†
    }
    return Superoperator{d, std::move(gen)};
}

Superoperator semigroup_map(const Superoperator& gen, double t, bool allow_negative)
{
    if (t < 0.0 && !allow_negative)
        throw ValidationError("semigroup_map: negative time requires the group extension flag");
    return Superoperator{gen.dim, linalg::expm(t * gen.matrix)};
}

MinimalityReport validate_minimality(const GkslModel& raw, const Tolerances& tol)
{
    GkslModel model = raw.validated(tol);
    const Index d = model.dim;
    Matrix family(d * d, static_cast<Index>(model.jumps.size()) + 1);
    family.col(0) = vec(Matrix::Identity(d, d));
    for (size_t k = 0; k < model.jumps.size(); ++k)
        family.col(static_cast<Index>(k) + 1) = vec(model.jumps[k]);

    MinimalityReport report;
    report.family_size = family.cols();
    Eigen::JacobiSVD<Matrix> svd(family);
    const auto& sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol.rank * sv(0)) ++rank;
    report.rank = rank;
    report.minimal = (rank == family.cols());
    report.smallest_kept_sv = rank > 0 ? sv(rank - 1) : 0.0;
    return report;
}

} // namespace qms
