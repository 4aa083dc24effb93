// types.hpp — Shared scalar/matrix aliases, tolerance knobs and error taxonomy
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qms {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Two primary knobs (rank decisions, equality assertions) plus the spectral
// classification threshold and the positivity cutoff for faithfulness tests.
// `rank` and `spec` are relative (scaled by the largest singular value /
// generator norm); `eq` and `pos` are used against normalized quantities.
struct Tolerances {
    double rank = 1e-9;
    double eq = 1e-8;
    double spec = 1e-9;
    double pos = 1e-10;
};

// Bad user input (shapes are fine but content violates a model invariant).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Dimension mismatches.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// A randomized or threshold-based decision stayed ambiguous after retries.
class DegeneracyError : public std::runtime_error {
public:
    explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Input does not have the structure an operation requires (e.g. a non-factor
// block, or operators that fail to fit the block pattern of an algebra).
class StructureError : public std::runtime_error {
public:
    explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qms
