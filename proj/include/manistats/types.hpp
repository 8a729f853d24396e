#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace manistats {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Width of the numerical band around the cut locus. Callers needing a
// tighter or looser resolution pass an override to the individual ops.
inline constexpr double kEpsCut = 1e-9;

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class KindMismatch : public Error {
public:
  using Error::Error;
};

// Raised when a log/transport target lies in the cut-locus band. Where the
// manifold has exactly two minimal geodesics, both candidate tangent vectors
// are attached (components in the frame at the base point).
class CutLocusError : public Error {
public:
  explicit CutLocusError(const std::string& msg, std::vector<Vec> branches = {})
      : Error(msg), branch_vectors(std::move(branches)) {}
  std::vector<Vec> branch_vectors;
};

class InvalidDirection : public Error {
public:
  using Error::Error;
};

class InvalidStep : public Error {
public:
  using Error::Error;
};

class EmptyData : public Error {
public:
  using Error::Error;
};

// Sample points sitting in the cut-locus band of the evaluation point.
class CutLocusData : public Error {
public:
  CutLocusData(const std::string& msg, std::vector<std::size_t> idx)
      : Error(msg), indices(std::move(idx)) {}
  std::vector<std::size_t> indices;
};

class SolverFailure : public Error {
public:
  using Error::Error;
};

class NumericalInconsistency : public Error {
public:
  using Error::Error;
};

// Psi not strictly positive definite (smeary regime); eigenvalues attached.
class DegenerateHessian : public Error {
public:
  DegenerateHessian(const std::string& msg, Vec eigs)
      : Error(msg), eigenvalues(std::move(eigs)) {}
  Vec eigenvalues;
};

class InvalidConfiguration : public Error {
public:
  using Error::Error;
};

class VersionError : public Error {
public:
  using Error::Error;
};

class ExperimentInvalid : public Error {
public:
  using Error::Error;
};

}  // namespace manistats
