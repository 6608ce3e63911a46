#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "uot/error.hpp"
#include "uot/matrix.hpp"

namespace uot {

// One unbalanced transport instance: strictly positive kernel matrix A,
// target row sums (rpd), target column sums (cpd), and the two regularization
// strengths er (entropy) / ep (marginal penalty) that set the damping
// exponent fi = er / (er + ep).
template <typename T>
struct Problem {
  Matrix<T> a;
  std::vector<double> rpd;
  std::vector<double> cpd;
  double er = 1.0;
  double ep = 1.0;

  std::size_t m() const { return a.rows(); }
  std::size_t n() const { return a.cols(); }
};

struct ScalingFactors {
  std::vector<double> alpha;  // row factors, length M
  std::vector<double> beta;   // column factors, length N
};

struct SolveReport {
  std::string solver;
  std::size_t iterations = 0;
  double final_error = 0.0;
  bool converged = false;
  double wall_ms = 0.0;
};

template <typename T>
struct SolveResult {
  Matrix<T> plan;  // rescaled matrix after the last completed iteration
  ScalingFactors factors;
  SolveReport report;
};

enum class DefectKind {
  shape,
  matrix_not_positive,
  rpd_not_positive,
  cpd_not_positive,
  bad_coefficients,
};

struct ProblemDefect {
  DefectKind kind;
  std::string message;
};

// First violated structural requirement, or nullopt for a well-formed problem.
template <typename T>
std::optional<ProblemDefect> validate_problem(const Problem<T>& p) {
  const std::size_t m = p.a.rows(), n = p.a.cols();
  if (m == 0 || n == 0)
    return ProblemDefect{DefectKind::shape, "matrix must be at least 1x1"};
  if (p.a.data().size() != m * n)
    return ProblemDefect{DefectKind::shape, "matrix storage does not match its extents"};
  if (p.rpd.size() != m)
    return ProblemDefect{DefectKind::shape,
                         "row-marginal length " + std::to_string(p.rpd.size()) +
                             " does not match row count " + std::to_string(m)};
  if (p.cpd.size() != n)
    return ProblemDefect{DefectKind::shape,
                         "column-marginal length " + std::to_string(p.cpd.size()) +
                             " does not match column count " + std::to_string(n)};
  for (std::size_t k = 0; k < p.a.data().size(); ++k) {
    const double v = double(p.a.data()[k]);
    if (!(v > 0.0) || !std::isfinite(v))
      return ProblemDefect{DefectKind::matrix_not_positive,
                           "matrix entry " + std::to_string(k) + " is not strictly positive"};
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!(p.rpd[i] > 0.0) || !std::isfinite(p.rpd[i]))
      return ProblemDefect{DefectKind::rpd_not_positive,
                           "row marginal " + std::to_string(i) + " is not strictly positive"};
  for (std::size_t j = 0; j < n; ++j)
    if (!(p.cpd[j] > 0.0) || !std::isfinite(p.cpd[j]))
      return ProblemDefect{DefectKind::cpd_not_positive,
                           "column marginal " + std::to_string(j) + " is not strictly positive"};
  if (!(p.er > 0.0) || !std::isfinite(p.er))
    return ProblemDefect{DefectKind::bad_coefficients, "er must be positive and finite"};
  if (!(p.ep >= 0.0) || !std::isfinite(p.ep))
    return ProblemDefect{DefectKind::bad_coefficients, "ep must be non-negative and finite"};
  return std::nullopt;
}

template <typename T>
void require_valid(const Problem<T>& p) {
  if (auto d = validate_problem(p)) throw InvalidParameter(d->message);
}

}  // namespace uot
