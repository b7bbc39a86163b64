#pragma once

#include <cstdint>
#include <vector>

#include "prodsos/conic.hpp"
#include "prodsos/polynomial.hpp"
#include "prodsos/set.hpp"

namespace prodsos {

/// Largest admissible moment-matrix side.
inline constexpr int kMaxMomentMatrixSide = 2000;
/// Largest hypercube dimension (the preordering has 2^n products).
inline constexpr int kMaxHypercubeDim = 8;

/// Schmuedgen-type moment relaxation of order t (truncation degree 2t):
///
///   minimize L(q) over y = (y_alpha)_{|alpha| <= 2t}
///   subject to y_0 = 1, M_t(y) PSD,
///              L((1 - |x_i|^2) x^alpha) = 0 for every sphere block and |alpha| <= 2t-2,
///              M_{t-|J|}(g_J y) PSD for every box product g_J = prod_{j in J}(1 - x_j^2).
///
/// Throws OrderTooSmall when deg q > 2t, DomainError for oversized problems.
ConicProblem build_relaxation(const RealPolynomial& q, const SetDescriptor& set, int t);

/// Appends the linear moment constraint L(p) = rhs.
void add_moment_equality(ConicProblem& problem, const RealPolynomial& p, double rhs);

/// L(p) for the moment vector y of `problem`.
double apply_functional(const ConicProblem& problem, const VectorXd& y,
                        const RealPolynomial& p);

struct RelaxationResult {
  double lower_bound = 0.0;
  VectorXd moments;
  SolverStatus status = SolverStatus::numerical_failure;
  int order = 0;
  /// Degree 2t of the moment truncation.
  int truncation_degree = 0;
  /// Degree of the preordering representation q - lb = sum sigma_J g_J.
  int certificate_degree = 0;
  ConicSolution solution;
};

/// The lower bound is the SOS-side objective, corrected for any residual dual
/// infeasibility, when the backend can certify it; otherwise the moment-side
/// value, tagged near_optimal.
RelaxationResult solve(const ConicProblem& problem, const ConicBackend& backend, int order);

RelaxationResult minimize_relaxation(const RealPolynomial& q, const SetDescriptor& set,
                                     int t, const ConicBackend& backend);

struct SweepOptions {
  std::uint64_t seed = 1;
  int oracle_restarts = 64;
  int oracle_iterations = 500;
  bool parallel = true;
};

struct SweepRow {
  int t = 0;
  double lower_bound = 0.0;
  double oracle_min = 0.0;
  double gap = 0.0;
  /// C / t'^2 (q_max - q_min) with kernel order t' = t / m; NaN where no
  /// explicit constant is available (single sphere, hypercube).
  double theory_bound = 0.0;
  int certificate_degree = 0;
  SolverStatus status = SolverStatus::numerical_failure;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double oracle_min = 0.0;
  double oracle_max = 0.0;
  int degree = 0;
  double rate_constant = 0.0;
};

/// Solves the relaxation at each order of `t_list` (ascending).
SweepTable hierarchy_sweep(const RealPolynomial& q, const SetDescriptor& set,
                           const std::vector<int>& t_list, const ConicBackend& backend,
                           const SweepOptions& options = {});

/// CSV with header t,lower_bound,oracle_min,gap,theory_bound (%.12g).
std::string sweep_csv(const SweepTable& table);

}  // namespace prodsos
