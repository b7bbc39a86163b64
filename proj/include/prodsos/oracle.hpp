#pragma once

#include <cstdint>
#include <string>

#include "prodsos/polynomial.hpp"
#include "prodsos/set.hpp"

namespace prodsos {

enum class OracleMethod { grid, multistart, svd_exact };

std::string to_string(OracleMethod method);

struct OracleBudget {
  int restarts = 64;
  int iterations = 500;
  double initial_step = 0.1;
};

struct OracleResult {
  double min_estimate = 0.0;
  VectorXd argmin;
  OracleMethod method = OracleMethod::multistart;
  int restarts = 0;
  int iterations = 0;
  int grid_resolution = 0;
  std::uint64_t seed = 0;
  /// Some restart hit the iteration cap before its gradient vanished.
  bool budget_exhausted = false;
};

/// Multistart projected gradient descent. Restart i starts from a uniform
/// sample drawn from a generator seeded by (seed, i), so enlarging the
/// budget only adds candidates. For tiny sets (at most 4 coordinates) an
/// exhaustive grid is run too and the better answer is kept.
OracleResult minimize(const RealPolynomial& q, const SetDescriptor& set,
                      const OracleBudget& budget = {}, std::uint64_t seed = 1);

/// Same as minimize applied to -q; min_estimate holds the maximum.
OracleResult maximize(const RealPolynomial& q, const SetDescriptor& set,
                      const OracleBudget& budget = {}, std::uint64_t seed = 1);

/// Exhaustive grid (angles for circles, points of [-1,1] for the box),
/// polished by projected descent from the best node.
OracleResult grid_minimize(const RealPolynomial& q, const SetDescriptor& set,
                           int resolution);

struct BilinearOptimum {
  double value = 0.0;
  VectorXd x;
  VectorXd y;
};

/// min over unit x, y of x^T A y = -sigma_max(A), attained at (-u_1, v_1).
BilinearOptimum bilinear_exact(const MatrixXd& a);

}  // namespace prodsos
