#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "prodsos/polynomial.hpp"

namespace prodsos {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// One coefficient of a linear matrix inequality block,
///   F(y) = F_0 + sum_i y_i F_i  (symmetric).
/// `var == kConstant` marks F_0. Only the upper triangle (row <= col) is stored.
struct LmiEntry {
  static constexpr int kConstant = -1;
  int var = kConstant;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct LmiBlock {
  int size = 0;
  std::string label;
  std::vector<LmiEntry> entries;
};

/// Standard form handled by every backend:
///
///   minimize    c^T y + offset
///   subject to  A y = b,
///               F_j(y) PSD for every block j.
///
/// For moment relaxations y are moments indexed by `moments` (graded-lex).
struct ConicProblem {
  int num_vars = 0;
  VectorXd objective;
  double objective_offset = 0.0;
  SparseRowMatrix equalities;
  VectorXd equality_rhs;
  std::vector<LmiBlock> blocks;

  /// |y_i| <= variable_bound for every feasible y, when known (moments of a
  /// probability measure on a subset of [-1,1]^n are bounded by 1).
  double variable_bound = std::numeric_limits<double>::infinity();

  std::optional<VariableLayout> layout;
  std::vector<Monomial> moments;

  /// Throws StructuralError on inconsistent sizes or out-of-range entries.
  void validate() const;
  /// F_j(y) as a dense symmetric matrix.
  MatrixXd block_value(int block, const VectorXd& y) const;
  int moment_index(const Monomial& m) const;
};

/// near_optimal: stopped early, but the best iterate has relative residuals
/// and gap below 1e-5.
enum class SolverStatus { optimal, near_optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolverStatus status);

struct SolverTolerances {
  double feasibility = 1e-8;
  double gap = 1e-8;
  int max_iterations = 200;
};

/// Result of a solve. "Primal" is the moment side (the problem as stated);
/// "dual" is the SOS side whose multipliers are the PSD matrices X_j.
struct ConicSolution {
  SolverStatus status = SolverStatus::numerical_failure;
  VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// dual_objective minus variable_bound times the l1 dual residual: a lower
  /// bound on the optimum that survives an inexact dual. NaN when unknown.
  double safe_lower_bound = std::numeric_limits<double>::quiet_NaN();
  /// Either the dual residual is within tolerance or safe_lower_bound is finite.
  bool dual_certified = false;
  std::vector<MatrixXd> dual_blocks;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  std::string message;
};

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  /// Whether independent solves may run concurrently on one instance.
  virtual bool concurrent_sessions() const = 0;
  virtual const SolverTolerances& tolerances() const = 0;
  virtual ConicSolution solve(const ConicProblem& problem) const = 0;
};

/// Infeasible primal-dual path-following method (HKM search direction,
/// Mehrotra predictor-corrector) applied after eliminating A y = b.
class InteriorPointBackend final : public ConicBackend {
 public:
  explicit InteriorPointBackend(SolverTolerances tolerances = {})
      : tolerances_(tolerances) {}
  std::string name() const override { return "ipm-hkm"; }
  bool concurrent_sessions() const override { return true; }
  const SolverTolerances& tolerances() const override { return tolerances_; }
  ConicSolution solve(const ConicProblem& problem) const override;

 private:
  SolverTolerances tolerances_;
};

/// Backend by name ("ipm" or "ipm-hkm"); throws ParseError otherwise.
std::unique_ptr<ConicBackend> make_backend(const std::string& spec,
                                           SolverTolerances tolerances = {});

/// y = particular + basis * z parametrizes the solution set of A y = b.
struct AffineParametrization {
  VectorXd particular;
  SparseMatrix basis;
  std::vector<int> free_vars;
  bool consistent = true;
  double inconsistency = 0.0;
  int redundant_rows = 0;
};

/// Sparse Gauss-Jordan elimination with threshold pivoting. Redundant rows
/// are dropped; an inconsistent system is flagged rather than thrown.
AffineParametrization eliminate_equalities(const SparseRowMatrix& a,
                                           const VectorXd& b, int num_vars);

/// Plain-text sparse triplet serialization of a ConicProblem:
///
///   PRODSOS-CONIC 1
///   VARS <n>
///   OFFSET <c0>
///   BOUND <b>          bound on |y_i| ("inf" when unknown)
///   OBJ <nnz>          followed by nnz lines "<var> <value>"
///   EQ <rows> <nnz>    followed by nnz lines "<row> <var> <value>"
///   RHS <rows>         followed by rows lines "<value>"
///   BLOCKS <count>
///   BLOCK <size> <nnz> followed by nnz lines "<var> <row> <col> <value>"
///   END
///
/// var -1 denotes the constant matrix; rows/cols are 0-based, row <= col.
void write_problem(std::ostream& out, const ConicProblem& problem);
ConicProblem read_problem(std::istream& in);

}  // namespace prodsos
