#pragma once

#include <string>
#include <vector>

#include "prodsos/conic.hpp"
#include "prodsos/moment.hpp"
#include "prodsos/polynomial.hpp"

namespace prodsos {

/// Density matrix: Hermitian, unit trace, PSD.
struct QuantumState {
  int n = 0;
  MatrixXcd matrix;
  /// Set when the input was within 1e-8 of the state space and got projected.
  bool projected = false;
  /// Max-norm distance between the input and the stored matrix.
  double projection_distance = 0.0;
};

struct StateViolation {
  std::string invariant;  // "hermitian", "trace" or "psd"
  double magnitude = 0.0;
};

class InvalidState : public DomainError {
 public:
  explicit InvalidState(std::vector<StateViolation> violations);
  const std::vector<StateViolation>& violations() const { return violations_; }

 private:
  std::vector<StateViolation> violations_;
};

/// Strict tolerances: ||M - M*||_max <= 1e-10, |tr M - 1| <= 1e-10,
/// min eigenvalue >= -1e-9. Inputs off by at most 1e-8 are projected back
/// (Hermitize, clip eigenvalues at zero, renormalize the trace); anything
/// worse throws InvalidState listing every violated invariant.
QuantumState validate_state(const MatrixXcd& m);

/// (1/n) I
QuantumState maximally_mixed(int n);
/// u u* for a unit vector u (normalized here).
QuantumState pure_state(const VectorXcd& u);

struct TransportAtom {
  double weight = 0.0;
  VectorXcd u;
  VectorXcd v;
};

struct TransportPlan {
  std::vector<TransportAtom> atoms;
};

/// Throws DomainError unless weights are positive and sum to one and every
/// vector is a unit vector (1e-10).
void validate_plan(const TransportPlan& plan);
/// Additionally checks both marginals against the states within 1e-8.
void validate_plan(const TransportPlan& plan, const QuantumState& rho,
                   const QuantumState& nu);

/// sum_l w_l (|u_l^T u_l|^2 + |v_l^T v_l|^2 - 2 |u_l^T v_l|^2)
double transport_cost(const TransportPlan& plan);

/// Product of spectral decompositions: atoms (w_l w'_j, u_l, v_j).
TransportPlan spectral_product_plan(const QuantumState& rho, const QuantumState& nu);

/// Variables of the real reformulation: block "ab" = (a, b), block "cd" = (c, d),
/// with x = a + i b and y = c + i d.
VariableLayout qwass_layout(int n);

/// Real part of |sum x_i^2|^2 + |sum y_i^2|^2 - 2 |sum x_i y_i|^2 under
/// x = a + i b, y = c + i d. Throws InternalConsistencyError if an imaginary
/// part survives.
RealPolynomial real_objective(int n);

/// Moment relaxation of order t on the product of the two unit spheres of
/// R^{2n}, with the marginal constraints
///   L(a a^T + b b^T) = Re rho,  L(b a^T - a b^T) = Im rho,
///   L(c c^T + d d^T) = Re nu,   L(d c^T - c d^T) = Im nu.
/// Symmetric constraints use i <= j, antisymmetric ones i < j.
ConicProblem build_w2_relaxation(const QuantumState& rho, const QuantumState& nu, int t);

struct W2Result {
  int n = 0;
  int t = 0;
  /// Raw relaxation value; may be slightly negative.
  double w2_squared_lower = 0.0;
  /// sqrt(max(0, w2_squared_lower))
  double w2 = 0.0;
  /// kappa(n) / t'^2 with kernel order t' = t / 2.
  double kappa_over_t2 = 0.0;
  SolverStatus status = SolverStatus::numerical_failure;
  /// t' >= 32 n, where the error bound is proved.
  bool certified = false;
  /// Solved y_0 (total mass of the measure).
  double mass = 0.0;
  RelaxationResult relaxation;
};

W2Result solve_w2(const QuantumState& rho, const QuantumState& nu, int t,
                  const ConicBackend& backend);

struct KappaBound {
  int n = 0;
  double kappa = 0.0;
  /// c_bisphere(2n, 4)
  double c_x = 0.0;
  double f_max = 2.0;
  double h_max = 2.0;
  /// bound on ||w_opt||_1
  double w_l1 = 0.0;
};

/// (3/2)(3 + 4n) c_bisphere(2n, 4)
KappaBound kappa_bound(int n);

}  // namespace prodsos
