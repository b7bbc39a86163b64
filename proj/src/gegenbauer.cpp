#include "prodsos/gegenbauer.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace prodsos {

namespace {

void require_dimension(int n) {
  if (n < 3)
    throw DomainError("Gegenbauer family needs n >= 3 (weight exponent degenerates)");
}

// Gegenbauer parameter of the family: weight (1-x^2)^{nu - 1/2}.
double nu_of(int n) { return 0.5 * (n - 2); }

}  // namespace

std::vector<double> gegenbauer_all(int n, int kmax, double x) {
  require_dimension(n);
  if (kmax < 0) throw DomainError("degree must be >= 0");
  const double nu = nu_of(n);
  // classical C_k^nu, then rescaled by (k + nu) / nu
  std::vector<double> c(kmax + 1);
  c[0] = 1.0;
  if (kmax >= 1) c[1] = 2.0 * nu * x;
  for (int k = 1; k < kmax; ++k)
    c[k + 1] = (2.0 * (k + nu) * x * c[k] - (k + 2.0 * nu - 1.0) * c[k - 1]) /
               (k + 1.0);
  for (int k = 0; k <= kmax; ++k) c[k] *= (k + nu) / nu;
  return c;
}

double gegenbauer_eval(int n, int k, double x) {
  return gegenbauer_all(n, k, x)[k];
}

double gegenbauer_value_at_one(int n, int k) {
  require_dimension(n);
  if (k < 0) throw DomainError("degree must be >= 0");
  return (1.0 + 2.0 * k / (n - 2.0)) * binomial(k + n - 3, k);
}

double gegenbauer_weight(int n, double x) {
  require_dimension(n);
  if (std::abs(x) > 1.0) return 0.0;
  const double a = 0.5 * (n - 3);
  const double norm =
      std::exp(std::lgamma(a + 1.5) - std::lgamma(a + 1.0)) / std::sqrt(M_PI);
  return norm * std::pow(1.0 - x * x, a);
}

double chebyshev_eval(int k, double x) {
  if (k < 0) throw DomainError("degree must be >= 0");
  if (std::abs(x) > 1.0) throw DomainError("Chebyshev argument outside [-1,1]");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

QuadratureRule gegenbauer_quadrature(int n, int nodes) {
  require_dimension(n);
  if (nodes < 1) throw DomainError("quadrature needs at least one node");
  const double nu = nu_of(n);
  MatrixXd jacobi = MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    const double beta =
        k * (k + 2.0 * nu - 1.0) / (4.0 * (k + nu) * (k + nu - 1.0));
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

namespace {

VectorXd basis_values(int n, int t, GramBasis basis, double x) {
  VectorXd b(t + 1);
  if (basis == GramBasis::monomial) {
    b(0) = 1.0;
    for (int i = 1; i <= t; ++i) b(i) = b(i - 1) * x;
  } else {
    const auto g = gegenbauer_all(n, t, x);
    for (int i = 0; i <= t; ++i) b(i) = g[i] / std::sqrt(gegenbauer_value_at_one(n, i));
  }
  return b;
}

}  // namespace

double evaluate_gram_sos(int n, const MatrixXd& gram, GramBasis basis, double x) {
  if (gram.rows() != gram.cols() || gram.rows() < 1)
    throw DimensionError("Gram matrix must be square and nonempty");
  const VectorXd b = basis_values(n, static_cast<int>(gram.rows()) - 1, basis, x);
  return b.dot(gram * b);
}

VectorXd gram_coefficients(int n, const MatrixXd& gram, GramBasis basis) {
  require_dimension(n);
  if (gram.rows() != gram.cols() || gram.rows() < 1)
    throw DimensionError("Gram matrix must be square and nonempty");
  const int t = static_cast<int>(gram.rows()) - 1;
  const int nodes = 2 * t + 2;
  const auto rule = gegenbauer_quadrature(n, nodes);
  VectorXd lambda = VectorXd::Zero(2 * t + 1);
  for (int q = 0; q < nodes; ++q) {
    const double x = rule.nodes(q);
    const double sigma = evaluate_gram_sos(n, gram, basis, x);
    const auto g = gegenbauer_all(n, 2 * t, x);
    for (int k = 0; k <= 2 * t; ++k) lambda(k) += rule.weights(q) * sigma * g[k];
  }
  for (int k = 0; k <= 2 * t; ++k) lambda(k) /= gegenbauer_value_at_one(n, k);
  return lambda;
}

double evaluate_gegenbauer_series(int n, const VectorXd& coeffs, double x) {
  if (coeffs.size() == 0) return 0.0;
  const auto g = gegenbauer_all(n, static_cast<int>(coeffs.size()) - 1, x);
  double s = 0.0;
  for (int k = 0; k < coeffs.size(); ++k) s += coeffs(k) * g[k];
  return s;
}

}  // namespace prodsos
