#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prodsos/conic.hpp"
#include "prodsos/gegenbauer.hpp"
#include "prodsos/polynomial.hpp"
#include "prodsos/set.hpp"

namespace prodsos {

/// Eigenvalues lambda_0..lambda_{2t} of a perturbed kernel operator on
/// S^{n-1}, with the univariate SOS certificate
///   sigma(x) = b(x)^T gram b(x) = sum_k lambda_k G_k(x).
struct LambdaVector {
  int n = 0;
  int d = 0;
  int t = 0;
  VectorXd values;
  MatrixXd gram;
  GramBasis basis = GramBasis::orthonormal;
  /// sum_{k=1}^d (1 - lambda_k)
  double deficit = 0.0;

  /// lambda_k, or 0 beyond the kernel degree 2t.
  double operator[](int k) const { return k < values.size() ? values(k) : 0.0; }
};

/// All eigenvalues equal to one: the plain reproducing kernel of degree 2t.
LambdaVector unit_lambda(int n, int t);

/// Minimizes sum_{k=1}^d (1 - lambda_k) over SOS sigma of degree 2t with
/// lambda_0 = 1 and 1/2 <= lambda_k <= 1 for 1 <= k <= d.
/// Throws OrderTooSmall when no such sigma exists at this t.
LambdaVector synthesize_lambda(int n, int d, int t, const ConicBackend& backend);
/// The SDP behind synthesize_lambda: variables are the upper triangle of the
/// Gram matrix in the orthonormal basis, row-major.
ConicProblem build_lambda_problem(int n, int d, int t);
LambdaVector synthesize_lambda(int n, int d, int t);

/// n^2 d^3 / t^2
double lambda_deficit_bound(int n, int d, int t);

/// sum_k lambda_k G_k(x . x2) for unit vectors x, x2 of R^n; the unit
/// kernel when `lambda` is null.
double cd_kernel_eval(int n, int t, const VectorXd& x, const VectorXd& x2,
                      const LambdaVector* lambda = nullptr);

/// Diagonal action on the multigraded harmonic decomposition:
///   sum_kappa (prod_i lambda^(i)_{kappa_i})^{+-1} q_kappa.
/// `lambdas` holds one vector per block, or a single vector for all blocks.
RealPolynomial apply_operator(const RealPolynomial& q,
                              const std::vector<LambdaVector>& lambdas, bool invert = false);

struct NormalizedPolynomial {
  RealPolynomial poly;
  double q_min = 0.0;
  double q_max = 1.0;
};

/// (q - q_min) / (q_max - q_min) with oracle estimates of the extremes.
NormalizedPolynomial normalize_unit_range(const RealPolynomial& q, const SetDescriptor& set,
                                          std::uint64_t seed = 1);

struct P3Report {
  double epsilon_empirical = 0.0;
  double epsilon_theoretical = 0.0;
  double q_min = 0.0;
  double q_max = 1.0;
  int kernel_order = 0;
  bool within_bound = true;
};

/// Sampled sup-norm of K^{-1} q - q against C_X(n,d,m) / t^2, for a product
/// of m >= 2 spheres. The plain overload assumes q already spans [0, 1].
P3Report p3_report(const NormalizedPolynomial& q, const std::vector<LambdaVector>& lambdas,
                   const SetDescriptor& set, int samples, std::uint64_t seed = 1);
P3Report p3_report(const RealPolynomial& q, const std::vector<LambdaVector>& lambdas,
                   const SetDescriptor& set, int samples, std::uint64_t seed = 1);

/// sum_{1 <= k+s <= d} (1 / (lambda_k lambda_s) - 1) and its bound
/// 8 (n^2 d^3 / t^2) C(d+2, 2).
double bernoulli_sum(const LambdaVector& lambda, int d);
double bernoulli_bound(int n, int d, int t);

// ---------------------------------------------------------------------------
// Rate constants

/// 8 n^2 d^3 C(d+2,2) gamma^2
double c_bisphere(int n, int d);
/// m 2^m n^2 d^3 C(d+m,m) gamma^m
double c_multisphere(int n, int d, int m);
/// sqrt(max_{k<=d} G_k(1))
double gamma_bound(int n, int d);

enum class PresetKind { sphere, hypercube, ball, simplex };

std::string to_string(PresetKind kind);

/// Parameters under which a set enters the product-rate combiner.
struct SetPreset {
  PresetKind kind = PresetKind::sphere;
  int n = 0;
  int d = 0;
  int m = 1;
  double threshold = 0.0;
  std::string degree_map;
  std::string eta_formula;
  std::string measure;
  /// gamma(X)_d; only the sphere has a closed-form bound.
  std::optional<double> gamma;

  bool operational() const {
    return kind == PresetKind::sphere || kind == PresetKind::hypercube;
  }
  double eta(double t) const;
  int certificate_degree(int t) const;
};

SetPreset make_preset(PresetKind kind, int n, int d);
/// Hypercube preset with a caller-supplied harmonic constant.
SetPreset make_preset(PresetKind kind, int n, int d, double gamma);

struct GeneralRate {
  double constant = 0.0;  // 8 eta(t) C(m+d,d) gamma_1 gamma_2
  double eta = 0.0;
  double threshold = 0.0;
  int m = 0;
  int certificate_degree = 0;
};

/// Combiner for X_1 x X_2. Throws ThresholdError below max(t_1, t_2) and
/// PresetNotOperational for ball/simplex or a missing gamma.
GeneralRate general_rate(const SetPreset& a, const SetPreset& b, int d, int t);

enum class RateKind { bisphere, multisphere, general };

struct RateQuery {
  RateKind kind = RateKind::bisphere;
  int n = 3;
  int d = 2;
  int m = 2;
  int t = 0;
  std::optional<SetPreset> first;
  std::optional<SetPreset> second;
};

double rate_constant(const RateQuery& query);

}  // namespace prodsos
