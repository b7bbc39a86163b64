#include "prodsos/kernel.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "prodsos/harmonic.hpp"
#include "prodsos/oracle.hpp"

namespace prodsos {

LambdaVector unit_lambda(int n, int t) {
  if (t < 0) throw DomainError("kernel order must be >= 0");
  LambdaVector l;
  l.n = n;
  l.d = 2 * t;
  l.t = t;
  l.values = VectorXd::Ones(2 * t + 1);
  return l;
}

double lambda_deficit_bound(int n, int d, int t) {
  return double(n) * n * d * d * d / (double(t) * t);
}

namespace {

// a(k)(i, j) = ∫ b_i b_j G_k w / G_k(1) for the orthonormal basis b.
std::vector<MatrixXd> eigenvalue_maps(int n, int t) {
  const int nodes = 2 * t + 2;
  const auto rule = gegenbauer_quadrature(n, nodes);
  std::vector<MatrixXd> a(2 * t + 1, MatrixXd::Zero(t + 1, t + 1));
  for (int q = 0; q < nodes; ++q) {
    const auto g = gegenbauer_all(n, 2 * t, rule.nodes(q));
    VectorXd b(t + 1);
    for (int i = 0; i <= t; ++i) b(i) = g[i] / std::sqrt(gegenbauer_value_at_one(n, i));
    const MatrixXd bb = b * b.transpose();
    for (int k = 0; k <= 2 * t; ++k)
      a[k] += (rule.weights(q) * g[k] / gegenbauer_value_at_one(n, k)) * bb;
  }
  return a;
}

}  // namespace

namespace {

// upper triangle of the (t+1)x(t+1) Gram matrix, row-major
std::vector<std::pair<int, int>> gram_pairs(int side) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < side; ++i)
    for (int j = i; j < side; ++j) pairs.emplace_back(i, j);
  return pairs;
}

void check_lambda_args(int n, int d, int t) {
  if (n < 3) throw DomainError("synthesize_lambda needs n >= 3");
  if (t < 0) throw DomainError("kernel order must be >= 0");
  if (d < 0 || d > 2 * t)
    throw OrderTooSmall(t, "degree " + std::to_string(d) + " exceeds kernel degree 2t = " +
                               std::to_string(2 * t));
}

}  // namespace

ConicProblem build_lambda_problem(int n, int d, int t) {
  check_lambda_args(n, d, t);
  const int side = t + 1;
  const auto a = eigenvalue_maps(n, t);
  // variables: upper triangle of Q, row-major
  const auto pairs = gram_pairs(side);
  const int nv = static_cast<int>(pairs.size());
  auto lambda_row = [&](int k) {
    VectorXd r(nv);
    for (int v = 0; v < nv; ++v) {
      const auto [i, j] = pairs[v];
      r(v) = (i == j ? 1.0 : 2.0) * a[k](i, j);
    }
    return r;
  };

  ConicProblem p;
  p.num_vars = nv;
  p.objective = VectorXd::Zero(nv);
  p.objective_offset = d;
  for (int k = 1; k <= d; ++k) p.objective -= lambda_row(k);

  const VectorXd r0 = lambda_row(0);
  std::vector<Eigen::Triplet<double>> trips;
  for (int v = 0; v < nv; ++v)
    if (std::abs(r0(v)) > 1e-15) trips.emplace_back(0, v, r0(v));
  p.equalities.resize(1, nv);
  p.equalities.setFromTriplets(trips.begin(), trips.end());
  p.equality_rhs = VectorXd::Ones(1);

  LmiBlock gram{side, "gram", {}};
  for (int v = 0; v < nv; ++v) gram.entries.push_back({v, pairs[v].first, pairs[v].second, 1.0});
  p.blocks.push_back(std::move(gram));
  for (int k = 1; k <= d; ++k) {
    const VectorXd rk = lambda_row(k);
    LmiBlock lower{1, "lambda_" + std::to_string(k) + ">=1/2", {}};
    LmiBlock upper{1, "lambda_" + std::to_string(k) + "<=1", {}};
    lower.entries.push_back({LmiEntry::kConstant, 0, 0, -0.5});
    upper.entries.push_back({LmiEntry::kConstant, 0, 0, 1.0});
    for (int v = 0; v < nv; ++v) {
      if (std::abs(rk(v)) <= 1e-15) continue;
      lower.entries.push_back({v, 0, 0, rk(v)});
      upper.entries.push_back({v, 0, 0, -rk(v)});
    }
    p.blocks.push_back(std::move(lower));
    p.blocks.push_back(std::move(upper));
  }

  return p;
}

LambdaVector synthesize_lambda(int n, int d, int t, const ConicBackend& backend) {
  check_lambda_args(n, d, t);

  LambdaVector out;
  out.n = n;
  out.d = d;
  out.t = t;
  if (d == 0) {
    out.gram = MatrixXd::Zero(t + 1, t + 1);
    out.gram(0, 0) = 1.0;
    out.values = gram_coefficients(n, out.gram, GramBasis::orthonormal);
    out.deficit = 0.0;
    return out;
  }

  const int side = t + 1;
  const auto pairs = gram_pairs(side);
  const ConicProblem p = build_lambda_problem(n, d, t);
  const int nv = p.num_vars;
  const auto sol = backend.solve(p);
  if (sol.status == SolverStatus::infeasible)
    throw OrderTooSmall(t, "no SOS of degree " + std::to_string(2 * t) +
                               " has 1/2 <= lambda_k <= 1 for k <= " + std::to_string(d) +
                               " (n = " + std::to_string(n) + "); increase t");
  if (sol.status != SolverStatus::optimal && sol.status != SolverStatus::near_optimal)
    throw Error("lambda synthesis failed: " + to_string(sol.status) + " (" + sol.message + ")");

  out.gram = MatrixXd::Zero(side, side);
  for (int v = 0; v < nv; ++v) {
    const auto [i, j] = pairs[v];
    out.gram(i, j) = out.gram(j, i) = sol.y(v);
  }
  out.values = gram_coefficients(n, out.gram, GramBasis::orthonormal);
  out.deficit = 0.0;
  for (int k = 1; k <= d; ++k) out.deficit += 1.0 - out.values(k);
  return out;
}

LambdaVector synthesize_lambda(int n, int d, int t) {
  return synthesize_lambda(n, d, t, InteriorPointBackend{});
}

double cd_kernel_eval(int n, int t, const VectorXd& x, const VectorXd& x2,
                      const LambdaVector* lambda) {
  if (x.size() != n || x2.size() != n)
    throw DimensionError("kernel arguments must lie in R^" + std::to_string(n));
  if (std::abs(x.norm() - 1.0) > 1e-9 || std::abs(x2.norm() - 1.0) > 1e-9)
    throw DimensionError("kernel arguments must be unit vectors");
  if (t < 0) throw DomainError("kernel order must be >= 0");
  const double c = std::clamp(x.dot(x2), -1.0, 1.0);
  const auto g = gegenbauer_all(n, 2 * t, c);
  double s = 0.0;
  for (int k = 0; k <= 2 * t; ++k) s += (lambda ? (*lambda)[k] : 1.0) * g[k];
  return s;
}

RealPolynomial apply_operator(const RealPolynomial& q,
                              const std::vector<LambdaVector>& lambdas, bool invert) {
  const int blocks = q.layout().block_count();
  if (lambdas.empty() || (lambdas.size() != 1 && static_cast<int>(lambdas.size()) != blocks))
    throw StructuralError("need one eigenvalue vector per block, or a single shared one");
  const auto parts = multigrade_decompose(q);
  RealPolynomial out(q.layout());
  for (const auto& [kappa, component] : parts.components) {
    double factor = 1.0;
    for (int i = 0; i < blocks; ++i) factor *= lambdas[lambdas.size() == 1 ? 0 : i][kappa[i]];
    if (invert) {
      if (factor == 0.0)
        throw DomainError("operator is singular on a harmonic component; raise the kernel order");
      factor = 1.0 / factor;
    }
    out += component * factor;
  }
  return out;
}

NormalizedPolynomial normalize_unit_range(const RealPolynomial& q, const SetDescriptor& set,
                                          std::uint64_t seed) {
  NormalizedPolynomial out;
  out.q_min = minimize(q, set, {}, seed).min_estimate;
  out.q_max = maximize(q, set, {}, seed).min_estimate;
  const double range = out.q_max - out.q_min;
  if (!(range > 1e-12)) throw DomainError("polynomial is constant on the set");
  out.poly = (q - RealPolynomial::constant(q.layout(), out.q_min)) * (1.0 / range);
  return out;
}

P3Report p3_report(const NormalizedPolynomial& q, const std::vector<LambdaVector>& lambdas,
                   const SetDescriptor& set, int samples, std::uint64_t seed) {
  if (!set.is_sphere_product()) throw DomainError("P3 report needs a sphere product");
  P3Report r;
  r.q_min = q.q_min;
  r.q_max = q.q_max;
  r.kernel_order = lambdas.front().t;
  const RealPolynomial diff = apply_operator(q.poly, lambdas, true) - q.poly;
  r.epsilon_empirical = diff.is_zero() ? 0.0 : sup_norm_estimate(diff, set, samples, seed).value;
  const int m = set.block_count();
  const int d = q.poly.degree();
  if (m >= 2 && d >= 1 && r.kernel_order > 0) {
    const double t = r.kernel_order;
    r.epsilon_theoretical = c_multisphere(set.block_dim(), d, m) / (t * t);
    r.within_bound = r.epsilon_empirical <= r.epsilon_theoretical;
  } else {
    r.epsilon_theoretical = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

P3Report p3_report(const RealPolynomial& q, const std::vector<LambdaVector>& lambdas,
                   const SetDescriptor& set, int samples, std::uint64_t seed) {
  return p3_report(NormalizedPolynomial{q, 0.0, 1.0}, lambdas, set, samples, seed);
}

double bernoulli_sum(const LambdaVector& lambda, int d) {
  double s = 0.0;
  for (int k = 0; k <= d; ++k)
    for (int j = 0; k + j <= d; ++j) {
      if (k + j == 0) continue;
      s += 1.0 / (lambda[k] * lambda[j]) - 1.0;
    }
  return s;
}

double bernoulli_bound(int n, int d, int t) {
  return 8.0 * lambda_deficit_bound(n, d, t) * binomial(d + 2, 2);
}

// ---------------------------------------------------------------------------

double gamma_bound(int n, int d) { return harmonic_constant_bound(n, d); }

namespace {

// gamma^2 kept exact: max_k G_k(1) is an integer
double gamma_squared(int n, int d) {
  double g = 0.0;
  for (int k = 0; k <= d; ++k) g = std::max(g, gegenbauer_value_at_one(n, k));
  return g;
}

}  // namespace

double c_bisphere(int n, int d) {
  if (n < 3 || d < 0) throw DomainError("c_bisphere needs n >= 3 and d >= 0");
  return 8.0 * n * n * std::pow(d, 3) * binomial(d + 2, 2) * gamma_squared(n, d);
}

double c_multisphere(int n, int d, int m) {
  if (n < 3 || d < 0 || m < 1)
    throw DomainError("c_multisphere needs n >= 3, d >= 0 and m >= 1");
  return m * std::pow(2.0, m) * n * n * std::pow(d, 3) * binomial(d + m, m) *
         std::pow(gamma_squared(n, d), 0.5 * m);
}

std::string to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::sphere:
      return "sphere";
    case PresetKind::hypercube:
      return "hypercube";
    case PresetKind::ball:
      return "ball";
    case PresetKind::simplex:
      return "simplex";
  }
  return "unknown";
}

double SetPreset::eta(double t) const {
  if (kind == PresetKind::hypercube) return n * M_PI * M_PI * d * d / (t * t);
  return double(n) * n * d * d * d / (t * t);
}

int SetPreset::certificate_degree(int t) const {
  return kind == PresetKind::hypercube ? n * (t + 1) : 2 * t;
}

SetPreset make_preset(PresetKind kind, int n, int d) {
  if (n < 1 || d < 0) throw DomainError("preset needs n >= 1 and d >= 0");
  SetPreset p;
  p.kind = kind;
  p.n = n;
  p.d = d;
  switch (kind) {
    case PresetKind::sphere:
      p.m = 1;
      p.threshold = 2.0 * n * d * std::sqrt(double(d));
      p.degree_map = "2t";
      p.eta_formula = "n^2 d^3 / t^2";
      p.measure = "uniform Haar measure on S^{n-1}";
      if (n >= 3) p.gamma = gamma_bound(n, d);
      break;
    case PresetKind::ball:
      p.m = 1;
      p.threshold = 2.0 * n * d * std::sqrt(double(d));
      p.degree_map = "2t";
      p.eta_formula = "n^2 d^3 / t^2";
      p.measure = "c_n (1 - |x|^2)^{-1/2} on the unit ball";
      break;
    case PresetKind::simplex:
      p.m = 1;
      p.threshold = 2.0 * n * d * std::sqrt(double(d));
      p.degree_map = "2t";
      p.eta_formula = "n^2 d^3 / t^2";
      p.measure = "c_n x_1^{-1/2} .. x_n^{-1/2} (1 - sum x_i)^{-1/2} on the simplex";
      break;
    case PresetKind::hypercube:
      p.m = n;
      p.threshold = M_PI * d * std::sqrt(2.0 * n);
      p.degree_map = "n(t+1)";
      p.eta_formula = "n pi^2 d^2 / t^2";
      p.measure = "normalized Chebyshev measure prod 1/(pi sqrt(1 - x_j^2))";
      break;
  }
  return p;
}

SetPreset make_preset(PresetKind kind, int n, int d, double gamma) {
  auto p = make_preset(kind, n, d);
  if (!(gamma >= 1.0)) throw DomainError("harmonic constant must be >= 1");
  p.gamma = gamma;
  return p;
}

GeneralRate general_rate(const SetPreset& a, const SetPreset& b, int d, int t) {
  for (const auto* p : {&a, &b}) {
    if (!p->operational())
      throw PresetNotOperational(to_string(p->kind) +
                                 " preset is stored as data only; preset not operational");
    if (!p->gamma)
      throw PresetNotOperational(to_string(p->kind) +
                                 " preset needs a caller-supplied harmonic constant");
  }
  GeneralRate r;
  r.threshold = std::max(a.threshold, b.threshold);
  if (t < r.threshold)
    throw ThresholdError("order " + std::to_string(t) + " is below the preset threshold " +
                         std::to_string(r.threshold));
  r.m = a.m + b.m;
  r.eta = std::max(a.eta(t), b.eta(t));
  r.constant = 8.0 * r.eta * binomial(r.m + d, d) * (*a.gamma) * (*b.gamma);
  r.certificate_degree = a.certificate_degree(t) + b.certificate_degree(t);
  return r;
}

double rate_constant(const RateQuery& query) {
  switch (query.kind) {
    case RateKind::bisphere:
      return c_bisphere(query.n, query.d);
    case RateKind::multisphere:
      return c_multisphere(query.n, query.d, query.m);
    case RateKind::general: {
      if (!query.first || !query.second)
        throw DomainError("general rate needs two presets");
      return general_rate(*query.first, *query.second, query.d, query.t).constant;
    }
  }
  throw DomainError("unknown rate kind");
}

}  // namespace prodsos
