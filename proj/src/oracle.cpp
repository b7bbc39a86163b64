#include "prodsos/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SVD>

namespace prodsos {

std::string to_string(OracleMethod method) {
  switch (method) {
    case OracleMethod::grid:
      return "grid";
    case OracleMethod::multistart:
      return "multistart";
    case OracleMethod::svd_exact:
      return "svd_exact";
  }
  return "unknown";
}

namespace {

void require_fit(const RealPolynomial& q, const SetDescriptor& set) {
  if (q.layout().total_dim() != set.total_dim())
    throw StructuralError("polynomial has " + std::to_string(q.layout().total_dim()) +
                          " variables but the set " + set.to_string() + " needs " +
                          std::to_string(set.total_dim()));
}

// Number of grid parameters: angles for spheres, coordinates for the box.
int grid_parameters(const SetDescriptor& set) {
  if (!set.is_sphere_product()) return set.total_dim();
  return set.block_count() * (set.block_dim() - 1);
}

// Point of the set for grid coordinates u in [0,1]^params.
VectorXd grid_point(const SetDescriptor& set, const std::vector<double>& u) {
  VectorXd x(set.total_dim());
  if (!set.is_sphere_product()) {
    for (int i = 0; i < set.total_dim(); ++i) x(i) = -1.0 + 2.0 * u[i];
    return x;
  }
  const int n = set.block_dim();
  int k = 0;
  for (int b = 0; b < set.block_count(); ++b) {
    // hyperspherical coordinates: n-2 polar angles in [0, pi], one azimuth
    double s = 1.0;
    for (int i = 0; i < n - 2; ++i) {
      const double angle = M_PI * u[k++];
      x(b * n + i) = s * std::cos(angle);
      s *= std::sin(angle);
    }
    const double phi = 2.0 * M_PI * u[k++];
    x(b * n + n - 2) = s * std::cos(phi);
    x(b * n + n - 1) = s * std::sin(phi);
  }
  return x;
}

OracleResult finalize(const RealPolynomial& q, const SetDescriptor& set, VectorXd x,
                      OracleResult r) {
  set.project(x);
  r.argmin = std::move(x);
  r.min_estimate = evaluate(q, r.argmin);
  return r;
}

}  // namespace

OracleResult grid_minimize(const RealPolynomial& q, const SetDescriptor& set,
                           int resolution) {
  require_fit(q, set);
  const int params = grid_parameters(set);
  if (resolution < 2) throw DomainError("grid resolution must be >= 2");
  if (params > 4 || std::pow(resolution, params) > 5e6)
    throw DomainError("grid too large for set " + set.to_string());
  const CompiledPolynomial f(q);
  std::vector<int> idx(params, 0);
  std::vector<double> u(params);
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_x;
  while (true) {
    for (int i = 0; i < params; ++i) u[i] = idx[i] / double(resolution - 1);
    VectorXd x = grid_point(set, u);
    const double v = f.value(x);
    if (v < best) {
      best = v;
      best_x = std::move(x);
    }
    int i = 0;
    while (i < params && ++idx[i] == resolution) idx[i++] = 0;
    if (i == params) break;
  }
  auto polished = projected_descent(f, set, best_x);
  OracleResult r;
  r.method = OracleMethod::grid;
  r.grid_resolution = resolution;
  r.iterations = polished.iterations;
  return finalize(q, set, polished.value <= best ? polished.point : best_x, r);
}

OracleResult minimize(const RealPolynomial& q, const SetDescriptor& set,
                      const OracleBudget& budget, std::uint64_t seed) {
  require_fit(q, set);
  if (budget.restarts < 1 || budget.iterations < 0)
    throw DomainError("oracle budget must have at least one restart");
  const CompiledPolynomial f(q);
  DescentOptions opts;
  opts.iterations = budget.iterations;
  opts.initial_step = budget.initial_step;

  OracleResult r;
  r.method = OracleMethod::multistart;
  r.restarts = budget.restarts;
  r.seed = seed;
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_x;
  for (int i = 0; i < budget.restarts; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    auto d = projected_descent(f, set, set.sample(rng), opts);
    r.iterations += d.iterations;
    if (!d.converged && d.iterations >= budget.iterations) r.budget_exhausted = true;
    if (d.value < best) {
      best = d.value;
      best_x = std::move(d.point);
    }
  }

  if (grid_parameters(set) <= 2) {
    const int resolution = grid_parameters(set) == 1 ? 721 : 181;
    auto g = grid_minimize(q, set, resolution);
    if (g.min_estimate < best) {
      g.seed = seed;
      g.restarts = budget.restarts;
      return g;
    }
  }
  return finalize(q, set, best_x, r);
}

OracleResult maximize(const RealPolynomial& q, const SetDescriptor& set,
                      const OracleBudget& budget, std::uint64_t seed) {
  auto r = minimize(-q, set, budget, seed);
  r.min_estimate = evaluate(q, r.argmin);
  return r;
}

BilinearOptimum bilinear_exact(const MatrixXd& a) {
  if (a.size() == 0) throw DimensionError("bilinear_exact needs a nonempty matrix");
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  BilinearOptimum out;
  out.value = -svd.singularValues()(0);
  out.x = -svd.matrixU().col(0);
  out.y = svd.matrixV().col(0);
  return out;
}

}  // namespace prodsos
