#include "prodsos/qwasserstein.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>

#include "prodsos/kernel.hpp"
#include "prodsos/set.hpp"

namespace prodsos {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-9;
constexpr double kProjectTol = 1e-8;

std::string describe(const std::vector<StateViolation>& v) {
  std::string s = "invalid quantum state:";
  char buf[96];
  for (const auto& x : v) {
    std::snprintf(buf, sizeof buf, " %s violated by %.3g;", x.invariant.c_str(), x.magnitude);
    s += buf;
  }
  s.pop_back();
  return s;
}

double unit_error(const VectorXcd& u) { return std::abs(u.norm() - 1.0); }

}  // namespace

InvalidState::InvalidState(std::vector<StateViolation> violations)
    : DomainError(describe(violations)), violations_(std::move(violations)) {}

QuantumState validate_state(const MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("a quantum state needs a nonempty square matrix");
  const int n = static_cast<int>(m.rows());
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const MatrixXcd h = 0.5 * (m + m.adjoint());
  const double trace = std::abs(m.trace() - Complex(1.0));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  const double min_eig = eig.eigenvalues().minCoeff();

  std::vector<StateViolation> bad;
  if (herm > kHermitianTol) bad.push_back({"hermitian", herm});
  if (trace > kTraceTol) bad.push_back({"trace", trace});
  if (min_eig < -kPsdTol) bad.push_back({"psd", -min_eig});

  QuantumState s;
  s.n = n;
  if (bad.empty()) {
    s.matrix = m;
    return s;
  }
  for (const auto& v : bad)
    if (v.magnitude > kProjectTol) throw InvalidState(bad);

  VectorXd w = eig.eigenvalues().cwiseMax(0.0);
  w /= w.sum();
  s.matrix = eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().adjoint();
  s.projected = true;
  s.projection_distance = (s.matrix - m).cwiseAbs().maxCoeff();
  return s;
}

QuantumState maximally_mixed(int n) {
  if (n < 1) throw DomainError("state dimension must be >= 1");
  return validate_state(MatrixXcd::Identity(n, n) / double(n));
}

QuantumState pure_state(const VectorXcd& u) {
  if (u.size() == 0 || u.norm() == 0.0) throw DomainError("pure state needs a nonzero vector");
  const VectorXcd v = u.normalized();
  return validate_state(v * v.adjoint());
}

void validate_plan(const TransportPlan& plan) {
  if (plan.atoms.empty()) throw DomainError("transport plan has no atoms");
  const auto n = plan.atoms.front().u.size();
  double total = 0.0;
  for (const auto& a : plan.atoms) {
    if (!(a.weight > 0.0)) throw DomainError("transport plan weights must be positive");
    if (a.u.size() != n || a.v.size() != n)
      throw DimensionError("transport plan vectors differ in length");
    if (unit_error(a.u) > 1e-10 || unit_error(a.v) > 1e-10)
      throw DomainError("transport plan vectors must be unit vectors");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw DomainError("transport plan weights sum to " + std::to_string(total));
}

void validate_plan(const TransportPlan& plan, const QuantumState& rho,
                   const QuantumState& nu) {
  validate_plan(plan);
  if (plan.atoms.front().u.size() != rho.n || rho.n != nu.n)
    throw DimensionError("transport plan and states differ in dimension");
  MatrixXcd mu = MatrixXcd::Zero(rho.n, rho.n);
  MatrixXcd mv = mu;
  for (const auto& a : plan.atoms) {
    mu += a.weight * a.u * a.u.adjoint();
    mv += a.weight * a.v * a.v.adjoint();
  }
  const double err = std::max((mu - rho.matrix).cwiseAbs().maxCoeff(),
                              (mv - nu.matrix).cwiseAbs().maxCoeff());
  if (err > 1e-8)
    throw DomainError("transport plan marginals miss the states by " + std::to_string(err));
}

double transport_cost(const TransportPlan& plan) {
  double cost = 0.0;
  for (const auto& a : plan.atoms) {
    // bilinear (not sesquilinear) products u^T u, v^T v, u^T v
    const Complex uu = (a.u.transpose() * a.u)(0, 0);
    const Complex vv = (a.v.transpose() * a.v)(0, 0);
    const Complex uv = (a.u.transpose() * a.v)(0, 0);
    cost += a.weight * (std::norm(uu) + std::norm(vv) - 2.0 * std::norm(uv));
  }
  return cost;
}

TransportPlan spectral_product_plan(const QuantumState& rho, const QuantumState& nu) {
  if (rho.n != nu.n) throw DimensionError("states differ in dimension");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> er(rho.matrix), en(nu.matrix);
  TransportPlan plan;
  for (int l = 0; l < rho.n; ++l)
    for (int j = 0; j < nu.n; ++j) {
      const double w = er.eigenvalues()(l) * en.eigenvalues()(j);
      if (w > 1e-15)
        plan.atoms.push_back({w, er.eigenvectors().col(l), en.eigenvectors().col(j)});
    }
  double total = 0.0;
  for (const auto& a : plan.atoms) total += a.weight;
  for (auto& a : plan.atoms) a.weight /= total;
  return plan;
}

VariableLayout qwass_layout(int n) {
  if (n < 1) throw DomainError("state dimension must be >= 1");
  return VariableLayout({{"ab", 2 * n}, {"cd", 2 * n}});
}

RealPolynomial real_objective(int n) {
  const auto layout = qwass_layout(n);
  using CP = ComplexPolynomial;
  const Complex i(0.0, 1.0);
  std::vector<CP> x, xc, y, yc;
  for (int k = 0; k < n; ++k) {
    const CP a = CP::variable(layout, "ab", k), b = CP::variable(layout, "ab", n + k);
    const CP c = CP::variable(layout, "cd", k), d = CP::variable(layout, "cd", n + k);
    x.push_back(a + i * b);
    xc.push_back(a - i * b);
    y.push_back(c + i * d);
    yc.push_back(c - i * d);
  }
  CP sxx(layout), sxxc(layout), syy(layout), syyc(layout), sxy(layout), sxyc(layout);
  for (int k = 0; k < n; ++k) {
    sxx += x[k] * x[k];
    sxxc += xc[k] * xc[k];
    syy += y[k] * y[k];
    syyc += yc[k] * yc[k];
    sxy += x[k] * y[k];
    sxyc += xc[k] * yc[k];
  }
  const CP f = sxx * sxxc + syy * syyc - Complex(2.0) * (sxy * sxyc);
  const auto im = imag_part(f);
  if (max_abs_coefficient(im) > 1e-12)
    throw InternalConsistencyError("transport cost has a nonzero imaginary part");
  return real_part(f);
}

ConicProblem build_w2_relaxation(const QuantumState& rho, const QuantumState& nu, int t) {
  if (rho.n != nu.n) throw DimensionError("states differ in dimension");
  if (t < 2) throw OrderTooSmall(t, "the transport relaxation needs t >= 2 (degree 4 cost)");
  const int n = rho.n;
  const auto layout = qwass_layout(n);
  const auto set = SetDescriptor::sphere_product(2, 2 * n);
  ConicProblem p = build_relaxation(real_objective(n), set, t);

  auto var = [&](const char* block, int k) { return RealPolynomial::variable(layout, block, k); };
  const QuantumState* states[2] = {&rho, &nu};
  const char* blocks[2] = {"ab", "cd"};
  for (int s = 0; s < 2; ++s) {
    const MatrixXcd& m = states[s]->matrix;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const auto ai = var(blocks[s], i), aj = var(blocks[s], j);
        const auto bi = var(blocks[s], n + i), bj = var(blocks[s], n + j);
        add_moment_equality(p, ai * aj + bi * bj, m(i, j).real());
        if (i != j) add_moment_equality(p, bi * aj - ai * bj, m(i, j).imag());
      }
  }
  p.validate();
  return p;
}

W2Result solve_w2(const QuantumState& rho, const QuantumState& nu, int t,
                  const ConicBackend& backend) {
  const ConicProblem problem = build_w2_relaxation(rho, nu, t);
  W2Result r;
  r.n = rho.n;
  r.t = t;
  r.relaxation = solve(problem, backend, t);
  r.status = r.relaxation.status;
  r.w2_squared_lower = r.relaxation.lower_bound;
  r.w2 = std::isfinite(r.w2_squared_lower) ? std::sqrt(std::max(0.0, r.w2_squared_lower))
                                           : std::numeric_limits<double>::quiet_NaN();
  const double kernel_t = 0.5 * t;
  r.kappa_over_t2 = kappa_bound(r.n).kappa / (kernel_t * kernel_t);
  r.certified = kernel_t >= 32.0 * r.n;
  if (r.relaxation.moments.size() > 0)
    r.mass = r.relaxation.moments(problem.moment_index(Monomial::one(4 * r.n)));
  return r;
}

KappaBound kappa_bound(int n) {
  if (n < 2) throw DomainError("kappa_bound needs n >= 2");
  KappaBound k;
  k.n = n;
  k.c_x = c_bisphere(2 * n, 4);
  k.w_l1 = 4.0 * n;
  k.kappa = 1.5 * (3.0 + 4.0 * n) * k.c_x;
  return k;
}

}  // namespace prodsos
