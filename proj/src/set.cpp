#include "prodsos/set.hpp"

#include <regex>

namespace prodsos {

SetDescriptor SetDescriptor::sphere_product(int m, int n) {
  if (m < 1) throw DomainError("sphere product needs at least one block");
  if (n < 2) throw DomainError("sphere blocks need dimension >= 2");
  return SetDescriptor(Kind::sphere_product, m, n);
}

SetDescriptor SetDescriptor::hypercube(int n) {
  if (n < 1) throw DomainError("hypercube dimension must be >= 1");
  return SetDescriptor(Kind::hypercube, 1, n);
}

SetDescriptor SetDescriptor::parse(const std::string& spec) {
  static const std::regex sphere(R"(sphere(\d+)x(\d+))");
  static const std::regex cube(R"(cube(\d+))");
  std::smatch match;
  try {
    if (std::regex_match(spec, match, sphere))
      return sphere_product(std::stoi(match[1]), std::stoi(match[2]));
    if (std::regex_match(spec, match, cube)) return hypercube(std::stoi(match[1]));
  } catch (const DomainError& e) {
    throw ParseError("set spec '" + spec + "': " + e.what());
  }
  throw ParseError("unsupported set spec '" + spec +
                   "' (expected sphereMxN or cubeN)");
}

std::string SetDescriptor::to_string() const {
  if (is_sphere_product())
    return "sphere" + std::to_string(m_) + "x" + std::to_string(n_);
  return "cube" + std::to_string(n_);
}

VariableLayout SetDescriptor::layout() const {
  if (!is_sphere_product()) return VariableLayout::single("x", n_);
  std::vector<VariableBlock> blocks;
  for (int i = 0; i < m_; ++i)
    blocks.push_back({"x" + std::to_string(i + 1), n_});
  return VariableLayout(std::move(blocks));
}

bool SetDescriptor::accepts(const VariableLayout& layout) const {
  if (!is_sphere_product()) return layout.total_dim() == n_;
  if (layout.block_count() != m_) return false;
  for (int i = 0; i < m_; ++i)
    if (layout.dim(i) != n_) return false;
  return true;
}

double SetDescriptor::violation(const VectorXd& x) const {
  if (x.size() != total_dim()) throw DimensionError("point has wrong length");
  double v = 0.0;
  if (is_sphere_product()) {
    for (int i = 0; i < m_; ++i)
      v = std::max(v, std::abs(x.segment(i * n_, n_).squaredNorm() - 1.0));
  } else {
    for (int i = 0; i < n_; ++i) v = std::max(v, std::abs(x(i)) - 1.0);
  }
  return std::max(v, 0.0);
}

void SetDescriptor::project(VectorXd& x) const {
  if (is_sphere_product()) {
    for (int i = 0; i < m_; ++i) {
      auto seg = x.segment(i * n_, n_);
      const double nrm = seg.norm();
      if (nrm == 0.0) {
        seg.setZero();
        seg(0) = 1.0;
      } else {
        seg /= nrm;
      }
    }
  } else {
    x = x.cwiseMax(-1.0).cwiseMin(1.0);
  }
}

void SetDescriptor::project_tangent(const VectorXd& x, VectorXd& g) const {
  if (is_sphere_product()) {
    for (int i = 0; i < m_; ++i) {
      auto gs = g.segment(i * n_, n_);
      const auto xs = x.segment(i * n_, n_);
      gs -= gs.dot(xs) * xs;
    }
  } else {
    // descent direction is -g; drop components that would leave the box
    for (int i = 0; i < n_; ++i) {
      if (x(i) >= 1.0 && g(i) < 0.0) g(i) = 0.0;
      if (x(i) <= -1.0 && g(i) > 0.0) g(i) = 0.0;
    }
  }
}

VectorXd random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

VectorXd SetDescriptor::sample(std::mt19937_64& rng) const {
  VectorXd x(total_dim());
  if (is_sphere_product()) {
    for (int i = 0; i < m_; ++i) x.segment(i * n_, n_) = random_unit_vector(n_, rng);
  } else {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int i = 0; i < n_; ++i) x(i) = uniform(rng);
  }
  return x;
}

DescentResult projected_descent(const CompiledPolynomial& f,
                                const SetDescriptor& set, VectorXd start,
                                const DescentOptions& options, double sign) {
  DescentResult out;
  VectorXd x = std::move(start);
  set.project(x);
  VectorXd grad;
  double fx = sign * f.value_and_gradient(x, grad);
  grad *= sign;
  double step = options.initial_step;
  int it = 0;
  for (; it < options.iterations; ++it) {
    set.project_tangent(x, grad);
    const double gnorm = grad.norm();
    if (gnorm < options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    VectorXd candidate;
    double fc = 0.0;
    while (step > 1e-16) {
      candidate = x - step * grad;
      set.project(candidate);
      fc = sign * f.value(candidate);
      const double decrease = grad.dot(x - candidate);
      if (fc <= fx - options.armijo * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double change = (candidate - x).norm();
    x = std::move(candidate);
    fx = sign * f.value_and_gradient(x, grad);
    grad *= sign;
    step = std::min(step * 2.0, 10.0);
    if (change < 1e-15) {
      out.converged = true;
      break;
    }
  }
  out.point = std::move(x);
  out.value = sign * fx;
  out.iterations = it;
  return out;
}

SupNormEstimate sup_norm_estimate(const RealPolynomial& p,
                                  const SetDescriptor& set, int samples,
                                  std::uint64_t seed) {
  if (samples < 1) throw DomainError("sup_norm_estimate needs samples >= 1");
  if (!set.accepts(p.layout()) && p.layout().total_dim() != set.total_dim())
    throw StructuralError("polynomial layout does not fit the set " +
                          set.to_string());
  std::mt19937_64 rng(seed);
  const CompiledPolynomial f(p);
  SupNormEstimate best;
  best.value = -1.0;
  for (int s = 0; s < samples; ++s) {
    VectorXd x = set.sample(rng);
    const double v = std::abs(f.value(x));
    if (v > best.value) {
      best.value = v;
      best.argmax = std::move(x);
    }
  }
  if (p.degree() > 0) {
    const double sign = f.value(best.argmax) >= 0.0 ? -1.0 : 1.0;
    // sign = -1 maximizes p, sign = +1 minimizes p (maximizes -p)
    DescentOptions opts;
    opts.iterations = 300;
    auto polished = projected_descent(f, set, best.argmax, opts, sign);
    if (std::abs(polished.value) > best.value) {
      best.value = std::abs(polished.value);
      best.argmax = polished.point;
    }
  }
  return best;
}

}  // namespace prodsos
