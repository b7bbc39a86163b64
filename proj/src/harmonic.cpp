#include "prodsos/harmonic.hpp"

#include <random>

#include "prodsos/gegenbauer.hpp"
#include "prodsos/set.hpp"

namespace prodsos {

RealPolynomial HarmonicDecomposition::sum(const VariableLayout& layout) const {
  RealPolynomial s(layout);
  for (const auto& [kappa, c] : components) s += c;
  return s;
}

namespace {

// Laplacian applied `times` times in `block`.
RealPolynomial iterated_laplacian(RealPolynomial p, int block, int times) {
  for (int i = 0; i < times; ++i) p = laplacian(p, block);
  return p;
}

// Delta^s (r^{2s} h) = coefficient * h for h harmonic homogeneous of degree m.
double lowering_coefficient(int s, int m, int n) {
  double c = 1.0;
  for (int u = 1; u <= s; ++u) c *= 2.0 * u * (2.0 * u + n - 2.0 + 2.0 * m);
  return c;
}

}  // namespace

HarmonicDecomposition harmonic_decompose_block(const RealPolynomial& p, int block) {
  const auto& layout = p.layout();
  if (block < 0 || block >= layout.block_count())
    throw StructuralError("unknown block");
  const int n = layout.dim(block);
  if (n < 2) throw DomainError("harmonic decomposition needs block dimension >= 2");

  const auto r2 = block_norm_squared<double>(layout, block);
  const double scale = std::max(1.0, max_abs_coefficient(p));
  const double chop_tol = 1e-12 * scale;

  HarmonicDecomposition out;
  out.blocks = {block};
  std::map<int, RealPolynomial> by_degree;

  const int top = block_degree(p, block);
  for (int j = 0; j <= top; ++j) {
    RealPolynomial remaining = block_homogeneous_part(p, block, j);
    if (remaining.is_zero()) continue;
    // peel off r^{2s} h_{j-2s} from the deepest s down; the triangular
    // structure comes from Delta^s killing every r^{2s'} h with s' < s
    for (int s = j / 2; s >= 0; --s) {
      const int m = j - 2 * s;
      RealPolynomial h =
          iterated_laplacian(remaining, block, s) *
          (1.0 / lowering_coefficient(s, m, n));
      h = chop(h, chop_tol);
      if (h.is_zero()) continue;
      remaining -= power(r2, s) * h;
      auto [it, inserted] = by_degree.try_emplace(m, h);
      if (!inserted) it->second += h;
    }
    if (max_abs_coefficient(remaining) > 1e-8 * scale)
      throw InternalConsistencyError("harmonic decomposition residual too large");
  }

  for (auto& [m, h] : by_degree) {
    h = chop(h, chop_tol);
    if (h.is_zero()) continue;
    if (max_abs_coefficient(laplacian(h, block)) > 1e-8 * scale)
      throw InternalConsistencyError("harmonic component is not harmonic");
    out.components.emplace(std::vector<int>{m}, std::move(h));
  }
  return out;
}

HarmonicDecomposition harmonic_decompose_block(const RealPolynomial& p,
                                               std::string_view block) {
  return harmonic_decompose_block(p, p.layout().block_index(block));
}

HarmonicDecomposition multigrade_decompose(const RealPolynomial& q,
                                           const VariableLayout& layout) {
  const auto& own = q.layout();
  if (own.block_count() != layout.block_count())
    throw StructuralError("layout does not match the polynomial's blocks");
  for (int b = 0; b < layout.block_count(); ++b)
    if (own.dim(b) != layout.dim(b))
      throw StructuralError("layout does not match the polynomial's blocks");

  HarmonicDecomposition out;
  out.components.emplace(std::vector<int>{}, relabel(q, layout));
  for (int b = 0; b < layout.block_count(); ++b) {
    out.blocks.push_back(b);
    std::map<std::vector<int>, RealPolynomial> next;
    for (const auto& [kappa, part] : out.components) {
      const auto split = harmonic_decompose_block(part, b);
      for (const auto& [k, c] : split.components) {
        auto key = kappa;
        key.push_back(k[0]);
        auto [it, inserted] = next.try_emplace(key, c);
        if (!inserted) it->second += c;
      }
    }
    out.components = std::move(next);
  }
  return out;
}

HarmonicDecomposition multigrade_decompose(const RealPolynomial& q) {
  return multigrade_decompose(q, q.layout());
}

double harmonic_constant_bound(int n, int d) {
  double best = 0.0;
  for (int k = 0; k <= d; ++k) best = std::max(best, gegenbauer_value_at_one(n, k));
  return std::sqrt(best);
}

HarmonicConstantReport harmonic_constant_estimate(int n, int d, int trials,
                                                  std::uint64_t seed) {
  if (n < 3) throw DomainError("harmonic constant needs n >= 3");
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (d < 0) throw DomainError("degree must be >= 0");
  HarmonicConstantReport report{n, d, trials, 0.0, harmonic_constant_bound(n, d)};
  const auto layout = VariableLayout::single("x", n);
  const auto sphere = SetDescriptor::sphere_product(1, n);
  const auto basis = monomials_up_to(n, d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kSamples = 2000;
  for (int trial = 0; trial < trials; ++trial) {
    RealPolynomial p(layout);
    for (const auto& m : basis) p.add_term(m, normal(rng));
    const std::uint64_t sub = rng();
    const double denom = sup_norm_estimate(p, sphere, kSamples, sub).value;
    if (denom <= 0.0) continue;
    const auto parts = harmonic_decompose_block(p, 0);
    for (const auto& [k, pk] : parts.components) {
      const double num = sup_norm_estimate(pk, sphere, kSamples, sub + 1).value;
      report.empirical_gamma = std::max(report.empirical_gamma, num / denom);
    }
  }
  return report;
}

}  // namespace prodsos
