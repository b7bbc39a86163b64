#pragma once

#include <random>
#include <string>

#include "prodsos/polynomial.hpp"

namespace prodsos {

/// Either a product of m unit spheres S^{n-1} (blocks of dimension n) or the
/// box [-1,1]^n.
class SetDescriptor {
 public:
  enum class Kind { sphere_product, hypercube };

  static SetDescriptor sphere_product(int m, int n);
  static SetDescriptor hypercube(int n);
  /// "sphereMxN" or "cubeN".
  static SetDescriptor parse(const std::string& spec);

  Kind kind() const { return kind_; }
  bool is_sphere_product() const { return kind_ == Kind::sphere_product; }
  int block_count() const { return m_; }
  int block_dim() const { return n_; }
  int total_dim() const { return m_ * n_; }
  std::string to_string() const;

  /// Canonical layout: blocks x1..xm for spheres, a single block x for the box.
  VariableLayout layout() const;
  /// True when `layout` has the block dimensions this set expects.
  bool accepts(const VariableLayout& layout) const;

  /// Largest constraint violation of x (0 on the set).
  double violation(const VectorXd& x) const;
  void project(VectorXd& x) const;
  /// Removes the normal components (spheres) or the components pushing out
  /// of an active box face.
  void project_tangent(const VectorXd& x, VectorXd& g) const;
  /// Uniform (Haar for spheres) sample.
  VectorXd sample(std::mt19937_64& rng) const;

  bool operator==(const SetDescriptor&) const = default;

 private:
  SetDescriptor(Kind kind, int m, int n) : kind_(kind), m_(m), n_(n) {}
  Kind kind_ = Kind::sphere_product;
  int m_ = 1;
  int n_ = 2;
};

struct DescentOptions {
  int iterations = 500;
  double initial_step = 0.1;
  double armijo = 1e-4;
  double gradient_tolerance = 1e-13;
};

struct DescentResult {
  VectorXd point;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with Armijo backtracking on `set`, starting
/// from a point of the set. `sign` = -1 maximizes instead.
DescentResult projected_descent(const CompiledPolynomial& f,
                                const SetDescriptor& set, VectorXd start,
                                const DescentOptions& options = {},
                                double sign = 1.0);

struct SupNormEstimate {
  double value = 0.0;
  VectorXd argmax;
};

/// Lower estimate of max |p| over the set: best of `samples` uniform draws,
/// polished by projected ascent. Deterministic for a given seed.
SupNormEstimate sup_norm_estimate(const RealPolynomial& p,
                                  const SetDescriptor& set, int samples,
                                  std::uint64_t seed);

/// Uniform random point on the unit sphere of R^n.
VectorXd random_unit_vector(int n, std::mt19937_64& rng);

}  // namespace prodsos
