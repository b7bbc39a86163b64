#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "prodsos/polynomial.hpp"

namespace prodsos {

/// Components q_kappa of a polynomial restricted to a product of spheres.
/// Each component is homogeneous and harmonic of degree kappa[i] in the i-th
/// decomposed block, and the components sum to the input on the product.
struct HarmonicDecomposition {
  std::vector<int> blocks;  // decomposed blocks, in kappa order
  std::map<std::vector<int>, RealPolynomial> components;

  /// Sum of all components (a polynomial equal to the input on the spheres).
  RealPolynomial sum(const VariableLayout& layout) const;
};

/// Harmonic decomposition in the variables of one block; the other blocks'
/// variables ride along as coefficients.
HarmonicDecomposition harmonic_decompose_block(const RealPolynomial& p, int block);
HarmonicDecomposition harmonic_decompose_block(const RealPolynomial& p,
                                               std::string_view block);

/// Tensor decomposition over every block of `layout` (which must match the
/// polynomial's block dimensions).
HarmonicDecomposition multigrade_decompose(const RealPolynomial& q,
                                           const VariableLayout& layout);
HarmonicDecomposition multigrade_decompose(const RealPolynomial& q);

struct HarmonicConstantReport {
  int n = 0;
  int d = 0;
  int trials = 0;
  double empirical_gamma = 0.0;
  double upper_bound = 0.0;
};

/// sqrt(max_{k<=d} G_k^n(1)), an upper bound on the harmonic constant of
/// S^{n-1} at degree d.
double harmonic_constant_bound(int n, int d);

/// Sampling lower estimate of the harmonic constant from `trials` random
/// polynomials with standard normal monomial coefficients.
HarmonicConstantReport harmonic_constant_estimate(int n, int d, int trials,
                                                  std::uint64_t seed);

}  // namespace prodsos
