#pragma once

#include <vector>

#include "prodsos/core.hpp"

namespace prodsos {

// Zonal polynomials of the unit sphere S^{n-1} in R^n. G_k^n is orthogonal
// for the probability weight w_n(x) ∝ (1 - x^2)^{(n-3)/2} on [-1,1] and is
// normalized so that G_k^n(1) = dim of the degree-k spherical harmonics,
// (1 + 2k/(n-2)) * C(k+n-3, k). With that normalization
//
//   sum_{k<=2t} G_k^n(<x, x'>)
//
// is the Christoffel-Darboux kernel of S^{n-1} under the uniform measure,
// and  ∫ G_k^n(x)^2 w_n(x) dx = G_k^n(1).

/// Value of G_k^n at x by the three-term Gegenbauer recurrence. Requires n >= 3.
double gegenbauer_eval(int n, int k, double x);

/// G_0^n(x) .. G_kmax^n(x) in one recurrence sweep.
std::vector<double> gegenbauer_all(int n, int kmax, double x);

/// Closed form (1 + 2k/(n-2)) * C(k+n-3, k).
double gegenbauer_value_at_one(int n, int k);

/// Normalized density w_n(x).
double gegenbauer_weight(int n, double x);

/// T_k(x) = cos(k arccos x) for |x| <= 1.
double chebyshev_eval(int k, double x);

struct QuadratureRule {
  VectorXd nodes;
  VectorXd weights;  // sum to 1
};

/// Gauss rule for w_n with `nodes` points (Golub-Welsch); exact for
/// polynomials of degree <= 2*nodes - 1.
QuadratureRule gegenbauer_quadrature(int n, int nodes);

/// Basis in which a univariate SOS Gram matrix is expressed:
/// sigma(x) = b(x)^T Q b(x) with b = (1, x, .., x^t) or
/// b = (G_0/sqrt(G_0(1)), .., G_t/sqrt(G_t(1))) (orthonormal for w_n).
enum class GramBasis { monomial, orthonormal };

/// Coefficients lambda_0..lambda_{2t} of sigma in the family {G_k^n},
/// lambda_k = ∫ sigma G_k w_n / ∫ G_k^2 w_n, by Gauss quadrature with
/// 2t + 2 nodes.
VectorXd gram_coefficients(int n, const MatrixXd& gram,
                           GramBasis basis = GramBasis::monomial);

/// sigma(x) = b(x)^T Q b(x).
double evaluate_gram_sos(int n, const MatrixXd& gram, GramBasis basis, double x);

/// sum_k coeffs(k) G_k^n(x).
double evaluate_gegenbauer_series(int n, const VectorXd& coeffs, double x);

}  // namespace prodsos
