#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "prodsos/harmonic.hpp"
#include "prodsos/kernel.hpp"

using namespace prodsos;

namespace {

const SetDescriptor kBisphere = SetDescriptor::sphere_product(2, 3);

RealPolynomial var(const VariableLayout& l, int i) { return RealPolynomial::variable(l, i); }

RealPolynomial dot_xy(const VariableLayout& l) {
  RealPolynomial p(l);
  for (int i = 0; i < 3; ++i) p += var(l, i) * var(l, 3 + i);
  return p;
}

RealPolynomial random_poly(const VariableLayout& l, int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealPolynomial p(l);
  for (const auto& m : monomials_up_to(l.total_dim(), degree)) p.add_term(m, g(rng));
  return p;
}

// Synthesized once; the t = 17 vector is reused by several cases.
const LambdaVector& lambda17() {
  static const LambdaVector l = synthesize_lambda(3, 2, 17);
  return l;
}

}  // namespace

TEST_CASE("unit lambda and the trivial degree") {
  const auto u = unit_lambda(4, 3);
  CHECK(u.values.size() == 7);
  CHECK(u.values.isOnes());
  CHECK(u.deficit == 0.0);
  CHECK(u[10] == 0.0);

  const auto zero = synthesize_lambda(3, 0, 5);
  CHECK(zero.values(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(zero.deficit) <= 1e-9);
}

TEST_CASE("lambda synthesis at t = 17") {
  const auto& l = lambda17();
  CHECK(l.values.size() == 35);
  CHECK(l.deficit <= 72.0 / 289.0);
  CHECK(l.deficit <= lambda_deficit_bound(3, 2, 17));
  CHECK(lambda_deficit_bound(3, 2, 17) == doctest::Approx(72.0 / 289.0));
  CHECK(std::abs(l.values(0) - 1.0) <= 1e-9);
  for (int k = 1; k <= 2; ++k) {
    CHECK(l.values(k) >= 0.5 - 1e-9);
    CHECK(l.values(k) <= 1.0 + 1e-9);
  }
  CHECK(l.deficit == doctest::Approx((1 - l.values(1)) + (1 - l.values(2))));
  const double min_eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(l.gram).eigenvalues()(0);
  CHECK(min_eig >= -1e-9);
  const VectorXd expanded = gram_coefficients(3, l.gram, l.basis);
  CHECK((expanded - l.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("deficit nesting") {
  const auto& l17 = lambda17();
  // Padding the t = 17 Gram matrix with zeros gives a feasible point at t = 34
  // with the same lambda_1, lambda_2.
  MatrixXd padded = MatrixXd::Zero(35, 35);
  padded.topLeftCorner(18, 18) = l17.gram;
  const VectorXd lp = gram_coefficients(3, padded, GramBasis::orthonormal);
  CHECK(std::abs((2 - lp(1) - lp(2)) - l17.deficit) <= 1e-9);

  const auto l34 = synthesize_lambda(3, 2, 34);
  CHECK(l34.deficit <= 72.0 / 1156.0);
  CHECK(l34.deficit <= l17.deficit + 1e-9);

  double previous = 2.0;
  for (int t : {2, 3, 4, 6, 9, 13}) {
    const auto l = synthesize_lambda(3, 2, t);
    CHECK(l.deficit <= previous + 1e-8);
    previous = l.deficit;
  }
  CHECK(l17.deficit <= previous + 1e-8);
}

TEST_CASE("lambda synthesis errors") {
  CHECK_THROWS_AS(synthesize_lambda(3, 2, 1), OrderTooSmall);
  CHECK_THROWS_AS(synthesize_lambda(3, 5, 2), OrderTooSmall);
  CHECK_THROWS_AS(synthesize_lambda(2, 1, 3), DomainError);
  try {
    synthesize_lambda(3, 2, 1);
  } catch (const OrderTooSmall& e) {
    CHECK(e.order() == 1);
  }
}

TEST_CASE("christoffel darboux kernel") {
  std::mt19937_64 rng(3);
  const Eigen::Vector3d e1(1, 0, 0);
  for (int t = 0; t <= 4; ++t) {
    double expected = 0.0;
    for (int k = 0; k <= 2 * t; ++k) expected += gegenbauer_value_at_one(3, k);
    CHECK(cd_kernel_eval(3, t, e1, e1) == doctest::Approx(expected));
  }
  for (int i = 0; i < 20; ++i) {
    const VectorXd x = random_unit_vector(3, rng), y = random_unit_vector(3, rng);
    CHECK(cd_kernel_eval(3, 0, x, y) == doctest::Approx(1.0));
    CHECK(cd_kernel_eval(3, 3, x, y) == cd_kernel_eval(3, 3, y, x));
    CHECK(cd_kernel_eval(3, 17, x, y, &lambda17()) == cd_kernel_eval(3, 17, y, x, &lambda17()));
  }
  CHECK_THROWS_AS(cd_kernel_eval(3, 1, Eigen::Vector3d(1, 1, 0), e1), DimensionError);
  CHECK_THROWS_AS(cd_kernel_eval(3, 1, Eigen::Vector2d(1, 0), e1), DimensionError);
}

TEST_CASE("perturbed kernel sections are nonnegative") {
  std::mt19937_64 rng(21);
  const auto& l = lambda17();
  for (int s = 0; s < 20; ++s) {
    const VectorXd anchor = random_unit_vector(3, rng);
    double lowest = 1e300;
    for (int i = 0; i < 500; ++i)
      lowest = std::min(lowest, cd_kernel_eval(3, 17, random_unit_vector(3, rng), anchor, &l));
    CHECK(lowest >= -1e-9);
  }
}

TEST_CASE("reproducing property by exact quadrature") {
  // With unit lambda, ∫ K(x, x') p(x') dsigma(x') = p(x) for deg p <= 2t.
  // The integral uses the 1D Gauss rule in the zonal direction: on S^2 the
  // zonal average of p about x reduces to Legendre nodes times an azimuthal sum.
  std::mt19937_64 rng(5);
  const auto l = VariableLayout::single("x", 3);
  const auto rule = gegenbauer_quadrature(3, 8);
  for (int t = 1; t <= 2; ++t) {
    const auto p = random_poly(l, 2 * t, rng);
    for (int s = 0; s < 5; ++s) {
      const VectorXd x = random_unit_vector(3, rng);
      VectorXd u = random_unit_vector(3, rng);
      u -= u.dot(x) * x;
      u.normalize();
      const Eigen::Vector3d v = Eigen::Vector3d(x).cross(Eigen::Vector3d(u));
      double integral = 0.0;
      for (int i = 0; i < rule.nodes.size(); ++i) {
        const double c = rule.nodes(i), r = std::sqrt(1 - c * c);
        const int az = 16;
        for (int j = 0; j < az; ++j) {
          const double phi = 2 * M_PI * j / az;
          const VectorXd xp = c * x + r * (std::cos(phi) * u + std::sin(phi) * VectorXd(v));
          integral += rule.weights(i) / az * cd_kernel_eval(3, t, x, xp) * evaluate(p, xp);
        }
      }
      CHECK(integral == doctest::Approx(evaluate(p, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("operator action") {
  const auto l = kBisphere.layout();
  const auto one = RealPolynomial::constant(l, 1.0);
  const auto& lam = lambda17();
  CHECK(max_abs_coefficient(apply_operator(one, {lam}) - one) <= 1e-9);

  auto shrink = unit_lambda(3, 1);
  shrink.values(1) = 0.9;
  const auto xy = dot_xy(l);
  CHECK(max_abs_coefficient(apply_operator(xy, {shrink, shrink}) - 0.81 * xy) <= 1e-12);

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    const auto q = random_poly(l, 4, rng);
    const auto lam4 = synthesize_lambda(3, 4, 8);
    const auto there = apply_operator(q, {lam4});
    const auto back = apply_operator(there, {lam4}, true);
    const auto same = apply_operator(q, {unit_lambda(3, 2)});
    for (int i = 0; i < 100; ++i) {
      const VectorXd z = kBisphere.sample(rng);
      CHECK(std::abs(evaluate(back, z) - evaluate(q, z)) <= 1e-9);
      CHECK(std::abs(evaluate(same, z) - evaluate(q, z)) <= 1e-9);
    }
  }

  auto singular = unit_lambda(3, 1);
  singular.values(1) = 0.0;
  CHECK_THROWS_AS(apply_operator(xy, {singular}, true), DomainError);
  CHECK_THROWS_AS(apply_operator(xy, {shrink, shrink, shrink}), StructuralError);
}

TEST_CASE("bernoulli chain") {
  for (int t : {17, 34}) {
    const auto l = t == 17 ? lambda17() : synthesize_lambda(3, 2, t);
    CHECK(bernoulli_sum(l, 2) <= bernoulli_bound(3, 2, t));
  }
  CHECK(bernoulli_sum(unit_lambda(3, 2), 2) == 0.0);
  CHECK(bernoulli_bound(3, 2, 17) == doctest::Approx(8 * 72.0 / 289 * 6));
}

TEST_CASE("P3 report") {
  const auto l = kBisphere.layout();
  const auto xy = dot_xy(l);
  const auto unit = p3_report(xy, {unit_lambda(3, 17)}, kBisphere, 100);
  CHECK(unit.epsilon_empirical == 0.0);

  const auto& lam = lambda17();
  const auto normalized = normalize_unit_range(xy, kBisphere);
  CHECK(normalized.q_min == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(normalized.q_max == doctest::Approx(1.0).epsilon(1e-8));
  const auto r = p3_report(normalized, {lam}, kBisphere, 400);
  // (xy + 1) / 2 has the single nonconstant component xy / 2
  const double closed = std::abs(1.0 / (lam[1] * lam[1]) - 1.0) * 0.5;
  CHECK(r.epsilon_empirical == doctest::Approx(closed).epsilon(1e-6));
  CHECK(r.epsilon_theoretical == doctest::Approx(17280.0 / 289.0));
  CHECK(r.within_bound);

  std::mt19937_64 rng(8);
  const auto q = normalize_unit_range(random_poly(l, 2, rng), kBisphere);
  const auto a = p3_report(q, {synthesize_lambda(3, 2, 9)}, kBisphere, 50);
  const auto b = p3_report(q, {synthesize_lambda(3, 2, 18)}, kBisphere, 50);
  CHECK(a.epsilon_theoretical / b.epsilon_theoretical == 4.0);
}

TEST_CASE("rate constants") {
  CHECK(gamma_bound(3, 2) == doctest::Approx(std::sqrt(5.0)));
  CHECK(c_bisphere(3, 2) == 17280.0);
  CHECK(c_bisphere(3, 2) == 8 * 9 * 8 * 6 * 5);
  for (int n = 3; n <= 6; ++n)
    for (int d = 1; d <= 4; ++d) CHECK(c_multisphere(n, d, 2) == doctest::Approx(c_bisphere(n, d)).epsilon(1e-15));
  CHECK(rate_constant({RateKind::bisphere, 3, 2}) == 17280.0);
  CHECK(rate_constant({RateKind::multisphere, 3, 2, 3}) == doctest::Approx(3 * 8 * 9 * 8 * 10 * std::pow(5.0, 1.5)));

  const auto s = make_preset(PresetKind::sphere, 3, 2);
  CHECK(s.threshold == doctest::Approx(2 * 3 * 2 * std::sqrt(2.0)));
  CHECK(s.m == 1);
  CHECK(s.certificate_degree(10) == 20);
  CHECK(s.eta(10) == doctest::Approx(9 * 8 / 100.0));
  const auto h = make_preset(PresetKind::hypercube, 2, 2, 1.5);
  CHECK(h.m == 2);
  CHECK(h.threshold == doctest::Approx(M_PI * 2 * 2));
  CHECK(h.certificate_degree(10) == 22);
  CHECK(h.eta(10) == doctest::Approx(2 * M_PI * M_PI * 4 / 100.0));

  const auto g = general_rate(s, s, 2, 17);
  CHECK(g.threshold == doctest::Approx(s.threshold));
  CHECK(g.m == 2);
  CHECK(g.certificate_degree == 68);
  CHECK(g.constant == doctest::Approx(8 * s.eta(17) * 6 * 5));
  CHECK_THROWS_AS(general_rate(s, s, 2, 16), ThresholdError);
  CHECK_THROWS_AS(general_rate(s, make_preset(PresetKind::ball, 3, 2), 2, 40), PresetNotOperational);
  CHECK_THROWS_AS(general_rate(s, make_preset(PresetKind::hypercube, 3, 2), 2, 40), PresetNotOperational);
  CHECK(general_rate(s, h, 2, 17).certificate_degree == 34 + 36);
}
