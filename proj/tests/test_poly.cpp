#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prodsos/polynomial.hpp"
#include "prodsos/qwasserstein.hpp"
#include "prodsos/set.hpp"

using namespace prodsos;

namespace {

const VariableLayout kX2 = VariableLayout::single("x", 2);

RealPolynomial var(const VariableLayout& l, int i) { return RealPolynomial::variable(l, i); }

// Small integer coefficients keep every product exact in double precision.
RealPolynomial random_integer_poly(const VariableLayout& l, int degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3);
  RealPolynomial p(l);
  for (const auto& m : monomials_up_to(l.total_dim(), degree)) p.add_term(m, coef(rng));
  return p;
}

}  // namespace

TEST_CASE("layout bookkeeping") {
  const VariableLayout l({{"x", 3}, {"y", 2}});
  CHECK(l.total_dim() == 5);
  CHECK(l.offset(1) == 3);
  CHECK(l.block_of(4) == 1);
  CHECK(l.block_index("y") == 1);
  CHECK_THROWS_AS(l.block_index("z"), StructuralError);
  CHECK_THROWS(VariableLayout({{"x", 2}, {"x", 2}}));
  CHECK_THROWS(VariableLayout({{"x", 0}}));
}

TEST_CASE("graded lex order") {
  const auto ms = monomials_up_to(2, 2);
  REQUIRE(ms.size() == 6);
  CHECK(ms[0] == Monomial({0, 0}));
  CHECK(ms[1] == Monomial({1, 0}));
  CHECK(ms[2] == Monomial({0, 1}));
  CHECK(ms[3] == Monomial({2, 0}));
  CHECK(ms[4] == Monomial({1, 1}));
  CHECK(ms[5] == Monomial({0, 2}));
  CHECK(monomials_of_degree(8, 2).size() == 36);
}

TEST_CASE("arithmetic examples") {
  const auto x1 = var(kX2, 0), x2 = var(kX2, 1);
  const auto one = RealPolynomial::constant(kX2, 1.0);

  auto diff = (x1 + one) * (x1 - one);
  CHECK(diff == x1 * x1 - one);
  CHECK(diff.degree() == 2);

  const auto p = x1 * x2 + 3.0 * x2;
  CHECK((p + (-1.0) * p).is_zero());
  CHECK((p + (-1.0) * p).degree() == 0);

  const auto m = (x1 * x2) * x2;
  CHECK(m.size() == 1);
  CHECK(m.coefficient(Monomial({1, 2})) == 1.0);

  CHECK(arith(x1, x2, ArithOp::add) == x1 + x2);
  CHECK(arith(x1, RealPolynomial::constant(kX2, 2.0), ArithOp::scale) == 2.0 * x1);
  CHECK_THROWS_AS(arith(x1, x2, ArithOp::scale), StructuralError);

  const auto other = VariableLayout::single("y", 2);
  CHECK_THROWS_AS(x1 + var(other, 0), StructuralError);
}

TEST_CASE("canonical form drops tiny coefficients") {
  auto p = var(kX2, 0);
  p.add_term(Monomial({1, 0}), -1.0 + 1e-16);
  CHECK(p.is_zero());
  p.add_term(Monomial({0, 1}), 1e-15);
  CHECK(p.is_zero());
}

TEST_CASE("ring axioms on random integer triples") {
  std::mt19937_64 rng(11);
  const VariableLayout l({{"x", 2}, {"y", 1}});
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_integer_poly(l, 2, rng);
    const auto q = random_integer_poly(l, 2, rng);
    const auto r = random_integer_poly(l, 1, rng);
    CHECK((p * q) * r == p * (q * r));
    CHECK(p * (q + r) == p * q + p * r);
    CHECK(p * q == q * p);
    if (!p.is_zero() && !q.is_zero()) CHECK((p * q).degree() == p.degree() + q.degree());
  }
}

TEST_CASE("evaluate") {
  const auto x1 = var(kX2, 0), x2 = var(kX2, 1);
  CHECK(evaluate(x1 * x1 + x2 * x2, Eigen::Vector2d(3, 4)) == doctest::Approx(25));
  CHECK(evaluate(RealPolynomial::constant(kX2, 1.0), Eigen::Vector2d(-7, 0.5)) == 1.0);
  CHECK_THROWS_AS(evaluate(x1, Eigen::Vector3d(1, 2, 3)), DimensionError);

  const auto c = to_complex(x1 * x2);
  const Complex v = evaluate(c, Eigen::Vector2cd(Complex(0, 1), Complex(0, 1)));
  CHECK(v.real() == doctest::Approx(-1));
  CHECK(v.imag() == doctest::Approx(0));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const VariableLayout l({{"x", 3}});
  for (int trial = 0; trial < 20; ++trial) {
    RealPolynomial p(l), q(l);
    for (const auto& m : monomials_up_to(3, 3)) {
      p.add_term(m, g(rng));
      q.add_term(m, g(rng));
    }
    const Eigen::Vector3d z(g(rng), g(rng), g(rng));
    const double lhs = evaluate(p * q, z), rhs = evaluate(p, z) * evaluate(q, z);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("transport objective at the orthogonal pair") {
  const auto f = real_objective(2);
  VectorXd z = VectorXd::Zero(8);
  z(0) = 1.0;  // a = e1, b = 0
  z(5) = 1.0;  // c = e2, d = 0
  CHECK(evaluate(f, z) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("laplacian") {
  const auto x1 = var(kX2, 0), x2 = var(kX2, 1);
  CHECK(laplacian(x1 * x1 - x2 * x2, "x").is_zero());

  const auto l3 = VariableLayout::single("x", 3);
  const auto norm = block_norm_squared<double>(l3, 0);
  CHECK(laplacian(norm, 0) == RealPolynomial::constant(l3, 6.0));
  CHECK(laplacian(power(var(l3, 0), 3), 0) == 6.0 * var(l3, 0));
  CHECK_THROWS_AS(laplacian(norm, "y"), StructuralError);

  std::mt19937_64 rng(3);
  const VariableLayout l({{"x", 2}, {"y", 2}});
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_integer_poly(l, 3, rng);
    const auto q = random_integer_poly(l, 3, rng);
    CHECK(laplacian(2.0 * p - 3.0 * q, 1) == 2.0 * laplacian(p, 1) - 3.0 * laplacian(q, 1));
  }
}

TEST_CASE("sup norm estimate") {
  const auto set = SetDescriptor::sphere_product(2, 3);
  const auto l = set.layout();
  CHECK(sup_norm_estimate(RealPolynomial::constant(l, 1.0), set, 10, 1).value == doctest::Approx(1.0));

  RealPolynomial xy(l);
  for (int i = 0; i < 3; ++i) xy += var(l, i) * var(l, 3 + i);
  const auto est = sup_norm_estimate(xy, set, 200, 7);
  CHECK(std::abs(est.value - 1.0) <= 1e-6);
  CHECK(set.violation(est.argmax) <= 1e-9);
  CHECK(est.value == sup_norm_estimate(xy, set, 200, 7).value);

  const auto fset = SetDescriptor::sphere_product(2, 4);
  const auto f = relabel(real_objective(2), fset.layout());
  CHECK(std::abs(sup_norm_estimate(f, fset, 400, 3).value - 2.0) <= 1e-6);
  CHECK_THROWS_AS(sup_norm_estimate(xy, set, 0, 1), DomainError);
}

TEST_CASE("compiled polynomial gradient") {
  const auto l = VariableLayout::single("x", 2);
  const auto p = var(l, 0) * var(l, 0) * var(l, 1) + 3.0 * var(l, 1);
  const CompiledPolynomial c(p);
  VectorXd grad;
  const double v = c.value_and_gradient(Eigen::Vector2d(2, -1), grad);
  CHECK(v == doctest::Approx(-7));
  CHECK(grad(0) == doctest::Approx(-4));
  CHECK(grad(1) == doctest::Approx(7));
}
