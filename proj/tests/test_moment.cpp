#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prodsos/moment.hpp"
#include "prodsos/oracle.hpp"

using namespace prodsos;

namespace {

const InteriorPointBackend kBackend;
const SetDescriptor kBisphere = SetDescriptor::sphere_product(2, 3);

RealPolynomial var(const VariableLayout& l, int i) { return RealPolynomial::variable(l, i); }

RealPolynomial dot_xy(const VariableLayout& l, int n) {
  RealPolynomial p(l);
  for (int i = 0; i < n; ++i) p += var(l, i) * var(l, n + i);
  return p;
}

RealPolynomial bilinear(const VariableLayout& l, const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  RealPolynomial p(l);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p += a(i, j) * (var(l, i) * var(l, n + j));
  return p;
}

RealPolynomial random_poly(const VariableLayout& l, int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealPolynomial p(l);
  for (const auto& m : monomials_up_to(l.total_dim(), degree)) p.add_term(m, g(rng));
  return p;
}

double lb(const RealPolynomial& q, const SetDescriptor& set, int t) {
  const auto r = minimize_relaxation(q, set, t, kBackend);
  CHECK((r.status == SolverStatus::optimal || r.status == SolverStatus::near_optimal));
  return r.lower_bound;
}

}  // namespace

TEST_CASE("relaxation structure") {
  const auto l = kBisphere.layout();
  const auto p = build_relaxation(dot_xy(l, 3), kBisphere, 2);
  CHECK(p.num_vars == 210);  // C(6+4, 4) moments of degree <= 4
  CHECK(p.blocks.size() == 1);
  CHECK(p.blocks[0].size == 28);  // C(6+2, 2)
  CHECK(p.moments.size() == 210);
  CHECK(p.moment_index(Monomial::one(6)) == 0);
  CHECK(p.variable_bound == 1.0);

  const auto cube = SetDescriptor::hypercube(2);
  const auto c = build_relaxation(var(cube.layout(), 0), cube, 2);
  // moment matrix, two single-factor blocks and the product block
  CHECK(c.blocks.size() == 4);
  CHECK(c.blocks[0].size == 6);
  CHECK(c.blocks[3].size == 1);
}

TEST_CASE("relaxation errors") {
  const auto l = kBisphere.layout();
  const auto q4 = power(dot_xy(l, 3), 2);
  CHECK_THROWS_AS(build_relaxation(q4, kBisphere, 1), OrderTooSmall);
  try {
    build_relaxation(q4, kBisphere, 1);
  } catch (const OrderTooSmall& e) {
    CHECK(e.order() == 1);
  }
  const auto big = SetDescriptor::hypercube(9);
  CHECK_THROWS_AS(build_relaxation(var(big.layout(), 0), big, 1), DomainError);
  const auto wide = SetDescriptor::sphere_product(2, 8);
  CHECK_THROWS_AS(build_relaxation(var(wide.layout(), 0), wide, 4), DomainError);
  CHECK_THROWS_AS(build_relaxation(var(VariableLayout::single("x", 6), 0), kBisphere, 1),
                  StructuralError);
}

TEST_CASE("examples with known values") {
  const auto sphere = SetDescriptor::sphere_product(1, 3);
  const auto ls = sphere.layout();
  const auto vanish = RealPolynomial::constant(ls, 1.0) - block_norm_squared<double>(ls, 0);
  for (int t = 1; t <= 2; ++t) CHECK(std::abs(lb(vanish, sphere, t)) <= 1e-7);

  const auto l = kBisphere.layout();
  const double t1 = lb(dot_xy(l, 3), kBisphere, 1);
  const double t2 = lb(dot_xy(l, 3), kBisphere, 2);
  CHECK(t1 == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(t2 - t1) <= 1e-6);

  for (double c : {-3.0, 0.0, 5.0}) CHECK(std::abs(lb(RealPolynomial::constant(l, c), kBisphere, 1) - c) <= 1e-7);

  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    MatrixXd a(3, 3);
    for (int i = 0; i < 9; ++i) a(i) = g(rng);
    CHECK(std::abs(lb(bilinear(l, a), kBisphere, 1) - bilinear_exact(a).value) <= 1e-5);
  }
}

TEST_CASE("hypercube") {
  const auto cube = SetDescriptor::hypercube(2);
  const auto l = cube.layout();
  const auto x1 = var(l, 0), x2 = var(l, 1);
  CHECK(lb(x1 + x2, cube, 1) == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(lb(x1 * x2, cube, 1) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(lb(x1 * x1 - x1, cube, 1) == doctest::Approx(-0.25).epsilon(1e-7));
  const auto q = x1 * x1 * x2 * x2 - x1 * x2;
  const double oracle = minimize(q, cube).min_estimate;
  CHECK(lb(q, cube, 2) <= oracle + 1e-6);
}

TEST_CASE("status on a hand-built infeasible problem") {
  auto p = build_relaxation(RealPolynomial::constant(kBisphere.layout(), 1.0), kBisphere, 1);
  add_moment_equality(p, RealPolynomial::constant(kBisphere.layout(), 1.0), 2.0);
  const auto r = solve(p, kBackend, 1);
  CHECK(r.status == SolverStatus::infeasible);
}

TEST_CASE("equivariance and soundness on random quadratics") {
  const auto l = kBisphere.layout();
  std::mt19937_64 rng(77);
  const auto nx = block_norm_squared<double>(l, 0);
  const auto one = RealPolynomial::constant(l, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const auto q = random_poly(l, 2, rng);
    const double base = lb(q, kBisphere, 1);
    const double oracle = minimize(q, kBisphere).min_estimate;
    CHECK(base <= oracle + 1e-6);
    CHECK(std::abs(lb(q + RealPolynomial::constant(l, 2.5), kBisphere, 1) - (base + 2.5)) <= 1e-7);
    CHECK(std::abs(lb(3.0 * q, kBisphere, 1) - 3.0 * base) <= 1e-7 * std::abs(3.0 * base));
    const auto p = random_poly(l, 2, rng);
    CHECK(std::abs(lb(q + (one - nx) * p, kBisphere, 2) - lb(q, kBisphere, 2)) <= 1e-6);
  }
}

TEST_CASE("moment vector of a solved relaxation") {
  const auto l = kBisphere.layout();
  const auto q = dot_xy(l, 3);
  const auto p = build_relaxation(q, kBisphere, 1);
  const auto r = solve(p, kBackend, 1);
  CHECK(r.order == 1);
  CHECK(r.truncation_degree == 2);
  CHECK(r.certificate_degree == 2);
  CHECK(r.moments(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(apply_functional(p, r.moments, q) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(apply_functional(p, r.moments, block_norm_squared<double>(l, 1)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hierarchy sweep") {
  const auto l = kBisphere.layout();
  const auto table = hierarchy_sweep(dot_xy(l, 3), kBisphere, {1, 2, 3}, kBackend);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rate_constant == doctest::Approx(17280.0));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].gap <= 1e-5);
    CHECK(table.rows[i].gap >= -1e-6);
    if (i > 0) CHECK(table.rows[i].lower_bound >= table.rows[i - 1].lower_bound - 1e-7);
  }
  CHECK(table.rows[0].theory_bound / table.rows[1].theory_bound == doctest::Approx(4.0));
  CHECK(sweep_csv(table).rfind("t,lower_bound,oracle_min,gap,theory_bound\n", 0) == 0);
  CHECK_THROWS_AS(hierarchy_sweep(dot_xy(l, 3), kBisphere, {2, 1}, kBackend), DomainError);

  std::mt19937_64 rng(12);
  const auto q = random_poly(l, 2, rng);
  const auto rnd = hierarchy_sweep(q, kBisphere, {3}, kBackend);
  CHECK(rnd.rows[0].gap <= rnd.rows[0].theory_bound);
}
