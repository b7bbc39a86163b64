#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "prodsos/qwasserstein.hpp"

using namespace prodsos;

namespace {

const InteriorPointBackend kBackend;

VectorXcd basis(int n, int k) {
  VectorXcd e = VectorXcd::Zero(n);
  e(k) = 1.0;
  return e;
}

QuantumState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd a(n, n);
  for (int i = 0; i < a.size(); ++i) a(i) = Complex(g(rng), g(rng));
  MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return validate_state(rho);
}

// (a, b, c, d) coordinates of x = a + i b, y = c + i d.
VectorXd real_point(const VectorXcd& x, const VectorXcd& y) {
  const int n = static_cast<int>(x.size());
  VectorXd z(4 * n);
  z << x.real(), x.imag(), y.real(), y.imag();
  return z;
}

double single_atom_cost(const VectorXcd& u, const VectorXcd& v) {
  return transport_cost(TransportPlan{{{1.0, u, v}}});
}

bool usable(SolverStatus s) { return s == SolverStatus::optimal || s == SolverStatus::near_optimal; }

}  // namespace

TEST_CASE("state validation") {
  const auto mixed = maximally_mixed(3);
  CHECK_FALSE(mixed.projected);
  CHECK(mixed.matrix.trace().real() == doctest::Approx(1.0));
  CHECK_FALSE(pure_state(basis(2, 0)).projected);

  MatrixXcd bad = MatrixXcd::Zero(2, 2);
  bad(0, 0) = 1.0;
  bad(1, 1) = 0.1;
  try {
    validate_state(bad);
    FAIL("diag(1, 0.1) accepted");
  } catch (const InvalidState& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].invariant == "trace");
    CHECK(e.violations()[0].magnitude == doctest::Approx(0.1));
  }

  MatrixXcd skew = mixed.matrix.topLeftCorner(2, 2) * 1.5;
  skew(0, 1) = Complex(0.0, 0.2);
  skew(1, 0) = Complex(0.0, 0.2);
  CHECK_THROWS_AS(validate_state(skew), InvalidState);

  MatrixXcd indefinite = MatrixXcd::Zero(2, 2);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  try {
    validate_state(indefinite);
    FAIL("indefinite matrix accepted");
  } catch (const InvalidState& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].invariant == "psd");
    CHECK(e.violations()[0].magnitude == doctest::Approx(0.5));
  }

  MatrixXcd noisy = maximally_mixed(2).matrix;
  noisy(0, 0) += 5e-9;
  const auto fixed = validate_state(noisy);
  CHECK(fixed.projected);
  CHECK(fixed.projection_distance <= 1e-8);
  CHECK(std::abs(fixed.matrix.trace().real() - 1.0) <= 1e-14);

  CHECK_THROWS_AS(validate_state(MatrixXcd::Zero(2, 3)), DimensionError);
}

TEST_CASE("transport cost") {
  std::mt19937_64 rng(4);
  const auto e1 = basis(2, 0), e2 = basis(2, 1);
  CHECK(single_atom_cost(e1, e2) == doctest::Approx(2.0));
  CHECK(single_atom_cost(e1, e1) == doctest::Approx(0.0));
  for (double c : {0.0, 0.3, 0.6, 1.0}) {
    VectorXcd u(2);
    u << c, std::sqrt(1 - c * c);
    CHECK(single_atom_cost(u, e1) == doctest::Approx(2 - 2 * c * c));
  }
  const auto rho = random_state(3, rng);
  const auto plan = spectral_product_plan(rho, rho);
  CHECK_NOTHROW(validate_plan(plan, rho, rho));
  TransportPlan diagonal;
  for (const auto& a : plan.atoms) diagonal.atoms.push_back({a.weight, a.u, a.u});
  CHECK(std::abs(transport_cost(diagonal)) <= 1e-12);

  // phase invariance
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  for (int i = 0; i < 10; ++i) {
    const auto s = random_state(2, rng), t = random_state(2, rng);
    auto p = spectral_product_plan(s, t);
    const double before = transport_cost(p);
    for (auto& a : p.atoms) a.u *= std::polar(1.0, angle(rng));
    CHECK(std::abs(transport_cost(p) - before) <= 1e-12);
  }

  TransportPlan heavy{{{0.7, e1, e2}, {0.7, e2, e1}}};
  CHECK_THROWS_AS(validate_plan(heavy), DomainError);
  TransportPlan longer{{{1.0, 2.0 * e1, e2}}};
  CHECK_THROWS_AS(validate_plan(longer), DomainError);
  CHECK_THROWS_AS(validate_plan(plan, rho, maximally_mixed(3)), DomainError);
}

TEST_CASE("real objective") {
  const auto f = real_objective(2);
  CHECK(f.degree() == 4);
  CHECK(f.layout().total_dim() == 8);
  const auto e1 = basis(2, 0), e2 = basis(2, 1);
  CHECK(evaluate(f, real_point(e1, e2)) == doctest::Approx(2.0));

  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  double highest = -1e300;
  for (int i = 0; i < 10000; ++i) {
    VectorXcd x(2), y(2);
    for (int k = 0; k < 2; ++k) {
      x(k) = Complex(g(rng), g(rng));
      y(k) = Complex(g(rng), g(rng));
    }
    x.normalize();
    y.normalize();
    CHECK(std::abs(evaluate(f, real_point(x, x))) <= 1e-12);
    const double v = evaluate(f, real_point(x, y));
    CHECK(v == doctest::Approx(single_atom_cost(x, y)).epsilon(1e-12));
    CHECK(v <= 2.0 + 1e-9);
    CHECK(v >= -2.0 - 1e-9);
    highest = std::max(highest, v);
  }
  CHECK(highest >= 1.9);
  // The cost uses bilinear products, so it is not a squared distance and goes
  // negative: x = (e1 + i e2)/sqrt2 and y = conj(x) give 0 + 0 - 2|x^T y|^2 = -2.
  VectorXcd x(2);
  x << 1.0, Complex(0.0, 1.0);
  x /= std::sqrt(2.0);
  CHECK(evaluate(f, real_point(x, x.conjugate())) == doctest::Approx(-2.0));
}

TEST_CASE("relaxation assembly") {
  const auto a = pure_state(basis(2, 0));
  const auto p = build_w2_relaxation(a, a, 2);
  CHECK(p.blocks[0].size == 45);
  CHECK_THROWS_AS(build_w2_relaxation(a, a, 1), OrderTooSmall);
  CHECK_THROWS_AS(build_w2_relaxation(a, maximally_mixed(3), 2), DimensionError);
  CHECK(qwass_layout(2).total_dim() == 8);
}

TEST_CASE("solved instances at t = 2") {
  const auto e1 = basis(2, 0), e2 = basis(2, 1);
  const auto same = solve_w2(pure_state(e1), pure_state(e1), 2, kBackend);
  CHECK(usable(same.status));
  CHECK(same.w2_squared_lower >= -1e-6);
  CHECK(same.w2_squared_lower <= 1e-6);
  CHECK(same.w2 <= 1e-3);
  CHECK(std::abs(same.mass - 1.0) <= 1e-8);
  CHECK_FALSE(same.certified);
  CHECK(same.kappa_over_t2 == doctest::Approx(kappa_bound(2).kappa));

  const auto mixed = solve_w2(maximally_mixed(2), maximally_mixed(2), 2, kBackend);
  CHECK(usable(mixed.status));
  CHECK(mixed.w2 <= 1e-3);
  CHECK(std::abs(mixed.mass - 1.0) <= 1e-8);

  const auto orth = solve_w2(pure_state(e1), pure_state(e2), 2, kBackend);
  CHECK(orth.w2_squared_lower <= 2.0 + 1e-6);

  VectorXcd u(2);
  u << 0.6, 0.8;
  const auto tilted = solve_w2(pure_state(u), pure_state(e1), 2, kBackend);
  CHECK(tilted.w2_squared_lower <= 2.0 - 2.0 * 0.36 + 1e-6);
}

TEST_CASE("random pairs: plan bound and symmetry") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 8; ++i) {
    const auto rho = random_state(2, rng), nu = random_state(2, rng);
    const auto r = solve_w2(rho, nu, 2, kBackend);
    REQUIRE(usable(r.status));
    CHECK(r.w2_squared_lower <= transport_cost(spectral_product_plan(rho, nu)) + 1e-6);
    CHECK(std::abs(r.mass - 1.0) <= 1e-8);
    if (i < 3) {
      const auto s = solve_w2(nu, rho, 2, kBackend);
      CHECK(std::abs(s.w2_squared_lower - r.w2_squared_lower) <= 1e-6);
    }
  }
}

TEST_CASE("nondecreasing in t") {
  std::mt19937_64 rng(17);
  const auto rho = random_state(2, rng), nu = random_state(2, rng);
  const auto r2 = solve_w2(rho, nu, 2, kBackend);
  const auto r3 = solve_w2(rho, nu, 3, kBackend);
  REQUIRE(usable(r2.status));
  REQUIRE(usable(r3.status));
  CHECK(r3.w2_squared_lower >= r2.w2_squared_lower - 1e-6);
  CHECK(r3.w2_squared_lower <= transport_cost(spectral_product_plan(rho, nu)) + 1e-6);
}

TEST_CASE("kappa") {
  const auto k2 = kappa_bound(2);
  // C_X(4, 4) = 8 * 16 * 64 * C(6, 2) * max_k G_k^4(1), and G_k^4(1) = (k + 1)^2
  const double c44 = 8.0 * 16 * 64 * 15 * 25;
  CHECK(k2.c_x == c44);
  CHECK(k2.kappa == 1.5 * 11 * c44);
  CHECK(k2.f_max == 2.0);
  CHECK(k2.h_max == 2.0);
  CHECK(k2.w_l1 == 8.0);
  for (int n = 2; n < 6; ++n) CHECK(kappa_bound(n + 1).kappa > kappa_bound(n).kappa);
  CHECK_THROWS_AS(kappa_bound(1), DomainError);
}
