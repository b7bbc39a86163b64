#include "prodsos/moment.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <sstream>

#include "prodsos/kernel.hpp"
#include "prodsos/oracle.hpp"

namespace prodsos {

namespace {

using MomentIndex = std::map<Monomial, int, GradedLexLess>;

MomentIndex index_of(const std::vector<Monomial>& moments) {
  MomentIndex idx;
  for (int i = 0; i < static_cast<int>(moments.size()); ++i) idx.emplace(moments[i], i);
  return idx;
}

// Localizing block of g (given as a list of (monomial, coefficient)) over the
// given monomial basis.
LmiBlock localizing_block(const std::vector<std::pair<Monomial, double>>& g,
                          const std::vector<Monomial>& basis, const MomentIndex& idx,
                          std::string label) {
  LmiBlock block{static_cast<int>(basis.size()), std::move(label), {}};
  for (int i = 0; i < block.size; ++i)
    for (int j = i; j < block.size; ++j) {
      const Monomial bij = basis[i] * basis[j];
      std::map<int, double> acc;
      for (const auto& [m, c] : g) acc[idx.at(bij * m)] += c;
      for (const auto& [var, c] : acc)
        if (c != 0.0) block.entries.push_back({var, i, j, c});
    }
  return block;
}

}  // namespace

ConicProblem build_relaxation(const RealPolynomial& q, const SetDescriptor& set, int t) {
  const auto& layout = q.layout();
  if (!set.accepts(layout))
    throw StructuralError("polynomial layout does not fit the set " + set.to_string());
  if (t < 1) throw OrderTooSmall(t, "relaxation order must be >= 1");
  if (q.degree() > 2 * t)
    throw OrderTooSmall(t, "order " + std::to_string(t) + " is too small for degree " +
                               std::to_string(q.degree()) + " (need 2t >= deg q)");
  if (!set.is_sphere_product() && set.total_dim() > kMaxHypercubeDim)
    throw DomainError("hypercube dimension " + std::to_string(set.total_dim()) +
                      " exceeds " + std::to_string(kMaxHypercubeDim) +
                      ": the preordering has 2^n products; lower n");

  const int dim = layout.total_dim();
  const double side = binomial(dim + t, t);
  if (side > kMaxMomentMatrixSide)
    throw DomainError("moment matrix side " + std::to_string(static_cast<long>(side)) +
                      " exceeds the limit " + std::to_string(kMaxMomentMatrixSide) +
                      " (" + std::to_string(static_cast<long>(binomial(dim + 2 * t, 2 * t))) +
                      " moments); lower t");

  ConicProblem p;
  p.layout = layout;
  p.moments = monomials_up_to(dim, 2 * t);
  p.num_vars = static_cast<int>(p.moments.size());
  // |x^alpha| <= 1 on spheres and on the box
  p.variable_bound = 1.0;
  const auto idx = index_of(p.moments);

  p.objective = VectorXd::Zero(p.num_vars);
  for (const auto& [m, c] : q.terms()) p.objective(idx.at(m)) += c;

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  trips.emplace_back(0, idx.at(Monomial::one(dim)), 1.0);
  rhs.push_back(1.0);
  if (set.is_sphere_product()) {
    const auto shifts = monomials_up_to(dim, 2 * t - 2);
    for (int b = 0; b < layout.block_count(); ++b)
      for (const auto& alpha : shifts) {
        const int row = static_cast<int>(rhs.size());
        trips.emplace_back(row, idx.at(alpha), 1.0);
        for (int v = layout.offset(b); v < layout.offset(b) + layout.dim(b); ++v)
          trips.emplace_back(row, idx.at(alpha.shifted(v, 2)), -1.0);
        rhs.push_back(0.0);
      }
  }
  p.equalities.resize(static_cast<int>(rhs.size()), p.num_vars);
  p.equalities.setFromTriplets(trips.begin(), trips.end());
  p.equality_rhs = Eigen::Map<const VectorXd>(rhs.data(), static_cast<int>(rhs.size()));

  const Monomial one = Monomial::one(dim);
  if (set.is_sphere_product()) {
    p.blocks.push_back(
        localizing_block({{one, 1.0}}, monomials_up_to(dim, t), idx, "moment"));
  } else {
    // every product g_J = prod_{j in J} (1 - x_j^2) with |J| <= t
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      const int size = __builtin_popcount(mask);
      if (size > t) continue;
      std::vector<std::pair<Monomial, double>> g;
      for (unsigned sub = mask;; sub = (sub - 1) & mask) {
        std::vector<int> e(dim, 0);
        for (int j = 0; j < dim; ++j)
          if (sub & (1u << j)) e[j] = 2;
        g.emplace_back(Monomial(e), (__builtin_popcount(sub) % 2) ? -1.0 : 1.0);
        if (sub == 0) break;
      }
      std::string label = "g";
      for (int j = 0; j < dim; ++j)
        if (mask & (1u << j)) label += "_" + std::to_string(j + 1);
      p.blocks.push_back(localizing_block(g, monomials_up_to(dim, t - size), idx,
                                          mask ? label : "moment"));
    }
  }
  p.validate();
  return p;
}

void add_moment_equality(ConicProblem& problem, const RealPolynomial& p, double rhs) {
  if (problem.moments.empty()) throw StructuralError("problem has no moment index");
  const int rows = static_cast<int>(problem.equalities.rows());
  SparseRowMatrix grown(rows + 1, problem.num_vars);
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < rows; ++r)
    for (SparseRowMatrix::InnerIterator it(problem.equalities, r); it; ++it)
      trips.emplace_back(r, static_cast<int>(it.col()), it.value());
  for (const auto& [m, c] : p.terms()) {
    if (m.degree() > problem.moments.back().degree())
      throw OrderTooSmall(problem.moments.back().degree() / 2,
                          "moment constraint exceeds the truncation degree");
    trips.emplace_back(rows, problem.moment_index(m), c);
  }
  grown.setFromTriplets(trips.begin(), trips.end());
  problem.equalities = std::move(grown);
  problem.equality_rhs.conservativeResize(rows + 1);
  problem.equality_rhs(rows) = rhs;
}

double apply_functional(const ConicProblem& problem, const VectorXd& y,
                        const RealPolynomial& p) {
  double s = 0.0;
  for (const auto& [m, c] : p.terms()) s += c * y(problem.moment_index(m));
  return s;
}

RelaxationResult solve(const ConicProblem& problem, const ConicBackend& backend, int order) {
  RelaxationResult r;
  r.order = order;
  r.truncation_degree = 2 * order;
  r.certificate_degree = 2 * order;
  r.solution = backend.solve(problem);
  const auto& s = r.solution;
  r.moments = s.y;
  switch (s.status) {
    case SolverStatus::optimal:
    case SolverStatus::near_optimal:
      if (std::isfinite(s.safe_lower_bound)) {
        r.lower_bound = s.safe_lower_bound;
        r.status = s.status;
      } else {
        r.lower_bound = s.primal_objective;
        r.status = SolverStatus::near_optimal;
      }
      break;
    case SolverStatus::unbounded:
      r.lower_bound = -std::numeric_limits<double>::infinity();
      r.status = s.status;
      break;
    default:
      r.lower_bound = std::numeric_limits<double>::quiet_NaN();
      r.status = s.status;
  }
  return r;
}

RelaxationResult minimize_relaxation(const RealPolynomial& q, const SetDescriptor& set,
                                     int t, const ConicBackend& backend) {
  return solve(build_relaxation(q, set, t), backend, t);
}

SweepTable hierarchy_sweep(const RealPolynomial& q, const SetDescriptor& set,
                           const std::vector<int>& t_list, const ConicBackend& backend,
                           const SweepOptions& options) {
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (t_list[i] <= t_list[i - 1]) throw DomainError("t list must be strictly ascending");
  SweepTable table;
  table.degree = q.degree();
  const OracleBudget budget{options.oracle_restarts, options.oracle_iterations, 0.1};
  table.oracle_min = minimize(q, set, budget, options.seed).min_estimate;
  table.oracle_max = maximize(q, set, budget, options.seed).min_estimate;

  const int m = set.block_count();
  const bool has_constant =
      set.is_sphere_product() && m >= 2 && set.block_dim() >= 3 && table.degree >= 1;
  table.rate_constant = has_constant ? c_multisphere(set.block_dim(), table.degree, m)
                                     : std::numeric_limits<double>::quiet_NaN();

  // build eagerly so size and order errors surface before any solve
  std::vector<ConicProblem> problems;
  for (int t : t_list) problems.push_back(build_relaxation(q, set, t));

  std::vector<RelaxationResult> results(t_list.size());
  if (options.parallel && backend.concurrent_sessions() && t_list.size() > 1) {
    std::vector<std::future<RelaxationResult>> jobs;
    for (std::size_t i = 0; i < t_list.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return solve(problems[i], backend, t_list[i]);
      }));
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < t_list.size(); ++i)
      results[i] = solve(problems[i], backend, t_list[i]);
  }

  for (std::size_t i = 0; i < t_list.size(); ++i) {
    SweepRow row;
    row.t = t_list[i];
    row.lower_bound = results[i].lower_bound;
    row.oracle_min = table.oracle_min;
    row.gap = table.oracle_min - row.lower_bound;
    row.status = results[i].status;
    row.certificate_degree = results[i].certificate_degree;
    // kernel order t' = t / m
    const double kernel_t = double(row.t) / m;
    row.theory_bound = has_constant ? table.rate_constant / (kernel_t * kernel_t) *
                                          (table.oracle_max - table.oracle_min)
                                    : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(row);
  }
  return table;
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "t,lower_bound,oracle_min,gap,theory_bound\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g\n", r.t, r.lower_bound,
                  r.oracle_min, r.gap, r.theory_bound);
    out << buf;
  }
  return out.str();
}

}  // namespace prodsos
