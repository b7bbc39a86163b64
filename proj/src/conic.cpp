#include "prodsos/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <cstdio>
#include <cstdlib>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace prodsos {

// ---------------------------------------------------------------------------
// ConicProblem

void ConicProblem::validate() const {
  if (num_vars < 0) throw StructuralError("negative variable count");
  if (objective.size() != num_vars)
    throw StructuralError("objective length does not match variable count");
  if (equalities.cols() != num_vars && equalities.rows() > 0)
    throw StructuralError("equality matrix has wrong column count");
  if (equality_rhs.size() != equalities.rows())
    throw StructuralError("equality right-hand side has wrong length");
  for (const auto& block : blocks) {
    if (block.size < 1) throw StructuralError("empty PSD block");
    for (const auto& e : block.entries) {
      if (e.var < LmiEntry::kConstant || e.var >= num_vars)
        throw StructuralError("LMI entry references unknown variable");
      if (e.row < 0 || e.col < e.row || e.col >= block.size)
        throw StructuralError("LMI entry outside the upper triangle");
    }
  }
  if (!moments.empty() && static_cast<int>(moments.size()) != num_vars)
    throw StructuralError("moment index map is not bijective on variables");
}

MatrixXd ConicProblem::block_value(int block, const VectorXd& y) const {
  const auto& b = blocks.at(block);
  MatrixXd f = MatrixXd::Zero(b.size, b.size);
  for (const auto& e : b.entries) {
    const double v = e.var == LmiEntry::kConstant ? e.value : e.value * y(e.var);
    f(e.row, e.col) += v;
    if (e.row != e.col) f(e.col, e.row) += v;
  }
  return f;
}

int ConicProblem::moment_index(const Monomial& m) const {
  auto it = std::lower_bound(moments.begin(), moments.end(), m, GradedLexLess{});
  if (it == moments.end() || !(*it == m))
    throw StructuralError("monomial is not a variable of this problem");
  return static_cast<int>(it - moments.begin());
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::optimal:
      return "optimal";
    case SolverStatus::near_optimal:
      return "near_optimal";
    case SolverStatus::infeasible:
      return "infeasible";
    case SolverStatus::unbounded:
      return "unbounded";
    case SolverStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

std::unique_ptr<ConicBackend> make_backend(const std::string& spec,
                                           SolverTolerances tolerances) {
  if (spec.empty() || spec == "ipm" || spec == "ipm-hkm")
    return std::make_unique<InteriorPointBackend>(tolerances);
  throw ParseError("unknown backend '" + spec + "' (available: ipm)");
}

// ---------------------------------------------------------------------------
// Equality elimination

AffineParametrization eliminate_equalities(const SparseRowMatrix& a,
                                           const VectorXd& b, int num_vars) {
  AffineParametrization out;
  // pivot var -> (constant, {free var -> coefficient}) meaning
  // y_pivot = constant + sum coefficient * y_free
  struct Expr {
    double constant = 0.0;
    std::map<int, double> coef;
  };
  std::map<int, Expr> pivots;
  std::vector<std::set<int>> users(num_vars);

  for (int r = 0; r < a.rows(); ++r) {
    std::map<int, double> row;
    double rhs = b(r);
    double scale = 0.0;
    for (SparseRowMatrix::InnerIterator it(a, r); it; ++it) {
      row[static_cast<int>(it.col())] += it.value();
      scale = std::max(scale, std::abs(it.value()));
    }
    if (scale == 0.0) {
      if (std::abs(rhs) > 1e-9) {
        out.consistent = false;
        out.inconsistency = std::max(out.inconsistency, std::abs(rhs));
      } else {
        ++out.redundant_rows;
      }
      continue;
    }
    // substitute existing pivots
    std::vector<std::pair<int, double>> hits;
    for (const auto& [v, c] : row)
      if (pivots.count(v)) hits.emplace_back(v, c);
    for (const auto& [v, c] : hits) {
      row.erase(v);
      const auto& e = pivots.at(v);
      rhs -= c * e.constant;
      for (const auto& [j, cj] : e.coef) row[j] += c * cj;
    }
    double max_abs = 0.0;
    for (auto it = row.begin(); it != row.end();) {
      if (std::abs(it->second) <= 1e-12 * scale) {
        it = row.erase(it);
      } else {
        max_abs = std::max(max_abs, std::abs(it->second));
        ++it;
      }
    }
    if (row.empty()) {
      if (std::abs(rhs) > 1e-9 * (1.0 + std::abs(b(r)))) {
        out.consistent = false;
        out.inconsistency = std::max(out.inconsistency, std::abs(rhs));
      } else {
        ++out.redundant_rows;
      }
      continue;
    }
    // threshold pivoting; prefer the highest index (highest degree moment)
    int pivot = -1;
    for (const auto& [v, c] : row)
      if (std::abs(c) >= 0.5 * max_abs) pivot = v;
    const double pc = row.at(pivot);
    Expr expr;
    expr.constant = rhs / pc;
    for (const auto& [v, c] : row)
      if (v != pivot) expr.coef[v] = -c / pc;

    // keep every pivot expression in terms of free variables only
    const std::set<int> dependents = users[pivot];
    for (int p : dependents) {
      auto& ep = pivots.at(p);
      const double w = ep.coef.at(pivot);
      ep.coef.erase(pivot);
      ep.constant += w * expr.constant;
      for (const auto& [j, cj] : expr.coef) {
        double& slot = ep.coef[j];
        slot += w * cj;
        if (std::abs(slot) <= 1e-14) {
          ep.coef.erase(j);
          users[j].erase(p);
        } else {
          users[j].insert(p);
        }
      }
    }
    users[pivot].clear();
    for (const auto& [j, cj] : expr.coef) users[j].insert(pivot);
    pivots.emplace(pivot, std::move(expr));
  }

  std::vector<int> column_of(num_vars, -1);
  for (int v = 0; v < num_vars; ++v)
    if (!pivots.count(v)) {
      column_of[v] = static_cast<int>(out.free_vars.size());
      out.free_vars.push_back(v);
    }
  out.particular = VectorXd::Zero(num_vars);
  std::vector<Eigen::Triplet<double>> trips;
  for (int v : out.free_vars) trips.emplace_back(v, column_of[v], 1.0);
  for (const auto& [p, e] : pivots) {
    out.particular(p) = e.constant;
    for (const auto& [j, cj] : e.coef) trips.emplace_back(p, column_of[j], cj);
  }
  out.basis.resize(num_vars, static_cast<int>(out.free_vars.size()));
  out.basis.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------
// Interior point method

namespace {

struct FullEntry {
  int var;
  int row;
  int col;
  double value;
};

struct BlockData {
  int size = 0;
  std::vector<FullEntry> linear;  // both triangles, sorted by var
  std::vector<LmiEntry> upper;    // linear part, upper triangle
  MatrixXd constant;              // F_0
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Operator {
 public:
  Operator(const ConicProblem& problem) : num_vars_(problem.num_vars) {
    for (const auto& block : problem.blocks) {
      BlockData data;
      data.size = block.size;
      data.constant = MatrixXd::Zero(block.size, block.size);
      for (const auto& e : block.entries) {
        if (e.var == LmiEntry::kConstant) {
          data.constant(e.row, e.col) += e.value;
          if (e.row != e.col) data.constant(e.col, e.row) += e.value;
          continue;
        }
        data.upper.push_back(e);
        data.linear.push_back({e.var, e.row, e.col, e.value});
        if (e.row != e.col) data.linear.push_back({e.var, e.col, e.row, e.value});
      }
      std::stable_sort(data.linear.begin(), data.linear.end(),
                       [](const FullEntry& a, const FullEntry& b) { return a.var < b.var; });
      blocks_.push_back(std::move(data));
    }
  }

  int block_count() const { return static_cast<int>(blocks_.size()); }
  int size(int b) const { return blocks_[b].size; }
  const MatrixXd& constant(int b) const { return blocks_[b].constant; }

  /// sum_i y_i F_i (+ F_0 when requested).
  std::vector<MatrixXd> apply(const VectorXd& y, bool with_constant) const {
    std::vector<MatrixXd> out;
    for (const auto& b : blocks_) {
      MatrixXd m = with_constant ? b.constant : MatrixXd::Zero(b.size, b.size);
      for (const auto& e : b.upper) {
        const double v = e.value * y(e.var);
        m(e.row, e.col) += v;
        if (e.row != e.col) m(e.col, e.row) += v;
      }
      out.push_back(std::move(m));
    }
    return out;
  }

  /// v_i = sum_j <F_i, Y_j> for symmetric Y_j.
  VectorXd adjoint(const std::vector<MatrixXd>& ys) const {
    VectorXd v = VectorXd::Zero(num_vars_);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      for (const auto& e : blocks_[b].upper)
        v(e.var) += (e.row == e.col ? 1.0 : 2.0) * e.value * ys[b](e.row, e.col);
    return v;
  }

  /// M_kl = sum_j tr(F_k X_j F_l S_j^{-1}).
  RowMajorMatrix schur(const std::vector<MatrixXd>& x,
                       const std::vector<MatrixXd>& s_inv) const {
    RowMajorMatrix m = RowMajorMatrix::Zero(num_vars_, num_vars_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& entries = blocks_[b].linear;
      const MatrixXd& xb = x[b];
      const MatrixXd& sb = s_inv[b];
      const std::size_t count = entries.size();
      std::size_t group_start = 0;
      for (std::size_t i = 0; i < count; ++i) {
        const FullEntry& ei = entries[i];
        if (i > 0 && entries[i - 1].var != ei.var) group_start = i;
        const double* xcol = xb.col(ei.col).data();
        const double* scol = sb.col(ei.row).data();
        double* mrow = m.row(ei.var).data();
        const double v = ei.value;
        for (std::size_t j = group_start; j < count; ++j) {
          const FullEntry& ej = entries[j];
          mrow[ej.var] += v * ej.value * xcol[ej.row] * scol[ej.col];
        }
      }
    }
    for (int k = 0; k < num_vars_; ++k)
      for (int l = k + 1; l < num_vars_; ++l) m(l, k) = m(k, l);
    return m;
  }

  /// Frobenius norm of each F_i summed over blocks.
  VectorXd coefficient_norms() const {
    VectorXd n = VectorXd::Zero(num_vars_);
    for (const auto& b : blocks_)
      for (const auto& e : b.linear) n(e.var) += e.value * e.value;
    return n.cwiseSqrt();
  }

 private:
  int num_vars_;
  std::vector<BlockData> blocks_;
};

double inner(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].array() * b[i].array()).sum();
  return s;
}

double frobenius(const std::vector<MatrixXd>& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha in (0, inf] with X + alpha dX PSD, given chol(X).
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dx) {
  const auto& l = chol.matrixL();
  const MatrixXd half = l.solve(dx);
  const MatrixXd w = symmetrize(l.solve(MatrixXd(half.transpose())));
  double lmin;
  if (w.rows() == 1) {
    lmin = w(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(w, Eigen::EigenvaluesOnly);
    lmin = eig.eigenvalues()(0);
  }
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step(const std::vector<Eigen::LLT<MatrixXd>>& chols,
                const std::vector<MatrixXd>& d) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) a = std::min(a, max_step(chols[i], d[i]));
  return a;
}

bool factor_all(const std::vector<MatrixXd>& ms, std::vector<Eigen::LLT<MatrixXd>>& out) {
  out.clear();
  for (const auto& m : ms) {
    out.emplace_back(m);
    if (out.back().info() != Eigen::Success) return false;
  }
  return true;
}

// Cholesky of the Jacobi-scaled Schur complement. Near the boundary the
// assembled matrix can lose definiteness to rounding; a small ridge restores
// it and iterative refinement against the operator recovers the accuracy.
class SchurSolver {
 public:
  explicit SchurSolver(const MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    scale_ = VectorXd::Ones(n);
    for (int i = 0; i < n; ++i)
      if (m(i, i) > 0.0) scale_(i) = 1.0 / std::sqrt(m(i, i));
    MatrixXd scaled = scale_.asDiagonal() * m * scale_.asDiagonal();
    llt_.compute(scaled);
    for (double ridge = 1e-13; llt_.info() != Eigen::Success && ridge < 1e-2; ridge *= 100) {
      scaled.diagonal().array() += ridge - ridge_;
      ridge_ = ridge;
      llt_.compute(scaled);
    }
    ok_ = llt_.info() == Eigen::Success;
  }
  bool ok() const { return ok_; }
  double ridge() const { return ridge_; }
  VectorXd solve(const VectorXd& rhs) const {
    return scale_.asDiagonal() * llt_.solve(VectorXd(scale_.asDiagonal() * rhs));
  }

 private:
  Eigen::LLT<MatrixXd> llt_;
  VectorXd scale_;
  double ridge_ = 0.0;
  bool ok_ = true;
};

// Rows (and columns) of each block that may be dropped: F(y) v = 0 for all
// y on the affine set and every v in a shared kernel V, so when V restricted
// to the dropped indices is invertible those rows are combinations of the
// kept ones and F(y) is PSD iff its kept principal submatrix is. Sphere
// ideals put such a kernel into every moment matrix; left in place it
// removes the interior and the method stalls far from optimal.
std::vector<std::vector<int>> shared_kernel_rows(const ConicProblem& problem,
                                                 const AffineParametrization& param) {
  std::vector<std::vector<int>> drop(problem.blocks.size());
  const SparseMatrix& basis = param.basis;
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const LmiBlock& block = problem.blocks[b];
    const int n = block.size;
    if (n < 2) continue;
    std::vector<std::vector<const LmiEntry*>> by_var(problem.num_vars);
    for (const auto& e : block.entries)
      if (e.var != LmiEntry::kConstant) by_var[e.var].push_back(&e);

    // K = sum_f G_f^2 over G_0 = F(y_p) and G_f = F_lin(N e_f)
    MatrixXd g0 = problem.block_value(static_cast<int>(b), param.particular);
    MatrixXd k = g0 * g0;
    std::vector<Eigen::Triplet<double>> trips;
    for (int f = 0; f < basis.cols(); ++f) {
      trips.clear();
      for (SparseMatrix::InnerIterator it(basis, f); it; ++it)
        for (const LmiEntry* e : by_var[it.row()]) {
          trips.emplace_back(e->row, e->col, it.value() * e->value);
          if (e->row != e->col) trips.emplace_back(e->col, e->row, it.value() * e->value);
        }
      if (trips.empty()) continue;
      SparseMatrix g(n, n);
      g.setFromTriplets(trips.begin(), trips.end());
      k += MatrixXd(g * g);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    const VectorXd& lam = eig.eigenvalues();
    const double top = lam(n - 1);
    if (!(top > 0.0)) continue;
    int dim = 0;
    while (dim < n && lam(dim) <= 1e-12 * top) ++dim;
    if (dim == 0 || dim == n) continue;

    // pivoted QR on V^T picks a well-conditioned set of rows to drop
    const MatrixXd vt = eig.eigenvectors().leftCols(dim).transpose();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(vt);
    const auto& r = qr.matrixQR();
    if (std::abs(r(dim - 1, dim - 1)) < 1e-6 * std::abs(r(0, 0))) continue;
    for (int i = 0; i < dim; ++i) drop[b].push_back(qr.colsPermutation().indices()(i));
    std::sort(drop[b].begin(), drop[b].end());
  }
  return drop;
}

ConicProblem without_rows(const ConicProblem& problem,
                          const std::vector<std::vector<int>>& drop) {
  ConicProblem reduced = problem;
  for (std::size_t b = 0; b < drop.size(); ++b) {
    if (drop[b].empty()) continue;
    LmiBlock& block = reduced.blocks[b];
    std::vector<int> slot(block.size, 0);
    for (int i : drop[b]) slot[i] = -1;
    int next = 0;
    for (int& s : slot)
      if (s == 0) s = next++;
    std::vector<LmiEntry> kept;
    for (const auto& e : block.entries)
      if (slot[e.row] >= 0 && slot[e.col] >= 0)
        kept.push_back({e.var, slot[e.row], slot[e.col], e.value});
    block.size = next;
    block.entries = std::move(kept);
  }
  return reduced;
}

ConicSolution interior_point(const ConicProblem& problem, const AffineParametrization& param,
                             const SolverTolerances& tol);

}  // namespace

ConicSolution InteriorPointBackend::solve(const ConicProblem& problem) const {
  problem.validate();
  const auto param = eliminate_equalities(problem.equalities, problem.equality_rhs,
                                          problem.num_vars);
  if (!param.consistent) {
    ConicSolution sol;
    sol.status = SolverStatus::infeasible;
    std::ostringstream msg;
    msg << "equality constraints are inconsistent (residual " << param.inconsistency
        << ")";
    sol.message = msg.str();
    return sol;
  }

  const auto drop = shared_kernel_rows(problem, param);
  if (std::all_of(drop.begin(), drop.end(), [](const auto& d) { return d.empty(); }))
    return interior_point(problem, param, tolerances_);
  if (std::getenv("PRODSOS_TRACE"))
    for (std::size_t b = 0; b < drop.size(); ++b)
      std::fprintf(stderr, "block %zu: dropping %zu of %d rows\n", b, drop[b].size(),
                   problem.blocks[b].size);

  ConicSolution sol = interior_point(without_rows(problem, drop), param, tolerances_);
  // zero rows and columns keep every dual block feasible for the full problem
  for (std::size_t b = 0; b < drop.size() && b < sol.dual_blocks.size(); ++b) {
    if (drop[b].empty()) continue;
    const int n = problem.blocks[b].size;
    std::vector<int> kept;
    for (int i = 0, j = 0; i < n; ++i) {
      if (j < static_cast<int>(drop[b].size()) && drop[b][j] == i) {
        ++j;
        continue;
      }
      kept.push_back(i);
    }
    MatrixXd full = MatrixXd::Zero(n, n);
    const MatrixXd& x = sol.dual_blocks[b];
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) full(kept[r], kept[c]) = x(r, c);
    sol.dual_blocks[b] = std::move(full);
  }
  return sol;
}

namespace {

ConicSolution interior_point(const ConicProblem& problem, const AffineParametrization& param,
                             const SolverTolerances& tol) {
  ConicSolution sol;
  const bool trace = std::getenv("PRODSOS_TRACE") != nullptr;

  const Operator op(problem);
  const SparseMatrix& basis = param.basis;
  const int p = static_cast<int>(basis.cols());
  const VectorXd& yp = param.particular;
  const VectorXd& c = problem.objective;
  const VectorXd c_hat = basis.transpose() * c;
  const double c_const = c.dot(yp) + problem.objective_offset;

  const int nblocks = op.block_count();
  if (nblocks == 0) {
    // linear objective over an affine set
    if (c_hat.norm() > tol.feasibility * (1.0 + c.norm())) {
      sol.status = SolverStatus::unbounded;
      sol.message = "objective unbounded on the affine feasible set";
      return sol;
    }
    sol.status = SolverStatus::optimal;
    sol.y = yp;
    sol.primal_objective = sol.dual_objective = sol.safe_lower_bound = c_const;
    sol.dual_certified = true;
    return sol;
  }

  int total_size = 0;
  for (int b = 0; b < nblocks; ++b) total_size += op.size(b);

  const std::vector<MatrixXd> g0 = op.apply(yp, true);
  const double g0_norm = frobenius(g0);
  const double c_hat_norm = c_hat.norm();

  // starting point
  const VectorXd f_norms = op.coefficient_norms();
  double xi = std::max(10.0, std::sqrt(static_cast<double>(total_size)));
  double eta = std::max({10.0, std::sqrt(static_cast<double>(total_size)), g0_norm});
  for (int f = 0; f < p; ++f) {
    double nf = 0.0;
    for (SparseMatrix::InnerIterator it(basis, f); it; ++it)
      nf += std::abs(it.value()) * f_norms(it.row());
    xi = std::max(xi, std::sqrt(static_cast<double>(total_size)) *
                          (1.0 + std::abs(c_hat(f))) / (1.0 + nf));
    eta = std::max(eta, nf);
  }
  std::vector<MatrixXd> x, s;
  for (int b = 0; b < nblocks; ++b) {
    x.push_back(xi * MatrixXd::Identity(op.size(b), op.size(b)));
    s.push_back(eta * MatrixXd::Identity(op.size(b), op.size(b)));
  }
  VectorXd z = VectorXd::Zero(p);

  // best iterate seen so far, by max(pinf, dinf, gap)
  struct Snapshot {
    double merit = std::numeric_limits<double>::infinity();
    VectorXd z;
    std::vector<MatrixXd> x;
    double pobj = 0, dobj = 0, pinf = 0, dinf = 0, gap = 0, safe = 0;
    int iteration = 0;
  } best;

  auto finish = [&](SolverStatus status, std::string message, const Snapshot& at) {
    sol.status = status;
    sol.message = std::move(message);
    sol.y = yp + basis * at.z;
    sol.dual_blocks = at.x;
    sol.primal_objective = at.pobj;
    sol.dual_objective = at.dobj;
    sol.primal_infeasibility = at.pinf;
    sol.dual_infeasibility = at.dinf;
    sol.relative_gap = at.gap;
    sol.safe_lower_bound = at.safe;
    sol.dual_certified = at.dinf <= tol.feasibility || std::isfinite(at.safe);
    if (!std::isfinite(sol.safe_lower_bound) && at.dinf <= tol.feasibility)
      sol.safe_lower_bound = at.dobj;
    return sol;
  };

  // Gram matrix of the reduced operator, used to put every direction back
  // on the dual-feasible affine set: an inexact Schur solve would otherwise
  // leak straight into the dual residual
  std::vector<MatrixXd> ident(nblocks);
  for (int b = 0; b < nblocks; ++b) ident[b] = MatrixXd::Identity(op.size(b), op.size(b));
  const MatrixXd gram = basis.transpose() * (MatrixXd(op.schur(ident, ident)) * basis);
  const SchurSolver gram_solver(gram);

  std::vector<Eigen::LLT<MatrixXd>> chol_x, chol_s;
  int stalled = 0;
  int last_progress = 0;
  std::string stop = "iteration limit reached";
  for (int iter = 0; iter < tol.max_iterations; ++iter) {
    sol.iterations = iter;
    const VectorXd y = yp + basis * z;
    const auto fy = op.apply(y, true);
    std::vector<MatrixXd> rd(nblocks);
    for (int b = 0; b < nblocks; ++b) rd[b] = fy[b] - s[b];
    const VectorXd ax = basis.transpose() * op.adjoint(x);
    const VectorXd rp = c_hat - ax;
    const double mu = inner(x, s) / total_size;

    Snapshot now;
    now.z = z;
    now.x = x;
    now.iteration = iter;
    now.pobj = c.dot(y) + problem.objective_offset;
    now.dobj = c_const - inner(g0, x);
    now.pinf = frobenius(rd) / (1.0 + g0_norm);
    now.dinf = rp.norm() / (1.0 + c_hat_norm);
    now.gap = std::abs(now.pobj - now.dobj) / (1.0 + std::abs(now.pobj) + std::abs(now.dobj));
    // for any feasible y = y_p + N z':
    //   c^T y = dobj + <F(y), X> + rp^T z' >= dobj - bound * |rp|_1
    now.safe = std::isfinite(problem.variable_bound)
                   ? now.dobj - problem.variable_bound * rp.lpNorm<1>()
                   : std::numeric_limits<double>::quiet_NaN();
    now.merit = std::max({now.pinf, now.dinf, now.gap});
    if (trace)
      std::fprintf(stderr, "%3d pobj %.10e dobj %.10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n",
                   iter, now.pobj, now.dobj, now.pinf, now.dinf, now.gap, mu);
    if (now.merit < 0.9 * best.merit) last_progress = iter;
    if (now.merit < best.merit) best = now;

    if (now.pinf <= tol.feasibility && now.dinf <= tol.feasibility && now.gap <= tol.gap)
      return finish(SolverStatus::optimal, "converged", now);

    // X PSD with A(X) ~ 0 and -<F(y_p), X> > 0 certifies an empty moment side
    double trace_x = 0.0;
    for (const auto& xb : x) trace_x += xb.trace();
    const double ray = -inner(g0, x);
    if (trace_x > 1e8 && ray > 0.0 && ax.norm() / ray < 1e-7)
      return finish(SolverStatus::infeasible, "infeasibility certificate found", now);
    if (now.pobj < -1e10 && now.pinf <= 1e-6)
      return finish(SolverStatus::unbounded, "objective diverges to -infinity", now);
    // accuracy lost: residuals far above the best iterate
    if (best.merit < 1e-5 && now.merit > 1e3 * best.merit) {
      stop = "residuals diverged from the best iterate";
      break;
    }

    if (iter - last_progress >= 8) {
      stop = "no progress in 8 iterations";
      break;
    }
    if (!factor_all(x, chol_x) || !factor_all(s, chol_s)) {
      stop = "iterate left the cone";
      break;
    }
    std::vector<MatrixXd> s_inv(nblocks);
    for (int b = 0; b < nblocks; ++b)
      s_inv[b] = chol_s[b].solve(MatrixXd::Identity(op.size(b), op.size(b)));

    const RowMajorMatrix m_full = op.schur(x, s_inv);
    const MatrixXd mt = MatrixXd(m_full) * basis;
    const MatrixXd m = basis.transpose() * mt;
    const SchurSolver schur(m);
    if (!schur.ok()) {
      stop = "singular Schur complement";
      break;
    }

    std::vector<MatrixXd> xrs(nblocks);
    for (int b = 0; b < nblocks; ++b) xrs[b] = x[b] * rd[b] * s_inv[b];

    double newton_error = 0.0;
    // HKM direction for the target sigma*mu, with optional second-order term
    auto direction = [&](double target, const std::vector<MatrixXd>* corr,
                         VectorXd& dz, std::vector<MatrixXd>& ds,
                         std::vector<MatrixXd>& dx) {
      std::vector<MatrixXd> r(nblocks);
      for (int b = 0; b < nblocks; ++b) {
        MatrixXd t = target * s_inv[b] - xrs[b];
        if (corr) t -= (*corr)[b] * s_inv[b];
        r[b] = symmetrize(t);
      }
      const VectorXd rhs = basis.transpose() * op.adjoint(r) - c_hat;
      dz = schur.solve(rhs);
      // iterative refinement against the operator form of M, which is
      // more accurate than the assembled matrix near the boundary
      auto residual = [&](const VectorXd& v) {
        const auto fd = op.apply(basis * v, false);
        std::vector<MatrixXd> w(nblocks);
        for (int b = 0; b < nblocks; ++b) w[b] = symmetrize(x[b] * fd[b] * s_inv[b]);
        return VectorXd(rhs - basis.transpose() * op.adjoint(w));
      };
      VectorXd res = residual(dz);
      for (int pass = 0; pass < 5; ++pass) {
        if (res.norm() <= 1e-14 * (1.0 + rhs.norm())) break;
        const VectorXd trial = dz + schur.solve(res);
        const VectorXd trial_res = residual(trial);
        if (trial_res.norm() >= res.norm()) break;
        dz = trial;
        res = trial_res;
      }
      newton_error = std::max(newton_error, res.norm() / (1.0 + rhs.norm()));
      const VectorXd dy = basis * dz;
      ds = op.apply(dy, false);
      dx.resize(nblocks);
      for (int b = 0; b < nblocks; ++b) {
        ds[b] += rd[b];
        MatrixXd t = target * s_inv[b] - x[b] - x[b] * ds[b] * s_inv[b];
        if (corr) t -= (*corr)[b] * s_inv[b];
        dx[b] = symmetrize(t);
      }
      if (gram_solver.ok()) {
        const VectorXd miss = rp - basis.transpose() * op.adjoint(dx);
        const auto fix = op.apply(basis * gram_solver.solve(miss), false);
        for (int b = 0; b < nblocks; ++b) dx[b] += fix[b];
      }
    };

    VectorXd dz;
    std::vector<MatrixXd> ds, dx;
    direction(0.0, nullptr, dz, ds, dx);
    const double ap_aff = std::min(1.0, max_step(chol_x, dx));
    const double ad_aff = std::min(1.0, max_step(chol_s, ds));
    double mu_aff = 0.0;
    for (int b = 0; b < nblocks; ++b)
      mu_aff += ((x[b] + ap_aff * dx[b]).array() * (s[b] + ad_aff * ds[b]).array()).sum();
    mu_aff /= total_size;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3), 0.0, 1.0);

    std::vector<MatrixXd> corr(nblocks);
    for (int b = 0; b < nblocks; ++b) corr[b] = dx[b] * ds[b];
    direction(sigma * mu, &corr, dz, ds, dx);

    // an inaccurate Newton step would only destroy the best iterate
    if (newton_error > 0.5) {
      if (trace)
        std::fprintf(stderr, "    newton %.2e ridge %.0e\n", newton_error, schur.ridge());
      stop = "inaccurate Newton step";
      break;
    }

    const double tau = 0.98;
    const double ap = std::min(1.0, tau * max_step(chol_x, dx));
    const double ad = std::min(1.0, tau * max_step(chol_s, ds));
    if (trace) {
      std::fprintf(stderr, "    sigma %.2e ap %.3e ad %.3e newton %.2e ridge %.0e\n", sigma, ap,
                   ad, newton_error, schur.ridge());
    }

    for (int b = 0; b < nblocks; ++b) {
      x[b] = symmetrize(x[b] + ap * dx[b]);
      s[b] = symmetrize(s[b] + ad * ds[b]);
    }
    z += ad * dz;

    stalled = (ap < 1e-6 && ad < 1e-6) ? stalled + 1 : 0;
    if (stalled >= 3) {
      stop = "step length stalled";
      break;
    }
  }

  const bool close = best.merit <= 1e-5;
  if (trace) std::fprintf(stderr, "  stop: %s, best merit %.2e\n", stop.c_str(), best.merit);
  return finish(close ? SolverStatus::near_optimal : SolverStatus::numerical_failure,
                stop + (close ? "; returning the best iterate" : "; no usable iterate"), best);
}

}  // namespace

// ---------------------------------------------------------------------------
// Serialization

void write_problem(std::ostream& out, const ConicProblem& problem) {
  problem.validate();
  out << std::setprecision(17);
  out << "PRODSOS-CONIC 1\n";
  out << "VARS " << problem.num_vars << "\n";
  out << "OFFSET " << problem.objective_offset << "\n";
  out << "BOUND " << problem.variable_bound << "\n";
  int nnz = 0;
  for (int i = 0; i < problem.num_vars; ++i)
    if (problem.objective(i) != 0.0) ++nnz;
  out << "OBJ " << nnz << "\n";
  for (int i = 0; i < problem.num_vars; ++i)
    if (problem.objective(i) != 0.0) out << i << " " << problem.objective(i) << "\n";
  out << "EQ " << problem.equalities.rows() << " " << problem.equalities.nonZeros()
      << "\n";
  for (int r = 0; r < problem.equalities.rows(); ++r)
    for (SparseRowMatrix::InnerIterator it(problem.equalities, r); it; ++it)
      out << r << " " << it.col() << " " << it.value() << "\n";
  out << "RHS " << problem.equality_rhs.size() << "\n";
  for (int r = 0; r < problem.equality_rhs.size(); ++r)
    out << problem.equality_rhs(r) << "\n";
  out << "BLOCKS " << problem.blocks.size() << "\n";
  for (const auto& b : problem.blocks) {
    out << "BLOCK " << b.size << " " << b.entries.size() << "\n";
    for (const auto& e : b.entries)
      out << e.var << " " << e.row << " " << e.col << " " << e.value << "\n";
  }
  out << "END\n";
}

namespace {

void expect(std::istream& in, const std::string& keyword) {
  std::string word;
  if (!(in >> word) || word != keyword)
    throw ParseError("conic problem file: expected '" + keyword + "', got '" + word +
                     "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v;
  if (!(in >> v)) throw ParseError(std::string("conic problem file: bad ") + what);
  return v;
}

}  // namespace

ConicProblem read_problem(std::istream& in) {
  ConicProblem p;
  expect(in, "PRODSOS-CONIC");
  if (read_value<int>(in, "version") != 1)
    throw ParseError("conic problem file: unsupported version");
  expect(in, "VARS");
  p.num_vars = read_value<int>(in, "variable count");
  expect(in, "OFFSET");
  p.objective_offset = read_value<double>(in, "offset");
  expect(in, "BOUND");
  try {
    p.variable_bound = std::stod(read_value<std::string>(in, "bound"));
  } catch (const std::logic_error&) {
    throw ParseError("conic problem file: bad bound");
  }
  expect(in, "OBJ");
  p.objective = VectorXd::Zero(p.num_vars);
  const int obj_nnz = read_value<int>(in, "objective count");
  for (int k = 0; k < obj_nnz; ++k) {
    const int i = read_value<int>(in, "objective index");
    if (i < 0 || i >= p.num_vars) throw ParseError("conic problem file: bad index");
    p.objective(i) = read_value<double>(in, "objective value");
  }
  expect(in, "EQ");
  const int rows = read_value<int>(in, "row count");
  const int eq_nnz = read_value<int>(in, "equality count");
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < eq_nnz; ++k) {
    const int r = read_value<int>(in, "row");
    const int col = read_value<int>(in, "column");
    const double v = read_value<double>(in, "value");
    if (r < 0 || r >= rows || col < 0 || col >= p.num_vars)
      throw ParseError("conic problem file: equality entry out of range");
    trips.emplace_back(r, col, v);
  }
  p.equalities.resize(rows, p.num_vars);
  p.equalities.setFromTriplets(trips.begin(), trips.end());
  expect(in, "RHS");
  const int rhs_rows = read_value<int>(in, "rhs count");
  if (rhs_rows != rows) throw ParseError("conic problem file: rhs length mismatch");
  p.equality_rhs.resize(rows);
  for (int r = 0; r < rows; ++r) p.equality_rhs(r) = read_value<double>(in, "rhs");
  expect(in, "BLOCKS");
  const int nblocks = read_value<int>(in, "block count");
  for (int b = 0; b < nblocks; ++b) {
    expect(in, "BLOCK");
    LmiBlock block;
    block.size = read_value<int>(in, "block size");
    const int nnz = read_value<int>(in, "block entry count");
    for (int k = 0; k < nnz; ++k) {
      LmiEntry e;
      e.var = read_value<int>(in, "entry variable");
      e.row = read_value<int>(in, "entry row");
      e.col = read_value<int>(in, "entry column");
      e.value = read_value<double>(in, "entry value");
      block.entries.push_back(e);
    }
    p.blocks.push_back(std::move(block));
  }
  expect(in, "END");
  try {
    p.validate();
  } catch (const StructuralError& e) {
    throw ParseError(std::string("conic problem file: ") + e.what());
  }
  return p;
}

}  // namespace prodsos
