#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "prodsos/core.hpp"

namespace prodsos {

struct VariableBlock {
  std::string name;
  int dim = 0;
  bool operator==(const VariableBlock&) const = default;
};

/// Ordered list of named variable blocks; variables are numbered block by
/// block, so block i occupies [offset(i), offset(i) + dim(i)).
class VariableLayout {
 public:
  VariableLayout() = default;
  explicit VariableLayout(std::vector<VariableBlock> blocks);

  static VariableLayout single(std::string name, int dim) {
    return VariableLayout({VariableBlock{std::move(name), dim}});
  }

  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int total_dim() const { return total_; }
  int offset(int block) const { return offsets_.at(block); }
  int dim(int block) const { return blocks_.at(block).dim; }
  const std::string& name(int block) const { return blocks_.at(block).name; }

  /// Throws StructuralError for an unknown name.
  int block_index(std::string_view name) const;
  /// Block containing variable `var`.
  int block_of(int var) const;

  bool operator==(const VariableLayout& other) const {
    return blocks_ == other.blocks_;
  }

 private:
  std::vector<VariableBlock> blocks_;
  std::vector<int> offsets_;
  int total_ = 0;
};

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);

  static Monomial one(int dim) { return Monomial(std::vector<int>(dim, 0)); }
  static Monomial unit(int dim, int var, int power = 1);

  int size() const { return static_cast<int>(e_.size()); }
  int operator[](int i) const { return e_[i]; }
  const std::vector<int>& exponents() const { return e_; }
  int degree() const { return degree_; }
  int block_degree(const VariableLayout& layout, int block) const;

  Monomial operator*(const Monomial& other) const;
  /// Exponent of `var` changed by `delta`; caller guarantees the result is >= 0.
  Monomial shifted(int var, int delta) const;

  bool operator==(const Monomial& other) const { return e_ == other.e_; }

 private:
  std::vector<int> e_;
  int degree_ = 0;
};

/// Graded lexicographic order: lower degree first; within a degree,
/// x1^d precedes x1^(d-1) x2 and so on.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.exponents() > b.exponents();
  }
};

/// All monomials in `dim` variables of degree <= `degree`, graded-lex order.
std::vector<Monomial> monomials_up_to(int dim, int degree);
/// Monomials of exact degree `degree` in `dim` variables, graded-lex order.
std::vector<Monomial> monomials_of_degree(int dim, int degree);

namespace detail {
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
}  // namespace detail

/// Sparse polynomial with coefficients in `Scalar` (double or Complex).
/// Terms with magnitude below kDropTolerance are never stored.
template <typename Scalar>
class Polynomial {
 public:
  using Terms = std::map<Monomial, Scalar, GradedLexLess>;
  static constexpr double kDropTolerance = 1e-14;

  Polynomial() = default;
  explicit Polynomial(VariableLayout layout) : layout_(std::move(layout)) {}

  static Polynomial constant(const VariableLayout& layout, Scalar c) {
    Polynomial p(layout);
    p.add_term(Monomial::one(layout.total_dim()), c);
    return p;
  }
  static Polynomial variable(const VariableLayout& layout, int var) {
    if (var < 0 || var >= layout.total_dim())
      throw DimensionError("variable index out of range");
    Polynomial p(layout);
    p.add_term(Monomial::unit(layout.total_dim(), var), Scalar(1));
    return p;
  }
  static Polynomial variable(const VariableLayout& layout,
                             std::string_view block, int i) {
    const int b = layout.block_index(block);
    if (i < 0 || i >= layout.dim(b))
      throw DimensionError("variable index out of range in block");
    return variable(layout, layout.offset(b) + i);
  }

  const VariableLayout& layout() const { return layout_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Total degree; 0 for the zero polynomial (check is_zero()).
  int degree() const {
    return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
  }

  Scalar coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar(0) : it->second;
  }

  void add_term(const Monomial& m, Scalar c) {
    if (m.size() != layout_.total_dim())
      throw DimensionError("monomial length does not match layout");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
    if (detail::magnitude(it->second) < kDropTolerance) terms_.erase(it);
  }

  Polynomial& operator+=(const Polynomial& q) {
    require_same_layout(q);
    for (const auto& [m, c] : q.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& q) {
    require_same_layout(q);
    for (const auto& [m, c] : q.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(Scalar s) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (detail::magnitude(it->second) < kDropTolerance)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  friend Polynomial operator+(Polynomial p, const Polynomial& q) {
    return p += q;
  }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) {
    return p -= q;
  }
  friend Polynomial operator-(Polynomial p) { return p *= Scalar(-1); }
  friend Polynomial operator*(Polynomial p, Scalar s) { return p *= s; }
  friend Polynomial operator*(Scalar s, Polynomial p) { return p *= s; }
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    p.require_same_layout(q);
    Polynomial r(p.layout_);
    for (const auto& [mp, cp] : p.terms_)
      for (const auto& [mq, cq] : q.terms_) r.add_term(mp * mq, cp * cq);
    return r;
  }
  Polynomial& operator*=(const Polynomial& q) { return *this = *this * q; }

  bool operator==(const Polynomial& other) const {
    return layout_ == other.layout_ && terms_ == other.terms_;
  }

  void require_same_layout(const Polynomial& q) const {
    if (!(layout_ == q.layout_))
      throw StructuralError("polynomials have different variable layouts");
  }

 private:
  VariableLayout layout_;
  Terms terms_;
};

using RealPolynomial = Polynomial<double>;
using ComplexPolynomial = Polynomial<Complex>;

enum class ArithOp { add, sub, mul, scale };

/// Binary arithmetic dispatcher. For `scale`, q must be a constant polynomial
/// and the result is p times that constant.
template <typename Scalar>
Polynomial<Scalar> arith(const Polynomial<Scalar>& p,
                         const Polynomial<Scalar>& q, ArithOp op) {
  p.require_same_layout(q);
  switch (op) {
    case ArithOp::add:
      return p + q;
    case ArithOp::sub:
      return p - q;
    case ArithOp::mul:
      return p * q;
    case ArithOp::scale:
      if (q.degree() != 0)
        throw StructuralError("scale expects a constant polynomial");
      return p * q.coefficient(Monomial::one(p.layout().total_dim()));
  }
  throw StructuralError("unknown arithmetic operation");
}

/// p(z) by direct monomial evaluation with per-variable power tables.
template <typename Scalar, typename Derived>
auto evaluate(const Polynomial<Scalar>& p, const Eigen::MatrixBase<Derived>& z)
    -> std::common_type_t<Scalar, typename Derived::Scalar> {
  using Out = std::common_type_t<Scalar, typename Derived::Scalar>;
  const int n = p.layout().total_dim();
  if (z.size() != n) throw DimensionError("point length does not match layout");
  if (p.is_zero()) return Out(0);
  std::vector<int> max_exp(n, 0);
  for (const auto& [m, c] : p.terms())
    for (int i = 0; i < n; ++i) max_exp[i] = std::max(max_exp[i], m[i]);
  std::vector<std::vector<Out>> powers(n);
  for (int i = 0; i < n; ++i) {
    powers[i].resize(max_exp[i] + 1);
    powers[i][0] = Out(1);
    for (int e = 1; e <= max_exp[i]; ++e)
      powers[i][e] = powers[i][e - 1] * Out(z(i));
  }
  Out sum(0);
  for (const auto& [m, c] : p.terms()) {
    Out term = Out(c);
    for (int i = 0; i < n; ++i)
      if (m[i] != 0) term *= powers[i][m[i]];
    sum += term;
  }
  return sum;
}

template <typename Scalar>
Polynomial<Scalar> derivative(const Polynomial<Scalar>& p, int var) {
  if (var < 0 || var >= p.layout().total_dim())
    throw DimensionError("derivative variable out of range");
  Polynomial<Scalar> r(p.layout());
  for (const auto& [m, c] : p.terms())
    if (m[var] > 0) r.add_term(m.shifted(var, -1), c * Scalar(m[var]));
  return r;
}

/// Sum of second partial derivatives over the variables of one block.
template <typename Scalar>
Polynomial<Scalar> laplacian(const Polynomial<Scalar>& p, int block) {
  const auto& layout = p.layout();
  if (block < 0 || block >= layout.block_count())
    throw StructuralError("unknown block");
  Polynomial<Scalar> r(layout);
  const int lo = layout.offset(block);
  const int hi = lo + layout.dim(block);
  for (const auto& [m, c] : p.terms())
    for (int v = lo; v < hi; ++v)
      if (m[v] >= 2)
        r.add_term(m.shifted(v, -2), c * Scalar(m[v] * (m[v] - 1)));
  return r;
}

template <typename Scalar>
Polynomial<Scalar> laplacian(const Polynomial<Scalar>& p,
                             std::string_view block) {
  return laplacian(p, p.layout().block_index(block));
}

/// Squared Euclidean norm of the variables of one block.
template <typename Scalar>
Polynomial<Scalar> block_norm_squared(const VariableLayout& layout, int block) {
  Polynomial<Scalar> r(layout);
  const int n = layout.total_dim();
  for (int v = layout.offset(block); v < layout.offset(block) + layout.dim(block);
       ++v)
    r.add_term(Monomial::unit(n, v, 2), Scalar(1));
  return r;
}

/// Terms whose degree in `block` equals `degree`.
template <typename Scalar>
Polynomial<Scalar> block_homogeneous_part(const Polynomial<Scalar>& p,
                                          int block, int degree) {
  Polynomial<Scalar> r(p.layout());
  for (const auto& [m, c] : p.terms())
    if (m.block_degree(p.layout(), block) == degree) r.add_term(m, c);
  return r;
}

template <typename Scalar>
int block_degree(const Polynomial<Scalar>& p, int block) {
  int d = 0;
  for (const auto& [m, c] : p.terms())
    d = std::max(d, m.block_degree(p.layout(), block));
  return d;
}

template <typename Scalar>
double max_abs_coefficient(const Polynomial<Scalar>& p) {
  double r = 0.0;
  for (const auto& [m, c] : p.terms()) r = std::max(r, detail::magnitude(c));
  return r;
}

template <typename Scalar>
Polynomial<Scalar> power(const Polynomial<Scalar>& p, int e) {
  auto r = Polynomial<Scalar>::constant(p.layout(), Scalar(1));
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

/// Same terms with every coefficient of magnitude <= tol removed.
template <typename Scalar>
Polynomial<Scalar> chop(const Polynomial<Scalar>& p, double tol) {
  Polynomial<Scalar> r(p.layout());
  for (const auto& [m, c] : p.terms())
    if (detail::magnitude(c) > tol) r.add_term(m, c);
  return r;
}

ComplexPolynomial to_complex(const RealPolynomial& p);
ComplexPolynomial conjugate(const ComplexPolynomial& p);
RealPolynomial real_part(const ComplexPolynomial& p);
RealPolynomial imag_part(const ComplexPolynomial& p);

/// Re-expresses p over a layout with the same total dimension.
template <typename Scalar>
Polynomial<Scalar> relabel(const Polynomial<Scalar>& p,
                           const VariableLayout& layout) {
  if (layout.total_dim() != p.layout().total_dim())
    throw StructuralError("relabel requires equal total dimension");
  Polynomial<Scalar> r(layout);
  for (const auto& [m, c] : p.terms()) r.add_term(m, c);
  return r;
}

/// Flattened real polynomial with symbolic partials, for repeated
/// evaluation inside local optimizers.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const RealPolynomial& p, bool with_gradient = true);

  int dim() const { return dim_; }
  double value(const VectorXd& x) const;
  /// Value and Euclidean gradient at x.
  double value_and_gradient(const VectorXd& x, VectorXd& grad) const;

 private:
  struct Flat {
    std::vector<int> exps;  // term-major, dim_ entries per term
    std::vector<double> coeffs;
    int max_exp = 0;
  };
  static Flat flatten(const RealPolynomial& p);
  double eval_flat(const Flat& f, const std::vector<double>& powers) const;
  void fill_powers(const VectorXd& x) const;

  int dim_ = 0;
  int max_exp_ = 0;
  Flat value_;
  std::vector<Flat> partials_;
  mutable std::vector<double> powers_;
};

}  // namespace prodsos
