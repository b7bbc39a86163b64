#include "prodsos/polynomial.hpp"

#include <set>

namespace prodsos {

VariableLayout::VariableLayout(std::vector<VariableBlock> blocks)
    : blocks_(std::move(blocks)) {
  std::set<std::string> names;
  for (const auto& b : blocks_) {
    if (b.dim < 1) throw StructuralError("block '" + b.name + "' has dimension < 1");
    if (!names.insert(b.name).second)
      throw StructuralError("duplicate block name '" + b.name + "'");
    offsets_.push_back(total_);
    total_ += b.dim;
  }
}

int VariableLayout::block_index(std::string_view name) const {
  for (int i = 0; i < block_count(); ++i)
    if (blocks_[i].name == name) return i;
  throw StructuralError("unknown block '" + std::string(name) + "'");
}

int VariableLayout::block_of(int var) const {
  for (int i = block_count() - 1; i >= 0; --i)
    if (var >= offsets_[i]) return i;
  throw DimensionError("variable index out of range");
}

Monomial::Monomial(std::vector<int> exponents) : e_(std::move(exponents)) {
  for (int v : e_) {
    if (v < 0) throw DomainError("negative exponent");
    degree_ += v;
  }
}

Monomial Monomial::unit(int dim, int var, int power) {
  std::vector<int> e(dim, 0);
  e.at(var) = power;
  return Monomial(std::move(e));
}

int Monomial::block_degree(const VariableLayout& layout, int block) const {
  int d = 0;
  const int lo = layout.offset(block);
  for (int v = lo; v < lo + layout.dim(block); ++v) d += e_[v];
  return d;
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.size() != size()) throw DimensionError("monomial length mismatch");
  Monomial r = *this;
  for (int i = 0; i < size(); ++i) r.e_[i] += other.e_[i];
  r.degree_ += other.degree_;
  return r;
}

Monomial Monomial::shifted(int var, int delta) const {
  Monomial r = *this;
  r.e_.at(var) += delta;
  r.degree_ += delta;
  return r;
}

namespace {

void enumerate_degree(int dim, int degree, int var, std::vector<int>& cur,
                      std::vector<Monomial>& out) {
  if (var == dim - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    enumerate_degree(dim, degree - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<Monomial> monomials_of_degree(int dim, int degree) {
  std::vector<Monomial> out;
  if (dim == 0) {
    if (degree == 0) out.emplace_back(std::vector<int>{});
    return out;
  }
  std::vector<int> cur(dim, 0);
  enumerate_degree(dim, degree, 0, cur, out);
  return out;
}

std::vector<Monomial> monomials_up_to(int dim, int degree) {
  std::vector<Monomial> out;
  for (int d = 0; d <= degree; ++d) {
    auto slice = monomials_of_degree(dim, d);
    out.insert(out.end(), slice.begin(), slice.end());
  }
  return out;
}

ComplexPolynomial to_complex(const RealPolynomial& p) {
  ComplexPolynomial r(p.layout());
  for (const auto& [m, c] : p.terms()) r.add_term(m, Complex(c, 0.0));
  return r;
}

ComplexPolynomial conjugate(const ComplexPolynomial& p) {
  ComplexPolynomial r(p.layout());
  for (const auto& [m, c] : p.terms()) r.add_term(m, std::conj(c));
  return r;
}

RealPolynomial real_part(const ComplexPolynomial& p) {
  RealPolynomial r(p.layout());
  for (const auto& [m, c] : p.terms()) r.add_term(m, c.real());
  return r;
}

RealPolynomial imag_part(const ComplexPolynomial& p) {
  RealPolynomial r(p.layout());
  for (const auto& [m, c] : p.terms()) r.add_term(m, c.imag());
  return r;
}

CompiledPolynomial::CompiledPolynomial(const RealPolynomial& p,
                                       bool with_gradient)
    : dim_(p.layout().total_dim()) {
  value_ = flatten(p);
  max_exp_ = value_.max_exp;
  if (with_gradient) {
    for (int v = 0; v < dim_; ++v) {
      partials_.push_back(flatten(derivative(p, v)));
      max_exp_ = std::max(max_exp_, partials_.back().max_exp);
    }
  }
  powers_.resize(static_cast<std::size_t>(dim_) * (max_exp_ + 1));
}

CompiledPolynomial::Flat CompiledPolynomial::flatten(const RealPolynomial& p) {
  Flat f;
  for (const auto& [m, c] : p.terms()) {
    f.exps.insert(f.exps.end(), m.exponents().begin(), m.exponents().end());
    f.coeffs.push_back(c);
    for (int e : m.exponents()) f.max_exp = std::max(f.max_exp, e);
  }
  return f;
}

void CompiledPolynomial::fill_powers(const VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError("point length does not match layout");
  const int stride = max_exp_ + 1;
  for (int i = 0; i < dim_; ++i) {
    double* row = powers_.data() + i * stride;
    row[0] = 1.0;
    for (int e = 1; e <= max_exp_; ++e) row[e] = row[e - 1] * x(i);
  }
}

double CompiledPolynomial::eval_flat(const Flat& f,
                                     const std::vector<double>& powers) const {
  const int stride = max_exp_ + 1;
  double sum = 0.0;
  const int* e = f.exps.data();
  for (double c : f.coeffs) {
    double term = c;
    for (int i = 0; i < dim_; ++i, ++e)
      if (*e) term *= powers[i * stride + *e];
    sum += term;
  }
  return sum;
}

double CompiledPolynomial::value(const VectorXd& x) const {
  fill_powers(x);
  return eval_flat(value_, powers_);
}

double CompiledPolynomial::value_and_gradient(const VectorXd& x,
                                              VectorXd& grad) const {
  if (partials_.size() != static_cast<std::size_t>(dim_))
    throw InternalConsistencyError("polynomial compiled without gradient");
  fill_powers(x);
  grad.resize(dim_);
  for (int v = 0; v < dim_; ++v) grad(v) = eval_flat(partials_[v], powers_);
  return eval_flat(value_, powers_);
}

}  // namespace prodsos
