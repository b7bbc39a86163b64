#include "prodsos/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace prodsos {

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

namespace {

Json layout_json(const VariableLayout& layout) {
  Json out = Json::array();
  for (const auto& b : layout.blocks()) out.push_back(Json::array({b.name, b.dim}));
  return out;
}

template <typename Scalar>
Json polynomial_json(const Polynomial<Scalar>& p, bool complex) {
  Json j;
  j["layout"] = layout_json(p.layout());
  j["field"] = complex ? "complex" : "real";
  Json terms = Json::array();
  for (const auto& [m, c] : p.terms()) {
    Json t;
    t["exp"] = m.exponents();
    if constexpr (std::is_same_v<Scalar, Complex>) {
      t["re"] = number(c.real());
      t["im"] = number(c.imag());
    } else {
      t["re"] = number(c);
    }
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

double real_number(const Json& j, const char* what) {
  if (!j.is_number()) fail(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(std::string(what) + " must be finite");
  return v;
}

int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) fail(std::string(what) + " must be an integer");
  return j.get<int>();
}

ComplexPolynomial parse_polynomial(const Json& j) {
  const Json& lj = field(j, "layout");
  if (!lj.is_array() || lj.empty()) fail("layout must be a nonempty array");
  std::vector<VariableBlock> blocks;
  for (const auto& b : lj) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_string())
      fail("layout entries must be [name, dim] pairs");
    const int dim = integer(b[1], "block dimension");
    if (dim < 1) fail("block dimension must be >= 1");
    blocks.push_back({b[0].get<std::string>(), dim});
  }
  VariableLayout layout;
  try {
    layout = VariableLayout(std::move(blocks));
  } catch (const Error& e) {
    fail(std::string("bad layout: ") + e.what());
  }
  const Json& f = field(j, "field");
  if (!f.is_string() || (f != "real" && f != "complex"))
    fail("field must be \"real\" or \"complex\"");
  const bool complex = f == "complex";

  ComplexPolynomial p(layout);
  const Json& terms = field(j, "terms");
  if (!terms.is_array()) fail("terms must be an array");
  for (const auto& t : terms) {
    const Json& e = field(t, "exp");
    if (!e.is_array() || static_cast<int>(e.size()) != layout.total_dim())
      fail("exponent length must equal the total dimension " +
           std::to_string(layout.total_dim()));
    std::vector<int> exps;
    for (const auto& x : e) {
      const int v = integer(x, "exponent");
      if (v < 0) fail("exponents must be nonnegative");
      exps.push_back(v);
    }
    const double re = real_number(field(t, "re"), "re");
    double im = 0.0;
    if (t.contains("im")) {
      if (!complex) fail("\"im\" given for a real polynomial");
      im = real_number(t.at("im"), "im");
    }
    p.add_term(Monomial(std::move(exps)), Complex(re, im));
  }
  return p;
}

}  // namespace

Json to_json(const RealPolynomial& p) { return polynomial_json(p, false); }
Json to_json(const ComplexPolynomial& p) { return polynomial_json(p, true); }

RealPolynomial real_polynomial_from_json(const Json& j) {
  const auto p = parse_polynomial(j);
  if (max_abs_coefficient(imag_part(p)) != 0.0)
    fail("expected a real polynomial but found imaginary coefficients");
  return real_part(p);
}

ComplexPolynomial complex_polynomial_from_json(const Json& j) { return parse_polynomial(j); }

Json to_json(const LambdaVector& lambda, bool with_gram) {
  Json j;
  j["n"] = lambda.n;
  j["d"] = lambda.d;
  j["t"] = lambda.t;
  Json values = Json::array();
  for (int k = 0; k < lambda.values.size(); ++k) values.push_back(number(lambda.values(k)));
  j["values"] = std::move(values);
  j["deficit"] = number(lambda.deficit);
  if (with_gram && lambda.gram.size() > 0) {
    Json rows = Json::array();
    for (int r = 0; r < lambda.gram.rows(); ++r) {
      Json row = Json::array();
      for (int c = 0; c <= r; ++c) row.push_back(number(lambda.gram(r, c)));
      rows.push_back(std::move(row));
    }
    j["gram_lower"] = std::move(rows);
  }
  return j;
}

LambdaVector lambda_from_json(const Json& j) {
  LambdaVector l;
  l.n = integer(field(j, "n"), "n");
  l.d = integer(field(j, "d"), "d");
  l.t = integer(field(j, "t"), "t");
  const Json& v = field(j, "values");
  if (!v.is_array() || v.empty()) fail("values must be a nonempty array");
  l.values.resize(static_cast<int>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) l.values(k) = real_number(v[k], "lambda value");
  l.deficit = real_number(field(j, "deficit"), "deficit");
  if (j.contains("gram_lower")) {
    const Json& g = j.at("gram_lower");
    const int size = static_cast<int>(g.size());
    l.gram = MatrixXd::Zero(size, size);
    for (int r = 0; r < size; ++r) {
      if (!g[r].is_array() || static_cast<int>(g[r].size()) != r + 1)
        fail("gram_lower must be the lower triangle");
      for (int c = 0; c <= r; ++c) l.gram(r, c) = l.gram(c, r) = real_number(g[r][c], "gram");
    }
  }
  return l;
}

MatrixXcd state_matrix_from_json(const Json& j) {
  const int n = integer(field(j, "n"), "n");
  if (n < 1) fail("n must be >= 1");
  auto read = [&](const Json& m, const char* name) {
    MatrixXd out(n, n);
    if (!m.is_array() || static_cast<int>(m.size()) != n)
      fail(std::string(name) + " must have n rows");
    for (int r = 0; r < n; ++r) {
      if (!m[r].is_array() || static_cast<int>(m[r].size()) != n)
        fail(std::string(name) + " must have n columns");
      for (int c = 0; c < n; ++c) out(r, c) = real_number(m[r][c], name);
    }
    return out;
  };
  const MatrixXd re = read(field(j, "re"), "re");
  const MatrixXd im = j.contains("im") ? read(j.at("im"), "im") : MatrixXd::Zero(n, n);
  MatrixXcd m(n, n);
  m.real() = re;
  m.imag() = im;
  return m;
}

Json to_json(const QuantumState& state) {
  Json j;
  j["n"] = state.n;
  Json re = Json::array(), im = Json::array();
  for (int r = 0; r < state.n; ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (int c = 0; c < state.n; ++c) {
      rr.push_back(number(state.matrix(r, c).real()));
      ii.push_back(number(state.matrix(r, c).imag()));
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Json to_json(const W2Result& r) {
  Json j;
  j["t"] = r.t;
  j["w2_squared_lower"] = number(r.w2_squared_lower);
  j["w2"] = number(r.w2);
  j["kappa_over_t2"] = number(r.kappa_over_t2);
  j["status"] = to_string(r.status);
  j["certified"] = r.certified;
  return j;
}

Json to_json(const KappaBound& k) {
  Json j;
  j["n"] = k.n;
  j["kappa"] = number(k.kappa);
  j["c_x_2n_4"] = number(k.c_x);
  j["f_max"] = number(k.f_max);
  j["h_max"] = number(k.h_max);
  j["w_opt_l1_bound"] = number(k.w_l1);
  return j;
}

Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["backend"] = m.backend;
  j["tolerances"] = {{"feasibility", number(m.tolerances.feasibility)},
                     {"gap", number(m.tolerances.gap)},
                     {"max_iterations", m.tolerances.max_iterations}};
  j["wall_clock_seconds"] = number(m.wall_clock_seconds);
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace prodsos
