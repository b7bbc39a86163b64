#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "prodsos/kernel.hpp"
#include "prodsos/polynomial.hpp"
#include "prodsos/qwasserstein.hpp"

namespace prodsos {

using Json = nlohmann::ordered_json;

/// v rounded to 12 significant digits; every number written by the tools
/// goes through here.
double round12(double v);
/// round12, with NaN and infinities mapped to null.
Json number(double v);

// Polynomial files:
//   {"layout": [["x", n], ["y", n]], "field": "real" | "complex",
//    "terms": [{"exp": [..], "re": r, "im": i}]}
// "im" is omitted for the real field.
Json to_json(const RealPolynomial& p);
Json to_json(const ComplexPolynomial& p);
/// Throws ParseError for a malformed document or a complex polynomial with a
/// nonzero imaginary coefficient.
RealPolynomial real_polynomial_from_json(const Json& j);
ComplexPolynomial complex_polynomial_from_json(const Json& j);

/// {"n", "d", "t", "values", "deficit"} plus the lower triangle of the Gram
/// matrix (row by row) when requested.
Json to_json(const LambdaVector& lambda, bool with_gram = false);
LambdaVector lambda_from_json(const Json& j);

/// {"n", "re": [[..]], "im": [[..]]}; "im" may be omitted for real states.
MatrixXcd state_matrix_from_json(const Json& j);
Json to_json(const QuantumState& state);

Json to_json(const W2Result& r);
Json to_json(const KappaBound& k);

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::uint64_t seed = 1;
  std::string version;
  std::string backend;
  SolverTolerances tolerances;
  double wall_clock_seconds = 0.0;
};

Json to_json(const RunManifest& m);

/// Reads and parses a JSON file; ParseError on I/O or syntax errors.
Json read_json_file(const std::string& path);
/// Throws Error when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace prodsos
