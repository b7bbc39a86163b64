#include "prodsos/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "prodsos/io.hpp"
#include "prodsos/kernel.hpp"
#include "prodsos/moment.hpp"
#include "prodsos/oracle.hpp"
#include "prodsos/qwasserstein.hpp"

namespace prodsos {

namespace {

// The solver ran but produced nothing usable; carries the exit code 3.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string backend;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string export_path;
  std::string out_path;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--backend", c.backend,
                  "conic backend (default: $PRODSOS_BACKEND, else ipm)");
  sub->add_option("--tol", c.tol, "solver feasibility and gap tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for oracles and generators");
  sub->add_option("--export-problem", c.export_path,
                  "write the conic problem in sparse triplet form");
  sub->add_option("--out", c.out_path, "output file (default: stdout)");
}

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::string backend_spec(const Common& c) {
  if (!c.backend.empty()) return c.backend;
  if (const char* env = std::getenv("PRODSOS_BACKEND"); env && *env) return env;
  return "ipm";
}

std::unique_ptr<ConicBackend> backend_for(const Common& c) {
  SolverTolerances tol;
  tol.feasibility = c.tol;
  tol.gap = c.tol;
  return make_backend(backend_spec(c), tol);
}

RunManifest manifest(const std::string& command, const Common& c, const Context& ctx,
                     const ConicBackend* backend) {
  RunManifest m;
  m.command = command;
  m.arguments = ctx.args;
  m.seed = c.seed;
  m.version = kVersion;
  if (backend) {
    m.backend = backend->name();
    m.tolerances = backend->tolerances();
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  return m;
}

void emit(const std::string& text, const Common& c, Context& ctx) {
  if (c.out_path.empty())
    ctx.out << text;
  else
    write_text_file(c.out_path, text);
}

void export_problem(const ConicProblem& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_problem(f, p);
}

bool usable(SolverStatus s) {
  return s == SolverStatus::optimal || s == SolverStatus::near_optimal;
}

RealPolynomial generate(const std::string& kind, const SetDescriptor& set, int degree,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto layout = set.layout();
  RealPolynomial q(layout);
  if (kind == "bilinear") {
    if (!set.is_sphere_product() || set.block_count() != 2)
      throw ParseError("the bilinear generator needs a set sphere2xN");
    const int n = set.block_dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        q += gauss(rng) * (RealPolynomial::variable(layout, i) *
                           RealPolynomial::variable(layout, n + j));
    return q;
  }
  if (kind == "random") {
    if (degree < 1) throw ParseError("--degree must be >= 1");
    for (const auto& m : monomials_up_to(layout.total_dim(), degree)) q.add_term(m, gauss(rng));
    return q;
  }
  throw ParseError("unknown generator '" + kind + "' (expected bilinear or random)");
}

int cmd_minimize(const std::string& file, const std::string& set_spec, int t, const Common& c,
                 Context& ctx) {
  const auto q = real_polynomial_from_json(read_json_file(file));
  const auto set = SetDescriptor::parse(set_spec);
  const auto backend = backend_for(c);
  const ConicProblem problem = build_relaxation(q, set, t);
  if (!c.export_path.empty()) export_problem(problem, c.export_path);
  const auto r = solve(problem, *backend, t);
  const auto oracle = minimize(q, set, OracleBudget{}, c.seed);

  Json j;
  j["t"] = t;
  j["set"] = set.to_string();
  j["lower_bound"] = number(r.lower_bound);
  j["oracle_min"] = number(oracle.min_estimate);
  j["gap"] = number(oracle.min_estimate - r.lower_bound);
  j["certificate_degree"] = r.certificate_degree;
  j["status"] = to_string(r.status);
  j["oracle_method"] = to_string(oracle.method);
  j["manifest"] = to_json(manifest("minimize", c, ctx, backend.get()));
  emit(j.dump(2) + "\n", c, ctx);
  if (!usable(r.status))
    throw SolverFailure("solver status " + to_string(r.status) + ": " + r.solution.message);
  return kExitOk;
}

int cmd_lambda(int n, int d, int t, bool gram, const Common& c, Context& ctx) {
  const auto backend = backend_for(c);
  if (!c.export_path.empty()) {
    if (d == 0)
      ctx.err << "note: d = 0 needs no SDP; nothing exported\n";
    else
      export_problem(build_lambda_problem(n, d, t), c.export_path);
  }
  const LambdaVector l = synthesize_lambda(n, d, t, *backend);
  Json j = to_json(l, gram);
  const double bound = t > 0 ? lambda_deficit_bound(n, d, t) : std::numeric_limits<double>::infinity();
  j["deficit_bound"] = number(bound);
  j["manifest"] = to_json(manifest("lambda", c, ctx, backend.get()));
  emit(j.dump(2) + "\n", c, ctx);
  char line[160];
  std::snprintf(line, sizeof line, "deficit %.12g versus n^2 d^3 / t^2 = %.12g\n", l.deficit,
                bound);
  ctx.err << line;
  return kExitOk;
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return path.substr(0, dot) + ext;
  return path + ext;
}

int cmd_rate(const std::string& file, const std::string& generator, int degree,
             const std::string& set_spec, std::vector<int> t_list, bool serial,
             const Common& c, Context& ctx) {
  const auto set = SetDescriptor::parse(set_spec);
  if (file.empty() == generator.empty())
    throw ParseError("give either a polynomial file or --generate");
  const RealPolynomial q = file.empty() ? generate(generator, set, degree, c.seed)
                                        : real_polynomial_from_json(read_json_file(file));
  if (t_list.empty()) throw ParseError("--t-list must not be empty");
  const auto backend = backend_for(c);
  if (!c.export_path.empty())
    for (int t : t_list)
      export_problem(build_relaxation(q, set, t), c.export_path + ".t" + std::to_string(t));

  SweepOptions opts;
  opts.seed = c.seed;
  opts.parallel = !serial;
  const SweepTable table = hierarchy_sweep(q, set, t_list, *backend, opts);
  emit(sweep_csv(table), c, ctx);

  if (!c.out_path.empty()) {
    std::ostringstream dat;
    dat << "# t lower_bound oracle_min gap theory_bound\n";
    char buf[256];
    for (const auto& r : table.rows) {
      std::snprintf(buf, sizeof buf, "%d %.12g %.12g %.12g %.12g\n", r.t, r.lower_bound,
                    r.oracle_min, r.gap, r.theory_bound);
      dat << buf;
    }
    write_text_file(replace_extension(c.out_path, ".dat"), dat.str());
    Json m = to_json(manifest("rate-experiment", c, ctx, backend.get()));
    Json rows = Json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"t", r.t}, {"status", to_string(r.status)},
                      {"certificate_degree", r.certificate_degree}});
    m["rows"] = std::move(rows);
    m["oracle_max"] = number(table.oracle_max);
    m["rate_constant"] = number(table.rate_constant);
    write_text_file(c.out_path + ".manifest.json", m.dump(2) + "\n");
  }
  for (const auto& r : table.rows)
    if (!usable(r.status))
      throw SolverFailure("order " + std::to_string(r.t) + ": solver status " +
                          to_string(r.status));
  return kExitOk;
}

QuantumState load_state(const std::string& path, const char* name, Context& ctx) {
  const QuantumState s = validate_state(state_matrix_from_json(read_json_file(path)));
  if (s.projected)
    ctx.err << "note: " << name << " projected onto the state space (moved by "
            << s.projection_distance << ")\n";
  return s;
}

int cmd_qwass(const std::string& rho_file, const std::string& nu_file, int t, const Common& c,
              Context& ctx) {
  const auto rho = load_state(rho_file, "rho", ctx);
  const auto nu = load_state(nu_file, "nu", ctx);
  const auto backend = backend_for(c);
  if (!c.export_path.empty()) export_problem(build_w2_relaxation(rho, nu, t), c.export_path);
  const W2Result r = solve_w2(rho, nu, t, *backend);
  Json j = to_json(r);
  j["n"] = r.n;
  j["mass"] = number(r.mass);
  j["manifest"] = to_json(manifest("qwass", c, ctx, backend.get()));
  emit(j.dump(2) + "\n", c, ctx);
  if (!usable(r.status))
    throw SolverFailure("solver status " + to_string(r.status) + ": " +
                        r.relaxation.solution.message);
  return kExitOk;
}

int cmd_constants(int n, int d, int m, const Common& c, Context& ctx) {
  if (!c.export_path.empty()) ctx.err << "note: constants involve no conic problem; nothing exported\n";
  Json j;
  j["n"] = n;
  j["d"] = d;
  j["m"] = m;
  if (n >= 3) {
    j["c_bisphere"] = number(c_bisphere(n, d));
    j["c_multisphere"] = number(c_multisphere(n, d, m));
    j["gamma_bound"] = number(gamma_bound(n, d));
  } else {
    // circles have no Gegenbauer family; only kappa(n) (which uses 2n) exists
    ctx.err << "note: sphere constants need n >= 3; reporting kappa only\n";
    j["c_bisphere"] = nullptr;
    j["c_multisphere"] = nullptr;
    j["gamma_bound"] = nullptr;
  }
  j["kappa"] = to_json(kappa_bound(n));
  j["manifest"] = to_json(manifest("constants", c, ctx, nullptr));
  emit(j.dump(2) + "\n", c, ctx);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Schmuedgen-type moment hierarchies on set products"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Context ctx{args, out, err};
  std::function<int()> action;

  Common c_min, c_lam, c_rate, c_qw, c_const;

  std::string poly_file, set_spec = "sphere2x3";
  int t_min = 1;
  auto* minimize_cmd = app.add_subcommand("minimize", "lower bound of a polynomial on a set");
  minimize_cmd->add_option("poly", poly_file, "polynomial JSON file")->required();
  minimize_cmd->add_option("--set", set_spec, "sphereMxN or cubeN");
  minimize_cmd->add_option("--t", t_min, "relaxation order");
  add_common(minimize_cmd, c_min);
  minimize_cmd->callback([&] { action = [&] { return cmd_minimize(poly_file, set_spec, t_min, c_min, ctx); }; });

  int ln = 3, ld = 2, lt = 17;
  bool gram = false;
  auto* lambda_cmd = app.add_subcommand("lambda", "synthesize kernel eigenvalues");
  lambda_cmd->add_option("--n", ln, "sphere ambient dimension");
  lambda_cmd->add_option("--d", ld, "polynomial degree");
  lambda_cmd->add_option("--t", lt, "kernel order");
  lambda_cmd->add_flag("--gram", gram, "include the Gram matrix");
  add_common(lambda_cmd, c_lam);
  lambda_cmd->callback([&] { action = [&] { return cmd_lambda(ln, ld, lt, gram, c_lam, ctx); }; });

  std::string rate_file, generator, rate_set = "sphere2x3";
  int degree = 2;
  std::vector<int> t_list{1, 2};
  bool serial = false;
  auto* rate_cmd = app.add_subcommand("rate-experiment", "hierarchy sweep as CSV");
  rate_cmd->alias("rate");
  rate_cmd->add_option("poly", rate_file, "polynomial JSON file");
  rate_cmd->add_option("--generate", generator, "bilinear or random instead of a file");
  rate_cmd->add_option("--degree", degree, "degree for --generate random");
  rate_cmd->add_option("--set", rate_set, "sphereMxN or cubeN");
  rate_cmd->add_option("--t-list", t_list, "comma-separated orders")->delimiter(',');
  rate_cmd->add_flag("--serial", serial, "solve the orders one after another");
  add_common(rate_cmd, c_rate);
  rate_cmd->callback([&] {
    action = [&] {
      return cmd_rate(rate_file, generator, degree, rate_set, t_list, serial, c_rate, ctx);
    };
  });

  std::string rho_file, nu_file;
  int t_qw = 2;
  auto* qwass_cmd = app.add_subcommand("qwass", "quantum Wasserstein lower bound");
  qwass_cmd->add_option("rho", rho_file, "state JSON file")->required();
  qwass_cmd->add_option("nu", nu_file, "state JSON file")->required();
  qwass_cmd->add_option("--t", t_qw, "relaxation order");
  add_common(qwass_cmd, c_qw);
  qwass_cmd->callback([&] { action = [&] { return cmd_qwass(rho_file, nu_file, t_qw, c_qw, ctx); }; });

  int cn = 3, cd = 2, cm = 2;
  auto* const_cmd = app.add_subcommand("constants", "closed-form rate constants");
  const_cmd->add_option("--n", cn, "sphere ambient dimension");
  const_cmd->add_option("--d", cd, "degree");
  const_cmd->add_option("--m", cm, "number of spheres");
  add_common(const_cmd, c_const);
  const_cmd->callback([&] { action = [&] { return cmd_constants(cn, cd, cm, c_const, ctx); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    return action ? action() : kExitInput;
  } catch (const OrderTooSmall& e) {
    err << "error: order too small: " << e.what() << "\n";
    return kExitOrder;
  } catch (const ThresholdError& e) {
    err << "error: order too small: " << e.what() << "\n";
    return kExitOrder;
  } catch (const SolverFailure& e) {
    err << "error: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ParseError& e) {
    err << "error: parse: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const DimensionError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const StructuralError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const PresetNotOperational& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace prodsos
