#include "odesplit/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "odesplit/analysis.hpp"
#include "odesplit/roots.hpp"

namespace odesplit {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigError::ConfigError(std::string key, const std::string& message)
    : Error("config error at '" + key + "': " + message), key_(std::move(key)) {}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// JSON helpers; every accessor names the dotted key on failure.

const json& require(const json& obj, const std::string& prefix, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) throw ConfigError(prefix + name, "missing required key");
  return obj.at(name);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
  const auto n = v.get<long long>();
  if (n < 0) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<std::size_t>(n);
}

// [re, im] or a plain real number.
cplx as_complex(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(key, "expected a complex number as [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<cplx> as_complex_list(const json& v, const std::string& key, std::size_t expected) {
  if (!v.is_array()) throw ConfigError(key, "expected a list of [re, im] pairs");
  if (v.size() != expected)
    throw ConfigError(key, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_complex(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

Expr as_expr(const json& v, const std::string& key, const ParamTable& params) {
  const std::string src = v.is_number() ? format_number(v.get<double>()) : as_string(v, key);
  try {
    return parse(src, params);
  } catch (const ParseError& e) {
    throw ConfigError(key, e.what());
  }
}

void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix.substr(0, prefix.size() - 1),
                                          "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(prefix + it.key(), "unknown key");
  }
}

std::optional<double> optional_cap(const json& g) {
  if (!g.contains("blowup_cap")) return std::nullopt;
  const double cap = as_number(g.at("blowup_cap"), "gauge.blowup_cap");
  if (!(cap > 0.0)) throw ConfigError("gauge.blowup_cap", "must be positive");
  return cap;
}

GaugeSpec parse_gauge(const json& g, std::size_t order, const ParamTable& params) {
  const std::string family = as_string(require(g, "gauge.", "family"), "gauge.family");
  auto need_order = [&](std::size_t n) {
    if (order != n)
      throw ConfigError("gauge.family", family + " needs ode.order = " + std::to_string(n));
  };
  if (family == "characteristic") {
    check_keys(g, "gauge.", {"family"});
    return CharacteristicSpec{};
  }
  if (family == "riccati") {
    need_order(2);
    check_keys(g, "gauge.", {"family", "initial", "blowup_cap"});
    RiccatiSpec s;
    if (g.contains("initial")) {
      const auto v = as_complex_list(g.at("initial"), "gauge.initial", 2);
      s.initial = std::array<cplx, 2>{v[0], v[1]};
    }
    s.blowup_cap = optional_cap(g);
    return s;
  }
  if (family == "strong_coupling") {
    need_order(2);
    check_keys(g, "gauge.", {"family", "C", "g1_initial", "blowup_cap"});
    StrongCouplingSpec s;
    if (g.contains("C")) s.C = as_complex(g.at("C"), "gauge.C");
    if (g.contains("g1_initial")) s.g1_initial = as_complex(g.at("g1_initial"), "gauge.g1_initial");
    s.blowup_cap = optional_cap(g);
    return s;
  }
  if (family == "phase_integral") {
    need_order(2);
    check_keys(g, "gauge.", {"family", "mode", "q", "q_initial", "blowup_cap"});
    PhaseIntegralSpec s;
    const std::string mode = g.contains("mode") ? as_string(g.at("mode"), "gauge.mode") : "analytic";
    if (mode == "analytic") {
      s.mode = PhaseIntegralSpec::Mode::Analytic;
      if (g.contains("q_initial")) throw ConfigError("gauge.q_initial", "only valid with mode \"ode\"");
      if (g.contains("q")) s.q = as_expr(g.at("q"), "gauge.q", params);
    } else if (mode == "ode") {
      s.mode = PhaseIntegralSpec::Mode::Ode;
      if (g.contains("q")) throw ConfigError("gauge.q", "only valid with mode \"analytic\"");
      if (g.contains("q_initial")) {
        const auto v = as_complex_list(g.at("q_initial"), "gauge.q_initial", 2);
        s.q_initial = std::array<cplx, 2>{v[0], v[1]};
      }
    } else {
      throw ConfigError("gauge.mode", "expected \"analytic\" or \"ode\"");
    }
    s.blowup_cap = optional_cap(g);
    return s;
  }
  if (family == "gen_riccati3") {
    need_order(3);
    check_keys(g, "gauge.", {"family", "branches", "blowup_cap"});
    GenRiccati3Spec s;
    if (g.contains("branches")) {
      const json& b = g.at("branches");
      if (!b.is_array() || b.size() != 3) throw ConfigError("gauge.branches", "expected 3 branches");
      std::array<std::array<cplx, 2>, 3> br{};
      for (std::size_t n = 0; n < 3; ++n) {
        const auto v = as_complex_list(b[n], "gauge.branches[" + std::to_string(n) + "]", 2);
        br[n] = {v[0], v[1]};
      }
      s.branches = br;
    }
    s.blowup_cap = optional_cap(g);
    return s;
  }
  if (family == "analytic") {
    check_keys(g, "gauge.", {"family", "rows"});
    const json& rows = require(g, "gauge.", "rows");
    if (!rows.is_array() || rows.size() != order - 1)
      throw ConfigError("gauge.rows", "expected " + std::to_string(order - 1) + " rows");
    AnalyticSpec s;
    for (std::size_t m = 0; m < rows.size(); ++m) {
      const std::string rk = "gauge.rows[" + std::to_string(m) + "]";
      if (!rows[m].is_array() || rows[m].size() != order)
        throw ConfigError(rk, "expected " + std::to_string(order) + " expressions");
      std::vector<Expr> row;
      for (std::size_t n = 0; n < order; ++n) row.push_back(as_expr(rows[m][n], rk + "[" + std::to_string(n) + "]", params));
      s.rows.push_back(std::move(row));
    }
    return s;
  }
  throw ConfigError("gauge.family", "unknown family '" + family +
                                        "' (characteristic, riccati, strong_coupling, phase_integral, "
                                        "gen_riccati3, analytic)");
}

// ---------------------------------------------------------------------------
// Output

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

fs::path resolve(const fs::path& out_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : out_dir / path;
}

void put_complex(std::string& line, cplx v) {
  line += ',';
  line += format_number(v.real());
  line += ',';
  line += format_number(v.imag());
}

std::string trajectory_csv(const SplitSolution& sol, std::size_t order) {
  std::string s = "t";
  for (std::size_t n = 1; n <= order; ++n) s += ",y" + std::to_string(n) + "_re,y" + std::to_string(n) + "_im";
  for (std::size_t k = 0; k < order; ++k) s += ",d" + std::to_string(k) + "_re,d" + std::to_string(k) + "_im";
  s += ",absD\n";
  for (std::size_t i = 0; i < sol.split.size(); ++i) {
    std::string line = format_number(sol.split.t[i]);
    for (cplx v : sol.split.states[i]) put_complex(line, v);
    for (cplx v : sol.companion.states[i]) put_complex(line, v);
    line += ',' + format_number(sol.abs_det[i]) + '\n';
    s += line;
  }
  return s;
}

std::string comparison_csv(const ErrorReport& rep) {
  std::string s = "t,abs_error,rel_error\n";
  for (const auto& r : rep.rows) s += format_number(r.t) + ',' + format_number(r.abs) + ',' + format_number(r.rel) + '\n';
  return s;
}

// Endpoint error of the first WKB mode. Only the + part of the initial data
// is propagated (y' = i sqrt(f0) y at t1), so leakage from the other mode
// does not mask the O(1/lambda) behaviour. Both ends split with the
// +-i sqrt(f0) gauge.
double wkb_mode_error(const LinearODE& ode, const IVP& ivp, const SolveConfig& solver) {
  if (ode.order() != 2) throw ConfigError("outputs.error_metric", "\"wkb\" needs a second-order equation");
  if (!ode.coeff(1).is_zero()) throw ConfigError("outputs.error_metric", "\"wkb\" needs f1 = 0");
  const cplx i{0.0, 1.0};
  auto plus_part = [&](double t, const std::vector<cplx>& y) {
    const cplx k = std::sqrt(ode.coeff(0)(t));
    return 0.5 * (y[0] + y[1] / (i * k));
  };
  const cplx p1 = plus_part(ivp.t1, ivp.initial.derivs);
  if (p1 == cplx{}) throw ConfigError("ivp.y0", "initial data has no + mode component");
  const cplx k1 = std::sqrt(ode.coeff(0)(ivp.t1));
  const IVP pure{ivp.t1, {ivp.t1, {p1, i * k1 * p1}}, ivp.t_end};
  const Trajectory oracle = solve_companion(ode, pure, solver, {ivp.t1, ivp.t_end});
  const auto w = wkb2(ode, ivp.t1, {p1, 0.0}, ivp.t_end);
  const cplx ref = plus_part(ivp.t_end, oracle.states.back());
  return std::abs(w[0] - ref) / std::max(std::abs(ref), kRelFloor);
}

std::string summary_text(const ExperimentConfig& cfg, const SplitSolution& sol, const ErrorReport* rep,
                         double metric) {
  std::ostringstream s;
  s << "family: " << sol.family << "\n";
  s << "order: " << cfg.order << "\n";
  s << "span: [" << format_number(cfg.ivp.t1) << ", " << format_number(cfg.ivp.t_end) << "]\n";
  s << "tolerances: rel " << format_number(cfg.solver.rel_tol) << ", abs " << format_number(cfg.solver.abs_tol)
    << "\n";
  s << "steps: accepted " << sol.raw.accepted << ", rejected " << sol.raw.rejected << ", rhs evaluations "
    << sol.raw.rhs_evaluations << "\n";
  s << "max step: " << format_number(sol.raw.max_step) << "\n";
  s << "samples: " << sol.split.size() << "\n";
  double min_d = std::numeric_limits<double>::infinity(), max_g = 0.0;
  double t_min_d = cfg.ivp.t1;
  for (std::size_t i = 0; i < sol.abs_det.size(); ++i) {
    if (sol.abs_det[i] < min_d) {
      min_d = sol.abs_det[i];
      t_min_d = sol.split.t[i];
    }
    max_g = std::max(max_g, sol.gauges[i].g.cwiseAbs().maxCoeff());
  }
  s << "gauge health: min |D| " << format_number(min_d) << " at t = " << format_number(t_min_d) << ", max |g| "
    << format_number(max_g) << "\n";
  const auto& end = sol.companion.states.back();
  s << "endpoint y: " << format_number(end[0].real()) << " + " << format_number(end[0].imag()) << "i\n";
  if (rep) {
    s << "companion comparison: max_abs " << format_number(rep->max_abs) << " at t = " << format_number(rep->t_of_max)
      << ", max_rel (sup-norm) " << format_number(rep->max_rel_norm) << ", max_rel (pointwise) "
      << format_number(rep->max_rel) << ", mean_abs " << format_number(rep->mean_abs) << "\n";
  }
  if (cfg.outputs.error_metric == ErrorMetric::Wkb && !std::isnan(metric))
    s << "wkb mode error at t_end: " << format_number(metric) << "\n";
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------

json load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot read '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "", {"ode", "params", "ivp", "gauge", "solver", "outputs"});
  ExperimentConfig cfg;

  if (doc.contains("params")) {
    const json& p = doc.at("params");
    if (!p.is_object()) throw ConfigError("params", "expected an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      const std::string& name = it.key();
      if (name == "t" || name == "i" || name == "pi") throw ConfigError("params." + name, "reserved name");
      cfg.params[name] = as_complex(it.value(), "params." + name);
    }
  }

  const json& ode = require(doc, "", "ode");
  check_keys(ode, "ode.", {"order", "coeffs", "inhom"});
  cfg.order = as_count(require(ode, "ode.", "order"), "ode.order");
  if (cfg.order < 2 || cfg.order > kMaxOrder)
    throw ConfigError("ode.order", "must be between 2 and " + std::to_string(kMaxOrder));
  const json& coeffs = require(ode, "ode.", "coeffs");
  if (!coeffs.is_array() || coeffs.size() != cfg.order)
    throw ConfigError("ode.coeffs", "expected " + std::to_string(cfg.order) + " expressions f0..f" +
                                        std::to_string(cfg.order - 1));
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const std::string key = "ode.coeffs[" + std::to_string(k) + "]";
    as_expr(coeffs[k], key, cfg.params);
    cfg.coeffs.push_back(coeffs[k].is_number() ? format_number(coeffs[k].get<double>()) : coeffs[k].get<std::string>());
  }
  if (ode.contains("inhom")) {
    as_expr(ode.at("inhom"), "ode.inhom", cfg.params);
    cfg.inhom = ode.at("inhom").is_number() ? format_number(ode.at("inhom").get<double>())
                                            : ode.at("inhom").get<std::string>();
  }

  const json& ivp = require(doc, "", "ivp");
  check_keys(ivp, "ivp.", {"t1", "y0", "t_end"});
  cfg.ivp.t1 = as_number(require(ivp, "ivp.", "t1"), "ivp.t1");
  cfg.ivp.t_end = as_number(require(ivp, "ivp.", "t_end"), "ivp.t_end");
  if (!std::isfinite(cfg.ivp.t1) || !std::isfinite(cfg.ivp.t_end) || cfg.ivp.t1 == cfg.ivp.t_end)
    throw ConfigError("ivp.t_end", "span must be finite and non-empty");
  cfg.ivp.initial = {cfg.ivp.t1, as_complex_list(require(ivp, "ivp.", "y0"), "ivp.y0", cfg.order)};

  cfg.gauge = parse_gauge(require(doc, "", "gauge"), cfg.order, cfg.params);

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    check_keys(s, "solver.", {"rel_tol", "abs_tol", "h_init", "h_min", "h_max", "max_steps", "blowup_cap"});
    auto num = [&](const char* k, double& dst) {
      if (s.contains(k)) dst = as_number(s.at(k), std::string("solver.") + k);
    };
    num("rel_tol", cfg.solver.rel_tol);
    num("abs_tol", cfg.solver.abs_tol);
    num("h_init", cfg.solver.h_init);
    num("h_min", cfg.solver.h_min);
    num("h_max", cfg.solver.h_max);
    num("blowup_cap", cfg.solver.blowup_cap);
    if (s.contains("max_steps")) cfg.solver.max_steps = as_count(s.at("max_steps"), "solver.max_steps");
    try {
      cfg.solver.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("solver", e.what());
    }
  }

  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    check_keys(o, "outputs.", {"sample_count", "csv_path", "compare_against_companion", "comparison_csv_path",
                               "summary_path", "error_metric"});
    auto& out = cfg.outputs;
    if (o.contains("sample_count")) {
      out.sample_count = as_count(o.at("sample_count"), "outputs.sample_count");
      if (out.sample_count < 2) throw ConfigError("outputs.sample_count", "must be at least 2");
    }
    if (o.contains("csv_path")) out.csv_path = as_string(o.at("csv_path"), "outputs.csv_path");
    if (o.contains("compare_against_companion"))
      out.compare_against_companion = as_bool(o.at("compare_against_companion"), "outputs.compare_against_companion");
    if (o.contains("comparison_csv_path"))
      out.comparison_csv_path = as_string(o.at("comparison_csv_path"), "outputs.comparison_csv_path");
    if (o.contains("summary_path")) out.summary_path = as_string(o.at("summary_path"), "outputs.summary_path");
    if (o.contains("error_metric")) {
      const std::string m = as_string(o.at("error_metric"), "outputs.error_metric");
      if (m == "companion") out.error_metric = ErrorMetric::Companion;
      else if (m == "wkb") out.error_metric = ErrorMetric::Wkb;
      else throw ConfigError("outputs.error_metric", "expected \"companion\" or \"wkb\"");
    }
  }
  cfg.solver.sample_count = cfg.outputs.sample_count;
  return cfg;
}

void set_numeric(json& doc, const std::string& dotted_key, double value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || !node->is_object() || !node->contains(part))
      throw ConfigError(dotted_key, "no such config key");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number()) throw ConfigError(dotted_key, "not a numeric key");
  if (node->is_number_integer() || node->is_number_unsigned()) {
    if (value != std::floor(value)) throw ConfigError(dotted_key, "expects an integer");
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
}

RunResult run_experiment(const json& doc, const fs::path& out_dir) {
  RunResult res;
  try {
    const ExperimentConfig cfg = parse_config(doc);
    const LinearODE ode = [&] {
      try {
        return make_ode(cfg.order, cfg.coeffs, cfg.inhom, cfg.params);
      } catch (const InvalidArgument& e) {
        throw ConfigError("ode", e.what());
      }
    }();
    const auto grid = uniform_grid(cfg.ivp.t1, cfg.ivp.t_end, cfg.outputs.sample_count);

    SplitSolution sol = solve_split(ode, cfg.gauge, cfg.ivp, cfg.solver, grid);
    res.steps = sol.raw.accepted;

    std::optional<ErrorReport> rep;
    double metric = std::numeric_limits<double>::quiet_NaN();
    if (cfg.outputs.compare_against_companion) {
      rep = compare(sol.companion, solve_companion(ode, cfg.ivp, cfg.solver, grid), {0});
      metric = rep->max_rel_norm;
    }
    if (cfg.outputs.error_metric == ErrorMetric::Wkb) metric = wkb_mode_error(ode, cfg.ivp, cfg.solver);
    res.max_rel_error = metric;

    write_text(resolve(out_dir, cfg.outputs.csv_path), trajectory_csv(sol, cfg.order));
    if (rep) write_text(resolve(out_dir, cfg.outputs.comparison_csv_path), comparison_csv(*rep));
    write_text(resolve(out_dir, cfg.outputs.summary_path), summary_text(cfg, sol, rep ? &*rep : nullptr, metric));

    const auto& end = sol.companion.states.back();
    res.message = "ok: " + sol.family + ", " + std::to_string(res.steps) + " steps, y(" +
                  format_number(cfg.ivp.t_end) + ") = " + format_number(end[0].real()) + " + " +
                  format_number(end[0].imag()) + "i";
    if (!std::isnan(metric)) res.message += ", max_rel_error " + format_number(metric);
    res.exit_code = 0;
  } catch (const NumericalError& e) {
    res.exit_code = 2;
    res.message = std::string("numerical failure: ") + std::string(to_string(e.kind())) + " at t = " +
                  format_number(e.t()) + ": " + e.detail();
  } catch (const ConfigError& e) {
    res.exit_code = 1;
    res.message = e.what();
  } catch (const InvalidArgument& e) {
    res.exit_code = 1;
    res.message = std::string("config error: ") + e.what();
  } catch (const Error& e) {
    res.exit_code = 1;
    res.message = e.what();
  } catch (const fs::filesystem_error& e) {
    res.exit_code = 1;
    res.message = e.what();
  }
  return res;
}

int run_command(const fs::path& config, const fs::path& out_dir, bool quiet, std::ostream& out, std::ostream& err) {
  json doc;
  try {
    doc = load_config(config);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  }
  const RunResult r = run_experiment(doc, out_dir);
  if (r.exit_code != 0) err << r.message << "\n";
  else if (!quiet) out << r.message << "\n";
  return r.exit_code;
}

int sweep_command(const fs::path& config, const std::string& param, const std::vector<double>& values,
                  const fs::path& out_dir, bool quiet, std::ostream& out, std::ostream& err) {
  if (values.empty()) {
    err << "sweep: empty value list\n";
    return 1;
  }
  json base;
  try {
    base = load_config(config);
    json probe = base;
    set_numeric(probe, param, values.front());
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  }

  std::string agg = "value,max_rel_error,steps,status\n";
  bool any_ok = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    json doc = base;
    set_numeric(doc, param, values[k]);
    // The aggregate needs an error column.
    if (!doc.contains("outputs")) doc["outputs"] = json::object();
    if (!doc["outputs"].contains("error_metric") || doc["outputs"]["error_metric"] == "companion")
      doc["outputs"]["compare_against_companion"] = true;
    const fs::path dir = out_dir / ("run_" + std::to_string(k));
    const RunResult r = run_experiment(doc, dir);
    any_ok = any_ok || r.exit_code == 0;
    const std::string status = r.exit_code == 0 ? "ok" : (r.exit_code == 1 ? "config_error" : "numerical_failure");
    agg += format_number(values[k]) + ',' + format_number(r.max_rel_error) + ',' + std::to_string(r.steps) + ',' +
           status + '\n';
    if (r.exit_code != 0) err << param << " = " << format_number(values[k]) << ": " << r.message << "\n";
    else if (!quiet) out << param << " = " << format_number(values[k]) << ": " << r.message << "\n";
  }
  try {
    write_text(out_dir / "sweep.csv", agg);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  return any_ok ? 0 : 2;
}

}  // namespace odesplit
