#include "g4v/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "g4v/units.hpp"

namespace g4v {

namespace {

struct Unit {
  Dimension dim;
  double factor;
};

const std::map<std::string, Unit>& unit_table() {
  static const std::map<std::string, Unit> table{
      {"T", {Dimension::field, 1.0}},
      {"deg", {Dimension::angle, kPi / 180.0}},
      {"rad", {Dimension::angle, 1.0}},
      {"fs", {Dimension::time, 1e-6}},
      {"ps", {Dimension::time, 1e-3}},
      {"ns", {Dimension::time, 1.0}},
      {"us", {Dimension::time, 1e3}},
      {"MHz", {Dimension::frequency, kTwoPi * 1e-3}},
      {"GHz", {Dimension::frequency, kTwoPi}},
      {"THz", {Dimension::frequency, kTwoPi * 1e3}},
      {"K", {Dimension::temperature, 1.0}},
      {"m", {Dimension::length, 1.0}},
      {"km", {Dimension::length, 1e3}},
  };
  return table;
}

std::string dimension_name(Dimension d) {
  switch (d) {
    case Dimension::field: return "magnetic field (T)";
    case Dimension::angle: return "angle (deg, rad)";
    case Dimension::time: return "time (fs, ps, ns, us)";
    case Dimension::frequency: return "frequency (MHz, GHz, THz)";
    case Dimension::temperature: return "temperature (K)";
    case Dimension::length: return "length (m, km)";
  }
  return "quantity";
}

// Walks a YAML mapping, converting fields and recording every problem.
class Reader {
 public:
  explicit Reader(ExperimentConfig& c) : c_(c) {}

  std::vector<std::string> errors;
  std::set<std::string> present;

  void error(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  // Reports keys of `node` outside `allowed`.
  void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) {
      error(path, "expected a mapping");
      return;
    }
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) error(join(path, key), "unknown field");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void quantity(const YAML::Node& node, const std::string& path, Dimension dim, double& out) {
    if (!node) return;
    present.insert(path);
    if (!node.IsScalar()) {
      error(path, "expected a quantity with unit");
      return;
    }
    try {
      out = parse_quantity(node.as<std::string>(), dim, path);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }

  void quantities(const YAML::Node& node, const std::string& path, Dimension dim,
                  std::vector<double>& out) {
    if (!node) return;
    present.insert(path);
    std::vector<double> v;
    if (node.IsScalar()) {
      double x = 0.0;
      quantity(node, path, dim, x);
      v.push_back(x);
    } else if (node.IsSequence()) {
      for (std::size_t k = 0; k < node.size(); ++k) {
        double x = 0.0;
        quantity(node[k], path + "[" + std::to_string(k) + "]", dim, x);
        v.push_back(x);
      }
    } else {
      error(path, "expected a quantity or a list of quantities");
      return;
    }
    out = v;
  }

  template <class T>
  void number(const YAML::Node& node, const std::string& path, T& out) {
    if (!node) return;
    present.insert(path);
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      error(path, "expected a number");
    }
  }

  void numbers(const YAML::Node& node, const std::string& path, std::vector<double>& out) {
    if (!node) return;
    present.insert(path);
    if (!node.IsSequence()) {
      error(path, "expected a list of numbers");
      return;
    }
    std::vector<double> v;
    for (std::size_t k = 0; k < node.size(); ++k) {
      double x = 0.0;
      number(node[k], path + "[" + std::to_string(k) + "]", x);
      v.push_back(x);
    }
    out = v;
  }

  void text(const YAML::Node& node, const std::string& path, std::string& out) {
    if (!node) return;
    present.insert(path);
    if (!node.IsScalar()) {
      error(path, "expected a string");
      return;
    }
    out = node.as<std::string>();
  }

  void range(const YAML::Node& node, const std::string& path, Dimension dim, Range& out) {
    if (!node) return;
    present.insert(path);
    check_keys(node, path, {"min", "max", "points"});
    if (!node.IsMap()) return;
    quantity(node["min"], join(path, "min"), dim, out.min);
    quantity(node["max"], join(path, "max"), dim, out.max);
    number(node["points"], join(path, "points"), out.points);
    if (!node["max"]) out.max = out.min;
  }

  void read(const YAML::Node& root) {
    check_keys(root, "", {"experiment", "seed", "threads", "output", "physics", "gate", "optimizer",
                          "integrator", "grid", "excitation", "table1", "table2", "protocol", "fig5"});
    if (!root.IsMap()) return;
    text(root["experiment"], "experiment", c_.experiment);
    number(root["seed"], "seed", c_.seed);
    number(root["threads"], "threads", c_.threads);
    text(root["output"], "output", c_.out_dir);

    if (const auto n = root["physics"]) {
      check_keys(n, "physics", {"B", "theta_dc", "tau", "delta5", "cooperativity", "temperature"});
      quantity(n["B"], "physics.B", Dimension::field, c_.B);
      quantity(n["theta_dc"], "physics.theta_dc", Dimension::angle, c_.theta_dc);
      quantity(n["tau"], "physics.tau", Dimension::time, c_.tau);
      quantity(n["delta5"], "physics.delta5", Dimension::frequency, c_.delta5);
      number(n["cooperativity"], "physics.cooperativity", c_.cooperativity);
      quantity(n["temperature"], "physics.temperature", Dimension::temperature, c_.temperature);
    }
    if (const auto n = root["gate"]) {
      check_keys(n, "gate", {"target", "frames"});
      text(n["target"], "gate.target", c_.gate);
      if (const auto f = n["frames"]) {
        present.insert("gate.frames");
        if (!f.IsSequence()) {
          error("gate.frames", "expected a list");
        } else {
          c_.frames.clear();
          for (const auto& x : f) c_.frames.push_back(x.as<std::string>());
        }
      }
    }
    if (const auto n = root["optimizer"]) {
      check_keys(n, "optimizer", {"samples", "iterations", "local_tol", "local_max_evals",
                                  "local_starts", "polish_evals"});
      number(n["samples"], "optimizer.samples", c_.budget.samples);
      number(n["iterations"], "optimizer.iterations", c_.budget.iterations);
      number(n["local_tol"], "optimizer.local_tol", c_.budget.local_tol);
      number(n["local_max_evals"], "optimizer.local_max_evals", c_.budget.local_max_evals);
      number(n["local_starts"], "optimizer.local_starts", c_.budget.local_starts);
      number(n["polish_evals"], "optimizer.polish_evals", c_.polish_evals);
    }
    if (const auto n = root["integrator"]) {
      check_keys(n, "integrator", {"rtol", "atol"});
      number(n["rtol"], "integrator.rtol", c_.rtol);
      number(n["atol"], "integrator.atol", c_.atol);
    }
    if (const auto n = root["grid"]) {
      check_keys(n, "grid", {"delta5", "tau"});
      range(n["delta5"], "grid.delta5", Dimension::frequency, c_.grid_delta5);
      range(n["tau"], "grid.tau", Dimension::time, c_.grid_tau);
    }
    if (const auto n = root["excitation"]) {
      check_keys(n, "excitation", {"tau"});
      range(n["tau"], "excitation.tau", Dimension::time, c_.excitation_tau);
    }
    if (const auto n = root["table1"]) read_table1(n);
    if (const auto n = root["table2"]) read_table2(n);
    if (const auto n = root["protocol"]) {
      check_keys(n, "protocol", {"eta", "attenuation_length", "c_fiber", "tau_c", "photons", "budget",
                                 "t_raman", "t_exc", "cooperativities"});
      number(n["eta"], "protocol.eta", c_.eta);
      quantity(n["attenuation_length"], "protocol.attenuation_length", Dimension::length,
               c_.attenuation_length);
      number(n["c_fiber"], "protocol.c_fiber", c_.c_fiber);
      quantity(n["tau_c"], "protocol.tau_c", Dimension::time, c_.tau_c);
      number(n["photons"], "protocol.photons", c_.n_photons);
      if (const auto b = n["budget"]) {
        present.insert("protocol.budget");
        check_keys(b, "protocol.budget", {"I_half", "I_pi", "I_exc"});
        number(b["I_half"], "protocol.budget.I_half", c_.I_half);
        number(b["I_pi"], "protocol.budget.I_pi", c_.I_pi);
        number(b["I_exc"], "protocol.budget.I_exc", c_.I_exc);
      }
      quantity(n["t_raman"], "protocol.t_raman", Dimension::time, c_.t_raman);
      quantity(n["t_exc"], "protocol.t_exc", Dimension::time, c_.t_exc);
      numbers(n["cooperativities"], "protocol.cooperativities", c_.cooperativities);
    }
    if (const auto n = root["fig5"]) {
      check_keys(n, "fig5", {"tau", "delta5"});
      quantities(n["tau"], "fig5.tau", Dimension::time, c_.fig5_tau);
      quantities(n["delta5"], "fig5.delta5", Dimension::frequency, c_.fig5_delta5);
    }
  }

 private:
  void read_table1(const YAML::Node& n) {
    present.insert("table1");
    if (!n.IsSequence()) {
      error("table1", "expected a list of rows");
      return;
    }
    c_.table1.clear();
    for (std::size_t k = 0; k < n.size(); ++k) {
      const std::string path = "table1[" + std::to_string(k) + "]";
      check_keys(n[k], path, {"B", "theta_dc", "tau", "delta5"});
      Table1Entry e;
      quantity(n[k]["B"], path + ".B", Dimension::field, e.B);
      quantity(n[k]["theta_dc"], path + ".theta_dc", Dimension::angle, e.theta_dc);
      quantity(n[k]["tau"], path + ".tau", Dimension::time, e.tau);
      quantities(n[k]["delta5"], path + ".delta5", Dimension::frequency, e.delta5);
      c_.table1.push_back(e);
    }
  }

  void read_table2(const YAML::Node& n) {
    present.insert("table2");
    if (!n.IsSequence()) {
      error("table2", "expected a list of rows");
      return;
    }
    c_.table2.clear();
    for (std::size_t k = 0; k < n.size(); ++k) {
      const std::string path = "table2[" + std::to_string(k) + "]";
      check_keys(n[k], path, {"B", "theta_dc", "tau"});
      Table2Entry e;
      quantity(n[k]["B"], path + ".B", Dimension::field, e.B);
      quantity(n[k]["theta_dc"], path + ".theta_dc", Dimension::angle, e.theta_dc);
      e.tau = c_.excitation_tau;
      range(n[k]["tau"], path + ".tau", Dimension::time, e.tau);
      c_.table2.push_back(e);
    }
  }

  ExperimentConfig& c_;
};

}  // namespace

double parse_quantity(const std::string& text, Dimension dim, const std::string& path) {
  std::istringstream in(text);
  double value = 0.0;
  std::string suffix, rest;
  if (!(in >> value)) throw ConfigError(path, "cannot read a number from '" + text + "'");
  in >> suffix;
  if (in >> rest) throw ConfigError(path, "trailing text in '" + text + "'");
  if (suffix.empty()) {
    throw ConfigError(path, "missing unit in '" + text + "', expected " + dimension_name(dim));
  }
  const auto& table = unit_table();
  const auto it = table.find(suffix);
  if (it == table.end() || it->second.dim != dim) {
    throw ConfigError(path, "unit '" + suffix + "' is not a " + dimension_name(dim));
  }
  if (!std::isfinite(value)) throw ConfigError(path, "value is not finite");
  return value * it->second.factor;
}

std::vector<double> Range::values() const {
  if (points < 1) throw std::invalid_argument("range needs at least one point");
  std::vector<double> v(points);
  for (int k = 0; k < points; ++k) {
    v[k] = points == 1 ? min : min + (max - min) * k / (points - 1);
  }
  return v;
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"eigensystem", "gate-sim",   "gate-optimize",
                                              "grid-scan",   "excitation-scan", "quality-curve",
                                              "table1",      "table2",     "fig5"};
  return kinds;
}

std::vector<Table1Entry> default_table1() {
  using namespace units;
  return {
      {0.3, from_deg(1.0), from_ps(1000.0), {from_ghz(-100.0), from_ghz(-50.0), from_ghz(50.0), from_ghz(100.0)}},
      {1.0, from_deg(4.5), from_ps(10.0), {from_ghz(-100.0), from_ghz(-50.0), from_ghz(50.0), from_ghz(100.0)}},
      {8.0, from_deg(22.5), from_ps(416.67), {from_ghz(-41.11)}},
  };
}

std::vector<Table2Entry> default_table2() {
  using namespace units;
  return {
      {0.3, from_deg(1.0), Range{from_ps(40.0), from_ps(200.0), 17}},
      {1.0, from_deg(4.5), Range{from_ps(10.0), from_ps(60.0), 26}},
      {8.0, from_deg(22.5), Range{from_ps(2.0), from_ps(20.0), 37}},
  };
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  c.table1 = default_table1();
  c.table2 = default_table2();
  c.source = text;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("parse error: ") + e.what());
  }
  if (root.IsNull()) return c;
  Reader r(c);
  r.read(root);
  if (!r.errors.empty()) {
    std::string msg;
    for (const auto& e : r.errors) msg += (msg.empty() ? "" : "\n") + e;
    const std::string first = r.errors.front().substr(0, r.errors.front().find(':'));
    throw ConfigError(first, msg.substr(msg.find(':') + 2));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> e;
  auto flag = [&](bool bad, const std::string& path, const std::string& what) {
    if (bad) e.push_back(path + ": " + what);
  };
  const auto& kinds = experiment_kinds();
  flag(std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end(), "experiment",
       "unknown experiment '" + c.experiment + "'");
  flag(c.threads < 0, "threads", "must be >= 0");
  flag(!(c.B >= 0.0), "physics.B", "must be >= 0 T");
  flag(!(c.theta_dc >= 0.0 && c.theta_dc <= 0.5 * kPi), "physics.theta_dc", "must lie in [0, 90] deg");
  flag(!(c.tau > 0.0), "physics.tau", "must be > 0");
  flag(c.delta5 == 0.0, "physics.delta5", "must be nonzero");
  flag(!(c.cooperativity >= 0.0), "physics.cooperativity", "must be >= 0");
  flag(!(c.temperature >= 0.0), "physics.temperature", "must be >= 0 K");
  flag(c.gate != "pi/2" && c.gate != "pi" && c.gate != "composite", "gate.target",
       "must be one of pi/2, pi, composite");
  for (const auto& f : c.frames) {
    flag(f != "floquet" && f != "rwa" && f != "lab", "gate.frames", "unknown frame '" + f + "'");
  }
  flag(c.budget.samples < 1, "optimizer.samples", "must be >= 1");
  flag(c.budget.iterations < 0, "optimizer.iterations", "must be >= 0");
  flag(c.budget.local_max_evals < 0, "optimizer.local_max_evals", "must be >= 0");
  flag(c.budget.local_starts < 0, "optimizer.local_starts", "must be >= 0");
  flag(!(c.budget.local_tol >= 0.0), "optimizer.local_tol", "must be >= 0");
  flag(c.polish_evals < 0, "optimizer.polish_evals", "must be >= 0");
  flag(!(c.rtol > 0.0 && c.rtol < 1.0), "integrator.rtol", "must lie in (0, 1)");
  flag(!(c.atol > 0.0), "integrator.atol", "must be > 0");

  const double grid_limit = units::from_ghz(100.0);
  auto check_range = [&](const Range& r, const std::string& path, bool positive) {
    flag(r.points < 1, path + ".points", "must be >= 1");
    flag(r.max < r.min, path, "max below min");
    flag(positive && !(r.min > 0.0), path + ".min", "must be > 0");
  };
  check_range(c.grid_delta5, "grid.delta5", false);
  flag(c.grid_delta5.min < -grid_limit - 1e-9 || c.grid_delta5.max > grid_limit + 1e-9, "grid.delta5",
       "must lie within [-100, 100] GHz");
  check_range(c.grid_tau, "grid.tau", true);
  check_range(c.excitation_tau, "excitation.tau", true);
  for (std::size_t k = 0; k < c.table1.size(); ++k) {
    const std::string p = "table1[" + std::to_string(k) + "]";
    flag(!(c.table1[k].B >= 0.0), p + ".B", "must be >= 0 T");
    flag(!(c.table1[k].tau > 0.0), p + ".tau", "must be > 0");
    flag(c.table1[k].delta5.empty(), p + ".delta5", "needs at least one value");
    for (double d : c.table1[k].delta5) flag(d == 0.0, p + ".delta5", "must be nonzero");
  }
  for (std::size_t k = 0; k < c.table2.size(); ++k) {
    const std::string p = "table2[" + std::to_string(k) + "]";
    flag(!(c.table2[k].B >= 0.0), p + ".B", "must be >= 0 T");
    check_range(c.table2[k].tau, p + ".tau", true);
  }
  flag(!(c.eta >= 0.0 && c.eta <= 1.0), "protocol.eta", "must lie in [0, 1]");
  flag(!(c.attenuation_length > 0.0), "protocol.attenuation_length", "must be > 0");
  flag(!(c.c_fiber > 0.0), "protocol.c_fiber", "must be > 0");
  flag(!(c.tau_c > 0.0), "protocol.tau_c", "must be > 0");
  flag(c.n_photons < 1, "protocol.photons", "must be >= 1");
  for (const auto& [v, name] : {std::pair{c.I_half, "I_half"}, {c.I_pi, "I_pi"}, {c.I_exc, "I_exc"}}) {
    flag(!(v >= 0.0 && v <= 7.0 / 8.0), std::string("protocol.budget.") + name, "must lie in [0, 7/8]");
  }
  flag(!(c.t_raman > 0.0), "protocol.t_raman", "must be > 0");
  flag(!(c.t_exc > 0.0), "protocol.t_exc", "must be > 0");
  flag(c.cooperativities.empty(), "protocol.cooperativities", "needs at least one value");
  for (double x : c.cooperativities) flag(!(x >= 0.0), "protocol.cooperativities", "values must be >= 0");
  flag(c.fig5_tau.empty(), "fig5.tau", "needs at least one value");
  for (double x : c.fig5_tau) flag(!(x > 0.0), "fig5.tau", "values must be > 0");
  flag(c.fig5_delta5.empty(), "fig5.delta5", "needs at least one value");
  return e;
}

OptimizationProblem ExperimentConfig::problem(const G4VParameters& calibrated_params) const {
  OptimizationProblem p;
  p.params = calibrated_params;
  p.B = B;
  p.theta_dc = theta_dc;
  p.tau = tau;
  p.delta5 = delta5;
  p.theta = gate == "pi" ? kPi : 0.5 * kPi;
  p.axis = 'y';
  p.optimize_phase = gate != "pi";
  p.cooperativity = cooperativity;
  p.temperature = temperature;
  p.budget = budget;
  p.polish_evals = polish_evals;
  p.dissipative_tol = tolerances();
  p.seed = seed;
  return p;
}

}  // namespace g4v
