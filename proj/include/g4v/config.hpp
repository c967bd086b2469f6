#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "g4v/optimize.hpp"
#include "g4v/quality.hpp"

namespace g4v {

// Configuration problem tied to a dotted field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Dimension { field, angle, time, frequency, temperature, length };

// Parses "<number> <unit>" and converts to internal units (T, rad, ns, rad/ns, K, m).
// Accepted suffixes: T; deg, rad; fs, ps, ns, us; MHz, GHz, THz; K; m, km.
double parse_quantity(const std::string& text, Dimension dim, const std::string& path);

// Evenly spaced values min..max (inclusive); a single point yields min.
struct Range {
  double min = 0.0;
  double max = 0.0;
  int points = 1;

  std::vector<double> values() const;
};

struct Table1Entry {
  double B = 8.0;
  double theta_dc = 0.0;
  double tau = 0.0;
  std::vector<double> delta5;  // candidates; the best dissipative pi/2 result wins
};

struct Table2Entry {
  double B = 8.0;
  double theta_dc = 0.0;
  Range tau;
};

struct ExperimentConfig {
  std::string experiment = "eigensystem";
  std::uint64_t seed = 1;
  int threads = 0;  // 0: available parallelism
  std::string out_dir = "out";

  // Physical design point (internal units).
  double B = 8.0;
  double theta_dc = 0.39269908169872414;  // 22.5 deg
  double tau = 0.1;                       // ns
  double delta5 = 628.3185307179587;      // 100 GHz
  double cooperativity = 0.0;
  double temperature = 0.0;
  std::string gate = "pi/2";  // pi/2, pi, composite
  std::vector<std::string> frames{"floquet"};

  OptimizerBudget budget;
  int polish_evals = 0;
  double rtol = 1e-9;
  double atol = 1e-12;

  Range grid_delta5{-628.3185307179587, 628.3185307179587, 10};
  Range grid_tau{0.01, 0.2, 10};
  Range excitation_tau{0.002, 0.04, 20};

  std::vector<Table1Entry> table1;
  std::vector<Table2Entry> table2;

  // Protocol and quality settings.
  double eta = 0.98;
  double attenuation_length = 1e3;  // m
  double c_fiber = 2.0e8;           // m/s
  double tau_c = 1e3;               // ns
  int n_photons = 100;
  double I_half = 0.0;
  double I_pi = 0.0;
  double I_exc = 0.0;
  double t_raman = 0.1;    // ns
  double t_exc = 0.007;    // ns
  std::vector<double> cooperativities{0.0, 1.0, 10.0, 50.0, 100.0, 300.0};
  std::vector<double> fig5_tau{0.01, 0.03333, 0.07333, 0.1, 0.2};  // ns
  std::vector<double> fig5_delta5{-258.29732};                    // rad/ns

  std::string source;  // raw text the configuration was read from

  OptimizationProblem problem(const G4VParameters& calibrated_params) const;
  Tolerances tolerances() const { return Tolerances{rtol, atol}; }
};

const std::vector<std::string>& experiment_kinds();

// Parses YAML (or JSON) text. Throws ConfigError naming the offending field.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Dry-run checks; every problem is reported, none is fatal here.
std::vector<std::string> validate(const ExperimentConfig& c);

// Gate and excitation table rows used when the configuration lists none.
std::vector<Table1Entry> default_table1();
std::vector<Table2Entry> default_table2();

}  // namespace g4v
