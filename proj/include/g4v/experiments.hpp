#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "g4v/config.hpp"
#include "g4v/io.hpp"

namespace g4v {

// Gate simulated from the analytic seed in one or more frames.
struct GateSimResult {
  RamanDrive drive;
  EffectiveRotation rotation;
  std::map<std::string, double> coherent_F;  // by frame
  double dissipative_F = 0.0;                // Floquet frame
  double composite_F = 0.0;                  // pi/2 o pi/2 against pi, Floquet frame
};

GateSimResult simulate_seed_gate(const G4VParameters& params, const MagneticField& field,
                                 double tau, double delta5, double theta,
                                 const std::vector<std::string>& frames, const DecayModel& model,
                                 const Tolerances& tol);

struct Table1Result {
  Table1Entry entry;
  double delta5_half = 0.0;
  double delta5_pi = 0.0;
  OptimizationResult half;
  OptimizationResult pi;
  double F_half = 0.0;
  double F_pi = 0.0;
  double F_composite = 0.0;
};

// Optimises pi/2 and pi rotations about y at every delta5 candidate of the
// entry and keeps the best dissipative result of each; the composite is two
// copies of the winning pi/2 pulse.
Table1Result run_table1_entry(const Table1Entry& entry, const OptimizationProblem& base, int threads);

struct Table2Result {
  Table2Entry entry;
  ExcitationScan scan;
  double tau = 0.0;
  double F = 0.0;
};

Table2Result run_table2_entry(const Table2Entry& entry, const G4VParameters& params,
                              double cooperativity, double temperature, const Tolerances& tol,
                              int threads);

// Quality inputs at one cooperativity.
struct CooperativityPoint {
  double C = 0.0;
  double I_half = 0.0;
  double I_pi = 0.0;
  double I_exc = 0.0;
  double t_exc = 0.0;    // ns, excitation window of the best pulse
  double gamma15 = 0.0;  // 1/ns
  double branching = 0.0;
};

struct Fig5Point {
  double tau = 0.0;     // Raman FWHM, ns
  double delta5 = 0.0;  // selected detuning
  double t_raman = 0.0; // ns, Raman window
  std::vector<CooperativityPoint> sweep;
  CooperativityOptimum best_lcs;
  CooperativityOptimum best_ghz;
  QualityReport lcs;
  QualityReport ghz;
};

ProtocolParams protocol_for(const ExperimentConfig& c, StateKind s, const CooperativityPoint& p,
                            double t_raman);

// Pulse-length dependence of Q(S, n) and Gamma(S, n) at the optimal cooperativity.
std::vector<Fig5Point> run_fig5(const ExperimentConfig& c, const G4VParameters& params, int threads);

// Runs the configured experiment, writing CSV/JSON artifacts into c.out_dir.
// Returns the JSON summary. Numerical failures propagate.
nlohmann::json run_experiment(const ExperimentConfig& c, int threads);

}  // namespace g4v
