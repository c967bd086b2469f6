#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "g4v/gates.hpp"

namespace g4v {

struct OptimizerBudget {
  int samples = 128;          // quasi-random points per iteration
  int iterations = 3;
  double local_tol = 1e-10;   // objective value at which refinement stops
  int local_max_evals = 300;  // per local refinement
  int local_starts = 1;       // new local minimisers refined per iteration

  void validate() const;
};

// Outcome of a bounded global minimisation.
struct GlobalMinimum {
  std::vector<double> x;
  double value = 0.0;
  double seed_value = 0.0;
  long evaluations = 0;
  int local_runs = 0;
  bool seed_optimal = false;  // no candidate improved on the seed
};

// Quasi-random sampling of the box (Sobol sequence with a seeded
// Cranley-Patterson shift), local minimisers from the k-nearest-neighbour
// graph of the samples, Nelder-Mead refinement inside the box. The seed point
// is always sampled and refined first.
GlobalMinimum minimize_global(const std::function<double(const std::vector<double>&)>& f,
                              const std::vector<double>& lower, const std::vector<double>& upper,
                              const std::vector<double>& seed_point, const OptimizerBudget& budget,
                              std::uint64_t seed);

// Free variables of a Raman gate. Polarization angles are lattice-frame
// spherical angles; the pulse-2 phase is the analytic axis phase plus
// `phase_offset`; both amplitudes are the analytic ones times `scale`.
struct DesignPoint {
  double theta_dc = 0.0;
  double theta1 = 0.0;
  double phi1 = 0.0;
  double theta2 = 0.0;
  double phi2 = 0.0;
  double scale = 1.0;
  double phase_offset = 0.0;
};

struct OptimizationProblem {
  G4VParameters params;  // dipole scale must already be calibrated
  double B = 0.0;          // T
  double theta_dc = 0.0;   // rad, seed orientation
  double tau = 0.0;        // ns, intensity FWHM
  double delta5 = 0.0;     // rad/ns
  double theta = kPi / 2;  // rotation angle
  char axis = 'y';
  bool optimize_phase = true;
  double scale_min = 0.2;
  double scale_max = 5.0;
  double cooperativity = 0.0;
  double temperature = 0.0;  // K
  OptimizerBudget budget;
  // Evaluations of the loss-aware local polish after the coherent stage; 0 disables it.
  int polish_evals = 0;
  Tolerances coherent_tol{1e-8, 1e-11};
  Tolerances dissipative_tol{1e-9, 1e-12};
  std::uint64_t seed = 1;

  // Throws std::invalid_argument with a description of the first problem found.
  void validate() const;
  GateTarget target() const;
};

struct RealizedGate {
  EigenSystem es;
  DipoleOperators d;
  RamanDrive drive;
};

// Builds the eigensystem and drive of a design point. Throws PhysicsError when
// the closed-form amplitudes do not exist.
RealizedGate realize(const OptimizationProblem& p, const DesignPoint& x);

// Design point of the analytic seed.
DesignPoint seed_point(const OptimizationProblem& p);

// 1 - F of the pure-state Floquet evolution; 1 when the point is unphysical.
double coherent_infidelity(const OptimizationProblem& p, const DesignPoint& x);

// 1 - F of the no-jump Floquet evolution under the problem's decay model.
double no_jump_infidelity(const OptimizationProblem& p, const DesignPoint& x);

struct OptimizationResult {
  DesignPoint best;
  RamanDrive drive;
  double coherent_I = 1.0;
  double dissipative_I = 1.0;
  double seed_coherent_I = 1.0;
  double stage1_coherent_I = 1.0;     // coherent-stage optimum before any polish
  double stage1_dissipative_I = 1.0;  // Lindblad value of the coherent-stage winner
  bool polished = false;              // the loss-aware polish supplied `best`
  long evaluations = 0;
  std::uint64_t seed = 0;
  bool seed_optimal = false;
};

OptimizationResult optimize_gate(const OptimizationProblem& p);

struct GridNode {
  double delta5 = 0.0;  // rad/ns
  double tau = 0.0;     // ns
  bool ok = false;
  std::string error;
  OptimizationResult result;
};

struct GridScanResult {
  std::vector<GridNode> nodes;  // delta5-major order
  int best = -1;                // node with the highest dissipative F
};

// One optimisation per (delta5, tau) node; nodes are distributed over
// `threads` workers and assembled in grid order. Node k uses seed + k.
GridScanResult grid_scan(const OptimizationProblem& base, const std::vector<double>& delta5s,
                         const std::vector<double>& taus, int threads);

struct ExcitationScan {
  std::vector<double> taus;  // ns
  std::vector<double> F;
  int best = -1;
};

ExcitationScan excitation_length_scan(const G4VParameters& params, const MagneticField& field,
                                      const std::vector<double>& taus, double cooperativity,
                                      double temperature, const Tolerances& tol = {},
                                      int threads = 1);

// Runs body(k) for k in [0, n) on up to `threads` workers, each index once.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace g4v
