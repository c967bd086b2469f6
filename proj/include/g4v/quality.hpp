#pragma once

#include <functional>
#include <string>
#include <vector>

#include "g4v/types.hpp"

namespace g4v {

enum class StateKind { LCS, GHZ };

std::string to_string(StateKind s);
StateKind state_from_string(const std::string& s);

// Time-bin protocol constants. Durations in ns, rates in 1/ns.
struct ProtocolParams {
  StateKind state = StateKind::LCS;
  double eta = 0.98;               // emitter-to-fiber coupling
  double attenuation_length = 1e3; // m
  double c_fiber = 2.0e8;          // m/s
  double tau_c = 1e3;              // ns, spin coherence time
  double t_exc = 0.0;              // ns
  double t_raman = 0.0;            // ns
  double gamma15 = 0.0;            // Purcell-enhanced |5> -> |1> rate
  double branching = 0.0;          // S

  double t_emission() const { return 10.0 / gamma15; }
  double t_tb() const { return t_exc + t_emission() + t_raman; }
  // Temporal length tau(S, n) of an n-photon state, ns.
  double state_duration(int n) const;

  void validate() const;
};

struct ErrorBudget {
  double I_half = 0.0;  // pi/2 rotation
  double I_pi = 0.0;
  double I_exc = 0.0;
};

// Depolarization parameter of an operation with infidelity I.
double depolarization(double infidelity);

// <psi| (1 - eps) rho + eps 1/8 |psi> for rho = |psi><psi| on an 8-level space.
double depolarized_fidelity(const Vec8& psi, double eps);

double photon_survival(const ProtocolParams& p, int n);
double branching_success(double branching, int n);
double dephasing_factor(const ProtocolParams& p, int n);

// Product of (1 - 7 eps/8) over the operations of the n-photon schedule.
double state_fidelity(const ErrorBudget& b, StateKind s, int n);

struct ExponentialFit {
  double A = 1.0;
  double beta = 0.0;
  double n50 = 0.0;  // F(n50) = 1/2 on the fit; +inf when beta <= 0
};

// Least-squares fit of log F(n) = log A - beta n over n = n_lo..n_hi.
ExponentialFit fit_state_fidelity(const ErrorBudget& b, StateKind s, int n_lo = 1, int n_hi = 6);

struct QualityReport {
  StateKind state = StateKind::LCS;
  int n = 0;
  double p_g = 1.0;
  double p_b = 1.0;
  double p_d = 1.0;
  double F = 1.0;
  double Q = 1.0;
  double Gamma = 0.0;  // Hz
  ExponentialFit fit;
};

QualityReport quality(const ProtocolParams& p, const ErrorBudget& b, int n);

struct CooperativityOptimum {
  double C = 0.0;
  double Q = 0.0;
  std::vector<double> Q_grid;
  bool flat = false;  // every grid value tied; the smallest C is returned
};

// argmax over `grid` of Q(S, 1) with protocol and budget re-evaluated per C.
CooperativityOptimum optimal_cooperativity(
    const std::vector<double>& grid,
    const std::function<std::pair<ProtocolParams, ErrorBudget>(double)>& setup);

}  // namespace g4v
