#pragma once

#include <string>
#include <vector>

#include "g4v/control.hpp"
#include "g4v/integrator.hpp"

namespace g4v {

enum class ChannelKind { radiative, phonon, psb };

std::string to_string(ChannelKind kind);

// Lindblad operator sqrt(rate) |to><from|.
struct DecayChannel {
  int to = 0;
  int from = 0;
  double rate = 0.0;  // 1/ns
  ChannelKind kind = ChannelKind::radiative;
};

struct EmitterConstants {
  double debye_waller = 0.6;
  double t1 = 4.5;  // ns
};

struct DecayModel {
  std::vector<DecayChannel> channels;
  double gamma_psb = 0.0;
  double cooperativity = 0.0;
  double temperature = 0.0;  // K

  // Sum of rates of all channels |to><from| of the given kind.
  double rate(int to, int from, ChannelKind kind) const;
  // Total rate out of a level.
  double total_out(int level) const;
};

// Golden-rule rate for |j> -> |i>, i ground, j excited; 1/ns.
double radiative_rate(const EigenSystem& es, const DipoleOperators& d, int i, int j);

// Dipole scale (nm) for which the ZPL rates out of the lowest excited state at B = 0
// sum to DWF / T1.
double calibrate_dipole_scale(const G4VParameters& params, const EmitterConstants& c = {});

// Copy of params with the calibrated dipole scale.
G4VParameters calibrated(const G4VParameters& params, const EmitterConstants& c = {});

// Phonon-assisted relaxation rate for a splitting omega (rad/ns) at temperature T (K).
double phonon_rate(double omega, double temperature);

DecayModel build_decay_model(const EigenSystem& es, const DipoleOperators& d, double cooperativity,
                             double temperature, const EmitterConstants& c = {});

// gamma_15,C / (gamma_25 + gamma_35 + gamma_45 + gamma_psb); +inf if the denominator vanishes.
double branching_ratio(const DecayModel& model);

using Tolerances = IntegratorOptions;

// Advances each column of psi under H from t0 to t1.
Block8 propagate_schrodinger(const DrivenHamiltonian& h, const Block8& psi0, double t0, double t1,
                             const Tolerances& tol = {}, IntegratorStats* stats = nullptr);

// Pure-state evolution under H - (i/2) sum_k L_k^dagger L_k (quantum jumps discarded).
Block8 propagate_no_jump(const DrivenHamiltonian& h, const DecayModel& model, const Block8& psi0,
                         double t0, double t1, const Tolerances& tol = {},
                         IntegratorStats* stats = nullptr);

// Advances a row of 8x8 operator blocks [X_1 X_2 ...] under the Lindblad equation.
Block8 propagate_lindblad(const DrivenHamiltonian& h, const DecayModel& model, const Block8& blocks,
                          double t0, double t1, const Tolerances& tol = {},
                          IntegratorStats* stats = nullptr);

Mat8 propagate_lindblad(const DrivenHamiltonian& h, const DecayModel& model, const Mat8& rho0,
                        double t0, double t1, const Tolerances& tol = {});

}  // namespace g4v
