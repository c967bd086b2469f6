#pragma once

#include <string>

#include "g4v/dynamics.hpp"

namespace g4v {

enum class GateKind { rotation, excitation, identity };

struct GateTarget {
  GateKind kind = GateKind::identity;
  RVec3 axis = RVec3::UnitY();
  double theta = 0.0;

  static GateTarget rotation(const RVec3& axis, double theta);
  static GateTarget identity();
  static GateTarget excitation();

  // exp(-i theta N.sigma / 2) on span{|1>, |2>}.
  Mat2 unitary() const;
};

enum class FidelityMode { coherent, dissipative, no_jump };

std::string to_string(FidelityMode mode);

struct FidelityResult {
  double F = 0.0;
  double I = 1.0;
  FidelityMode mode = FidelityMode::coherent;
  double leakage = 0.0;  // population left outside {|1>, |2>}
};

FidelityResult make_fidelity(double F, FidelityMode mode, double leakage);

// Propagates span{|1>, |2>} through `segments` consecutive copies of the pulse
// window and scores against the target. Without a model the pure-state
// evolution is used; with a model the Lindblad evolution.
FidelityResult rotation_fidelity(const DrivenHamiltonian& h, const GateTarget& target,
                                 const DecayModel* model, const Tolerances& tol = {},
                                 int segments = 1);

// Pure-state fidelity of the no-jump evolution under the decay model.
FidelityResult no_jump_fidelity(const DrivenHamiltonian& h, const GateTarget& target,
                                const DecayModel& model, const Tolerances& tol = {});

// Floquet-frame gate fidelity of a Raman drive.
FidelityResult gate_fidelity(const RamanDrive& drive, const EigenSystem& es,
                             const DipoleOperators& d, const GateTarget& target,
                             const DecayModel* model = nullptr, const Tolerances& tol = {});

// Back-to-back repetitions of the same drive scored against `target`.
FidelityResult composite_fidelity(const RamanDrive& drive, const EigenSystem& es,
                                  const DipoleOperators& d, const GateTarget& target,
                                  int repetitions, const DecayModel* model = nullptr,
                                  const Tolerances& tol = {});

enum class ExcitationFrame { manifold, floquet, lab };

// Phase-maximised overlap with (e^{i phi}|5> + |2>)/sqrt 2 from (|1> + |2>)/sqrt 2.
FidelityResult excitation_fidelity(const DrivenHamiltonian& h, const DecayModel* model,
                                   const Tolerances& tol = {});

FidelityResult excitation_fidelity(const ExcitationDrive& drive, const EigenSystem& es,
                                   const DipoleOperators& d, const DecayModel* model = nullptr,
                                   ExcitationFrame frame = ExcitationFrame::manifold,
                                   const Tolerances& tol = {});

// F(amplitudes * sqrt(1 + delta_rel)) - F(amplitudes); power read as intensity.
double amplitude_robustness(const RamanDrive& drive, const EigenSystem& es,
                            const DipoleOperators& d, const GateTarget& target, double delta_rel,
                            const DecayModel* model = nullptr, const Tolerances& tol = {});

}  // namespace g4v
