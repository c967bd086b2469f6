#include "g4v/gates.hpp"

#include <algorithm>
#include <cmath>

namespace g4v {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

GateTarget GateTarget::rotation(const RVec3& axis, double theta) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw std::invalid_argument("rotation axis must be nonzero");
  GateTarget g;
  g.kind = GateKind::rotation;
  g.axis = axis / n;
  g.theta = theta;
  return g;
}

GateTarget GateTarget::identity() {
  GateTarget g;
  g.kind = GateKind::identity;
  g.theta = 0.0;
  return g;
}

GateTarget GateTarget::excitation() {
  GateTarget g;
  g.kind = GateKind::excitation;
  return g;
}

Mat2 GateTarget::unitary() const {
  if (kind == GateKind::excitation) {
    throw std::logic_error("excitation targets have no qubit unitary");
  }
  Mat2 sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  const Mat2 ns = axis.x() * sx + axis.y() * sy + axis.z() * sz;
  return std::cos(0.5 * theta) * Mat2::Identity() - kI * std::sin(0.5 * theta) * ns;
}

std::string to_string(FidelityMode mode) {
  switch (mode) {
    case FidelityMode::coherent: return "coherent";
    case FidelityMode::dissipative: return "dissipative";
    case FidelityMode::no_jump: return "no-jump";
  }
  return "unknown";
}

FidelityResult make_fidelity(double F, FidelityMode mode, double leakage) {
  FidelityResult r;
  r.F = clamp01(F);
  r.I = 1.0 - r.F;
  r.mode = mode;
  r.leakage = leakage;
  return r;
}

FidelityResult rotation_fidelity(const DrivenHamiltonian& h, const GateTarget& target,
                                 const DecayModel* model, const Tolerances& tol, int segments) {
  if (segments < 1) throw std::invalid_argument("segments must be >= 1");
  const Mat2 r = target.unitary();
  const double window = h.envelope.window();

  if (model == nullptr) {
    Block8 psi = Block8::Zero(8, 2);
    psi(0, 0) = 1.0;
    psi(1, 1) = 1.0;
    for (int s = 0; s < segments; ++s) {
      const DrivenHamiltonian hs = h.with_envelope(h.envelope.shifted(s * window));
      psi = propagate_schrodinger(hs, psi, s * window, (s + 1) * window, tol);
    }
    const Mat2 u = psi.topRows<2>();
    const cplx overlap = (u.adjoint() * r).trace() / 2.0;
    const double leak = 1.0 - 0.5 * u.squaredNorm();
    return make_fidelity(std::norm(overlap), FidelityMode::coherent, leak);
  }

  // Images of |1><1|, |1><2|, |2><2|; the inert time-bin ancilla pairs with the labels.
  Block8 x = Block8::Zero(8, 24);
  x(0, 0) = 1.0;
  x(0, 8 + 1) = 1.0;
  x(1, 16 + 1) = 1.0;
  for (int s = 0; s < segments; ++s) {
    const DrivenHamiltonian hs = h.with_envelope(h.envelope.shifted(s * window));
    x = propagate_lindblad(hs, *model, x, s * window, (s + 1) * window, tol);
  }
  Vec8 r1 = Vec8::Zero(), r2 = Vec8::Zero();
  r1.head<2>() = r.col(0);
  r2.head<2>() = r.col(1);
  const Mat8 p11 = x.middleCols<8>(0), p12 = x.middleCols<8>(8), p22 = x.middleCols<8>(16);
  const double f = 0.25 * ((r1.adjoint() * p11 * r1)(0).real() + (r2.adjoint() * p22 * r2)(0).real() +
                           2.0 * (r1.adjoint() * p12 * r2)(0).real());
  const double pop = 0.5 * (p11(0, 0) + p11(1, 1) + p22(0, 0) + p22(1, 1)).real();
  return make_fidelity(f, FidelityMode::dissipative, 1.0 - pop);
}

FidelityResult no_jump_fidelity(const DrivenHamiltonian& h, const GateTarget& target,
                                const DecayModel& model, const Tolerances& tol) {
  Block8 psi = Block8::Zero(8, 2);
  psi(0, 0) = 1.0;
  psi(1, 1) = 1.0;
  psi = propagate_no_jump(h, model, psi, 0.0, h.envelope.window(), tol);
  const Mat2 u = psi.topRows<2>();
  const cplx overlap = (u.adjoint() * target.unitary()).trace() / 2.0;
  return make_fidelity(std::norm(overlap), FidelityMode::no_jump, 1.0 - 0.5 * u.squaredNorm());
}

FidelityResult gate_fidelity(const RamanDrive& drive, const EigenSystem& es,
                             const DipoleOperators& d, const GateTarget& target,
                             const DecayModel* model, const Tolerances& tol) {
  return rotation_fidelity(floquet_hamiltonian(es, d, drive), target, model, tol, 1);
}

FidelityResult composite_fidelity(const RamanDrive& drive, const EigenSystem& es,
                                  const DipoleOperators& d, const GateTarget& target,
                                  int repetitions, const DecayModel* model,
                                  const Tolerances& tol) {
  return rotation_fidelity(floquet_hamiltonian(es, d, drive), target, model, tol, repetitions);
}

FidelityResult excitation_fidelity(const DrivenHamiltonian& h, const DecayModel* model,
                                   const Tolerances& tol) {
  const double t1 = h.envelope.window();
  Vec8 psi0 = Vec8::Zero();
  psi0(0) = psi0(1) = 1.0 / std::sqrt(2.0);
  if (model == nullptr) {
    const Block8 psi = propagate_schrodinger(h, psi0, 0.0, t1, tol);
    const double a5 = std::abs(psi(4, 0)), a2 = std::abs(psi(1, 0));
    const double f = 0.5 * (a5 * a5 + a2 * a2) + a5 * a2;
    return make_fidelity(f, FidelityMode::coherent, 1.0 - a5 * a5 - a2 * a2);
  }
  const Mat8 rho0 = psi0 * psi0.adjoint();
  const Mat8 rho = propagate_lindblad(h, *model, rho0, 0.0, t1, tol);
  const double p5 = rho(4, 4).real(), p2 = rho(1, 1).real();
  const double f = 0.5 * (p5 + p2) + std::abs(rho(4, 1));
  return make_fidelity(f, FidelityMode::dissipative, 1.0 - p5 - p2);
}

FidelityResult excitation_fidelity(const ExcitationDrive& drive, const EigenSystem& es,
                                   const DipoleOperators& d, const DecayModel* model,
                                   ExcitationFrame frame, const Tolerances& tol) {
  switch (frame) {
    case ExcitationFrame::manifold:
      return excitation_fidelity(excitation_manifold_hamiltonian(es, d, drive), model, tol);
    case ExcitationFrame::floquet:
      return excitation_fidelity(excitation_floquet_hamiltonian(es, d, drive), model, tol);
    case ExcitationFrame::lab:
      return excitation_fidelity(excitation_lab_hamiltonian(es, d, drive), model, tol);
  }
  throw std::invalid_argument("unknown excitation frame");
}

double amplitude_robustness(const RamanDrive& drive, const EigenSystem& es,
                            const DipoleOperators& d, const GateTarget& target, double delta_rel,
                            const DecayModel* model, const Tolerances& tol) {
  if (delta_rel <= -1.0) throw std::invalid_argument("delta_rel must exceed -1");
  if (delta_rel == 0.0) return 0.0;
  RamanDrive scaled = drive;
  const double s = std::sqrt(1.0 + delta_rel);
  scaled.amp1 *= s;
  scaled.amp2 *= s;
  return gate_fidelity(scaled, es, d, target, model, tol).F -
         gate_fidelity(drive, es, d, target, model, tol).F;
}

}  // namespace g4v
