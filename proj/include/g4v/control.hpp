#pragma once

#include <array>
#include <vector>

#include "g4v/model.hpp"

namespace g4v {

// Gaussian amplitude envelope xi(t) = exp(-(t - t0)^2 / (4 sigma^2)); times in ns.
struct GaussianEnvelope {
  double tau_fwhm = 0.0;  // intensity FWHM
  double sigma = 0.0;
  double t0 = 0.0;

  // Pulse centred in a window [0, 12 sigma].
  static GaussianEnvelope from_fwhm(double tau_fwhm_ns);

  double operator()(double t) const;
  double area() const;        // integral of xi^2 = sigma sqrt(2 pi)
  double window() const;      // 12 sigma
  GaussianEnvelope shifted(double dt) const;
};

// Slowly varying coupling a * xi(t) * exp(i nu t) * op, always paired with its
// Hermitian conjugate.
struct DriveTerm {
  cplx amplitude;
  double nu = 0.0;
  Mat8 op;
};

// H(t) = diag(diagonal) + sum_k xi(t) [a_k e^{i nu_k t} op_k + h.c.]
class DrivenHamiltonian {
 public:
  RVec8 diagonal = RVec8::Zero();
  GaussianEnvelope envelope;
  std::vector<DriveTerm> terms;

  Mat8 operator()(double t) const;
  Mat8 coupling(double t) const;

  // U^dagger H U - i (dU/dt) U^dagger for U = diag(exp(-i rates t)). Exact.
  DrivenHamiltonian in_frame(const RVec8& rates) const;

  // Keeps only terms with |nu| <= max_nu.
  DrivenHamiltonian truncated(double max_nu) const;

  DrivenHamiltonian with_envelope(const GaussianEnvelope& env) const;
};

struct RamanDrive {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double amp1 = 0.0;  // (rad/ns)/nm
  double amp2 = 0.0;
  Polarization pol1;
  Polarization pol2;
  GaussianEnvelope envelope;

  double delta5(const EigenSystem& es) const { return es.gap(0, 4) - omega1; }
  double delta2(const EigenSystem& es) const { return es.gap(0, 1) - (omega1 - omega2); }
};

// Carriers for a given single-photon detuning Delta5 and two-photon detuning Delta2.
std::pair<double, double> raman_carriers(const EigenSystem& es, double delta5, double delta2 = 0.0);

struct ExcitationDrive {
  double omega = 0.0;
  double amp = 0.0;
  Polarization pol;
  GaussianEnvelope envelope;
};

// Resonant |1> <-> |5> drive with the lattice-frame e_y polarization and the closed-form amplitude.
ExcitationDrive make_excitation_drive(const EigenSystem& es, const DipoleOperators& d,
                                      const GaussianEnvelope& env);

// Lattice-frame y polarization used for excitation pulses.
Polarization excitation_polarization();

struct EffectiveRotation {
  cplx omega_eff;
  double delta_eff = 0.0;
  RVec3 axis = RVec3::Zero();
  double theta = 0.0;
  // min_i |Delta_i| / max |Omega|; elimination is questionable below 5.
  double adiabaticity = 0.0;
};

// Rotating-frame constants delta and xi_1..xi_8.
struct RamanFrame {
  double delta = 0.0;
  std::array<double, 8> xi{};

  // Diagonal rates phi_j with U = diag(exp(-i phi_j t)).
  RVec8 rates() const;
};

RamanFrame raman_frame(const EigenSystem& es, double omega1, double omega2);

// Largest residual of the frame conditions: <1|H~|1> = 0 and omega_m + 2(xi_m - xi_n) = 0.
double frame_residual(const RamanFrame& f, const EigenSystem& es, double omega1, double omega2);

// Full lab-frame H0 - mu . E(t); energies referenced to eps_1.
DrivenHamiltonian lab_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                  const RamanDrive& drive);

// Rotating-frame Hamiltonian without any truncation.
DrivenHamiltonian rotating_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                       const RamanDrive& drive);

// Floquet approximation: RWA terms plus the exp(-+i(omega2 - omega1)t) cross terms.
DrivenHamiltonian floquet_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                      const RamanDrive& drive);

// RWA: Floquet without the quasi-periodic cross terms.
DrivenHamiltonian rwa_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                  const RamanDrive& drive);

// Frequency threshold separating slow terms from optical ones for the Raman frame.
double floquet_cutoff(const RamanDrive& drive);

EffectiveRotation effective_rotation(const EigenSystem& es, const DipoleOperators& d,
                                     const RamanDrive& drive);

// Polarization-dependent sums S_1, S_2 and the unit-amplitude coupling D.
struct RamanSums {
  double s1 = 0.0;
  double s2 = 0.0;
  cplx d;
};

RamanSums raman_sums(const EigenSystem& es, const DipoleOperators& d, const CVec3& e1,
                     const CVec3& e2, double delta5);

// Peak amplitudes (E1, E2) producing an equatorial rotation by theta.
std::pair<double, double> amplitudes_for_rotation(double theta, const EigenSystem& es,
                                                  const DipoleOperators& d,
                                                  const Polarization& pol1,
                                                  const Polarization& pol2,
                                                  const GaussianEnvelope& env, double delta5);

// Relative phase on pulse 2 that puts the effective axis on +x or +y.
double axis_phase(const EigenSystem& es, const DipoleOperators& d, const CVec3& e1,
                  const CVec3& e2, double delta5, char axis);

// Polarizations removing <2|mu.e1|5> and <1|mu.e2|6>.
std::pair<Polarization, Polarization> cross_coupling_polarizations(const DipoleOperators& d);

// Analytic seed: cross-coupling polarizations, axis phase, closed-form amplitudes.
RamanDrive seed_raman_drive(const EigenSystem& es, const DipoleOperators& d, double theta,
                            char axis, double tau_fwhm_ns, double delta5);

double excitation_amplitude(const EigenSystem& es, const DipoleOperators& d,
                            const GaussianEnvelope& env);

// Lab-frame excitation Hamiltonian H0 + 2 E(t) cos(omega t) mu . e_L.
DrivenHamiltonian excitation_lab_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                             const ExcitationDrive& drive);

// Frame rotating |5> only; terms at 2 omega removed.
DrivenHamiltonian excitation_floquet_hamiltonian(const EigenSystem& es,
                                                 const DipoleOperators& d,
                                                 const ExcitationDrive& drive);

// Frame rotating the whole excited manifold at omega; optical terms removed.
DrivenHamiltonian excitation_manifold_hamiltonian(const EigenSystem& es,
                                                  const DipoleOperators& d,
                                                  const ExcitationDrive& drive);

}  // namespace g4v
