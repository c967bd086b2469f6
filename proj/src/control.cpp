#include "g4v/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace g4v {

namespace {

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

// Detunings Delta_i = eps_i - eps_1 - omega_1 of the excited levels for a given Delta5.
std::array<double, 4> excited_detunings(const EigenSystem& es, double delta5) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = es.gap(0, 4 + i) - es.gap(0, 4) + delta5;
  return out;
}

void require_nonresonant(const std::array<double, 4>& det) {
  for (int i = 0; i < 4; ++i) {
    if (det[i] == 0.0) {
      std::ostringstream msg;
      msg << "Raman drive resonant with excited level |" << 5 + i << ">: Delta_" << 5 + i
          << " = 0";
      throw PhysicsError(msg.str());
    }
  }
}

// Keeps the ground rows listed in `rows` and the excited columns of m.
Mat8 ground_excited_rows(const Mat8& m, std::initializer_list<int> rows) {
  Mat8 out = Mat8::Zero();
  for (int r : rows) out.block<1, 4>(r, 4) = m.block<1, 4>(r, 4);
  return out;
}

}  // namespace

GaussianEnvelope GaussianEnvelope::from_fwhm(double tau_fwhm_ns) {
  if (!(tau_fwhm_ns > 0.0) || !std::isfinite(tau_fwhm_ns)) {
    throw std::invalid_argument("pulse FWHM must be positive");
  }
  GaussianEnvelope env;
  env.tau_fwhm = tau_fwhm_ns;
  env.sigma = tau_fwhm_ns / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  env.t0 = 6.0 * env.sigma;
  return env;
}

double GaussianEnvelope::operator()(double t) const {
  const double x = t - t0;
  if (std::abs(x) > 6.0 * sigma * (1.0 + 1e-12)) return 0.0;
  return std::exp(-x * x / (4.0 * sigma * sigma));
}

double GaussianEnvelope::area() const { return sigma * std::sqrt(kTwoPi); }

double GaussianEnvelope::window() const { return 12.0 * sigma; }

GaussianEnvelope GaussianEnvelope::shifted(double dt) const {
  GaussianEnvelope env = *this;
  env.t0 += dt;
  return env;
}

Mat8 DrivenHamiltonian::coupling(double t) const {
  Mat8 s = Mat8::Zero();
  const double x = envelope(t);
  if (x == 0.0) return s;
  for (const auto& term : terms) {
    const cplx c = term.amplitude * x * std::polar(1.0, term.nu * t);
    s.noalias() += c * term.op;
  }
  return s + s.adjoint();
}

Mat8 DrivenHamiltonian::operator()(double t) const {
  Mat8 h = coupling(t);
  h.diagonal() += diagonal.cast<cplx>();
  return h;
}

DrivenHamiltonian DrivenHamiltonian::in_frame(const RVec8& rates) const {
  DrivenHamiltonian out;
  out.diagonal = diagonal - rates;
  out.envelope = envelope;
  const double tol = 1e-12 * std::max(1.0, rates.cwiseAbs().maxCoeff());
  for (const auto& term : terms) {
    std::vector<std::pair<double, Mat8>> groups;
    for (int m = 0; m < 8; ++m) {
      for (int n = 0; n < 8; ++n) {
        if (term.op(m, n) == cplx(0.0)) continue;
        const double shift = rates(m) - rates(n);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return std::abs(g.first - shift) <= tol; });
        if (it == groups.end()) {
          groups.emplace_back(shift, Mat8::Zero());
          it = std::prev(groups.end());
        }
        it->second(m, n) = term.op(m, n);
      }
    }
    for (auto& [shift, op] : groups) {
      out.terms.push_back(DriveTerm{term.amplitude, term.nu + shift, std::move(op)});
    }
  }
  return out;
}

DrivenHamiltonian DrivenHamiltonian::truncated(double max_nu) const {
  DrivenHamiltonian out;
  out.diagonal = diagonal;
  out.envelope = envelope;
  for (const auto& term : terms) {
    if (std::abs(term.nu) <= max_nu) out.terms.push_back(term);
  }
  return out;
}

DrivenHamiltonian DrivenHamiltonian::with_envelope(const GaussianEnvelope& env) const {
  DrivenHamiltonian out = *this;
  out.envelope = env;
  return out;
}

std::pair<double, double> raman_carriers(const EigenSystem& es, double delta5, double delta2) {
  const double omega1 = es.gap(0, 4) - delta5;
  const double omega2 = omega1 - es.gap(0, 1) + delta2;
  return {omega1, omega2};
}

RVec8 RamanFrame::rates() const {
  double sum = 0.0;
  for (double x : xi) sum += x;
  RVec8 r;
  for (int j = 0; j < 8; ++j) r(j) = delta + 2.0 * xi[j] - sum;
  return r;
}

RamanFrame raman_frame(const EigenSystem&, double omega1, double omega2) {
  RamanFrame f;
  f.delta = 2.0 * omega2;
  f.xi[0] = f.xi[2] = 0.5 * (omega2 - omega1);
  f.xi[1] = f.xi[3] = 0.0;
  for (int j = 4; j < 8; ++j) f.xi[j] = 0.5 * omega2;
  return f;
}

double frame_residual(const RamanFrame& f, const EigenSystem&, double omega1, double omega2) {
  double r = -f.delta - f.xi[0];
  for (int j = 1; j < 8; ++j) r += f.xi[j];
  double worst = std::abs(r);
  const double omega[2] = {omega1, omega2};
  for (int m = 0; m < 2; ++m) {
    for (int n = 4; n < 8; ++n) {
      worst = std::max(worst, std::abs(omega[m] + 2.0 * (f.xi[m] - f.xi[n])));
    }
  }
  return worst / std::max({1.0, std::abs(omega1), std::abs(omega2)});
}

DrivenHamiltonian lab_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                  const RamanDrive& drive) {
  DrivenHamiltonian h;
  h.diagonal = es.energies.array() - es.energies(0);
  h.envelope = drive.envelope;
  h.terms.push_back({-0.5 * drive.amp1, drive.omega1, d.dot(drive.pol1.vector)});
  h.terms.push_back({-0.5 * drive.amp2, drive.omega2, d.dot(drive.pol2.vector)});
  return h;
}

DrivenHamiltonian rotating_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                       const RamanDrive& drive) {
  const RamanFrame f = raman_frame(es, drive.omega1, drive.omega2);
  return lab_hamiltonian(es, d, drive).in_frame(f.rates());
}

DrivenHamiltonian floquet_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                      const RamanDrive& drive) {
  const double w12 = drive.omega1 - drive.omega2;
  DrivenHamiltonian h;
  h.envelope = drive.envelope;
  h.diagonal(0) = 0.0;
  h.diagonal(1) = es.gap(0, 1) - w12;
  h.diagonal(2) = es.gap(0, 2);
  h.diagonal(3) = es.gap(0, 3) - w12;
  for (int i = 4; i < 8; ++i) h.diagonal(i) = es.gap(0, i) - drive.omega1;

  const Mat8 m1 = d.dot(drive.pol1.vector);
  const Mat8 m2 = d.dot(drive.pol2.vector);
  const cplx a1 = -0.5 * drive.amp1;
  const cplx a2 = -0.5 * drive.amp2;
  h.terms.push_back({a1, 0.0, ground_excited_rows(m1, {0, 2})});
  h.terms.push_back({a2, 0.0, ground_excited_rows(m2, {1, 3})});
  h.terms.push_back({a1, w12, ground_excited_rows(m1, {1, 3})});
  h.terms.push_back({a2, -w12, ground_excited_rows(m2, {0, 2})});
  return h;
}

DrivenHamiltonian rwa_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                  const RamanDrive& drive) {
  DrivenHamiltonian h = floquet_hamiltonian(es, d, drive);
  h.terms.resize(2);
  return h;
}

double floquet_cutoff(const RamanDrive& drive) {
  return 0.5 * std::min(std::abs(drive.omega1), std::abs(drive.omega2));
}

EffectiveRotation effective_rotation(const EigenSystem& es, const DipoleOperators& d,
                                     const RamanDrive& drive) {
  const auto det = excited_detunings(es, drive.delta5(es));
  require_nonresonant(det);
  const Mat8 m1 = d.dot(drive.pol1.vector);
  const Mat8 m2 = d.dot(drive.pol2.vector);

  EffectiveRotation r;
  r.omega_eff = 0.0;
  r.delta_eff = drive.delta2(es);
  double max_coupling = 0.0;
  for (int i = 0; i < 4; ++i) {
    const cplx o1 = -0.5 * m1(0, 4 + i) * drive.amp1;
    const cplx o2 = -0.5 * m2(1, 4 + i) * drive.amp2;
    r.omega_eff += o1 * std::conj(o2) / det[i];
    r.delta_eff += (std::norm(o2) - std::norm(o1)) / det[i];
    max_coupling = std::max({max_coupling, std::abs(o1), std::abs(o2)});
  }
  // <1|H|2> = -omega_eff.
  const RVec3 n(-r.omega_eff.real(), r.omega_eff.imag(), -0.5 * r.delta_eff);
  const double nn = n.norm();
  r.axis = nn > 0.0 ? RVec3(n / nn) : RVec3::Zero();
  r.theta = 2.0 * std::sqrt(std::norm(r.omega_eff) + r.delta_eff * r.delta_eff) *
            drive.envelope.area();
  double min_det = std::abs(det[0]);
  for (double x : det) min_det = std::min(min_det, std::abs(x));
  r.adiabaticity = max_coupling > 0.0 ? min_det / max_coupling
                                      : std::numeric_limits<double>::infinity();
  return r;
}

RamanSums raman_sums(const EigenSystem& es, const DipoleOperators& d, const CVec3& e1,
                     const CVec3& e2, double delta5) {
  const auto det = excited_detunings(es, delta5);
  require_nonresonant(det);
  const Mat8 m1 = d.dot(e1);
  const Mat8 m2 = d.dot(e2);
  RamanSums s;
  s.d = 0.0;
  for (int i = 0; i < 4; ++i) {
    s.s1 += std::norm(m1(0, 4 + i)) / det[i];
    s.s2 += std::norm(m2(1, 4 + i)) / det[i];
    s.d += 0.25 * m1(0, 4 + i) * std::conj(m2(1, 4 + i)) / det[i];
  }
  return s;
}

std::pair<double, double> amplitudes_for_rotation(double theta, const EigenSystem& es,
                                                  const DipoleOperators& d,
                                                  const Polarization& pol1,
                                                  const Polarization& pol2,
                                                  const GaussianEnvelope& env, double delta5) {
  const RamanSums s = raman_sums(es, d, pol1.vector, pol2.vector, delta5);
  if (s.s1 == 0.0 || s.s2 == 0.0) {
    throw PhysicsError("polarization does not couple the qubit levels to the excited manifold");
  }
  if (s.s1 / s.s2 < 0.0) {
    throw PhysicsError("no equatorial rotation: S1 and S2 have opposite signs");
  }
  if (std::abs(s.d) == 0.0) throw PhysicsError("vanishing Raman coupling D");
  if (theta == 0.0) return {0.0, 0.0};
  const double ratio = std::sqrt(s.s2 / s.s1);
  const double e1 = std::sqrt(std::abs(theta) / (2.0 * std::abs(s.d) * env.area()) * ratio);
  return {e1, e1 / ratio};
}

double axis_phase(const EigenSystem& es, const DipoleOperators& d, const CVec3& e1,
                  const CVec3& e2, double delta5, char axis) {
  const RamanSums s = raman_sums(es, d, e1, e2, delta5);
  // The eliminated qubit coupling is <1|H|2> = -Omega_eff, Omega_eff ~ D exp(-i phase).
  switch (axis) {
    case 'x': return wrap_angle(std::arg(s.d) + kPi);
    case 'y': return wrap_angle(std::arg(s.d) - 0.5 * kPi);
    default: throw std::invalid_argument("axis must be 'x' or 'y'");
  }
}

std::pair<Polarization, Polarization> cross_coupling_polarizations(const DipoleOperators& d) {
  const cplx z25 = d.mu[2](1, 4);
  const cplx z16 = d.mu[2](0, 5);
  if (std::abs(z25) < 1e-300 || std::abs(z16) < 1e-300) {
    throw PhysicsError("degenerate polarization: mu^z_25 or mu^z_16 vanishes");
  }
  const cplx r1 = d.mu[0](1, 4) / z25;
  const cplx r2 = d.mu[0](0, 5) / z16;
  const CVec3 e1(1.0, 0.0, -r1);
  const CVec3 e2(1.0, 0.0, -r2);
  return {polarization_from_vector(e1, 1), polarization_from_vector(e2, 2)};
}

RamanDrive seed_raman_drive(const EigenSystem& es, const DipoleOperators& d, double theta,
                            char axis, double tau_fwhm_ns, double delta5) {
  auto [p1, p2] = cross_coupling_polarizations(d);
  const double phase = axis_phase(es, d, p1.vector, p2.vector, delta5, axis);
  p2.phase = phase;
  p2.vector *= std::polar(1.0, phase);

  RamanDrive drive;
  drive.envelope = GaussianEnvelope::from_fwhm(tau_fwhm_ns);
  std::tie(drive.omega1, drive.omega2) = raman_carriers(es, delta5);
  drive.pol1 = p1;
  drive.pol2 = p2;
  std::tie(drive.amp1, drive.amp2) =
      amplitudes_for_rotation(theta, es, d, p1, p2, drive.envelope, delta5);
  return drive;
}

Polarization excitation_polarization() { return polarization_vector(0.5 * kPi, 0.5 * kPi, 0.0, 1); }

double excitation_amplitude(const EigenSystem&, const DipoleOperators& d,
                            const GaussianEnvelope& env) {
  const CVec3 e = excitation_polarization().vector;
  const cplx c1 = d.dot(e)(0, 4);
  if (std::abs(c1) == 0.0) throw PhysicsError("|1> <-> |5> transition forbidden for e_y");
  return std::sqrt(kPi) / (4.0 * env.sigma * std::abs(c1));
}

ExcitationDrive make_excitation_drive(const EigenSystem& es, const DipoleOperators& d,
                                      const GaussianEnvelope& env) {
  ExcitationDrive drive;
  drive.omega = es.gap(0, 4);
  drive.pol = excitation_polarization();
  drive.envelope = env;
  drive.amp = excitation_amplitude(es, d, env);
  return drive;
}

DrivenHamiltonian excitation_lab_hamiltonian(const EigenSystem& es, const DipoleOperators& d,
                                             const ExcitationDrive& drive) {
  DrivenHamiltonian h;
  h.diagonal = es.energies.array() - es.energies(0);
  h.envelope = drive.envelope;
  h.terms.push_back({drive.amp, drive.omega, d.dot(drive.pol.vector)});
  return h;
}

DrivenHamiltonian excitation_floquet_hamiltonian(const EigenSystem& es,
                                                 const DipoleOperators& d,
                                                 const ExcitationDrive& drive) {
  DrivenHamiltonian h;
  h.diagonal = es.energies.array() - es.energies(0);
  h.diagonal(4) = 0.0;
  h.envelope = drive.envelope;
  const Mat8 m = d.dot(drive.pol.vector);
  Mat8 to5 = Mat8::Zero();
  to5.col(4) = m.col(4);
  to5(4, 4) = 0.0;
  Mat8 rest = m;
  rest.row(4).setZero();
  rest.col(4).setZero();
  h.terms.push_back({drive.amp, 0.0, to5});
  h.terms.push_back({drive.amp, drive.omega, rest});
  return h;
}

DrivenHamiltonian excitation_manifold_hamiltonian(const EigenSystem& es,
                                                  const DipoleOperators& d,
                                                  const ExcitationDrive& drive) {
  DrivenHamiltonian h;
  h.diagonal = es.energies.array() - es.energies(0);
  h.diagonal.tail<4>().array() -= drive.omega;
  h.envelope = drive.envelope;
  const Mat8 m = d.dot(drive.pol.vector);
  Mat8 ge = Mat8::Zero();
  ge.topRightCorner<4, 4>() = m.topRightCorner<4, 4>();
  h.terms.push_back({drive.amp, 0.0, ge});
  return h;
}

}  // namespace g4v
