#include "g4v/quality.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace g4v {

std::string to_string(StateKind s) { return s == StateKind::LCS ? "LCS" : "GHZ"; }

StateKind state_from_string(const std::string& s) {
  if (s == "LCS" || s == "lcs") return StateKind::LCS;
  if (s == "GHZ" || s == "ghz") return StateKind::GHZ;
  throw std::invalid_argument("unknown state kind '" + s + "' (expected LCS or GHZ)");
}

double ProtocolParams::state_duration(int n) const {
  const double per_photon = state == StateKind::LCS ? 2.0 * t_tb() : t_tb();
  return n * per_photon + 2.0 * t_raman;
}

void ProtocolParams::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(attenuation_length > 0.0)) throw std::invalid_argument("attenuation length must be > 0");
  if (!(c_fiber > 0.0)) throw std::invalid_argument("fiber light speed must be > 0");
  if (!(tau_c > 0.0)) throw std::invalid_argument("coherence time must be > 0");
  if (!(t_exc >= 0.0) || !(t_raman >= 0.0)) throw std::invalid_argument("gate durations must be >= 0");
  if (!(gamma15 > 0.0)) throw std::invalid_argument("gamma15 must be > 0");
  if (!(branching >= 0.0)) throw std::invalid_argument("branching ratio must be >= 0");
}

double depolarization(double infidelity) { return 8.0 * infidelity / 7.0; }

double depolarized_fidelity(const Vec8& psi, double eps) {
  const Vec8 u = psi.normalized();
  const Mat8 rho = (1.0 - eps) * (u * u.adjoint()) + (eps / 8.0) * Mat8::Identity();
  return (u.adjoint() * rho * u)(0).real();
}

double photon_survival(const ProtocolParams& p, int n) {
  if (n < 1) throw std::invalid_argument("photon_survival requires n >= 1");
  // c T_tb / L_att with T_tb in seconds.
  const double x = p.c_fiber * p.t_tb() * 1e-9 / p.attenuation_length;
  double pg = 1.0;
  for (int k = 1; k <= n; ++k) pg *= 0.5 * p.eta * std::exp(-k * x) * (1.0 + std::exp(x));
  return pg;
}

double branching_success(double branching, int n) {
  if (branching < 0.0) throw std::invalid_argument("branching ratio must be >= 0");
  if (std::isinf(branching)) return 1.0;
  return std::pow(1.0 - 1.0 / (1.0 + branching), 2.0 * n);
}

double dephasing_factor(const ProtocolParams& p, int n) {
  return std::exp(-p.state_duration(n) / p.tau_c);
}

double state_fidelity(const ErrorBudget& b, StateKind s, int n) {
  const double f_half = 1.0 - 7.0 * depolarization(b.I_half) / 8.0;
  const double f_pi = 1.0 - 7.0 * depolarization(b.I_pi) / 8.0;
  const double f_exc = 1.0 - 7.0 * depolarization(b.I_exc) / 8.0;
  // Per photon: G gate, two excitations, one pi rotation; then the final pi/2.
  const double per_photon = (s == StateKind::LCS ? f_half : 1.0) * f_exc * f_exc * f_pi;
  return std::pow(per_photon, n) * f_half;
}

ExponentialFit fit_state_fidelity(const ErrorBudget& b, StateKind s, int n_lo, int n_hi) {
  if (n_hi <= n_lo) throw std::invalid_argument("fit window needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int m = n_hi - n_lo + 1;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double y = std::log(state_fidelity(b, s, n));
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / m;
  ExponentialFit fit;
  fit.A = std::exp(intercept);
  fit.beta = -slope;
  fit.n50 = fit.beta > 0.0 ? (intercept + std::log(2.0)) / fit.beta
                           : std::numeric_limits<double>::infinity();
  return fit;
}

QualityReport quality(const ProtocolParams& p, const ErrorBudget& b, int n) {
  p.validate();
  QualityReport r;
  r.state = p.state;
  r.n = n;
  r.p_g = photon_survival(p, n);
  r.p_b = branching_success(p.branching, n);
  r.p_d = dephasing_factor(p, n);
  r.F = state_fidelity(b, p.state, n);
  r.Q = r.p_b * r.p_g * r.p_d * r.F;
  r.Gamma = r.p_g * r.p_b / (p.state_duration(n) * 1e-9);
  r.fit = fit_state_fidelity(b, p.state);
  return r;
}

CooperativityOptimum optimal_cooperativity(
    const std::vector<double>& grid,
    const std::function<std::pair<ProtocolParams, ErrorBudget>(double)>& setup) {
  if (grid.empty()) throw std::invalid_argument("cooperativity grid is empty");
  CooperativityOptimum out;
  int best = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [p, b] = setup(grid[k]);
    out.Q_grid.push_back(quality(p, b, 1).Q);
    if (out.Q_grid[k] > out.Q_grid[best]) best = static_cast<int>(k);
  }
  out.flat = true;
  for (double q : out.Q_grid) out.flat = out.flat && q == out.Q_grid.front();
  if (out.flat) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] < grid[best]) best = static_cast<int>(k);
    }
  }
  out.C = grid[best];
  out.Q = out.Q_grid[best];
  return out;
}

}  // namespace g4v
