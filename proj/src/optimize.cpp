#include "g4v/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_qrng.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace g4v {

namespace {

// Maps the real line onto [0, 1] by reflection, so unconstrained steps stay in the box.
double fold(double u) {
  double r = std::fmod(u, 2.0);
  if (r < 0.0) r += 2.0;
  return r > 1.0 ? 2.0 - r : r;
}

struct Box {
  std::vector<double> lo, hi;

  std::vector<double> to_x(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) x[k] = lo[k] + (hi[k] - lo[k]) * fold(u[k]);
    return x;
  }
  std::vector<double> to_u(const std::vector<double>& x) const {
    std::vector<double> u(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double w = hi[k] - lo[k];
      u[k] = w > 0.0 ? std::clamp((x[k] - lo[k]) / w, 0.0, 1.0) : 0.0;
    }
    return u;
  }
};

struct Sample {
  std::vector<double> u;
  double f;
};

double distance2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Samples not exceeded by any of their k nearest neighbours, best first.
std::vector<int> local_minimisers(const std::vector<Sample>& pool, int k) {
  const int n = static_cast<int>(pool.size());
  k = std::min(k, n - 1);
  std::vector<int> out;
  std::vector<std::pair<double, int>> d(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d[j] = {j == i ? -1.0 : distance2(pool[i].u, pool[j].u), j};
    std::partial_sort(d.begin(), d.begin() + k + 1, d.end());
    bool minimal = true;
    for (int m = 1; m <= k && minimal; ++m) minimal = pool[i].f <= pool[d[m].second].f;
    if (minimal) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return pool[a].f < pool[b].f; });
  return out;
}

struct Objective {
  const std::function<double(const std::vector<double>&)>* f;
  const Box* box;
  long evaluations = 0;

  double operator()(const std::vector<double>& u) {
    ++evaluations;
    const double v = (*f)(box->to_x(u));
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  auto* obj = static_cast<Objective*>(params);
  std::vector<double> u(v->size);
  for (std::size_t k = 0; k < v->size; ++k) u[k] = gsl_vector_get(v, k);
  return (*obj)(u);
}

Sample nelder_mead(Objective& obj, const Sample& start, const OptimizerBudget& budget) {
  const std::size_t n = start.u.size();
  gsl_multimin_function fn{&gsl_objective, n, &obj};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t k = 0; k < n; ++k) gsl_vector_set(x, k, start.u[k]);
  gsl_vector_set_all(step, 0.05);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);

  const long start_evals = obj.evaluations;
  while (obj.evaluations - start_evals < budget.local_max_evals) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (s->fval <= budget.local_tol) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-7) == GSL_SUCCESS) break;
  }
  Sample best{std::vector<double>(n), s->fval};
  for (std::size_t k = 0; k < n; ++k) best.u[k] = fold(gsl_vector_get(s->x, k));
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  if (start.f < best.f) return start;
  return best;
}

}  // namespace

void OptimizerBudget::validate() const {
  if (samples < 1) throw std::invalid_argument("optimizer samples must be >= 1");
  if (iterations < 0) throw std::invalid_argument("optimizer iterations must be >= 0");
  if (local_max_evals < 0) throw std::invalid_argument("local_max_evals must be >= 0");
  if (local_starts < 0) throw std::invalid_argument("local_starts must be >= 0");
  if (!(local_tol >= 0.0)) throw std::invalid_argument("local_tol must be >= 0");
}

GlobalMinimum minimize_global(const std::function<double(const std::vector<double>&)>& f,
                              const std::vector<double>& lower, const std::vector<double>& upper,
                              const std::vector<double>& seed_point, const OptimizerBudget& budget,
                              std::uint64_t seed) {
  budget.validate();
  const std::size_t n = lower.size();
  if (n == 0 || upper.size() != n || seed_point.size() != n) {
    throw std::invalid_argument("minimize_global: dimension mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(lower[k] <= upper[k])) throw std::invalid_argument("minimize_global: bounds out of order");
  }
  gsl_set_error_handler_off();

  const Box box{lower, upper};
  Objective obj{&f, &box};
  std::vector<Sample> pool;
  std::vector<std::vector<double>> starts;

  Sample seed_sample{box.to_u(seed_point), 0.0};
  seed_sample.f = obj(seed_sample.u);
  pool.push_back(seed_sample);
  Sample best = seed_sample;
  int local_runs = 0;

  auto refine = [&](const Sample& s) {
    starts.push_back(s.u);
    ++local_runs;
    const Sample r = nelder_mead(obj, s, budget);
    pool.push_back(r);
    if (r.f < best.f) best = r;
  };
  if (budget.local_max_evals > 0 && seed_sample.f > budget.local_tol) refine(seed_sample);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> shift(n);
  for (auto& s : shift) s = uni(rng);
  gsl_qrng* q = gsl_qrng_alloc(gsl_qrng_sobol, static_cast<unsigned>(n));
  std::vector<double> raw(n);

  for (int it = 0; it < budget.iterations && best.f > budget.local_tol; ++it) {
    for (int m = 0; m < budget.samples; ++m) {
      gsl_qrng_get(q, raw.data());
      Sample s{std::vector<double>(n), 0.0};
      for (std::size_t k = 0; k < n; ++k) s.u[k] = std::fmod(raw[k] + shift[k], 1.0);
      s.f = obj(s.u);
      pool.push_back(s);
      if (s.f < best.f) best = s;
    }
    int launched = 0;
    for (int i : local_minimisers(pool, static_cast<int>(2 * n))) {
      if (launched >= budget.local_starts || budget.local_max_evals == 0) break;
      const bool visited = std::any_of(starts.begin(), starts.end(), [&](const auto& u) {
        return distance2(u, pool[i].u) < 4e-4;
      });
      if (visited) continue;
      refine(Sample(pool[i]));
      ++launched;
    }
  }
  gsl_qrng_free(q);

  GlobalMinimum r;
  r.x = box.to_x(best.u);
  r.value = best.f;
  r.seed_value = seed_sample.f;
  r.evaluations = obj.evaluations;
  r.local_runs = local_runs;
  r.seed_optimal = !(best.f < seed_sample.f);
  if (r.seed_optimal) r.x = seed_point;
  return r;
}

void OptimizationProblem::validate() const {
  params.validate();
  budget.validate();
  if (!(B >= 0.0)) throw std::invalid_argument("B must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!std::isfinite(delta5) || delta5 == 0.0) throw std::invalid_argument("delta5 must be finite and nonzero");
  if (!(theta > 0.0)) throw std::invalid_argument("rotation angle must be > 0");
  if (axis != 'x' && axis != 'y') throw std::invalid_argument("axis must be 'x' or 'y'");
  if (!(scale_min > 0.0 && scale_min <= 1.0 && scale_max >= 1.0)) {
    throw std::invalid_argument("amplitude scale bounds must bracket 1");
  }
  if (!(theta_dc >= 0.0 && theta_dc <= 0.5 * kPi)) throw std::invalid_argument("theta_dc must lie in [0, pi/2]");
  if (cooperativity < 0.0) throw std::invalid_argument("cooperativity must be >= 0");
  if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
}

GateTarget OptimizationProblem::target() const {
  return GateTarget::rotation(axis == 'x' ? RVec3::UnitX() : RVec3::UnitY(), theta);
}

RealizedGate realize(const OptimizationProblem& p, const DesignPoint& x) {
  RealizedGate g;
  g.es = build_hamiltonian(p.params, MagneticField{p.B, x.theta_dc});
  g.d = dipole_in_eigenbasis(g.es);
  RamanDrive& drive = g.drive;
  drive.pol1 = polarization_vector(x.theta1, x.phi1, 0.0, 1);
  const Polarization bare2 = polarization_vector(x.theta2, x.phi2, 0.0, 2);
  double phase = axis_phase(g.es, g.d, drive.pol1.vector, bare2.vector, p.delta5, p.axis);
  if (p.optimize_phase) phase += x.phase_offset;
  drive.pol2 = polarization_vector(x.theta2, x.phi2, phase, 2);
  drive.envelope = GaussianEnvelope::from_fwhm(p.tau);
  std::tie(drive.omega1, drive.omega2) = raman_carriers(g.es, p.delta5);
  std::tie(drive.amp1, drive.amp2) =
      amplitudes_for_rotation(p.theta, g.es, g.d, drive.pol1, drive.pol2, drive.envelope, p.delta5);
  drive.amp1 *= x.scale;
  drive.amp2 *= x.scale;
  return g;
}

DesignPoint seed_point(const OptimizationProblem& p) {
  const EigenSystem es = build_hamiltonian(p.params, MagneticField{p.B, p.theta_dc});
  const DipoleOperators d = dipole_in_eigenbasis(es);
  const auto [p1, p2] = cross_coupling_polarizations(d);
  DesignPoint x;
  x.theta_dc = p.theta_dc;
  std::tie(x.theta1, x.phi1) = spherical_angles(p1.vector);
  std::tie(x.theta2, x.phi2) = spherical_angles(p2.vector);
  return x;
}

double coherent_infidelity(const OptimizationProblem& p, const DesignPoint& x) {
  try {
    const RealizedGate g = realize(p, x);
    return gate_fidelity(g.drive, g.es, g.d, p.target(), nullptr, p.coherent_tol).I;
  } catch (const PhysicsError&) {
    return 1.0;
  } catch (const NumericalError&) {
    return 1.0;
  }
}

double no_jump_infidelity(const OptimizationProblem& p, const DesignPoint& x) {
  try {
    const RealizedGate g = realize(p, x);
    const DecayModel model = build_decay_model(g.es, g.d, p.cooperativity, p.temperature);
    return no_jump_fidelity(floquet_hamiltonian(g.es, g.d, g.drive), p.target(), model,
                            p.coherent_tol).I;
  } catch (const PhysicsError&) {
    return 1.0;
  } catch (const NumericalError&) {
    return 1.0;
  }
}

namespace {

double dissipative_infidelity(const OptimizationProblem& p, const DesignPoint& x, RamanDrive* drive) {
  const RealizedGate g = realize(p, x);
  if (drive != nullptr) *drive = g.drive;
  const DecayModel model = build_decay_model(g.es, g.d, p.cooperativity, p.temperature);
  return gate_fidelity(g.drive, g.es, g.d, p.target(), &model, p.dissipative_tol).I;
}

std::vector<double> pack(const DesignPoint& x, bool phase) {
  std::vector<double> v{x.theta_dc, x.theta1, x.phi1, x.theta2, x.phi2, x.scale};
  if (phase) v.push_back(x.phase_offset);
  return v;
}

DesignPoint unpack(const std::vector<double>& v) {
  DesignPoint x;
  x.theta_dc = v[0];
  x.theta1 = v[1];
  x.phi1 = v[2];
  x.theta2 = v[3];
  x.phi2 = v[4];
  x.scale = v[5];
  if (v.size() > 6) x.phase_offset = v[6];
  return x;
}

}  // namespace

OptimizationResult optimize_gate(const OptimizationProblem& p) {
  p.validate();
  const DesignPoint x0 = seed_point(p);
  std::vector<double> lo{0.0, 0.0, 0.0, 0.0, 0.0, p.scale_min};
  std::vector<double> hi{0.5 * kPi, kPi, kTwoPi, kPi, kTwoPi, p.scale_max};
  if (p.optimize_phase) {
    lo.push_back(-kPi);
    hi.push_back(kPi);
  }
  const auto f = [&](const std::vector<double>& v) { return coherent_infidelity(p, unpack(v)); };
  const GlobalMinimum m = minimize_global(f, lo, hi, pack(x0, p.optimize_phase), p.budget, p.seed);

  OptimizationResult r;
  r.best = unpack(m.x);
  r.coherent_I = m.value;
  r.stage1_coherent_I = m.value;
  r.seed_coherent_I = m.seed_value;
  r.evaluations = m.evaluations;
  r.seed = p.seed;
  r.seed_optimal = m.seed_optimal;
  r.dissipative_I = dissipative_infidelity(p, r.best, &r.drive);
  r.stage1_dissipative_I = r.dissipative_I;

  if (p.polish_evals > 0) {
    OptimizerBudget local;
    local.iterations = 0;
    local.local_max_evals = p.polish_evals;
    local.local_tol = 0.0;
    const auto g = [&](const std::vector<double>& v) { return no_jump_infidelity(p, unpack(v)); };
    const GlobalMinimum q = minimize_global(g, lo, hi, m.x, local, p.seed);
    r.evaluations += q.evaluations;
    if (!q.seed_optimal) {
      const DesignPoint y = unpack(q.x);
      RamanDrive drive;
      const double dis = dissipative_infidelity(p, y, &drive);
      if (dis < r.dissipative_I) {
        r.best = y;
        r.drive = drive;
        r.dissipative_I = dis;
        r.coherent_I = coherent_infidelity(p, y);
        r.polished = true;
      }
    }
  }
  return r;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  if (workers == 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          body(k);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

GridScanResult grid_scan(const OptimizationProblem& base, const std::vector<double>& delta5s,
                         const std::vector<double>& taus, int threads) {
  if (delta5s.empty() || taus.empty()) throw std::invalid_argument("grid dimensions must be >= 1");
  GridScanResult out;
  out.nodes.resize(delta5s.size() * taus.size());
  for (std::size_t i = 0; i < delta5s.size(); ++i) {
    for (std::size_t j = 0; j < taus.size(); ++j) {
      GridNode& node = out.nodes[i * taus.size() + j];
      node.delta5 = delta5s[i];
      node.tau = taus[j];
    }
  }
  parallel_for(static_cast<int>(out.nodes.size()), threads, [&](int k) {
    GridNode& node = out.nodes[k];
    OptimizationProblem p = base;
    p.delta5 = node.delta5;
    p.tau = node.tau;
    p.seed = base.seed + static_cast<std::uint64_t>(k);
    try {
      node.result = optimize_gate(p);
      node.ok = true;
    } catch (const std::exception& e) {
      node.error = e.what();
    }
  });
  for (int k = 0; k < static_cast<int>(out.nodes.size()); ++k) {
    if (!out.nodes[k].ok) continue;
    if (out.best < 0 || out.nodes[k].result.dissipative_I < out.nodes[out.best].result.dissipative_I) {
      out.best = k;
    }
  }
  return out;
}

ExcitationScan excitation_length_scan(const G4VParameters& params, const MagneticField& field,
                                      const std::vector<double>& taus, double cooperativity,
                                      double temperature, const Tolerances& tol, int threads) {
  const EigenSystem es = build_hamiltonian(params, field);
  const DipoleOperators d = dipole_in_eigenbasis(es);
  const DecayModel model = build_decay_model(es, d, cooperativity, temperature);
  ExcitationScan out;
  out.taus = taus;
  out.F.assign(taus.size(), 0.0);
  parallel_for(static_cast<int>(taus.size()), threads, [&](int k) {
    const ExcitationDrive drive = make_excitation_drive(es, d, GaussianEnvelope::from_fwhm(taus[k]));
    out.F[k] = excitation_fidelity(drive, es, d, &model, ExcitationFrame::manifold, tol).F;
  });
  for (int k = 0; k < static_cast<int>(taus.size()); ++k) {
    if (out.best < 0 || out.F[k] > out.F[out.best]) out.best = k;
  }
  return out;
}

}  // namespace g4v
