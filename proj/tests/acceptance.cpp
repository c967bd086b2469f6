// Acceptance run: one PASS/FAIL line per criterion.
// Usage: g4v_acceptance [criterion...] (default: all); G4V_THREADS sets the worker count.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "g4v/experiments.hpp"
#include "g4v/units.hpp"

using namespace g4v;
using units::from_deg;
using units::from_ghz;
using units::from_ps;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string cat(const Args&... args) {
  std::ostringstream out;
  out << std::setprecision(6);
  (out << ... << args);
  return out.str();
}

int worker_count() {
  if (const char* env = std::getenv("G4V_THREADS")) return std::max(1, std::atoi(env));
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

const G4VParameters& snv() {
  static const G4VParameters p = calibrated(G4VParameters{});
  return p;
}

bool within(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }
bool within_factor(double x, double ref, double factor) { return x >= ref / factor && x <= ref * factor; }

// Reference values.
struct TableOneRow {
  double B, theta_deg, tau_ps, F_half, F_pi, F_composite, tol;
  std::vector<double> delta5_ghz;
  OptimizerBudget budget;
  int polish;
};

OptimizerBudget budget(int samples, int iterations, int local, int starts = 1) {
  OptimizerBudget b;
  b.samples = samples;
  b.iterations = iterations;
  b.local_max_evals = local;
  b.local_starts = starts;
  return b;
}

const std::vector<TableOneRow>& table_one() {
  static const std::vector<TableOneRow> rows{
      {8.0, 22.5, 416.67, 0.9994, 0.9979, 0.9988, 0.005, {-41.11}, OptimizerBudget{}, 300},
      {1.0, 4.5, 10.0, 0.9916, 0.9830, 0.9833, 0.01, {-100.0, -50.0, 50.0, 100.0}, OptimizerBudget{}, 300},
      {0.3, 1.0, 1000.0, 0.9953, 0.9831, 0.9906, 0.01, {-100.0, 100.0}, budget(32, 1, 100), 100},
  };
  return rows;
}

struct TableTwoRow {
  double B, theta_deg, tau_ps, F;
  Range scan;
};

const std::vector<TableTwoRow>& table_two() {
  static const std::vector<TableTwoRow> rows{
      {0.3, 1.0, 93.33, 0.9826, Range{from_ps(40.0), from_ps(200.0), 17}},
      {1.0, 4.5, 32.35, 0.9900, Range{from_ps(10.0), from_ps(60.0), 26}},
      {8.0, 22.5, 7.22, 0.9984, Range{from_ps(2.0), from_ps(20.0), 37}},
  };
  return rows;
}

OptimizationProblem base_problem(const OptimizerBudget& b, int polish) {
  OptimizationProblem p;
  p.params = snv();
  p.budget = b;
  p.polish_evals = polish;
  p.seed = 1;
  return p;
}

// Gate-table results are shared by several criteria.
std::map<double, Table1Result>& table_one_cache() {
  static std::map<double, Table1Result> cache;
  return cache;
}

const Table1Result& table_one_result(const TableOneRow& row) {
  auto& cache = table_one_cache();
  auto it = cache.find(row.B);
  if (it != cache.end()) return it->second;
  Table1Entry e;
  e.B = row.B;
  e.theta_dc = from_deg(row.theta_deg);
  e.tau = from_ps(row.tau_ps);
  for (double d : row.delta5_ghz) e.delta5.push_back(from_ghz(d));
  return cache.emplace(row.B, run_table1_entry(e, base_problem(row.budget, row.polish), worker_count()))
      .first->second;
}

double excitation_infidelity(double B, double theta_deg, double tau_ps, double C) {
  const auto es = build_hamiltonian(snv(), MagneticField{B, from_deg(theta_deg)});
  const auto d = dipole_in_eigenbasis(es);
  const auto model = build_decay_model(es, d, C, 0.0);
  const auto drive = make_excitation_drive(es, d, GaussianEnvelope::from_fwhm(from_ps(tau_ps)));
  return excitation_fidelity(drive, es, d, &model).I;
}

// 1. Calibration identity.
Outcome calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto es = build_hamiltonian(snv(), MagneticField{0.0, 0.0});
  const auto d = dipole_in_eigenbasis(es);
  const auto m = build_decay_model(es, d, 0.0, 0.0);
  const double rel = std::abs(m.total_out(4) * 4.5 - 1.0);
  const double psb = std::abs(m.gamma_psb - 0.4 / 4.5);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {rel < 1e-9 && psb < 1e-15 && secs < 1.0,
          cat("total rate ", m.total_out(4), "/ns, relative error ", rel, ", ", secs, " s")};
}

// 2. Floquet against exact rotating-frame propagation.
Outcome frame_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Tolerances tol{1e-10, 1e-12};
  double worst = 0.0;
  std::string detail;
  for (double B : {7.36, 8.0}) {
    const auto es = build_hamiltonian(snv(), MagneticField{B, from_deg(22.5)});
    const auto d = dipole_in_eigenbasis(es);
    const auto drive = seed_raman_drive(es, d, kPi / 2, 'x', from_ps(10.0), from_ghz(100.0));
    const auto target = GateTarget::rotation(RVec3::UnitX(), kPi / 2);
    const double ff = rotation_fidelity(floquet_hamiltonian(es, d, drive), target, nullptr, tol).F;
    const double fl = rotation_fidelity(rotating_hamiltonian(es, d, drive), target, nullptr, tol).F;
    worst = std::max(worst, std::abs(ff - fl));
    detail += cat(B, " T: F_floquet ", ff, " F_exact ", fl, "; ");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-3 && secs < 60.0, cat(detail, "max |dF| ", worst, ", ", secs, " s")};
}

// 3. Seed-amplitude landscape over field strength and angle.
Outcome seed_landscape() {
  const int n = 20;
  std::vector<double> F(n * n, 0.0);
  std::vector<int> failed(n * n, 0);
  const Tolerances tol{1e-8, 1e-11, 0.0, 2'000'000};
  parallel_for(n * n, worker_count(), [&](int k) {
    const double B = 4.0 + 5.0 * (k / n) / (n - 1);
    const double th = 0.5 * kPi * (k % n) / (n - 1);
    try {
      const auto es = build_hamiltonian(snv(), MagneticField{B, th});
      const auto d = dipole_in_eigenbasis(es);
      const auto drive = seed_raman_drive(es, d, kPi / 2, 'x', from_ps(10.0), from_ghz(100.0));
      F[k] = gate_fidelity(drive, es, d, GateTarget::rotation(RVec3::UnitX(), kPi / 2), nullptr, tol).F;
    } catch (const std::runtime_error&) {
      // No seed, or amplitudes too large to integrate: scored as F = 0.
      failed[k] = 1;
    }
  });
  const int best = static_cast<int>(std::max_element(F.begin(), F.end()) - F.begin());
  const double B = 4.0 + 5.0 * (best / n) / (n - 1);
  const double th = 90.0 * (best % n) / (n - 1);
  const int nfailed = std::accumulate(failed.begin(), failed.end(), 0);
  return {within(F[best], 0.99, 0.01) && within(B, 7.36, 0.75),
          cat("max F ", F[best], " at B = ", B, " T, theta_dc = ", th,
              " deg (reference 0.99 at 7.36 T); ", nfailed, " of ", n * n, " nodes without a usable seed")};
}

// 4. Optimised dissipative gate fidelities.
Outcome table_one_reproduction() {
  bool ok = true;
  std::string detail;
  for (const auto& row : table_one()) {
    const auto& r = table_one_result(row);
    const bool pass = within(r.F_half, row.F_half, row.tol) && within(r.F_pi, row.F_pi, row.tol) &&
                      within(r.F_composite, row.F_composite, row.tol);
    ok = ok && pass;
    detail += cat(row.B, " T: ", r.F_half, "/", r.F_pi, "/", r.F_composite, " vs ", row.F_half, "/",
                  row.F_pi, "/", row.F_composite, " +-", row.tol, pass ? "" : " (out)", "; ");
  }
  return {ok, detail};
}

// 5. Excitation fidelities and field ordering.
Outcome table_two_reproduction() {
  bool ok = true;
  std::string detail;
  std::vector<double> best_tau, best_F;
  for (const auto& row : table_two()) {
    const double F = 1.0 - excitation_infidelity(row.B, row.theta_deg, row.tau_ps, 0.0);
    const auto scan = excitation_length_scan(snv(), MagneticField{row.B, from_deg(row.theta_deg)},
                                             row.scan.values(), 0.0, 0.0, {1e-9, 1e-12}, worker_count());
    best_tau.push_back(scan.taus[scan.best]);
    best_F.push_back(scan.F[scan.best]);
    const bool pass = within(F, row.F, 0.005);
    ok = ok && pass;
    detail += cat(row.B, " T: F(", row.tau_ps, " ps) = ", F, " vs ", row.F, pass ? "" : " (out)",
                  ", scan best ", units::to_ps(best_tau.back()), " ps F ", best_F.back(), "; ");
  }
  const bool ordered = best_tau[0] > best_tau[1] && best_tau[1] > best_tau[2] && best_F[0] < best_F[1] &&
                       best_F[1] < best_F[2];
  return {ok && ordered, cat(detail, ordered ? "ordering preserved" : "ordering violated")};
}

// 6. Coherent-stage floor at default budget.
Outcome coherent_floor() {
  bool ok = true;
  std::string detail;
  for (const auto& row : table_one()) {
    const auto& r = table_one_result(row);
    double best = std::min(r.half.stage1_coherent_I, r.pi.stage1_coherent_I);
    std::string where = "gate-table nodes";
    if (!(best < 1e-4)) {
      // Longer pulses at the same field on the default budget.
      OptimizationProblem p = base_problem(OptimizerBudget{}, 0);
      p.B = row.B;
      p.theta_dc = from_deg(row.theta_deg);
      p.theta = 0.5 * kPi;
      p.optimize_phase = true;
      const std::vector<double> d5{from_ghz(-100.0), from_ghz(100.0)};
      const std::vector<double> taus{from_ps(100.0), from_ps(200.0)};
      const auto g = grid_scan(p, d5, taus, worker_count());
      for (const auto& node : g.nodes) {
        if (node.ok && node.result.stage1_coherent_I < best) {
          best = node.result.stage1_coherent_I;
          where = cat("tau ", units::to_ps(node.tau), " ps, delta5 ", units::to_ghz(node.delta5), " GHz");
        }
      }
    }
    ok = ok && best < 1e-4;
    detail += cat(row.B, " T: best coherent I ", best, " (", where, "); ");
  }
  return {ok, detail};
}

// 7. Optimised pi gates across cooperativities.
Outcome robustness_band() {
  struct Pulse {
    double tau_ps, delta5_ghz;
    OptimizerBudget b;
    int polish;
  };
  const std::vector<Pulse> pulses{{9.0, 33.33, OptimizerBudget{}, 300},
                                  {416.67, -41.11, OptimizerBudget{}, 300},
                                  {1000.0, -100.0, budget(32, 1, 150), 150}};
  const std::vector<double> Cs{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0};
  bool ok = true;
  std::string detail;
  for (const auto& pulse : pulses) {
    OptimizationProblem p = base_problem(pulse.b, pulse.polish);
    p.B = 8.0;
    p.theta_dc = from_deg(22.5);
    p.tau = from_ps(pulse.tau_ps);
    p.delta5 = from_ghz(pulse.delta5_ghz);
    p.theta = kPi;
    p.optimize_phase = false;
    DesignPoint x;
    const auto& anchor = table_one().front();
    if (pulse.tau_ps == anchor.tau_ps && pulse.delta5_ghz == anchor.delta5_ghz.front()) {
      x = table_one_result(anchor).pi.best;
    } else {
      x = optimize_gate(p).best;
    }
    const RealizedGate g = realize(p, x);
    std::vector<double> I(Cs.size());
    parallel_for(static_cast<int>(Cs.size()), worker_count(), [&](int k) {
      const auto m = build_decay_model(g.es, g.d, Cs[k], 0.0);
      I[k] = gate_fidelity(g.drive, g.es, g.d, p.target(), &m, p.dissipative_tol).I;
    });
    const double worst = *std::max_element(I.begin(), I.end());
    ok = ok && worst < 0.08;
    detail += cat(pulse.tau_ps, " ps: max I(pi) ", worst, " (C=0: ", I.front(), ", C=100: ", I.back(), "); ");
  }
  return {ok, detail};
}

// 8. Quality pipeline at 8 T.
Outcome quality_pipeline() {
  const auto& anchor = table_one().front();
  const auto& t1 = table_one_result(anchor);
  const auto& t2 = table_two().back();
  const ErrorBudget b{t1.half.dissipative_I, t1.pi.dissipative_I,
                      excitation_infidelity(t2.B, t2.theta_deg, t2.tau_ps, 0.0)};
  const double F1 = state_fidelity(b, StateKind::LCS, 1);
  const auto fit_lcs = fit_state_fidelity(b, StateKind::LCS);
  const auto fit_ghz = fit_state_fidelity(b, StateKind::GHZ);

  ExperimentConfig c = parse_config_text("");
  c.B = 8.0;
  c.theta_dc = from_deg(22.5);
  c.fig5_tau = {from_ps(73.33)};
  c.fig5_delta5 = {from_ghz(-41.11)};
  c.n_photons = 100;
  c.polish_evals = 300;
  c.excitation_tau = t2.scan;
  const auto pts = run_fig5(c, snv(), worker_count());
  const auto& pt = pts.front();

  const bool ok = within(F1, 0.995, 0.003) && within(fit_lcs.n50, 109.0, 15.0) &&
                  within(fit_ghz.n50, 121.0, 15.0) && within_factor(pt.lcs.Q, 1.1e-15, 2.0) &&
                  within_factor(pt.lcs.Gamma, 9.0, 2.0) && within_factor(pt.ghz.Q, 1.7e-15, 2.0) &&
                  within_factor(pt.ghz.Gamma, 17.0, 2.0);
  return {ok, cat("F(LCS,1) ", F1, " (0.995), n50 LCS ", fit_lcs.n50, " (109), GHZ ", fit_ghz.n50,
                  " (121); 73.33 ps: Q(LCS,100) ", pt.lcs.Q, " (1.1e-15) Gamma ", pt.lcs.Gamma,
                  " Hz (9) at C ", pt.best_lcs.C, "; Q(GHZ,100) ", pt.ghz.Q, " (1.7e-15) Gamma ",
                  pt.ghz.Gamma, " Hz (17) at C ", pt.best_ghz.C)};
}

// 9. Property suites.
DrivenHamiltonian random_drive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DrivenHamiltonian h;
  for (int k = 0; k < 8; ++k) h.diagonal(k) = 20.0 * u(rng);
  h.envelope = GaussianEnvelope::from_fwhm(0.2 + 0.3 * (u(rng) + 1.0));
  for (int n = 0; n < 2; ++n) {
    Mat8 op = Mat8::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 4; j < 8; ++j) op(i, j) = cplx(u(rng), u(rng));
    h.terms.push_back({cplx(3.0 * u(rng), 3.0 * u(rng)), 10.0 * u(rng), op});
  }
  return h;
}

Mat8 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat8 a;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) a(i, j) = cplx(n(rng), n(rng));
  const Mat8 rho = a * a.adjoint();
  return rho / rho.trace().real();
}

Outcome property_suites() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, bool> ok;
  const int cases = 1000;

  bool herm = true;
  for (int k = 0; k < cases && herm; ++k) {
    const auto es = build_hamiltonian(snv(), MagneticField{12.0 * u(rng), kPi * (u(rng) - 0.5)});
    const double s = es.hamiltonian.cwiseAbs().maxCoeff();
    herm = (es.hamiltonian - es.hamiltonian.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * s &&
           (es.transform.adjoint() * es.transform - Mat8::Identity()).cwiseAbs().maxCoeff() < 1e-12;
  }
  ok["hermiticity"] = herm;

  bool unit = true;
  for (int k = 0; k < cases && unit; ++k) {
    const auto h = random_drive(rng);
    const Block8 U = propagate_schrodinger(h, Block8(Mat8::Identity()), 0.0, h.envelope.window(), {1e-10, 1e-12});
    unit = (U.adjoint() * U - Mat8::Identity()).cwiseAbs().maxCoeff() < 1e-8;
  }
  ok["unitarity"] = unit;

  bool trace = true, positive = true;
  std::uniform_int_distribution<int> level(0, 7);
  for (int k = 0; k < cases && trace && positive; ++k) {
    const auto h = random_drive(rng);
    DecayModel m;
    for (int c = 0; c < 6; ++c) {
      const int from = level(rng);
      m.channels.push_back({(from + 1 + level(rng) % 7) % 8, from, 2.0 * u(rng), ChannelKind::radiative});
    }
    const Mat8 rho = propagate_lindblad(h, m, random_state(rng), 0.0, h.envelope.window(), {1e-10, 1e-12});
    trace = std::abs(rho.trace() - 1.0) < 1e-8;
    Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (rho + rho.adjoint()));
    positive = es.eigenvalues().minCoeff() > -1e-8 && (rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-8;
  }
  ok["trace"] = trace;
  ok["positivity"] = positive;

  bool eps = true;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int k = 0; k < cases && eps; ++k) {
    Vec8 psi;
    for (int i = 0; i < 8; ++i) psi(i) = cplx(nd(rng), nd(rng));
    const double I = 0.5 * u(rng);
    eps = std::abs(depolarized_fidelity(psi, depolarization(I)) - (1.0 - I)) < 1e-12;
  }
  ok["epsilon=8I/7"] = eps;

  bool limit = true;
  for (int k = 0; k < 50 && limit; ++k) {
    const auto h = random_drive(rng);
    const Mat8 rho0 = random_state(rng);
    const Tolerances tol{1e-11, 1e-13};
    const Mat8 U = propagate_schrodinger(h, Block8(Mat8::Identity()), 0.0, h.envelope.window(), tol);
    const Mat8 rho = propagate_lindblad(h, DecayModel{}, rho0, 0.0, h.envelope.window(), tol);
    limit = (rho - U * rho0 * U.adjoint()).cwiseAbs().maxCoeff() < 1e-8;
  }
  ok["lindblad-unitary limit"] = limit;

  bool mono = true;
  for (StateKind s : {StateKind::LCS, StateKind::GHZ}) {
    ProtocolParams p;
    p.state = s;
    p.t_exc = 0.01;
    p.t_raman = 0.5;
    p.gamma15 = 0.3;
    p.branching = 0.7;
    for (int n = 1; n < 200 && mono; ++n) {
      mono = photon_survival(p, n + 1) < photon_survival(p, n) &&
             branching_success(p.branching, n + 1) < branching_success(p.branching, n) &&
             dephasing_factor(p, n + 1) < dephasing_factor(p, n);
    }
  }
  ok["monotonicity"] = mono;

  OptimizationProblem p = base_problem(budget(6, 1, 12), 0);
  p.B = 8.0;
  p.theta_dc = from_deg(22.5);
  auto run = [&](int threads) {
    const auto g = grid_scan(p, {from_ghz(-100.0), from_ghz(100.0)}, {from_ps(10.0)}, threads);
    CsvTable t({"I_coherent", "I_dissipative", "scale", "evaluations"});
    for (const auto& n : g.nodes) {
      t.add_row({format_number(n.result.coherent_I), format_number(n.result.dissipative_I),
                 format_number(n.result.best.scale), std::to_string(n.result.evaluations)});
    }
    return t.str();
  };
  const std::string a = run(1);
  ok["reproducible grid"] = a == run(1) && a == run(2);

  bool all = true;
  std::string detail;
  for (const auto& [name, pass] : ok) {
    all = all && pass;
    detail += name + (pass ? " ok; " : " FAILED; ");
  }
  return {all, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"calibration identity", calibration},
      {"frame equivalence", frame_equivalence},
      {"analytic-seed landscape", seed_landscape},
      {"gate fidelity table", table_one_reproduction},
      {"excitation table", table_two_reproduction},
      {"coherent optimization floor", coherent_floor},
      {"dissipative robustness band", robustness_band},
      {"quality pipeline", quality_pipeline},
      {"property suites", property_suites},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
  int failures = 0;
  for (int k = 0; k < static_cast<int>(criteria.size()); ++k) {
    if (!selected.empty() && !selected.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << k + 1 << " " << criteria[k].first << " ["
              << std::fixed << std::setprecision(1) << secs << " s]: " << std::defaultfloat << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
