#include "g4v/experiments.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <stdexcept>

#include "g4v/units.hpp"

namespace g4v {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double x) { return format_number(x); }

GateTarget y_rotation(double theta) { return GateTarget::rotation(RVec3::UnitY(), theta); }

DrivenHamiltonian frame_hamiltonian(const std::string& frame, const EigenSystem& es,
                                    const DipoleOperators& d, const RamanDrive& drive) {
  if (frame == "floquet") return floquet_hamiltonian(es, d, drive);
  if (frame == "rwa") return rwa_hamiltonian(es, d, drive);
  if (frame == "lab") return rotating_hamiltonian(es, d, drive);
  throw std::invalid_argument("unknown frame '" + frame + "'");
}

json design_json(const DesignPoint& x) {
  return json{{"theta_dc_deg", units::to_deg(x.theta_dc)},
              {"theta1", x.theta1},
              {"phi1", x.phi1},
              {"theta2", x.theta2},
              {"phi2", x.phi2},
              {"amp_scale", x.scale},
              {"phase_offset", x.phase_offset}};
}

json result_json(const OptimizationResult& r) {
  return json{{"design", design_json(r.best)},
              {"I_coherent", r.coherent_I},
              {"I_dissipative", r.dissipative_I},
              {"I_seed_coherent", r.seed_coherent_I},
              {"I_stage1_coherent", r.stage1_coherent_I},
              {"I_stage1_dissipative", r.stage1_dissipative_I},
              {"polished", r.polished},
              {"seed_optimal", r.seed_optimal},
              {"evaluations", r.evaluations},
              {"seed", r.seed}};
}

const std::vector<std::string> kScanHeader{
    "B_T",      "tau_ps",  "delta5_GHz", "theta_dc_deg", "theta1",     "phi1",
    "theta2",   "phi2",    "phase",      "amp_scale",    "F_coherent", "F_dissipative"};

std::vector<std::string> scan_row(double B, double tau, double delta5, const OptimizationResult& r) {
  const DesignPoint& x = r.best;
  return {num(B),           num(units::to_ps(tau)), num(units::to_ghz(delta5)),
          num(units::to_deg(x.theta_dc)), num(x.theta1), num(x.phi1), num(x.theta2), num(x.phi2),
          num(r.drive.pol2.phase), num(x.scale), num(1.0 - r.coherent_I), num(1.0 - r.dissipative_I)};
}

struct Artifacts {
  fs::path dir;
  std::string experiment;
  std::string hash;
  std::uint64_t seed;

  void csv(const std::string& name, const CsvTable& t) const {
    const fs::path p = dir / name;
    t.write(p);
    write_metadata(p, experiment, hash, seed);
  }
  void summary(const json& j) const { write_json(dir / (experiment + ".json"), j); }
};

json run_eigensystem(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out) {
  const EigenSystem es = build_hamiltonian(params, MagneticField{c.B, c.theta_dc});
  const EigenSystem zero = build_hamiltonian(params, MagneticField{0.0, 0.0});
  CsvTable t({"level", "manifold", "energy_GHz"});
  json energies = json::array();
  for (int k = 0; k < 8; ++k) {
    const double e = units::to_ghz(es.energies(k) - es.energies(0));
    energies.push_back(e);
    t.add_row({std::to_string(k + 1), es.manifold[k] == Manifold::ground ? "ground" : "excited", num(e)});
  }
  const DipoleOperators d = dipole_in_eigenbasis(es);
  const DecayModel model = build_decay_model(es, d, c.cooperativity, c.temperature);
  out.csv("eigensystem.csv", t);
  json j{{"B_T", c.B},
         {"theta_dc_deg", units::to_deg(c.theta_dc)},
         {"energies_GHz", energies},
         {"ground_orbital_splitting_GHz", units::to_ghz(es.gap(0, 2))},
         {"zero_field_ground_splitting_GHz", units::to_ghz(zero.gap(0, 2))},
         {"excited_orbital_splitting_GHz", units::to_ghz(es.gap(4, 6))},
         {"dipole_scale_nm", params.dipole_scale},
         {"excited_total_rate_per_ns", model.total_out(4)},
         {"branching_ratio", branching_ratio(model)}};
  out.summary(j);
  return j;
}

json run_gate_sim(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out) {
  const MagneticField field{c.B, c.theta_dc};
  const EigenSystem es = build_hamiltonian(params, field);
  const DipoleOperators d = dipole_in_eigenbasis(es);
  const DecayModel model = build_decay_model(es, d, c.cooperativity, c.temperature);
  const double theta = c.gate == "pi" ? kPi : 0.5 * kPi;
  const GateSimResult r =
      simulate_seed_gate(params, field, c.tau, c.delta5, theta, c.frames, model, c.tolerances());
  CsvTable t({"frame", "mode", "F"});
  json frames;
  for (const auto& [frame, F] : r.coherent_F) {
    t.add_row({frame, "coherent", num(F)});
    frames[frame] = F;
  }
  t.add_row({"floquet", "dissipative", num(r.dissipative_F)});
  t.add_row({"floquet", "composite-dissipative", num(r.composite_F)});
  out.csv("gate-sim.csv", t);
  json j{{"B_T", c.B},
         {"theta_dc_deg", units::to_deg(c.theta_dc)},
         {"tau_ps", units::to_ps(c.tau)},
         {"delta5_GHz", units::to_ghz(c.delta5)},
         {"gate", c.gate},
         {"amp1", r.drive.amp1},
         {"amp2", r.drive.amp2},
         {"adiabaticity", r.rotation.adiabaticity},
         {"theta_effective", r.rotation.theta},
         {"F_coherent", frames},
         {"F_dissipative", r.dissipative_F},
         {"F_composite_dissipative", r.composite_F}};
  out.summary(j);
  return j;
}

json run_gate_optimize(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out) {
  const OptimizationProblem p = c.problem(params);
  const OptimizationResult r = optimize_gate(p);
  CsvTable t(kScanHeader);
  t.add_row(scan_row(c.B, c.tau, c.delta5, r));
  out.csv("gate-optimize.csv", t);
  json j = result_json(r);
  j["gate"] = c.gate;
  j["B_T"] = c.B;
  j["tau_ps"] = units::to_ps(c.tau);
  j["delta5_GHz"] = units::to_ghz(c.delta5);
  out.summary(j);
  return j;
}

json run_grid_scan(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out,
                   int threads) {
  const OptimizationProblem p = c.problem(params);
  const GridScanResult g = grid_scan(p, c.grid_delta5.values(), c.grid_tau.values(), threads);
  std::vector<std::string> header = kScanHeader;
  header.push_back("status");
  header.push_back("best");
  CsvTable t(header);
  int failures = 0;
  for (int k = 0; k < static_cast<int>(g.nodes.size()); ++k) {
    const GridNode& n = g.nodes[k];
    std::vector<std::string> row;
    if (n.ok) {
      row = scan_row(c.B, n.tau, n.delta5, n.result);
      row.push_back("ok");
    } else {
      ++failures;
      row.assign(kScanHeader.size(), "");
      row[0] = num(c.B);
      row[1] = num(units::to_ps(n.tau));
      row[2] = num(units::to_ghz(n.delta5));
      row.push_back("error: " + n.error);
    }
    row.push_back(k == g.best ? "1" : "0");
    t.add_row(row);
  }
  out.csv("grid-scan.csv", t);
  json j{{"gate", c.gate}, {"B_T", c.B}, {"nodes", g.nodes.size()}, {"failures", failures}};
  if (g.best >= 0) {
    const GridNode& b = g.nodes[g.best];
    j["best"] = result_json(b.result);
    j["best"]["tau_ps"] = units::to_ps(b.tau);
    j["best"]["delta5_GHz"] = units::to_ghz(b.delta5);
  }
  out.summary(j);
  return j;
}

json run_excitation_scan(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out,
                         int threads) {
  const ExcitationScan s = excitation_length_scan(params, MagneticField{c.B, c.theta_dc},
                                                  c.excitation_tau.values(), c.cooperativity,
                                                  c.temperature, c.tolerances(), threads);
  CsvTable t({"B_T", "theta_dc_deg", "tau_ps", "F_dissipative"});
  for (std::size_t k = 0; k < s.taus.size(); ++k) {
    t.add_row({num(c.B), num(units::to_deg(c.theta_dc)), num(units::to_ps(s.taus[k])), num(s.F[k])});
  }
  out.csv("excitation-scan.csv", t);
  json j{{"B_T", c.B}, {"best_tau_ps", units::to_ps(s.taus[s.best])}, {"best_F", s.F[s.best]}};
  out.summary(j);
  return j;
}

CooperativityPoint cooperativity_point(const G4VParameters& params, const MagneticField& field,
                                       double C, double temperature) {
  const EigenSystem es = build_hamiltonian(params, field);
  const DipoleOperators d = dipole_in_eigenbasis(es);
  const DecayModel m = build_decay_model(es, d, C, temperature);
  CooperativityPoint p;
  p.C = C;
  p.gamma15 = m.rate(0, 4, ChannelKind::radiative);
  p.branching = branching_ratio(m);
  return p;
}

CsvTable quality_table() {
  return CsvTable({"state", "n", "B_T", "tau_ps", "C", "S_ratio", "p_g", "p_b", "p_d", "F", "Q",
                   "Gamma_Hz"});
}

void add_quality_row(CsvTable& t, const QualityReport& r, double B, double tau,
                     const CooperativityPoint& cp) {
  t.add_row({to_string(r.state), std::to_string(r.n), num(B), num(units::to_ps(tau)), num(cp.C),
             num(cp.branching), num(r.p_g), num(r.p_b), num(r.p_d), num(r.F), num(r.Q), num(r.Gamma)});
}

json fit_json(const ExponentialFit& f) { return json{{"A", f.A}, {"beta", f.beta}, {"n50", f.n50}}; }

json run_quality_curve(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out) {
  CooperativityPoint cp = cooperativity_point(params, MagneticField{c.B, c.theta_dc}, c.cooperativity,
                                              c.temperature);
  cp.I_half = c.I_half;
  cp.I_pi = c.I_pi;
  cp.I_exc = c.I_exc;
  cp.t_exc = c.t_exc;
  CsvTable t = quality_table();
  json j{{"B_T", c.B}, {"C", c.cooperativity}, {"S_ratio", cp.branching}};
  for (StateKind s : {StateKind::LCS, StateKind::GHZ}) {
    const ProtocolParams pp = protocol_for(c, s, cp, c.t_raman);
    const ErrorBudget b{c.I_half, c.I_pi, c.I_exc};
    QualityReport last;
    for (int n = 1; n <= c.n_photons; ++n) {
      last = quality(pp, b, n);
      add_quality_row(t, last, c.B, c.t_raman, cp);
    }
    j[to_string(s)] = {{"fit", fit_json(last.fit)}, {"Q", last.Q}, {"Gamma_Hz", last.Gamma}, {"n", c.n_photons}};
  }
  out.csv("quality-curve.csv", t);
  out.summary(j);
  return j;
}

OptimizationProblem base_problem(const ExperimentConfig& c, const G4VParameters& params) {
  OptimizationProblem p = c.problem(params);
  p.cooperativity = c.cooperativity;
  p.temperature = c.temperature;
  return p;
}

json run_table1(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out,
                int threads) {
  CsvTable t({"B_T", "theta_dc_deg", "tau_ps", "delta5_half_GHz", "delta5_pi_GHz", "F_half", "F_pi",
              "F_composite"});
  json rows = json::array();
  const OptimizationProblem base = base_problem(c, params);
  for (const auto& e : c.table1) {
    const Table1Result r = run_table1_entry(e, base, threads);
    t.add_row({num(e.B), num(units::to_deg(e.theta_dc)), num(units::to_ps(e.tau)),
               num(units::to_ghz(r.delta5_half)), num(units::to_ghz(r.delta5_pi)), num(r.F_half),
               num(r.F_pi), num(r.F_composite)});
    rows.push_back({{"B_T", e.B},
                    {"tau_ps", units::to_ps(e.tau)},
                    {"half", result_json(r.half)},
                    {"pi", result_json(r.pi)},
                    {"F_composite", r.F_composite}});
  }
  out.csv("table1.csv", t);
  json j{{"rows", rows}};
  out.summary(j);
  return j;
}

json run_table2(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out,
                int threads) {
  CsvTable t({"B_T", "theta_dc_deg", "tau_ps", "F"});
  CsvTable scan({"B_T", "tau_ps", "F"});
  json rows = json::array();
  for (const auto& e : c.table2) {
    const Table2Result r = run_table2_entry(e, params, c.cooperativity, c.temperature, c.tolerances(), threads);
    t.add_row({num(e.B), num(units::to_deg(e.theta_dc)), num(units::to_ps(r.tau)), num(r.F)});
    for (std::size_t k = 0; k < r.scan.taus.size(); ++k) {
      scan.add_row({num(e.B), num(units::to_ps(r.scan.taus[k])), num(r.scan.F[k])});
    }
    rows.push_back({{"B_T", e.B}, {"tau_ps", units::to_ps(r.tau)}, {"F", r.F}});
  }
  out.csv("table2.csv", t);
  out.csv("table2-scan.csv", scan);
  json j{{"rows", rows}};
  out.summary(j);
  return j;
}

json run_fig5_experiment(const ExperimentConfig& c, const G4VParameters& params, const Artifacts& out,
                         int threads) {
  const std::vector<Fig5Point> pts = run_fig5(c, params, threads);
  CsvTable curve({"tau_ps", "delta5_GHz", "state", "C_opt", "Q", "Gamma_Hz", "Q1"});
  CsvTable sweep({"tau_ps", "C", "I_half", "I_pi", "I_exc", "t_exc_ps", "S_ratio", "Q1_LCS", "Q1_GHZ"});
  json rows = json::array();
  for (const auto& p : pts) {
    for (const auto* r : {&p.lcs, &p.ghz}) {
      const CooperativityOptimum& o = r->state == StateKind::LCS ? p.best_lcs : p.best_ghz;
      curve.add_row({num(units::to_ps(p.tau)), num(units::to_ghz(p.delta5)), to_string(r->state),
                     num(o.C), num(r->Q), num(r->Gamma), num(o.Q)});
    }
    for (std::size_t k = 0; k < p.sweep.size(); ++k) {
      const auto& s = p.sweep[k];
      sweep.add_row({num(units::to_ps(p.tau)), num(s.C), num(s.I_half), num(s.I_pi), num(s.I_exc),
                     num(units::to_ps(s.t_exc)), num(s.branching), num(p.best_lcs.Q_grid[k]),
                     num(p.best_ghz.Q_grid[k])});
    }
    rows.push_back({{"tau_ps", units::to_ps(p.tau)},
                    {"LCS", {{"C", p.best_lcs.C}, {"Q", p.lcs.Q}, {"Gamma_Hz", p.lcs.Gamma}}},
                    {"GHZ", {{"C", p.best_ghz.C}, {"Q", p.ghz.Q}, {"Gamma_Hz", p.ghz.Gamma}}}});
  }
  out.csv("fig5.csv", curve);
  out.csv("fig5-cooperativity.csv", sweep);
  json j{{"B_T", c.B}, {"n", c.n_photons}, {"rows", rows}};
  out.summary(j);
  return j;
}

}  // namespace

GateSimResult simulate_seed_gate(const G4VParameters& params, const MagneticField& field,
                                 double tau, double delta5, double theta,
                                 const std::vector<std::string>& frames, const DecayModel& model,
                                 const Tolerances& tol) {
  const EigenSystem es = build_hamiltonian(params, field);
  const DipoleOperators d = dipole_in_eigenbasis(es);
  GateSimResult r;
  r.drive = seed_raman_drive(es, d, theta, 'y', tau, delta5);
  r.rotation = effective_rotation(es, d, r.drive);
  const GateTarget target = y_rotation(theta);
  for (const auto& f : frames) {
    r.coherent_F[f] = rotation_fidelity(frame_hamiltonian(f, es, d, r.drive), target, nullptr, tol).F;
  }
  r.dissipative_F = gate_fidelity(r.drive, es, d, target, &model, tol).F;
  r.composite_F = composite_fidelity(r.drive, es, d, y_rotation(2.0 * theta), 2, &model, tol).F;
  return r;
}

Table1Result run_table1_entry(const Table1Entry& entry, const OptimizationProblem& base, int threads) {
  if (entry.delta5.empty()) throw std::invalid_argument("table entry without detuning candidates");
  const int nd = static_cast<int>(entry.delta5.size());
  std::vector<OptimizationResult> results(2 * nd);
  std::vector<std::string> errors(2 * nd);
  parallel_for(2 * nd, threads, [&](int k) {
    OptimizationProblem p = base;
    p.B = entry.B;
    p.theta_dc = entry.theta_dc;
    p.tau = entry.tau;
    p.delta5 = entry.delta5[k / 2];
    const bool half = k % 2 == 0;
    p.theta = half ? 0.5 * kPi : kPi;
    p.axis = 'y';
    p.optimize_phase = half;
    p.seed = base.seed + static_cast<std::uint64_t>(k);
    try {
      results[k] = optimize_gate(p);
    } catch (const PhysicsError& e) {
      errors[k] = e.what();
    }
  });
  Table1Result r;
  r.entry = entry;
  int best_half = -1, best_pi = -1;
  for (int k = 0; k < 2 * nd; ++k) {
    if (!errors[k].empty()) continue;
    int& best = k % 2 == 0 ? best_half : best_pi;
    if (best < 0 || results[k].dissipative_I < results[best].dissipative_I) best = k;
  }
  if (best_half < 0 || best_pi < 0) {
    throw PhysicsError(fmt::format("no admissible detuning for B = {} T: {}", entry.B,
                                   errors[best_half < 0 ? 0 : 1]));
  }
  r.half = results[best_half];
  r.pi = results[best_pi];
  r.delta5_half = entry.delta5[best_half / 2];
  r.delta5_pi = entry.delta5[best_pi / 2];
  r.F_half = 1.0 - r.half.dissipative_I;
  r.F_pi = 1.0 - r.pi.dissipative_I;

  OptimizationProblem p = base;
  p.B = entry.B;
  p.tau = entry.tau;
  p.delta5 = r.delta5_half;
  p.theta = 0.5 * kPi;
  p.axis = 'y';
  p.optimize_phase = true;
  const RealizedGate g = realize(p, r.half.best);
  const DecayModel model = build_decay_model(g.es, g.d, base.cooperativity, base.temperature);
  r.F_composite = composite_fidelity(g.drive, g.es, g.d, y_rotation(kPi), 2, &model, base.dissipative_tol).F;
  return r;
}

Table2Result run_table2_entry(const Table2Entry& entry, const G4VParameters& params,
                              double cooperativity, double temperature, const Tolerances& tol,
                              int threads) {
  Table2Result r;
  r.entry = entry;
  r.scan = excitation_length_scan(params, MagneticField{entry.B, entry.theta_dc}, entry.tau.values(),
                                  cooperativity, temperature, tol, threads);
  r.tau = r.scan.taus[r.scan.best];
  r.F = r.scan.F[r.scan.best];
  return r;
}

ProtocolParams protocol_for(const ExperimentConfig& c, StateKind s, const CooperativityPoint& p,
                            double t_raman) {
  ProtocolParams pp;
  pp.state = s;
  pp.eta = c.eta;
  pp.attenuation_length = c.attenuation_length;
  pp.c_fiber = c.c_fiber;
  pp.tau_c = c.tau_c;
  pp.t_exc = p.t_exc;
  pp.t_raman = t_raman;
  pp.gamma15 = p.gamma15;
  pp.branching = p.branching;
  return pp;
}

std::vector<Fig5Point> run_fig5(const ExperimentConfig& c, const G4VParameters& params, int threads) {
  const MagneticField field{c.B, c.theta_dc};
  const Tolerances tol = c.tolerances();

  // Excitation pulses do not depend on the Raman pulse length.
  std::vector<CooperativityPoint> base(c.cooperativities.size());
  parallel_for(static_cast<int>(base.size()), threads, [&](int k) {
    const double C = c.cooperativities[k];
    base[k] = cooperativity_point(params, field, C, c.temperature);
    const ExcitationScan s =
        excitation_length_scan(params, field, c.excitation_tau.values(), C, c.temperature, tol, 1);
    base[k].I_exc = 1.0 - s.F[s.best];
    base[k].t_exc = GaussianEnvelope::from_fwhm(s.taus[s.best]).window();
  });

  std::vector<Fig5Point> out;
  const OptimizationProblem problem = base_problem(c, params);
  for (double tau : c.fig5_tau) {
    Table1Entry e;
    e.B = c.B;
    e.theta_dc = c.theta_dc;
    e.tau = tau;
    e.delta5 = c.fig5_delta5;
    const Table1Result t1 = run_table1_entry(e, problem, threads);

    Fig5Point pt;
    pt.tau = tau;
    pt.delta5 = t1.delta5_half;
    pt.t_raman = GaussianEnvelope::from_fwhm(tau).window();
    pt.sweep = base;
    auto realized = [&](const OptimizationResult& r, double delta5, double theta) {
      OptimizationProblem p = problem;
      p.tau = tau;
      p.delta5 = delta5;
      p.theta = theta;
      p.axis = 'y';
      p.optimize_phase = theta < kPi;
      return realize(p, r.best);
    };
    const RealizedGate gh = realized(t1.half, t1.delta5_half, 0.5 * kPi);
    const RealizedGate gp = realized(t1.pi, t1.delta5_pi, kPi);
    parallel_for(static_cast<int>(base.size()), threads, [&](int k) {
      const double C = c.cooperativities[k];
      const DecayModel mh = build_decay_model(gh.es, gh.d, C, c.temperature);
      const DecayModel mp = build_decay_model(gp.es, gp.d, C, c.temperature);
      pt.sweep[k].I_half = gate_fidelity(gh.drive, gh.es, gh.d, y_rotation(0.5 * kPi), &mh, tol).I;
      pt.sweep[k].I_pi = gate_fidelity(gp.drive, gp.es, gp.d, y_rotation(kPi), &mp, tol).I;
    });

    auto setup_for = [&](StateKind s) {
      return [&, s](double C) {
        for (const auto& cp : pt.sweep) {
          if (cp.C == C) {
            return std::pair{protocol_for(c, s, cp, pt.t_raman), ErrorBudget{cp.I_half, cp.I_pi, cp.I_exc}};
          }
        }
        throw std::logic_error("cooperativity outside the sweep");
      };
    };
    pt.best_lcs = optimal_cooperativity(c.cooperativities, setup_for(StateKind::LCS));
    pt.best_ghz = optimal_cooperativity(c.cooperativities, setup_for(StateKind::GHZ));
    for (StateKind s : {StateKind::LCS, StateKind::GHZ}) {
      const double C = s == StateKind::LCS ? pt.best_lcs.C : pt.best_ghz.C;
      const auto [pp, b] = setup_for(s)(C);
      (s == StateKind::LCS ? pt.lcs : pt.ghz) = quality(pp, b, c.n_photons);
    }
    out.push_back(pt);
  }
  return out;
}

nlohmann::json run_experiment(const ExperimentConfig& c, int threads) {
  const G4VParameters params = calibrated(G4VParameters{});
  const Artifacts out{fs::path(c.out_dir), c.experiment, hex_digest(fnv1a(c.source + "\n" + c.experiment + "\n" + std::to_string(c.seed))), c.seed};
  fs::create_directories(out.dir);
  if (c.experiment == "eigensystem") return run_eigensystem(c, params, out);
  if (c.experiment == "gate-sim") return run_gate_sim(c, params, out);
  if (c.experiment == "gate-optimize") return run_gate_optimize(c, params, out);
  if (c.experiment == "grid-scan") return run_grid_scan(c, params, out, threads);
  if (c.experiment == "excitation-scan") return run_excitation_scan(c, params, out, threads);
  if (c.experiment == "quality-curve") return run_quality_curve(c, params, out);
  if (c.experiment == "table1") return run_table1(c, params, out, threads);
  if (c.experiment == "table2") return run_table2(c, params, out, threads);
  if (c.experiment == "fig5") return run_fig5_experiment(c, params, out, threads);
  throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
}

}  // namespace g4v
