#include "g4v/dynamics.hpp"

#include <cmath>
#include <limits>

#include "g4v/units.hpp"

namespace g4v {

namespace {

// exp(i D t) for the reference diagonal of the interaction picture.
Vec8 phases(const RVec8& diag, double t) {
  Vec8 p;
  for (int k = 0; k < 8; ++k) p(k) = std::polar(1.0, diag(k) * t);
  return p;
}

struct Dissipator {
  RVec8 half_out = RVec8::Zero();
  std::vector<DecayChannel> channels;

  explicit Dissipator(const DecayModel& model) : channels(model.channels) {
    for (const auto& c : channels) half_out(c.from) += 0.5 * c.rate;
  }

  // out += D(x) for one 8x8 block.
  template <class In, class Out>
  void apply(const In& x, Out&& out) const {
    for (int n = 0; n < 8; ++n) {
      for (int m = 0; m < 8; ++m) out(m, n) -= (half_out(m) + half_out(n)) * x(m, n);
    }
    for (const auto& c : channels) out(c.to, c.to) += c.rate * x(c.from, c.from);
  }
};

// Couplings of a drive in block form. Every dipole term only connects the
// ground and excited manifolds, so V(t) = [[0, A(t)], [A(t)^dagger, 0]] with a
// 4x4 block A; other structures fall back to dense evaluation.
class CompiledCoupling {
 public:
  explicit CompiledCoupling(const DrivenHamiltonian& h) : h_(h) {
    for (const auto& term : h.terms) {
      const bool intra = term.op.topLeftCorner<4, 4>().cwiseAbs().maxCoeff() > 0.0 ||
                         term.op.bottomRightCorner<4, 4>().cwiseAbs().maxCoeff() > 0.0;
      if (intra) block_form_ = false;
      const Mat4 ur = term.op.topRightCorner<4, 4>();
      const Mat4 lla = term.op.bottomLeftCorner<4, 4>().adjoint();
      terms_.push_back({term.amplitude, term.nu, ur, lla, ur.cwiseAbs().maxCoeff() > 0.0,
                        lla.cwiseAbs().maxCoeff() > 0.0});
    }
  }

  // A(t): ground rows, excited columns of V(t).
  Mat4 block(double t) const {
    Mat4 a = Mat4::Zero();
    const double x = h_.envelope(t);
    if (x == 0.0) return a;
    for (const auto& term : terms_) {
      const cplx c = term.amplitude * x * std::polar(1.0, term.nu * t);
      if (term.has_ur) a.noalias() += c * term.ur;
      if (term.has_ll) a.noalias() += std::conj(c) * term.ll_adj;
    }
    return a;
  }

  // out = V(t) x
  void apply_left(double t, const Block8& x, Block8& out) const {
    if (!block_form_) {
      out.noalias() = h_.coupling(t) * x;
      return;
    }
    const Mat4 a = block(t);
    out.topRows<4>().noalias() = a * x.bottomRows<4>();
    out.bottomRows<4>().noalias() = a.adjoint() * x.topRows<4>();
  }

  // out_b = -i [V(t), x_b] for each 8x8 block b.
  void commutator(double t, const Block8& x, Block8& out) const {
    const Eigen::Index nb = x.cols() / 8;
    if (!block_form_) {
      const Mat8 v = h_.coupling(t);
      for (Eigen::Index b = 0; b < nb; ++b) {
        const auto s = x.middleCols<8>(8 * b);
        out.middleCols<8>(8 * b).noalias() = -kI * (v * s - s * v);
      }
      return;
    }
    const Mat4 a = block(t);
    const Mat4 ad = a.adjoint();
    for (Eigen::Index b = 0; b < nb; ++b) {
      const auto s = x.middleCols<8>(8 * b);
      auto o = out.middleCols<8>(8 * b);
      // V s
      o.topRows<4>().noalias() = a * s.bottomRows<4>();
      o.bottomRows<4>().noalias() = ad * s.topRows<4>();
      // - s V
      o.leftCols<4>().noalias() -= s.rightCols<4>() * ad;
      o.rightCols<4>().noalias() -= s.leftCols<4>() * a;
      o *= -kI;
    }
  }

 private:
  struct Term {
    cplx amplitude;
    double nu;
    Mat4 ur;
    Mat4 ll_adj;
    bool has_ur;
    bool has_ll;
  };
  const DrivenHamiltonian& h_;
  std::vector<Term> terms_;
  bool block_form_ = true;
};

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::radiative: return "radiative";
    case ChannelKind::phonon: return "phonon";
    case ChannelKind::psb: return "psb";
  }
  return "unknown";
}

double DecayModel::rate(int to, int from, ChannelKind kind) const {
  double r = 0.0;
  for (const auto& c : channels) {
    if (c.to == to && c.from == from && c.kind == kind) r += c.rate;
  }
  return r;
}

double DecayModel::total_out(int level) const {
  double r = 0.0;
  for (const auto& c : channels) {
    if (c.from == level) r += c.rate;
  }
  return r;
}

double radiative_rate(const EigenSystem& es, const DipoleOperators& d, int i, int j) {
  const double omega = es.gap(i, j);
  double m2 = 0.0;
  for (const auto& mu : d.mu) m2 += std::norm(mu(j, i));
  const double c = units::kSpeedOfLight;
  return 4.0 * units::kFineStructure * units::kRefractiveIndexDiamond * omega * omega * omega *
         m2 / (3.0 * c * c);
}

double calibrate_dipole_scale(const G4VParameters& params, const EmitterConstants& c) {
  G4VParameters unit = params;
  unit.dipole_scale = 1.0;
  const EigenSystem es = build_hamiltonian(unit, MagneticField{0.0, 0.0});
  const DipoleOperators d = dipole_in_eigenbasis(es);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += radiative_rate(es, d, i, 4);
  if (!(sum > 0.0)) throw PhysicsError("dipole calibration impossible: no ZPL coupling");
  return std::sqrt(c.debye_waller / c.t1 / sum);
}

G4VParameters calibrated(const G4VParameters& params, const EmitterConstants& c) {
  G4VParameters p = params;
  p.dipole_scale = calibrate_dipole_scale(params, c);
  return p;
}

double phonon_rate(double omega, double temperature) {
  if (omega < 0.0) throw std::invalid_argument("phonon_rate: negative transition frequency");
  if (temperature < 0.0) throw std::invalid_argument("phonon_rate: negative temperature");
  const double alpha_p = 7.51e-9 / (kTwoPi * kTwoPi * kTwoPi);
  double occupation = 0.0;
  if (temperature > 0.0 && omega > 0.0) {
    occupation = 1.0 / std::expm1(omega / (units::kBoltzmannOverHbar * temperature));
  }
  return kTwoPi * alpha_p * omega * omega * omega * (occupation + 1.0);
}

DecayModel build_decay_model(const EigenSystem& es, const DipoleOperators& d, double cooperativity,
                             double temperature, const EmitterConstants& c) {
  if (cooperativity < 0.0) throw std::invalid_argument("cooperativity must be >= 0");
  DecayModel m;
  m.cooperativity = cooperativity;
  m.temperature = temperature;
  m.gamma_psb = (1.0 - c.debye_waller) / c.t1;
  for (int j = 4; j < 8; ++j) {
    for (int i = 0; i < 4; ++i) {
      double r = radiative_rate(es, d, i, j);
      if (i == 0 && j == 4) r *= 1.0 + cooperativity;
      m.channels.push_back({i, j, r, ChannelKind::radiative});
    }
  }
  const int pairs[4][2] = {{0, 2}, {1, 3}, {4, 6}, {5, 7}};
  for (const auto& p : pairs) {
    m.channels.push_back({p[0], p[1], phonon_rate(es.gap(p[0], p[1]), temperature),
                          ChannelKind::phonon});
  }
  m.channels.push_back({0, 4, m.gamma_psb, ChannelKind::psb});
  return m;
}

double branching_ratio(const DecayModel& model) {
  const double num = model.rate(0, 4, ChannelKind::radiative);
  const double den = model.rate(1, 4, ChannelKind::radiative) +
                     model.rate(2, 4, ChannelKind::radiative) +
                     model.rate(3, 4, ChannelKind::radiative) + model.gamma_psb;
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  return num / den;
}

Block8 propagate_schrodinger(const DrivenHamiltonian& h, const Block8& psi0, double t0, double t1,
                             const Tolerances& tol, IntegratorStats* stats) {
  // Interaction picture with respect to the static diagonal: phi = exp(iDt) psi.
  const RVec8& diag = h.diagonal;
  const CompiledCoupling cc(h);
  Block8 lab(8, psi0.cols()), vlab(8, psi0.cols());
  auto rhs = [&](double t, const Block8& phi, Block8& dphi) {
    const Vec8 p = phases(diag, t);
    lab.noalias() = p.conjugate().asDiagonal() * phi;
    cc.apply_left(t, lab, vlab);
    dphi.noalias() = (-kI * p).asDiagonal() * vlab;
  };
  Block8 phi0 = phases(diag, t0).asDiagonal() * psi0;
  Block8 phi1 = integrate_dop853(rhs, t0, t1, std::move(phi0), tol, stats);
  return phases(diag, t1).conjugate().asDiagonal() * phi1;
}

Block8 propagate_no_jump(const DrivenHamiltonian& h, const DecayModel& model, const Block8& psi0,
                         double t0, double t1, const Tolerances& tol, IntegratorStats* stats) {
  const RVec8& diag = h.diagonal;
  const Dissipator dis(model);
  const CompiledCoupling cc(h);
  Block8 lab(8, psi0.cols()), vlab(8, psi0.cols());
  auto rhs = [&](double t, const Block8& phi, Block8& dphi) {
    const Vec8 p = phases(diag, t);
    lab.noalias() = p.conjugate().asDiagonal() * phi;
    cc.apply_left(t, lab, vlab);
    dphi.noalias() = (-kI * p).asDiagonal() * vlab;
    dphi.noalias() -= dis.half_out.cast<cplx>().asDiagonal() * phi;
  };
  Block8 phi0 = phases(diag, t0).asDiagonal() * psi0;
  Block8 phi1 = integrate_dop853(rhs, t0, t1, std::move(phi0), tol, stats);
  return phases(diag, t1).conjugate().asDiagonal() * phi1;
}

Block8 propagate_lindblad(const DrivenHamiltonian& h, const DecayModel& model, const Block8& blocks,
                          double t0, double t1, const Tolerances& tol, IntegratorStats* stats) {
  if (blocks.cols() % 8 != 0) throw std::invalid_argument("Lindblad blocks must be 8x8");
  const Eigen::Index nb = blocks.cols() / 8;
  const RVec8& diag = h.diagonal;
  const Dissipator dis(model);
  const CompiledCoupling cc(h);

  // rho_I = P rho P^dagger with P = diag(exp(iDt)); the dissipator commutes with P.
  auto conjugate_by = [&](const Vec8& p, const Block8& x, Block8& out, bool forward) {
    const Mat8 ph = forward ? Mat8(p * p.adjoint()) : Mat8(p.conjugate() * p.transpose());
    for (Eigen::Index b = 0; b < nb; ++b) {
      out.middleCols<8>(8 * b) = ph.cwiseProduct(x.middleCols<8>(8 * b));
    }
  };

  Block8 lab(8, blocks.cols()), comm(8, blocks.cols());
  auto rhs = [&](double t, const Block8& x, Block8& dx) {
    const Vec8 p = phases(diag, t);
    conjugate_by(p, x, lab, false);
    cc.commutator(t, lab, comm);
    conjugate_by(p, comm, dx, true);
    for (Eigen::Index b = 0; b < nb; ++b) dis.apply(x.middleCols<8>(8 * b), dx.middleCols<8>(8 * b));
  };

  Block8 x0(8, blocks.cols());
  conjugate_by(phases(diag, t0), blocks, x0, true);
  Block8 x1 = integrate_dop853(rhs, t0, t1, std::move(x0), tol, stats);
  Block8 out(8, blocks.cols());
  conjugate_by(phases(diag, t1), x1, out, false);
  return out;
}

Mat8 propagate_lindblad(const DrivenHamiltonian& h, const DecayModel& model, const Mat8& rho0,
                        double t0, double t1, const Tolerances& tol) {
  const Block8 in = rho0;
  return propagate_lindblad(h, model, in, t0, t1, tol, nullptr);
}

}  // namespace g4v
