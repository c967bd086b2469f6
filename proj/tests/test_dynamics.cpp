#include <doctest.h>

#include <random>

#include "g4v/dynamics.hpp"
#include "g4v/units.hpp"

using namespace g4v;

namespace {

// Oracle rates at 8 T, 22.5 deg (1/ns), indexed [ground][excited - 4].
constexpr double kRadiative8T[4][4] = {
    {0.08538920841141247, 0.006246866679440645, 0.036324858822197596, 0.006374433361172744},
    {0.016008675622063945, 0.06935683530161911, 0.023124104194237244, 0.025968073840496132},
    {0.02630850942961004, 0.022159016449953713, 0.06972003727624794, 0.016201256817320344},
    {0.005628128334835521, 0.035584981974994295, 0.006350911566475114, 0.08698318760329786}};
constexpr double kBranching8T = 0.6240341010616226;
constexpr double kPhonon850GHz = 28.97854543755519;

DrivenHamiltonian random_drive(std::mt19937_64& rng, bool block_form) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DrivenHamiltonian h;
  for (int k = 0; k < 8; ++k) h.diagonal(k) = 20.0 * u(rng);
  h.envelope = GaussianEnvelope::from_fwhm(0.2 + 0.3 * (u(rng) + 1.0));
  for (int n = 0; n < 2; ++n) {
    DriveTerm term;
    term.amplitude = cplx(3.0 * u(rng), 3.0 * u(rng));
    term.nu = 10.0 * u(rng);
    term.op = Mat8::Zero();
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const bool cross = (i < 4) != (j < 4);
        if (cross || !block_form) term.op(i, j) = cplx(u(rng), u(rng));
      }
    }
    h.terms.push_back(term);
  }
  return h;
}

DecayModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 7);
  DecayModel m;
  for (int k = 0; k < 6; ++k) {
    const int from = level(rng);
    int to = level(rng);
    if (to == from) to = (to + 1) % 8;
    m.channels.push_back({to, from, 2.0 * u(rng), ChannelKind::radiative});
  }
  return m;
}

Mat8 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat8 a;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) a(i, j) = cplx(n(rng), n(rng));
  Mat8 rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("integrator reproduces an analytic phase rotation") {
    Block8 y0 = Block8::Zero(8, 1);
    for (int k = 0; k < 8; ++k) y0(k, 0) = 1.0;
    const auto f = [](double, const Block8& y, Block8& dy) {
      for (int k = 0; k < 8; ++k) dy(k, 0) = -kI * double(k + 1) * y(k, 0);
    };
    IntegratorStats st;
    const Block8 y = integrate_dop853(f, 0.0, 3.0, y0, IntegratorOptions{1e-12, 1e-14}, &st);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(y(k, 0) - std::polar(1.0, -3.0 * (k + 1))) < 1e-10);
    CHECK(st.steps > 0);
    CHECK(st.evaluations > st.steps);
  }

  TEST_CASE("integrator reports a step budget overrun") {
    Block8 y0 = Block8::Ones(8, 1);
    const auto f = [](double, const Block8& y, Block8& dy) { dy = -kI * 1e4 * y; };
    IntegratorOptions opt;
    opt.max_steps = 10;
    CHECK_THROWS_AS(integrate_dop853(f, 0.0, 10.0, y0, opt), NumericalError);
  }

  TEST_CASE("resonant Rabi rotation follows the pulse area") {
    DrivenHamiltonian h;
    h.envelope = GaussianEnvelope::from_fwhm(0.05);
    // The +-6 sigma window keeps erf(3) of the field area.
    const double integral = 2.0 * h.envelope.sigma * std::sqrt(kPi);
    const double angle = 1.3;
    Mat8 op = Mat8::Zero();
    op(0, 4) = 1.0;
    h.terms.push_back({angle / (2.0 * integral), 0.0, op});
    Block8 psi = Block8::Zero(8, 1);
    psi(0, 0) = 1.0;
    const Block8 out = propagate_schrodinger(h, psi, 0.0, h.envelope.window(), {1e-11, 1e-13});
    CHECK(std::norm(out(4, 0)) == doctest::Approx(std::pow(std::sin(0.5 * angle * std::erf(3.0)), 2)).epsilon(1e-8));
  }

  TEST_CASE("randomized propagators are unitary") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto h = random_drive(rng, trial % 2 == 0);
      const Block8 u = propagate_schrodinger(h, Block8(Mat8::Identity()), 0.0, h.envelope.window(),
                                             {1e-10, 1e-12});
      CAPTURE(trial);
      REQUIRE((u.adjoint() * u - Mat8::Identity()).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("randomized Lindblad evolution preserves trace, Hermiticity and positivity") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto h = random_drive(rng, trial % 2 == 0);
      const auto model = random_model(rng);
      const Mat8 rho0 = random_state(rng);
      const Mat8 rho = propagate_lindblad(h, model, rho0, 0.0, h.envelope.window(), {1e-10, 1e-12});
      CAPTURE(trial);
      REQUIRE(std::abs(rho.trace() - 1.0) < 1e-8);
      REQUIRE((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
      Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (rho + rho.adjoint()));
      REQUIRE(es.eigenvalues().minCoeff() > -1e-8);
    }
  }

  TEST_CASE("Lindblad evolution without channels is unitary conjugation") {
    std::mt19937_64 rng(17);
    const DecayModel none;
    for (int trial = 0; trial < 50; ++trial) {
      const auto h = random_drive(rng, true);
      const Mat8 rho0 = random_state(rng);
      const Tolerances tol{1e-11, 1e-13};
      const Block8 u = propagate_schrodinger(h, Block8(Mat8::Identity()), 0.0, h.envelope.window(), tol);
      const Mat8 um = u;
      const Mat8 rho = propagate_lindblad(h, none, rho0, 0.0, h.envelope.window(), tol);
      CAPTURE(trial);
      REQUIRE((rho - um * rho0 * um.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("no-jump evolution without channels is the Schroedinger evolution") {
    std::mt19937_64 rng(19);
    const auto h = random_drive(rng, true);
    const Block8 psi = Block8(Mat8::Identity());
    const Tolerances tol{1e-11, 1e-13};
    const Block8 a = propagate_schrodinger(h, psi, 0.0, h.envelope.window(), tol);
    const Block8 b = propagate_no_jump(h, DecayModel{}, psi, 0.0, h.envelope.window(), tol);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("no-jump norm decays at half the Lindblad rate") {
    DrivenHamiltonian h;
    h.envelope = GaussianEnvelope::from_fwhm(1.0);
    DecayModel m;
    m.channels.push_back({0, 4, 0.7, ChannelKind::radiative});
    Block8 psi = Block8::Zero(8, 1);
    psi(4, 0) = 1.0;
    const double t = h.envelope.window();
    const Block8 out = propagate_no_jump(h, m, psi, 0.0, t, {1e-11, 1e-13});
    CHECK(std::norm(out(4, 0)) == doctest::Approx(std::exp(-0.7 * t)).epsilon(1e-9));
  }

  TEST_CASE("calibration fixes the zero-field excited-state lifetime") {
    const auto es = build_hamiltonian(calibrated(G4VParameters{}), MagneticField{0.0, 0.0});
    const auto d = dipole_in_eigenbasis(es);
    const auto m = build_decay_model(es, d, 0.0, 0.0);
    CHECK(std::abs(m.total_out(4) * 4.5 - 1.0) < 1e-9);
    CHECK(m.gamma_psb == doctest::Approx(0.4 / 4.5));
  }

  TEST_CASE("radiative rates and branching ratio at 8 T") {
    const auto es = build_hamiltonian(calibrated(G4VParameters{}), MagneticField{8.0, units::from_deg(22.5)});
    const auto d = dipole_in_eigenbasis(es);
    for (int i = 0; i < 4; ++i) {
      for (int j = 4; j < 8; ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(radiative_rate(es, d, i, j) == doctest::Approx(kRadiative8T[i][j - 4]).epsilon(1e-9));
      }
    }
    const auto m = build_decay_model(es, d, 0.0, 0.0);
    CHECK(branching_ratio(m) == doctest::Approx(kBranching8T).epsilon(1e-9));
    const auto mc = build_decay_model(es, d, 10.0, 0.0);
    CHECK(mc.rate(0, 4, ChannelKind::radiative) == doctest::Approx(11.0 * kRadiative8T[0][0]).epsilon(1e-9));
    CHECK(branching_ratio(mc) > branching_ratio(m));
  }

  TEST_CASE("phonon rates") {
    CHECK(phonon_rate(units::from_ghz(850.0), 0.0) == doctest::Approx(kPhonon850GHz).epsilon(1e-12));
    CHECK(phonon_rate(units::from_ghz(850.0), 4.0) > phonon_rate(units::from_ghz(850.0), 0.0));
    CHECK_THROWS_AS(phonon_rate(-1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(phonon_rate(1.0, -1.0), std::invalid_argument);
  }

  TEST_CASE("branching ratio is infinite without competing channels") {
    DecayModel m;
    m.channels.push_back({0, 4, 1.0, ChannelKind::radiative});
    CHECK(std::isinf(branching_ratio(m)));
  }
}
