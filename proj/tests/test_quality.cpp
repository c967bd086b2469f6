#include <doctest.h>

#include <limits>
#include <random>

#include "g4v/quality.hpp"

using namespace g4v;

namespace {

ProtocolParams protocol(StateKind s) {
  ProtocolParams p;
  p.state = s;
  p.t_exc = 0.007;
  p.t_raman = 0.417;
  p.gamma15 = 0.5;
  p.branching = 0.6;
  return p;
}

}  // namespace

TEST_SUITE("quality") {
  TEST_CASE("single-operation depolarization matches the infidelity") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Vec8 psi;
      for (int k = 0; k < 8; ++k) psi(k) = cplx(n(rng), n(rng));
      const double I = 0.5 * u(rng);
      CAPTURE(trial);
      REQUIRE(std::abs(depolarized_fidelity(psi, depolarization(I)) - (1.0 - I)) < 1e-12);
    }
    CHECK(depolarization(0.07) == doctest::Approx(0.08));
  }

  TEST_CASE("state fidelity of one photon") {
    const ErrorBudget b{0.001, 0.002, 0.004};
    const double lcs = (1 - 0.001) * (1 - 0.004) * (1 - 0.004) * (1 - 0.002) * (1 - 0.001);
    const double ghz = (1 - 0.004) * (1 - 0.004) * (1 - 0.002) * (1 - 0.001);
    CHECK(state_fidelity(b, StateKind::LCS, 1) == doctest::Approx(lcs).epsilon(1e-14));
    CHECK(state_fidelity(b, StateKind::GHZ, 1) == doctest::Approx(ghz).epsilon(1e-14));
    CHECK(state_fidelity(ErrorBudget{}, StateKind::LCS, 50) == 1.0);
  }

  TEST_CASE("exponential fit recovers the per-photon decay") {
    const ErrorBudget b{0.001, 0.002, 0.004};
    const auto fit = fit_state_fidelity(b, StateKind::LCS);
    const double per = (1 - 0.001) * (1 - 0.004) * (1 - 0.004) * (1 - 0.002);
    CHECK(fit.beta == doctest::Approx(-std::log(per)).epsilon(1e-10));
    CHECK(fit.A == doctest::Approx(1 - 0.001).epsilon(1e-10));
    CHECK(fit.A * std::exp(-fit.beta * fit.n50) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::isinf(fit_state_fidelity(ErrorBudget{}, StateKind::GHZ).n50));
    CHECK_THROWS_AS(fit_state_fidelity(b, StateKind::LCS, 3, 3), std::invalid_argument);
  }

  TEST_CASE("protocol durations") {
    const auto p = protocol(StateKind::LCS);
    CHECK(p.t_emission() == doctest::Approx(20.0));
    CHECK(p.t_tb() == doctest::Approx(0.007 + 20.0 + 0.417));
    CHECK(p.state_duration(3) == doctest::Approx(6.0 * p.t_tb() + 2.0 * 0.417));
    const auto g = protocol(StateKind::GHZ);
    CHECK(g.state_duration(3) == doctest::Approx(3.0 * g.t_tb() + 2.0 * 0.417));
  }

  TEST_CASE("photon survival and branching success") {
    const auto p = protocol(StateKind::GHZ);
    const double x = 2e8 * p.t_tb() * 1e-9 / 1e3;
    CHECK(photon_survival(p, 1) == doctest::Approx(0.49 * std::exp(-x) * (1 + std::exp(x))));
    CHECK(branching_success(0.6, 2) == doctest::Approx(std::pow(0.6 / 1.6, 4)));
    CHECK(branching_success(std::numeric_limits<double>::infinity(), 7) == 1.0);
    CHECK_THROWS_AS(photon_survival(p, 0), std::invalid_argument);
    CHECK_THROWS_AS(branching_success(-1.0, 1), std::invalid_argument);
  }

  TEST_CASE("success factors decrease monotonically with photon number") {
    for (auto s : {StateKind::LCS, StateKind::GHZ}) {
      const auto p = protocol(s);
      for (int n = 1; n < 200; ++n) {
        CAPTURE(n);
        REQUIRE(photon_survival(p, n + 1) < photon_survival(p, n));
        REQUIRE(branching_success(p.branching, n + 1) < branching_success(p.branching, n));
        REQUIRE(dephasing_factor(p, n + 1) < dephasing_factor(p, n));
      }
    }
  }

  TEST_CASE("quality report combines the factors") {
    const auto p = protocol(StateKind::LCS);
    const ErrorBudget b{0.001, 0.002, 0.004};
    const auto r = quality(p, b, 4);
    CHECK(r.Q == doctest::Approx(r.p_b * r.p_g * r.p_d * r.F));
    CHECK(r.Gamma == doctest::Approx(r.p_g * r.p_b / (p.state_duration(4) * 1e-9)));
    CHECK(r.state == StateKind::LCS);
    auto bad = p;
    bad.eta = 1.2;
    CHECK_THROWS_AS(quality(bad, b, 1), std::invalid_argument);
  }

  TEST_CASE("optimal cooperativity") {
    const ErrorBudget b{};
    const auto setup = [&](double C) {
      auto p = protocol(StateKind::GHZ);
      p.branching = 0.6 * (1.0 + C) / (1.0 + 0.01 * C * C);
      return std::make_pair(p, b);
    };
    const auto best = optimal_cooperativity({0.0, 5.0, 10.0, 50.0}, setup);
    CHECK(best.C == 10.0);
    CHECK_FALSE(best.flat);
    CHECK(best.Q_grid.size() == 4);
    const auto flat = optimal_cooperativity({3.0, 1.0, 2.0}, [&](double) {
      return std::make_pair(protocol(StateKind::LCS), b);
    });
    CHECK(flat.flat);
    CHECK(flat.C == 1.0);
    CHECK_THROWS_AS(optimal_cooperativity({}, setup), std::invalid_argument);
  }

  TEST_CASE("state names") {
    CHECK(state_from_string("GHZ") == StateKind::GHZ);
    CHECK(to_string(StateKind::LCS) == "LCS");
    CHECK_THROWS_AS(state_from_string("W"), std::invalid_argument);
  }
}
