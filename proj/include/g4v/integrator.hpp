#pragma once

// Explicit Runge-Kutta 8(5,3) of Dormand and Prince with the Hairer step-size
// controller, specialised to complex 8-row blocks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "g4v/types.hpp"

namespace g4v {

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_max = 0.0;  // 0: no limit beyond the span
  long max_steps = 50'000'000;
};

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace dop853 {

inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

}  // namespace dop853

// Integrates dy/dt = f(t, y) from t0 to t1 and returns y(t1).
// f has the signature void(double t, const Block8& y, Block8& dy).
template <class Rhs>
Block8 integrate_dop853(Rhs&& f, double t0, double t1, Block8 y, const IntegratorOptions& opt,
                        IntegratorStats* stats = nullptr) {
  using namespace dop853;
  IntegratorStats local;
  IntegratorStats& st = stats ? *stats : local;
  if (t1 == t0) return y;

  const Eigen::Index rows = y.rows(), cols = y.cols();
  const double n = static_cast<double>(y.size());
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double h_max = opt.h_max > 0.0 ? std::min(opt.h_max, span) : span;

  Block8 k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
      k6(rows, cols), k7(rows, cols), k8(rows, cols), k9(rows, cols), k10(rows, cols),
      yw(rows, cols), y1(rows, cols);

  auto eval = [&](double t, const Block8& x, Block8& dx) {
    f(t, x, dx);
    ++st.evaluations;
  };

  auto scaled_norm2 = [&](const Block8& a, const Block8& ref) {
    return (a.array().abs() / (opt.atol + opt.rtol * ref.array().abs())).square().sum();
  };

  eval(t0, y, k1);

  // Initial step (Hairer & Wanner, II.4).
  double h;
  {
    const double dnf = scaled_norm2(k1, y) / n;
    const double dny = scaled_norm2(y, y) / n;
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h0 = std::min(h0, h_max);
    yw = y + dir * h0 * k1;
    eval(t0 + dir * h0, yw, k2);
    const double der2 = std::sqrt(scaled_norm2(k2 - k1, y) / n) / h0;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * h0, h1, h_max});
  }

  double t = t0;
  bool last_rejected = false;
  constexpr double safe = 0.9, facc1 = 1.0 / 0.333, facc2 = 1.0 / 6.0, expo1 = 1.0 / 8.0;

  while (dir * (t1 - t) > 0.0) {
    if (st.steps >= opt.max_steps) {
      std::ostringstream msg;
      msg << "integrator exceeded " << opt.max_steps << " steps at t=" << t;
      throw NumericalError(msg.str());
    }
    if (h < 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "step-size underflow at t=" << t << " (h=" << h << ")";
      throw NumericalError(msg.str());
    }
    bool final_step = false;
    if (h >= dir * (t1 - t)) {
      h = dir * (t1 - t);
      final_step = true;
    }
    const double hs = dir * h;

    yw = y + hs * (a21 * k1);
    eval(t + c2 * hs, yw, k2);
    yw = y + hs * (a31 * k1 + a32 * k2);
    eval(t + c3 * hs, yw, k3);
    yw = y + hs * (a41 * k1 + a43 * k3);
    eval(t + c4 * hs, yw, k4);
    yw = y + hs * (a51 * k1 + a53 * k3 + a54 * k4);
    eval(t + c5 * hs, yw, k5);
    yw = y + hs * (a61 * k1 + a64 * k4 + a65 * k5);
    eval(t + c6 * hs, yw, k6);
    yw = y + hs * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
    eval(t + c7 * hs, yw, k7);
    yw = y + hs * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
    eval(t + c8 * hs, yw, k8);
    yw = y + hs * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
    eval(t + c9 * hs, yw, k9);
    yw = y + hs * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 +
                   a109 * k9);
    eval(t + c10 * hs, yw, k10);
    yw = y + hs * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 +
                   a119 * k9 + a1110 * k10);
    eval(t + c11 * hs, yw, k2);  // k2 now holds stage 11
    const double t_new = final_step ? t1 : t + hs;
    yw = y + hs * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 +
                   a129 * k9 + a1210 * k10 + a1211 * k2);
    eval(t_new, yw, k3);  // k3 now holds stage 12

    k4 = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k2 + b12 * k3;
    y1 = y + hs * k4;

    // Error estimate with both embedded formulas.
    const auto scale = (opt.atol + opt.rtol * y.array().abs().max(y1.array().abs())).eval();
    const double err3 =
        ((k4 - bhh1 * k1 - bhh2 * k9 - bhh3 * k3).array().abs() / scale).square().sum();
    const double err5 = ((er1 * k1 + er6 * k6 + er7 * k7 + er8 * k8 + er9 * k9 + er10 * k10 +
                          er11 * k2 + er12 * k3)
                             .array()
                             .abs() /
                         scale)
                            .square()
                            .sum();
    double deno = err5 + 0.01 * err3;
    if (deno <= 0.0) deno = 1.0;
    const double err = h * err5 * std::sqrt(1.0 / (n * deno));

    const double fac11 = std::pow(err, expo1);
    const double fac = std::max(facc2, std::min(facc1, fac11 / safe));
    double h_new = h / fac;

    ++st.steps;
    if (err <= 1.0) {
      eval(t_new, y1, k4);
      k1 = k4;
      y = y1;
      t = t_new;
      if (std::abs(h_new) > h_max) h_new = h_max;
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = h_new;
      if (final_step) break;
    } else {
      h_new = h / std::min(facc1, fac11 / safe);
      ++st.rejected;
      last_rejected = true;
      h = h_new;
    }
  }
  return y;
}

}  // namespace g4v
