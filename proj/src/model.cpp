#include "g4v/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "g4v/units.hpp"

namespace g4v {

namespace {

struct ManifoldConstants {
  double delta;   // rad/ns
  double lambda;  // rad/ns
  double ups_x;
  double ups_y;
  double q;
};

// 4x4 block H_A + H_SO + H_JT + H_Z in the basis (x-down, x-up, y-down, y-up).
Mat4 manifold_block(const ManifoldConstants& m, const RVec3& b, double gamma_l, double gamma_s) {
  const double bx = b.x(), by = b.y(), bz = b.z();
  Mat4 h = Mat4::Zero();
  h.diagonal().setConstant(m.delta);

  const cplx il = kI * m.lambda;
  h(0, 2) += -il;
  h(1, 3) += il;
  h(2, 0) += il;
  h(3, 1) += -il;

  h(0, 0) += m.ups_x;
  h(1, 1) += m.ups_x;
  h(2, 2) -= m.ups_x;
  h(3, 3) -= m.ups_x;
  h(0, 2) += m.ups_y;
  h(1, 3) += m.ups_y;
  h(2, 0) += m.ups_y;
  h(3, 1) += m.ups_y;

  const cplx lz = kI * m.q * gamma_l * bz;
  h(0, 2) += lz;
  h(1, 3) += lz;
  h(2, 0) -= lz;
  h(3, 1) -= lz;

  const cplx bm{bx, -by};
  for (int o = 0; o < 4; o += 2) {
    h(o, o) += gamma_s * bz;
    h(o + 1, o + 1) -= gamma_s * bz;
    h(o, o + 1) += gamma_s * bm;
    h(o + 1, o) += gamma_s * std::conj(bm);
  }
  return h;
}

// Largest-magnitude component real positive; near-ties go to the lowest index.
void fix_gauge(Vec8& v) {
  double vmax = v.cwiseAbs().maxCoeff();
  int k = 0;
  while (std::abs(v(k)) < vmax * (1.0 - 1e-12)) ++k;
  v *= std::conj(v(k)) / std::abs(v(k));
  v(k) = cplx(std::abs(v(k)), 0.0);
}

void check_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string("G4VParameters: non-finite ") + name);
  }
}

}  // namespace

void G4VParameters::validate() const {
  const std::pair<double, const char*> fields[] = {
      {delta_g, "delta_g"},   {delta_u, "delta_u"}, {lambda_g, "lambda_g"}, {lambda_u, "lambda_u"},
      {ups_x_g, "ups_x_g"},   {ups_y_g, "ups_y_g"}, {ups_x_u, "ups_x_u"},   {ups_y_u, "ups_y_u"},
      {q_g, "q_g"},           {q_u, "q_u"},         {dipole_scale, "dipole_scale"},
      {gamma_L, "gamma_L"}};
  for (const auto& [v, name] : fields) check_finite(v, name);
  const std::pair<double, const char*> couplings[] = {
      {lambda_g, "lambda_g"}, {lambda_u, "lambda_u"}, {ups_x_g, "ups_x_g"}, {ups_y_g, "ups_y_g"},
      {ups_x_u, "ups_x_u"},   {ups_y_u, "ups_y_u"},   {q_g, "q_g"},         {q_u, "q_u"},
      {dipole_scale, "dipole_scale"}, {gamma_L, "gamma_L"}};
  for (const auto& [v, name] : couplings) {
    if (v < 0.0) throw std::invalid_argument(std::string("G4VParameters: negative ") + name);
  }
}

RVec3 MagneticField::vector() const {
  return RVec3(B * std::cos(theta_dc), 0.0, B * std::sin(theta_dc));
}

const Eigen::Matrix3d& lattice_rotation() {
  static const Eigen::Matrix3d g = [] {
    const double s6 = std::sqrt(6.0), s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    Eigen::Matrix3d m;
    m << 1.0 / s6, -2.0 / s6, 1.0 / s6,
         1.0 / s2, 0.0, -1.0 / s2,
         1.0 / s3, 1.0 / s3, 1.0 / s3;
    return m;
  }();
  return g;
}

Mat8 assemble_hamiltonian(const G4VParameters& p, const MagneticField& field) {
  using units::from_ghz;
  using units::from_thz;
  const RVec3 b = field.vector();
  const double gl = from_ghz(p.gamma_L);
  const double gs = from_ghz(p.gamma_S());
  const ManifoldConstants g{from_thz(p.delta_g), from_ghz(p.lambda_g), from_ghz(p.ups_x_g),
                            from_ghz(p.ups_y_g), p.q_g};
  const ManifoldConstants u{from_thz(p.delta_u), from_ghz(p.lambda_u), from_ghz(p.ups_x_u),
                            from_ghz(p.ups_y_u), p.q_u};
  Mat8 h = Mat8::Zero();
  h.topLeftCorner<4, 4>() = manifold_block(g, b, gl, gs);
  h.bottomRightCorner<4, 4>() = manifold_block(u, b, gl, gs);
  return h;
}

EigenSystem build_hamiltonian(const G4VParameters& params, const MagneticField& field) {
  params.validate();
  if (!std::isfinite(field.B) || !std::isfinite(field.theta_dc)) {
    throw std::invalid_argument("MagneticField: non-finite component");
  }
  if (field.B < 0.0) throw std::invalid_argument("MagneticField: B must be >= 0");

  EigenSystem es;
  es.params = params;
  es.field = field;
  es.hamiltonian = assemble_hamiltonian(params, field);

  std::array<double, 8> values{};
  std::array<Vec8, 8> vectors{};
  for (int blk = 0; blk < 2; ++blk) {
    const Mat4 hb = es.hamiltonian.block<4, 4>(4 * blk, 4 * blk);
    Eigen::SelfAdjointEigenSolver<Mat4> solver(hb);
    if (solver.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "eigensolver did not converge for manifold block " << blk
          << " (Frobenius norm " << hb.norm() << ", B=" << field.B << " T)";
      throw NumericalError(msg.str());
    }
    for (int k = 0; k < 4; ++k) {
      values[4 * blk + k] = solver.eigenvalues()(k);
      Vec8 v = Vec8::Zero();
      v.segment<4>(4 * blk) = solver.eigenvectors().col(k);
      vectors[4 * blk + k] = v;
    }
  }

  std::array<int, 8> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });

  for (int k = 0; k < 8; ++k) {
    Vec8 v = vectors[order[k]];
    fix_gauge(v);
    es.energies(k) = values[order[k]];
    es.transform.col(k) = v;
    const double ground_weight = v.head<4>().squaredNorm();
    es.manifold[k] = ground_weight > 0.5 ? Manifold::ground : Manifold::excited;
  }
  return es;
}

std::array<Mat8, 3> orbital_dipoles(double a) {
  Eigen::Matrix4d dx, dy, dz;
  dx << 0, 0, 1, 0,
        0, 0, 0, -1,
        1, 0, 0, 0,
        0, -1, 0, 0;
  dy << 0, 0, 0, -1,
        0, 0, -1, 0,
        0, -1, 0, 0,
        -1, 0, 0, 0;
  dz << 0, 0, 1, 0,
        0, 0, 0, 1,
        1, 0, 0, 0,
        0, 1, 0, 0;
  dz *= 2.0;

  // Orbital operators act on (g_x, g_y, u_x, u_y); the spin factor is the identity.
  std::array<Mat8, 3> out;
  const Eigen::Matrix4d* d[3] = {&dx, &dy, &dz};
  for (int c = 0; c < 3; ++c) {
    Mat8 m = Mat8::Zero();
    for (int r = 0; r < 4; ++r) {
      for (int s = 0; s < 4; ++s) {
        const double v = -a * (*d[c])(r, s);
        m(2 * r, 2 * s) = v;
        m(2 * r + 1, 2 * s + 1) = v;
      }
    }
    out[c] = m;
  }
  return out;
}

DipoleOperators dipole_in_eigenbasis(const EigenSystem& eigsys) {
  const auto orb = orbital_dipoles(eigsys.params.dipole_scale);
  DipoleOperators d;
  for (int c = 0; c < 3; ++c) {
    d.mu[c] = eigsys.transform.adjoint() * orb[c] * eigsys.transform;
    // Symmetrise and clear the same-manifold blocks that vanish exactly.
    d.mu[c] = 0.5 * (d.mu[c] + d.mu[c].adjoint()).eval();
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (eigsys.manifold[i] == eigsys.manifold[j]) d.mu[c](i, j) = 0.0;
      }
    }
  }
  return d;
}

Mat8 DipoleOperators::dot(const CVec3& e) const {
  return e(0) * mu[0] + e(1) * mu[1] + e(2) * mu[2];
}

Polarization polarization_vector(double theta, double phi, double phase, int slot) {
  if (slot != 1 && slot != 2) throw std::invalid_argument("polarization slot must be 1 or 2");
  const RVec3 lattice(std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta),
                      std::cos(theta));
  Polarization p;
  p.theta = theta;
  p.phi = phi;
  p.phase = phase;
  p.slot = slot;
  p.vector = (lattice_rotation().transpose() * lattice).cast<cplx>();
  if (slot == 2) p.vector *= std::polar(1.0, phase);
  return p;
}

Polarization polarization_from_vector(const CVec3& e, int slot) {
  const double n = e.norm();
  if (!(n > 0.0)) throw std::invalid_argument("polarization vector must be nonzero");
  Polarization p;
  p.slot = slot;
  p.vector = e / n;
  const auto [theta, phi] = spherical_angles(p.vector);
  p.theta = theta;
  p.phi = phi;
  return p;
}

std::pair<double, double> spherical_angles(const CVec3& e) {
  int k = 0;
  e.cwiseAbs().maxCoeff(&k);
  const CVec3 aligned = e * (std::conj(e(k)) / std::abs(e(k)));
  RVec3 lattice = lattice_rotation() * aligned.real();
  lattice.normalize();
  double theta = std::acos(std::clamp(lattice.z(), -1.0, 1.0));
  double phi = std::atan2(lattice.y(), lattice.x());
  if (phi < 0.0) phi += kTwoPi;
  return {theta, phi};
}

}  // namespace g4v
