#pragma once

#include <array>

#include "g4v/types.hpp"

namespace g4v {

// Levels are 0-based throughout the library: index k is the eigenstate |k+1>.
// Orbital-spin basis order within each manifold: x-down, x-up, y-down, y-up.

enum class Manifold { ground, excited };

// Hamiltonian constants of a group-IV center. Defaults are the SnV values.
struct G4VParameters {
  double delta_g = 0.0;        // THz
  double delta_u = 484.34;     // THz
  double lambda_g = 407.5;     // GHz
  double lambda_u = 1177.5;    // GHz
  double ups_x_g = 65.0;       // GHz
  double ups_y_g = 0.0;        // GHz
  double ups_x_u = 855.0;      // GHz
  double ups_y_u = 0.0;        // GHz
  double q_g = 0.15;
  double q_u = 0.15;
  double dipole_scale = 1.0;   // nm (elementary charge implicit)
  double gamma_L = 13.996;     // GHz/T

  double gamma_S() const { return 2.0 * gamma_L; }

  // Throws std::invalid_argument on negative couplings or non-finite values.
  void validate() const;
};

struct MagneticField {
  double B = 0.0;         // T
  double theta_dc = 0.0;  // rad, angle out of the x axis towards z

  RVec3 vector() const;
};

struct EigenSystem {
  RVec8 energies;                    // rad/ns, ascending
  Mat8 transform;                    // column k is eigenvector k in the orbital-spin basis
  Mat8 hamiltonian;                  // assembled matrix (rad/ns)
  std::array<Manifold, 8> manifold;  // derived from the block support of each column
  G4VParameters params;
  MagneticField field;

  // Transition frequency eps_j - eps_i (rad/ns).
  double gap(int i, int j) const { return energies(j) - energies(i); }
};

struct DipoleOperators {
  std::array<Mat8, 3> mu;  // x, y, z components in the eigenbasis (nm)

  // mu . e for a complex polarization vector in the symmetry frame.
  Mat8 dot(const CVec3& e) const;
};

// Polarization of one laser, stored as its symmetry-frame vector.
struct Polarization {
  double theta = 0.0;
  double phi = 0.0;
  double phase = 0.0;
  int slot = 1;
  CVec3 vector = CVec3::Zero();
};

// Lattice-to-symmetry frame rotation G (orthogonal).
const Eigen::Matrix3d& lattice_rotation();

// Assembles the 8x8 Hamiltonian and diagonalises each manifold block.
EigenSystem build_hamiltonian(const G4VParameters& params, const MagneticField& field);

// Assembled Hamiltonian in the orbital-spin basis, rad/ns.
Mat8 assemble_hamiltonian(const G4VParameters& params, const MagneticField& field);

// Transition dipole components in the orbital-spin basis (nm).
std::array<Mat8, 3> orbital_dipoles(double dipole_scale);

DipoleOperators dipole_in_eigenbasis(const EigenSystem& eigsys);

// e_k = G^T (cos phi sin theta, sin phi sin theta, cos theta), with the phase
// factor exp(i phase) applied for slot 2 only.
Polarization polarization_vector(double theta, double phi, double phase, int slot);

// Wraps a symmetry-frame vector (normalised) without spherical metadata.
Polarization polarization_from_vector(const CVec3& e, int slot);

// Spherical lattice-frame angles (theta, phi) of the real direction closest to e.
std::pair<double, double> spherical_angles(const CVec3& e);

}  // namespace g4v
