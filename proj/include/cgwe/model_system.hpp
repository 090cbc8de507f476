#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgwe/types.hpp"

namespace cgwe {

/// One Hermitian momentum operator, tagged by particle index and Cartesian axis.
struct MomentumOp {
  int particle = 0;
  int axis = 0;
  MatrixXc matrix;
};

struct UnitInfo {
  Real hbar = 1.0;
  std::string length = "nearest-neighbor spacing";
  std::string energy = "hbar^2/(m l^2)";
  std::string momentum = "hbar/l";
};

/// Finite-dimensional N-fermion model: unperturbed Hamiltonian, slow two-body
/// perturbation entering at second order in the scale ratio, optional
/// first-order term kept for diagnostics, and one momentum operator per
/// particle-component.
class ModelSystem {
 public:
  ModelSystem(int n_particles, MatrixXc h0, MatrixXc v2,
              std::vector<MomentumOp> momentum_ops, Real mass, Real epsilon,
              std::optional<MatrixXc> v1 = std::nullopt);

  int n_particles() const { return n_particles_; }
  Eigen::Index dim() const { return h0_.rows(); }
  const MatrixXc& h0() const { return h0_; }
  const MatrixXc& v2() const { return v2_; }
  const std::optional<MatrixXc>& v1() const { return v1_; }
  const std::vector<MomentumOp>& momentum_ops() const { return momentum_ops_; }
  const MomentumOp& momentum_op(int particle, int axis) const;
  Real mass() const { return mass_; }
  Real epsilon() const { return epsilon_; }
  const UnitInfo& units() const { return units_; }

  static constexpr Real kHermitianTol = 1e-12;

 private:
  int n_particles_;
  MatrixXc h0_;
  MatrixXc v2_;
  std::optional<MatrixXc> v1_;
  std::vector<MomentumOp> momentum_ops_;
  Real mass_;
  Real epsilon_;
  UnitInfo units_;
};

/// Random dense Hermitian matrix with entries of unit scale; deterministic in
/// the seed.
MatrixXc random_hermitian(Eigen::Index dim, unsigned seed);

/// Random Hermitian matrix with purely imaginary entries (i times a real
/// antisymmetric matrix), the structure of a momentum operator in a real
/// position basis.
MatrixXc random_momentum_like(Eigen::Index dim, unsigned seed);

/// Random real symmetric matrix (Hermitian with a real ground vector).
MatrixXc random_real_symmetric(Eigen::Index dim, unsigned seed);

/// Single-particle test model of the given dimension: random real-symmetric
/// h0 and v2, one momentum-like operator per axis.
ModelSystem random_model(Eigen::Index dim, int n_axes, unsigned seed,
                         Real epsilon = 0.25, Real mass = 1.0);

}  // namespace cgwe
