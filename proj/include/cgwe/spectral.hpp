#pragma once

#include "cgwe/model_system.hpp"
#include "cgwe/types.hpp"

namespace cgwe {

/// Finite positive stand-in for the infinitesimal dephasing regulator,
/// in inverse-time units. Results meant as regulator-free statements are
/// reported at two or more values to confirm eta-independence.
struct DephasingParam {
  Real eta;

  explicit DephasingParam(Real eta_) : eta(eta_) {
    if (!(eta > 0.0)) throw std::invalid_argument("DephasingParam: eta must be > 0");
  }

  /// Default regulator for a given spectrum: 1e-3 of the first excitation
  /// frequency.
  static DephasingParam for_gap(Real zeta1) { return DephasingParam(1e-3 * zeta1 / kHbar); }
};

/// Eigensystem of a Hermitian operator with the ground energy shifted to zero.
struct SpectralDecomposition {
  VectorXr eigenvalues;   // ascending, eigenvalues[0] == 0 after shift
  MatrixXc eigenvectors;  // orthonormal columns
  Real ground_shift = 0.0;
  bool degenerate_ground = false;

  Eigen::Index dim() const { return eigenvalues.size(); }
  VectorXc ground_state() const { return eigenvectors.col(0); }
  /// First excitation energy; throws if the spectrum has a single level.
  Real gap() const;
};

/// Eigendecomposition of a Hermitian matrix, ground state shifted to zero
/// energy. A (near-)degenerate ground state sets degenerate_ground; the
/// returned ground vector is then the solver's lowest-index choice, which is
/// deterministic for identical input.
SpectralDecomposition diagonalize(const MatrixXc& hermitian, Real degeneracy_tol = 1e-10);
SpectralDecomposition diagonalize(const ModelSystem& system);

/// Applies the dephased evolution operator S(t0): phase e^{-i zeta_n t0} on
/// every level plus decay e^{-eta t0} on excited components only, so the
/// zero-energy sector is preserved exactly and excited content dies out as
/// t0 -> infinity.
VectorXc evolve(const SpectralDecomposition& spec, const VectorXc& psi, Real t0,
                const DephasingParam& eta);

/// Undamped evolution, S(t0) with eta = 0.
VectorXc evolve(const SpectralDecomposition& spec, const VectorXc& psi, Real t0);

/// (1/T) Int_{-T}^{0} S(-t') Omega |0> dt' in closed spectral form.
/// Converges to |0><0|Omega|0> with O(1/T) residual.
VectorXc long_time_average(const SpectralDecomposition& spec, const MatrixXc& omega,
                           Real t_window);

/// <psi|Omega|psi> / <psi|psi>.
Complex expectation(const VectorXc& psi, const MatrixXc& omega);

}  // namespace cgwe
