#include "cgwe/spectral.hpp"

#include <cmath>

namespace cgwe {

Real SpectralDecomposition::gap() const {
  if (eigenvalues.size() < 2) {
    throw std::runtime_error("SpectralDecomposition: no excited level");
  }
  return eigenvalues[1];
}

SpectralDecomposition diagonalize(const MatrixXc& hermitian, Real degeneracy_tol) {
  if (!is_hermitian(hermitian, ModelSystem::kHermitianTol)) {
    throw std::invalid_argument("diagonalize: input is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("diagonalize: eigensolver failed to converge");
  }
  SpectralDecomposition spec;
  spec.ground_shift = solver.eigenvalues()(0);
  spec.eigenvalues = solver.eigenvalues().array() - spec.ground_shift;
  spec.eigenvalues(0) = 0.0;  // exact by convention
  spec.eigenvectors = solver.eigenvectors();

  const Real scale = std::max(spec.eigenvalues.cwiseAbs().maxCoeff(), Real(1));
  spec.degenerate_ground =
      spec.dim() > 1 && spec.eigenvalues(1) <= degeneracy_tol * scale;
  return spec;
}

SpectralDecomposition diagonalize(const ModelSystem& system) {
  return diagonalize(system.h0());
}

namespace {

VectorXc evolve_impl(const SpectralDecomposition& spec, const VectorXc& psi,
                     Real t0, Real eta) {
  if (!std::isfinite(t0)) throw std::invalid_argument("evolve: t0 must be finite");
  if (psi.size() != spec.dim()) throw std::invalid_argument("evolve: state dimension mismatch");

  VectorXc coeffs = spec.eigenvectors.adjoint() * psi;
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    const Real zeta = spec.eigenvalues(n);
    Complex factor = std::exp(Complex(0, -zeta * t0 / kHbar));
    if (n != 0 && zeta != 0.0) factor *= std::exp(-eta * t0);
    coeffs(n) *= factor;
  }
  return spec.eigenvectors * coeffs;
}

}  // namespace

VectorXc evolve(const SpectralDecomposition& spec, const VectorXc& psi, Real t0,
                const DephasingParam& eta) {
  return evolve_impl(spec, psi, t0, eta.eta);
}

VectorXc evolve(const SpectralDecomposition& spec, const VectorXc& psi, Real t0) {
  return evolve_impl(spec, psi, t0, 0.0);
}

VectorXc long_time_average(const SpectralDecomposition& spec, const MatrixXc& omega,
                           Real t_window) {
  if (!(t_window > 0.0)) {
    throw std::invalid_argument("long_time_average: averaging window T must be > 0");
  }
  if (omega.rows() != spec.dim() || omega.cols() != spec.dim()) {
    throw std::invalid_argument("long_time_average: operator dimension mismatch");
  }

  // S(-t')|n> = e^{+i zeta_n t'} |n>, so each excited coefficient averages to
  //   (1/T) Int_{-T}^{0} e^{i zeta t'} dt' = (hbar / (i zeta T)) (1 - e^{-i zeta T}),
  // while zero-energy terms average to 1.
  VectorXc coeffs = spec.eigenvectors.adjoint() * (omega * spec.ground_state());
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    const Real zeta = spec.eigenvalues(n);
    if (zeta != 0.0) {
      const Complex phase = std::exp(Complex(0, -zeta * t_window / kHbar));
      coeffs(n) *= kHbar / (Complex(0, 1) * zeta * t_window) * (Complex(1, 0) - phase);
    }
  }
  return spec.eigenvectors * coeffs;
}

Complex expectation(const VectorXc& psi, const MatrixXc& omega) {
  if (omega.rows() != psi.size() || omega.cols() != psi.size()) {
    throw std::invalid_argument("expectation: operator dimension mismatch");
  }
  const Real norm2 = psi.squaredNorm();
  if (norm2 == 0.0) throw std::invalid_argument("expectation: zero-norm state");
  return psi.dot(omega * psi) / norm2;
}

}  // namespace cgwe
