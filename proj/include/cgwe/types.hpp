#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace cgwe {

using Real = double;
using Complex = std::complex<double>;

using VectorXr = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXr = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;
using Matrix3r = Eigen::Matrix3d;
using Matrix3c = Eigen::Matrix3cd;

// Internal unit convention: hbar = 1, bare mass carried explicitly so the
// hbar^2/m bookkeeping of derived quantities stays visible in formulas.
inline constexpr Real kHbar = 1.0;

/// Max |M - M^dagger| entry relative to max |M| entry (0 for the zero matrix).
template <typename Derived>
Real hermiticity_residual(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermiticity_residual: matrix must be square");
  }
  const Real scale = m.cwiseAbs().maxCoeff();
  if (scale == Real(0)) return Real(0);
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, Real rel_tol = 1e-12) {
  return hermiticity_residual(m) <= rel_tol;
}

/// Frobenius distance of U^dagger U from the identity.
template <typename Derived>
Real unitarity_residual(const Eigen::MatrixBase<Derived>& u) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat gram = u.adjoint() * u;
  return (gram - Mat::Identity(u.cols(), u.cols())).norm();
}

}  // namespace cgwe
