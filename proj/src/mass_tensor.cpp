#include "cgwe/mass_tensor.hpp"

#include <cmath>

namespace cgwe {

KMatrixResult k_matrix_and_spectrum(int n_particles, Real chi_scalar, Real mass) {
  if (n_particles < 2) {
    throw std::invalid_argument("k_matrix_and_spectrum: need at least 2 particles");
  }
  const Real unit = kHbar * kHbar / mass;

  KMatrixResult out;
  out.chi_scalar = chi_scalar;
  out.k = (chi_scalar * MatrixXr::Ones(n_particles, n_particles) -
           0.5 * MatrixXr::Identity(n_particles, n_particles)) *
          unit;

  Eigen::SelfAdjointEigenSolver<MatrixXr> solver(out.k);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("k_matrix_and_spectrum: eigensolver failed");
  }
  out.d = solver.eigenvalues();
  out.q = solver.eigenvectors().transpose();  // rows diagonalize: Q K Q^T = D

  out.mu_tilde = (chi_scalar - 0.5) * unit;
  if (out.mu_tilde >= 0.0) {
    throw std::invalid_argument(
        "k_matrix_and_spectrum: chi_scalar >= 1/2 gives a non-negative inverse mass");
  }
  out.m_eff = kHbar * kHbar / (2.0 * std::abs(out.mu_tilde));
  return out;
}

Real reference_d_entry(int ell, Real chi_scalar) {
  if (ell < 1) throw std::invalid_argument("reference_d_entry: ell is 1-based");
  const Real mu1 = chi_scalar - 0.5;  // -0.2919 at the hydrogenic estimate
  if (ell == 1) return mu1;
  const Real l = static_cast<Real>(ell);
  return (0.08521 - 0.06074 * (l - 2.0) - 0.04331 * (l - 1.0)) /
         (mu1 + chi_scalar * (l - 2.0));
}

EffectiveMassTensor mass_tensor(const ModelSystem& system,
                                const SpectralDecomposition& spec,
                                const DephasingParam& eta) {
  // The correlation sum starts at n = 1, which is only valid because the
  // ground momentum expectation vanishes; verify before assembling.
  const VectorXc ground = spec.ground_state();
  for (const auto& op : system.momentum_ops()) {
    const Complex p00 = ground.dot(op.matrix * ground);
    const Real scale = std::max(op.matrix.cwiseAbs().maxCoeff(), Real(1));
    if (std::abs(p00) > 1e-8 * scale) {
      throw std::runtime_error(
          "mass_tensor: <0|p|0> does not vanish; the correlation sum would miss a zero-frequency term");
    }
  }

  EffectiveMassTensor out;
  out.degenerate_ground = spec.degenerate_ground;

  const Rank4Tensor integral = chi_time_integral(system, spec, eta);
  const int n_particles = integral.n_particles();
  const int n_axes = integral.n_axes();
  const Real m = system.mass();

  out.chi_tilde_full = Rank4Tensor(n_particles, n_axes);
  out.mu = Rank4Tensor(n_particles, n_axes);
  const Complex i_hbar_over_m2(0, kHbar / (m * m));
  for (int l = 0; l < n_particles; ++l) {
    for (int a = 0; a < n_axes; ++a) {
      for (int lp = 0; lp < n_particles; ++lp) {
        for (int ap = 0; ap < n_axes; ++ap) {
          const Complex chi = i_hbar_over_m2 * integral(l, a, lp, ap);
          out.chi_tilde_full(l, a, lp, ap) = chi;
          Complex mu = chi;
          if (l == lp && a == ap) mu -= kHbar * kHbar / (2.0 * m);
          out.mu(l, a, lp, ap) = mu;
        }
      }
    }
  }

  // Label-independence of the reduced form: every (l, l') block must agree.
  out.label_independent = true;
  const MatrixXc ref = out.chi_tilde_full.block(0, 0);
  const Real scale = std::max(ref.cwiseAbs().maxCoeff(), Real(1e-300));
  for (int l = 0; l < n_particles && out.label_independent; ++l) {
    for (int lp = 0; lp < n_particles; ++lp) {
      if ((out.chi_tilde_full.block(l, lp) - ref).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        out.label_independent = false;
        break;
      }
    }
  }

  if (out.label_independent) {
    out.chi_tilde = ref;
  } else {
    // Keep the full tensor authoritative; report the label-averaged block.
    MatrixXc avg = MatrixXc::Zero(n_axes, n_axes);
    for (int l = 0; l < n_particles; ++l) {
      for (int lp = 0; lp < n_particles; ++lp) avg += out.chi_tilde_full.block(l, lp);
    }
    out.chi_tilde = avg / static_cast<Real>(n_particles * n_particles);
  }

  // Isotropic reduction: scalar chi with negligible off-diagonal entries.
  if (out.label_independent && n_particles >= 2) {
    const Real diag0 = out.chi_tilde(0, 0).real();
    bool isotropic = true;
    for (int a = 0; a < n_axes && isotropic; ++a) {
      for (int ap = 0; ap < n_axes; ++ap) {
        const Complex expected = (a == ap) ? Complex(diag0, 0) : Complex(0, 0);
        if (std::abs(out.chi_tilde(a, ap) - expected) > 1e-8 * std::max(std::abs(diag0), Real(1))) {
          isotropic = false;
          break;
        }
      }
    }
    if (isotropic && diag0 < 0.5 * kHbar * kHbar / m) {
      out.k_matrix = k_matrix_and_spectrum(n_particles, diag0 * m / (kHbar * kHbar), m);
    }
  }
  return out;
}

HydrogenicEstimate hydrogenic_chi_tilde(int n_max) {
  if (n_max < 2) {
    throw std::invalid_argument("hydrogenic_chi_tilde: n_max must be >= 2");
  }
  HydrogenicEstimate out;
  out.n_max = n_max;
  // <1s|z|2p_z> = (1/sqrt(3)) * radial integral = 2^7 sqrt(2) / 3^5 Bohr radii.
  out.z_matrix_element = 128.0 * std::sqrt(2.0) / 243.0;
  out.zeta1 = 3.0 / 8.0;  // (1 - 1/4)/2 in hbar^2/(m a^2)

  // Each np_z level contributes (hbar^2/m^2) |<1s|p_z|np_z>|^2 / zeta_n.
  // With p = (i m / hbar)[H, z] the momentum element is m zeta z / hbar, so
  // the contribution reduces to zeta_n z_n^2 where z_n = <1s|z|np_z>. Using
  // the squared 1s->np radial integral 2^8 n^7 (n-1)^{2n-5} / (n+1)^{2n+5}
  // and zeta_n = (1 - 1/n^2)/2, each term collapses to the single rational
  //   chi_n = 2^8 n^5 (n-1)^{2n-4} / (6 (n+1)^{2n+4}),
  // which for n = 2 is 4096/19683 on the nose.
  const auto ipow = [](Real base, int exp) {
    Real out = 1.0;
    for (int k = 0; k < exp; ++k) out *= base;
    return out;
  };
  Real chi = 0.0;
  for (int n = 2; n <= n_max; ++n) {
    const Real nn = static_cast<Real>(n);
    chi += 256.0 * ipow(nn, 5) * ipow(nn - 1.0, 2 * n - 4) /
           (6.0 * ipow(nn + 1.0, 2 * n + 4));
  }
  out.chi_scalar = chi;
  out.chi_tilde = chi * Matrix3r::Identity();
  return out;
}

}  // namespace cgwe
