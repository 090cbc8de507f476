#include "cgwe/correlation.hpp"

#include <cmath>

namespace cgwe {

MatrixXc Rank4Tensor::block(int l, int lp) const {
  MatrixXc out(n_axes_, n_axes_);
  for (int a = 0; a < n_axes_; ++a) {
    for (int ap = 0; ap < n_axes_; ++ap) {
      out(a, ap) = (*this)(l, a, lp, ap);
    }
  }
  return out;
}

namespace {

// <n|p|0> for all n, i.e. the ground column of p in the eigenbasis.
VectorXc ground_column(const SpectralDecomposition& spec, const MatrixXc& p) {
  return spec.eigenvectors.adjoint() * (p * spec.ground_state());
}

}  // namespace

CorrelationFunction make_correlation(const ModelSystem& system,
                                     const SpectralDecomposition& spec, int particle,
                                     int axis, int particle_prime, int axis_prime) {
  const MatrixXc& p = system.momentum_op(particle, axis).matrix;
  const MatrixXc& pp = system.momentum_op(particle_prime, axis_prime).matrix;
  const VectorXc left = ground_column(spec, p);    // <n|p|0>
  const VectorXc right = ground_column(spec, pp);  // <n|p'|0>

  CorrelationFunction corr;
  corr.particle = particle;
  corr.axis = axis;
  corr.particle_prime = particle_prime;
  corr.axis_prime = axis_prime;
  corr.spectral_terms.reserve(static_cast<std::size_t>(spec.dim()) - 1);
  for (Eigen::Index n = 1; n < spec.dim(); ++n) {
    // <0|p|n><n|p'|0> = conj(<n|p|0>) <n|p'|0>
    corr.spectral_terms.emplace_back(spec.eigenvalues(n), std::conj(left(n)) * right(n));
  }
  return corr;
}

Complex correlation_chi(const ModelSystem& system, const SpectralDecomposition& spec,
                        int particle, int axis, int particle_prime, int axis_prime,
                        Real t0, const DephasingParam& eta) {
  if (!(t0 <= 0.0)) {
    throw std::invalid_argument("correlation_chi: sampling convention requires t0 <= 0");
  }
  const CorrelationFunction corr =
      make_correlation(system, spec, particle, axis, particle_prime, axis_prime);
  Complex sum(0, 0);
  for (const auto& [zeta, weight] : corr.spectral_terms) {
    // e^{i w_n t0} with w_n = zeta/hbar - i eta
    sum += weight * std::exp(Complex(eta.eta * t0, zeta * t0 / kHbar));
  }
  return sum;
}

Rank4Tensor chi_time_integral(const ModelSystem& system,
                              const SpectralDecomposition& spec,
                              const DephasingParam& eta) {
  int n_axes = 0;
  for (const auto& op : system.momentum_ops()) n_axes = std::max(n_axes, op.axis + 1);
  const int n_particles = system.n_particles();

  // Cache <n|p_{l a}|0> columns.
  std::vector<std::vector<VectorXc>> cols(
      static_cast<std::size_t>(n_particles), std::vector<VectorXc>(static_cast<std::size_t>(n_axes)));
  for (const auto& op : system.momentum_ops()) {
    cols[op.particle][op.axis] = ground_column(spec, op.matrix);
  }

  Rank4Tensor out(n_particles, n_axes);
  for (int l = 0; l < n_particles; ++l) {
    for (int a = 0; a < n_axes; ++a) {
      if (cols[l][a].size() == 0) continue;
      for (int lp = 0; lp < n_particles; ++lp) {
        for (int ap = 0; ap < n_axes; ++ap) {
          if (cols[lp][ap].size() == 0) continue;
          Complex sum(0, 0);
          for (Eigen::Index n = 1; n < spec.dim(); ++n) {
            const Complex w_n(spec.eigenvalues(n) / kHbar, -eta.eta);
            const Complex weight = std::conj(cols[l][a](n)) * cols[lp][ap](n);
            sum += weight / w_n;
          }
          out(l, a, lp, ap) = Complex(0, -1) * sum;
        }
      }
    }
  }
  return out;
}

}  // namespace cgwe
