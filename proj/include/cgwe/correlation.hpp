#pragma once

#include <utility>
#include <vector>

#include "cgwe/model_system.hpp"
#include "cgwe/spectral.hpp"
#include "cgwe/types.hpp"

namespace cgwe {

/// Rank-4 array indexed by (particle, axis, particle', axis').
class Rank4Tensor {
 public:
  Rank4Tensor() = default;
  Rank4Tensor(int n_particles, int n_axes)
      : n_particles_(n_particles),
        n_axes_(n_axes),
        data_(static_cast<std::size_t>(n_particles) * n_axes * n_particles * n_axes,
              Complex(0, 0)) {}

  Complex& operator()(int l, int a, int lp, int ap) { return data_[index(l, a, lp, ap)]; }
  const Complex& operator()(int l, int a, int lp, int ap) const {
    return data_[index(l, a, lp, ap)];
  }

  int n_particles() const { return n_particles_; }
  int n_axes() const { return n_axes_; }

  /// The (alpha, alpha') block at fixed particle labels.
  MatrixXc block(int l, int lp) const;

 private:
  std::size_t index(int l, int a, int lp, int ap) const {
    if (l < 0 || l >= n_particles_ || lp < 0 || lp >= n_particles_ || a < 0 ||
        a >= n_axes_ || ap < 0 || ap >= n_axes_) {
      throw std::out_of_range("Rank4Tensor: index out of range");
    }
    return ((static_cast<std::size_t>(l) * n_axes_ + a) * n_particles_ + lp) * n_axes_ + ap;
  }

  int n_particles_ = 0;
  int n_axes_ = 0;
  std::vector<Complex> data_;
};

/// Momentum autocorrelation <0| p_{l a} S(-t0) p_{l' a'} |0> held in spectral
/// form: one (zeta_n, <0|p|n><n|p'|0>) term per excited level.
struct CorrelationFunction {
  int particle = 0, axis = 0, particle_prime = 0, axis_prime = 0;
  std::vector<std::pair<Real, Complex>> spectral_terms;
  std::vector<std::pair<Real, Complex>> samples;  // (t0, value), filled on request
};

CorrelationFunction make_correlation(const ModelSystem& system,
                                     const SpectralDecomposition& spec, int particle,
                                     int axis, int particle_prime, int axis_prime);

/// chi at a single sample time t0 <= 0, with dephasing e^{eta t0} on every
/// excited term. Sum over excited levels only.
Complex correlation_chi(const ModelSystem& system, const SpectralDecomposition& spec,
                        int particle, int axis, int particle_prime, int axis_prime,
                        Real t0, const DephasingParam& eta);

/// Int_{-infty}^{0} chi(t0) dt0 in closed form, -i sum_n M_n / w_n with
/// w_n = zeta_n/hbar - i eta, for every index combination at once.
Rank4Tensor chi_time_integral(const ModelSystem& system,
                              const SpectralDecomposition& spec,
                              const DephasingParam& eta);

}  // namespace cgwe
