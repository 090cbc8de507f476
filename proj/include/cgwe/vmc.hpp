#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cgwe/types.hpp"

namespace cgwe::vmc {

/// Particle configuration: one row per particle, one column per dimension.
using Configuration = MatrixXr;

/// Isotropic Gaussian orbital, optionally with a node along the first axis
/// (the one-node excited flavor used for fermionic trials).
struct Orbital {
  enum class Kind { gaussian, hermite };
  Kind kind = Kind::gaussian;
  VectorXr center;  // dimension-sized
  Real width = 1.0;

  Real value(const VectorXr& x) const;
};

/// Symmetric pair prefactor exp(-sum_{i<j} g exp(-|rij|^2 / s^2)).
struct JastrowParams {
  Real strength = 0.0;
  Real range = 1.0;
};

/// Antisymmetrized trial state: N short-scale orbitals, N* distinguished
/// long-scale envelopes plus one shared background envelope, and an optional
/// symmetric prefactor. Envelopes are evaluated at the scaled coordinate
/// R = epsilon * r.
struct TrialFunction {
  int n_particles = 1;  // <= 4
  int n_star = 0;
  int dimension = 1;
  Real epsilon = 1.0;
  std::vector<Orbital> short_orbitals;  // size N
  std::vector<Orbital> long_envelopes;  // size N*+1; empty = no envelopes
  std::optional<JastrowParams> jastrow;

  void validate() const;
  /// Trial value at a configuration (explicit permutation sum).
  Real value(const Configuration& config) const;
};

/// (1/sqrt(N!)) sum_s sgn(s) f(permuted configuration), N <= 4.
Real antisymmetrize(const std::function<Real(const Configuration&)>& f,
                    const Configuration& config);

struct VmcHamiltonian {
  Real mass = 1.0;
  std::function<Real(const VectorXr&)> external;  // one-body potential
  std::function<Real(Real)> pair;                 // optional, of pair distance
};

/// Local energy (H Psi)/Psi with analytic derivatives of the trial factors.
/// Non-finite values signal node proximity and are screened by the sampler.
Real local_energy(const TrialFunction& trial, const VmcHamiltonian& hamiltonian,
                  const Configuration& config);

/// Sampling domain restriction: a hard cube of edge b in every particle
/// coordinate, centered on a reference configuration (the short-scale image
/// of a coarse trajectory point).
struct CubeSpec {
  Configuration center;
  Real edge = 0.0;
};

struct SamplingSpec {
  std::optional<CubeSpec> cube;
  int n_chains = 4;
  int warmup_sweeps = 400;
  int stride_sweeps = 1;  // sweeps between measurements
  bool parallel_chains = true;
};

struct McEstimate {
  Real value = 0.0;
  Real std_error = 0.0;
  long n_samples = 0;
  unsigned seed = 0;
  Real acceptance_rate = 0.0;
  long rejected_samples = 0;  // non-finite local energies screened out
};

/// Variational energy by Metropolis sampling of |Psi|^2 with per-particle
/// Gaussian proposals tuned toward 50% acceptance during warmup. Independent
/// chains carry derived sub-seeds and merge by inverse variance in fixed
/// order, so results are reproducible for a given seed.
McEstimate mc_energy(const TrialFunction& trial, const VmcHamiltonian& hamiltonian,
                     const SamplingSpec& sampling, long n_samples, unsigned seed);

using TrialFamily = std::function<TrialFunction(const VectorXr&)>;

McEstimate mc_energy(const TrialFamily& family, const VectorXr& lambda,
                     const VmcHamiltonian& hamiltonian, const SamplingSpec& sampling,
                     long n_samples, unsigned seed);

struct OptimizeOptions {
  VectorXr lower;  // parameter box
  VectorXr upper;
  int budget = 120;            // objective evaluations
  long samples_per_eval = 20000;
  unsigned seed = 1;
  Real simplex_tol = 1e-4;
};

struct OptimizeResult {
  VectorXr lambda;
  McEstimate estimate;
  bool budget_exhausted = false;
  /// Accepted best-so-far energies, non-increasing.
  std::vector<Real> energy_trace;
};

/// Derivative-free minimization (Nelder-Mead inside the box) of the
/// common-random-numbers energy estimate: every evaluation reuses the same
/// seed so the objective is deterministic and the search reproducible.
OptimizeResult optimize_lambda(const TrialFamily& family,
                               const VmcHamiltonian& hamiltonian,
                               const SamplingSpec& sampling, const VectorXr& lambda0,
                               const OptimizeOptions& opts);

}  // namespace cgwe::vmc
