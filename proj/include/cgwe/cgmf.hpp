#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgwe/grid.hpp"
#include "cgwe/types.hpp"

namespace cgwe {

/// Symmetric pair interaction v(R, R') sampled at grid coordinates.
using PairKernel = std::function<Real(const std::array<Real, 3>&, const std::array<Real, 3>&)>;

/// Named kernels for config-driven runs: "zero", "constant" {c},
/// "gaussian" {amplitude, range}, "harmonic" {k}, "cosine" {amplitude, length}.
PairKernel make_pair_kernel(const std::string& name,
                            const std::map<std::string, Real>& params);

/// Mean-field problem data: particle count, pair kernel, and the single
/// particle inverse-mass matrix. chi_tilde is recovered from mu_tilde and the
/// bare mass, so the pair-kinetic bookkeeping needs no extra input. An
/// optional one-body field (sampled on the grid) joins the single-particle
/// operator; coarse-grained toy potentials enter this way.
struct MeanFieldProblem {
  int n_particles = 1;
  PairKernel pair_potential;  // empty means v == 0
  MatrixXr mu_tilde;          // d x d, symmetric negative definite
  Real mass = 1.0;
  std::optional<VectorXr> external_field;

  MatrixXr chi_tilde() const;
  bool has_pair_terms() const { return n_particles > 1 && static_cast<bool>(pair_potential); }
  /// Throws unless mu_tilde is d x d symmetric negative definite.
  void validate(const Grid& grid) const;
};

/// Mean-field potential Q(R) = (N-1) Int |A(R')|^2 v(R, R') dR'.
/// A is normalized first if needed (with a warning).
GridFunction hartree_potential(const MeanFieldProblem& problem, const GridFunction& a);

/// {Q_A + sum mu d^2} f with the mean-field background a_background.
GridFunction apply_cgmf_hamiltonian(const MeanFieldProblem& problem,
                                    const GridFunction& a_background,
                                    const GridFunction& f);

/// Same operator with a precomputed field; the workhorse behind the solvers.
VectorXc apply_hamiltonian_with_field(const Grid& grid, const MatrixXr& mu,
                                      const VectorXr& q_field, const VectorXc& f);

struct ScfOptions {
  Real tol = 1e-10;          // outer ||A_{k+1} - A_k|| target
  int max_iter = 500;        // outer (field-update) iterations
  Real mixing = 0.5;         // Hartree-field damping
  int inner_steps = 2000;    // imaginary-time steps per field update
  Real residual_tol = 1e-8;  // ||H A - E' A|| target, energy units
};

struct CondensateSolution {
  GridFunction a;
  Real e_tilde_prime = 0.0;
  Real e_tilde = 0.0;
  int iterations = 0;
  Real residual = 0.0;
  bool converged = false;
  std::vector<Real> residual_history;
  std::vector<Real> energy_history;
};

/// Self-consistent ground state of the nonlinear single-particle equation:
/// imaginary-time relaxation with per-step renormalization inside, damped
/// Hartree-field updates outside, monotone energy descent enforced across
/// accepted outer steps. Throws on non-convergence with the residual history
/// attached to the exception message.
CondensateSolution solve_condensate(const MeanFieldProblem& problem, const Grid& grid,
                                    std::optional<GridFunction> init = std::nullopt,
                                    const ScfOptions& opts = ScfOptions{});

struct EnergyBookkeeping {
  Real e_tilde = 0.0;                  // product-state energy
  Real e_tilde_prime_rayleigh = 0.0;   // <A|H_A A>
  Real e_tilde_prime_recovered = 0.0;  // from e_tilde via the per-particle reduction
  Real kinetic_single = 0.0;           // sum mu <A|d2 A>
  Real external_single = 0.0;          // <A|V_ext|A>
  Real pair_single = 0.0;              // Int |A|^2 v |A|^2
  Real q_hat_pair_term = 0.0;          // (N-1)(N-2) correction integrand
  Real q_hat_kinetic_part = 0.0;       // its chi cross part (0 for real A)
};

/// Product-state energy and the eigenvalue recovered from it. The
/// double-count correction applies the kernel-plus-cross-kinetic operator to
/// the right-hand pair of single-particle factors.
EnergyBookkeeping energy_bookkeeping(const MeanFieldProblem& problem,
                                     const GridFunction& a);

struct ExcitationMode {
  GridFunction b;
  Real eigenvalue = 0.0;
};

/// Lowest excitation factors: eigenpairs of the condensate-background
/// operator restricted to the orthogonal complement of A, ascending.
std::vector<ExcitationMode> solve_excitation(const MeanFieldProblem& problem,
                                             const CondensateSolution& condensate,
                                             int count);

struct Trajectory {
  std::vector<Real> times;
  std::vector<GridFunction> states;  // snapshots, last entry is the final state
  std::vector<Real> norms;
  std::vector<Real> energies;  // kinetic + mean-field pair energy
};

/// Real-time mean-field propagation over t2_span with a Crank-Nicolson step
/// (Cayley form, exactly norm-preserving) and the Hartree field refreshed
/// from a predictor pass each step. dt must satisfy dt <= 0.1 hbar / lambda_max
/// for the kinetic stencil bound lambda_max; violations are rejected with a
/// suggested dt.
Trajectory cgwe_propagate(const MeanFieldProblem& problem, const GridFunction& w0,
                          Real t2_span, Real dt, int store_every = 0);

}  // namespace cgwe
