#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cgwe/cgmf.hpp"
#include "cgwe/grid.hpp"
#include "cgwe/mass_tensor.hpp"
#include "cgwe/model_system.hpp"
#include "cgwe/spectral.hpp"

namespace cgwe {

using ScalarField = std::function<Real(Real)>;

/// Named 1-d profiles for config-driven runs: "zero", "constant" {c},
/// "cosine" {amplitude, period}, "harmonic" {k}, "linear" {slope},
/// "gaussian_well" {depth, width}.
ScalarField make_profile(const std::string& name,
                         const std::map<std::string, Real>& params);

struct DeltaKernelSpec {
  /// Gaussian window width in R units, as a multiple of epsilon. The default
  /// of 2 averages over two lattice periods on the fine scale.
  Real width_factor = 2.0;
};

struct TwoScaleParams {
  ScalarField v0;  // short-scale lattice profile, period 1 in r
  ScalarField v2;  // slow potential, function of R
  ScalarField v1;  // optional order-eps potential of R; empty = absent
  std::vector<Real> epsilon_list;  // strictly decreasing, each in (0, 1/2)
  int points_per_period = 16;
  int min_periods_factor = 4;  // fine domain spans >= factor / eps lattice periods
  int coarse_points = 256;
  Real mass = 1.0;
  DeltaKernelSpec kernel;
};

/// Scale-independent data shared by every epsilon run: the single-cell model
/// (spectral kinetic so it matches the fine integrator exactly), its
/// spectrum, and the envelope-equation inverse mass derived from the
/// momentum autocorrelation of the cell.
struct TwoScaleModel {
  TwoScaleParams params;
  std::shared_ptr<ModelSystem> cell;
  SpectralDecomposition cell_spectrum;
  Real cell_ground_energy = 0.0;  // shift folded into v0 so H0 psi_hat = 0
  Real chi_tilde = 0.0;           // hbar^2/m units
  Real mu = 0.0;                  // -(hbar^2/2m) + chi_tilde, < 0
};

TwoScaleModel build_two_scale_model(const TwoScaleParams& params);

/// Fine-grid realization of the model at one epsilon: periodic r grid over an
/// integer number of lattice periods, sampled potentials (energy shift
/// applied), and the short-scale ground state.
struct TwoScaleRealization {
  Real epsilon = 0.0;
  int periods = 0;
  int n_r = 0;
  Real length_r = 0.0;  // fine domain length, r units
  Real dr = 0.0;
  VectorXr r;            // fine coordinates in [0, L_r)
  VectorXr v_total;      // v0(r) - shift + eps^2 v2(eps r) [+ eps v1(eps r)]
  VectorXc psi_hat;      // ground state of the shifted H0, unit norm
  Grid coarse_grid;      // periodic R grid of length eps * L_r
  VectorXr v2_coarse;    // v2 sampled on the coarse grid
  Real kernel_width_factor = 2.0;
};

TwoScaleRealization realize(const TwoScaleModel& model, Real epsilon);

/// Norm-preserving split-step integrator for the fine-grid dynamics
/// i hbar dPsi/dt = [-(hbar^2/2m) d^2/dr^2 + V(r)] Psi on the periodic grid.
class FineGridPropagator {
 public:
  FineGridPropagator(const TwoScaleRealization& realization, Real dt, Real mass);

  void advance(VectorXc& psi, long steps) const;
  Real dt() const { return dt_; }
  /// <psi|H|psi> / <psi|psi> with the spectral kinetic operator.
  Real energy(const VectorXc& psi) const;

 private:
  Real dt_;
  Real dr_;
  VectorXr kinetic_eigenvalues_;  // hbar^2 k^2 / 2m on the fft ordering
  VectorXc half_potential_phase_;
  VectorXc kinetic_phase_;
  VectorXr potential_;
};

struct CoarseExtraction {
  GridFunction w;
  std::vector<bool> defined;  // false where the weight denominator is below floor
  Real denominator_floor = 0.0;
  int defined_count = 0;
};

/// Envelope extraction: kernel-weighted overlap with the short-scale ground
/// state, divided by the kernel-weighted ground density. width_r_units <= 1
/// lattice period would alias the short-scale structure and is rejected;
/// width 0 means the model default.
CoarseExtraction extract_coarse_wavefunction(const TwoScaleRealization& realization,
                                             const VectorXc& psi_full, Real width_R = 0.0,
                                             Real floor_rel = 1e-8);

struct ConvergenceOptions {
  Real t2_span = 1.0;
  Real dt_fine = 0.01;
  std::function<Complex(Real)> w0;  // envelope at t = 0; default centered Gaussian
  int workers = 1;                  // epsilon runs fan out across threads
};

struct ConvergencePoint {
  Real epsilon = 0.0;
  Real err = 0.0;            // ||Psi_CG(T) - W(T2)|| / ||W(T2)||
  Real err_half_kernel = 0.0;  // same comparison with the kernel width halved
  Real norm_drift = 0.0;     // fine-grid relative norm drift
  Real energy_drift = 0.0;   // fine-grid relative energy drift
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;  // ordered as epsilon_list
  Real fitted_slope = 0.0;               // least squares d log err / d log eps
  Real t2_span = 0.0;
  Real mu = 0.0;
  Real chi_tilde = 0.0;
};

/// For each epsilon: integrate the full dynamics to t = T2/eps^2, extract the
/// envelope, propagate the same initial envelope under the coarse equation
/// with mu and the coarse potential taken from the model, and report the
/// relative deviation.
ConvergenceReport compare_full_vs_cgwe(const TwoScaleModel& model,
                                       const ConvergenceOptions& opts = {});

struct EnvelopeExpectationResult {
  Complex total;              // full momentum expectation on the product state
  Complex short_scale_term;   // ground-state gradient contribution
  Complex envelope_term;      // order-eps envelope gradient contribution
  Real norm_squared;          // Int |psi_hat W(eps r)|^2 dr, for renormalization
};

/// Momentum expectation of psi_hat(r) W(eps r) split into the short-scale and
/// envelope contributions. W is supplied as a callable of R.
EnvelopeExpectationResult envelope_expectation(const TwoScaleRealization& realization,
                                               const std::function<Complex(Real)>& w,
                                               Real mass = 1.0);

struct GradientGrowthOptions {
  Real t1_span = 1.0;   // run ends at t = t1_span / eps
  int n_samples = 9;
  Real dt_fine = 0.01;
  std::function<Complex(Real)> w0;
};

struct GradientGrowthReport {
  std::vector<Real> times;       // physical time
  std::vector<Real> grad_norms;  // ||dPsi_CG/dR|| / ||Psi_CG|| over defined points
  Real slope = 0.0;              // least-squares growth rate
  Real slope_sigma = 0.0;        // standard error of the slope
  bool v1_present = false;
};

/// Runs the full dynamics with the order-eps potential included (when
/// present) and tracks the envelope gradient: bounded without it, linear
/// growth with it. Uses the largest epsilon in the list.
GradientGrowthReport v1_gradient_growth_diagnostic(const TwoScaleModel& model,
                                                   const GradientGrowthOptions& opts = {});

/// Two-fermion variant on a hard-wall lattice cell: the antisymmetric-pair
/// sector of two independent particles, with per-particle momentum operators
/// projected into that sector. Slater data exposed for construction checks.
struct TwoFermionCell {
  std::shared_ptr<ModelSystem> system;  // N = 2, dim = n(n-1)/2
  VectorXr orbital_energies;            // single-particle levels
  MatrixXr orbitals;                    // columns, FD box discretization
  VectorXc slater_ground;               // antisymmetrized two-lowest-orbital state
  MatrixXc embedding;                   // pair-basis -> product-basis isometry
};

TwoFermionCell build_two_fermion_cell(const TwoScaleParams& params, int periods = 2);

}  // namespace cgwe
