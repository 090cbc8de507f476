#include "cgwe/two_scale.hpp"

#include <unsupported/Eigen/FFT>

#include <atomic>
#include <cmath>
#include <thread>

namespace cgwe {

namespace {

// Unnormalized DFT matrix F(j,l) = exp(-2 pi i j l / n) / sqrt(n).
MatrixXc dft_matrix(int n) {
  MatrixXc f(n, n);
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(n));
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const Real arg = -2.0 * M_PI * j * l / n;
      f(j, l) = scale * Complex(std::cos(arg), std::sin(arg));
    }
  }
  return f;
}

// FFT-ordered wavenumbers for a periodic domain of the given length.
VectorXr fft_wavenumbers(int n, Real length) {
  VectorXr k(n);
  for (int j = 0; j < n; ++j) {
    const int shifted = (j <= n / 2) ? j : j - n;
    k(j) = 2.0 * M_PI * shifted / length;
  }
  return k;
}

Real wrap_periodic(Real x, Real length) {
  x = std::fmod(x, length);
  if (x < -0.5 * length) x += length;
  if (x >= 0.5 * length) x -= length;
  return x;
}

struct LinearFit {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real slope_sigma = 0.0;
};

LinearFit fit_line(const std::vector<Real>& x, const std::vector<Real>& y) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  Real sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const Real mx = sx / n, my = sy / n;
  Real sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    Real sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Real r = y[i] - (fit.intercept + fit.slope * x[i]);
      sse += r * r;
    }
    fit.slope_sigma = std::sqrt(sse / (static_cast<Real>(n) - 2.0) / sxx);
  }
  return fit;
}

}  // namespace

ScalarField make_profile(const std::string& name,
                         const std::map<std::string, Real>& params) {
  const auto get = [&params, &name](const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end()) {
      throw std::invalid_argument("profile '" + name + "': missing parameter '" + key + "'");
    }
    return it->second;
  };
  if (name == "zero") return [](Real) { return 0.0; };
  if (name == "constant") {
    const Real c = get("c");
    return [c](Real) { return c; };
  }
  if (name == "cosine") {
    const Real amplitude = get("amplitude");
    const Real period = params.count("period") ? params.at("period") : 1.0;
    return [amplitude, period](Real x) { return amplitude * std::cos(2.0 * M_PI * x / period); };
  }
  if (name == "harmonic") {
    const Real k = get("k");
    return [k](Real x) { return 0.5 * k * x * x; };
  }
  if (name == "linear") {
    const Real slope = get("slope");
    return [slope](Real x) { return slope * x; };
  }
  if (name == "gaussian_well") {
    const Real depth = get("depth");
    const Real width = get("width");
    return [depth, width](Real x) { return -depth * std::exp(-x * x / (width * width)); };
  }
  throw std::invalid_argument("unknown profile '" + name + "'");
}

TwoScaleModel build_two_scale_model(const TwoScaleParams& params) {
  if (!params.v0 || !params.v2) {
    throw std::invalid_argument("build_two_scale_model: v0 and v2 profiles are required");
  }
  if (params.points_per_period < 16) {
    throw std::invalid_argument(
        "build_two_scale_model: need at least 16 points per lattice period");
  }
  if (params.epsilon_list.empty()) {
    throw std::invalid_argument("build_two_scale_model: epsilon_list is empty");
  }
  for (std::size_t i = 0; i < params.epsilon_list.size(); ++i) {
    const Real eps = params.epsilon_list[i];
    if (!(eps > 0.0 && eps < 0.5)) {
      throw std::invalid_argument("build_two_scale_model: epsilon must lie in (0, 1/2)");
    }
    if (i > 0 && eps >= params.epsilon_list[i - 1]) {
      throw std::invalid_argument(
          "build_two_scale_model: epsilon_list must be strictly decreasing");
    }
  }
  if (std::abs(params.v0(0.0) - params.v0(1.0)) >
      1e-10 * std::max(std::abs(params.v0(0.0)), Real(1))) {
    throw std::invalid_argument("build_two_scale_model: v0 must have period 1");
  }

  // Single-cell model with the spectral kinetic operator, so the cell states
  // match the split-step integrator exactly.
  const int n = params.points_per_period;
  const MatrixXc f = dft_matrix(n);
  const VectorXr k = fft_wavenumbers(n, 1.0);

  VectorXr kinetic_diag(n), momentum_diag(n);
  for (int j = 0; j < n; ++j) {
    kinetic_diag(j) = kHbar * kHbar * k(j) * k(j) / (2.0 * params.mass);
    // Nyquist mode dropped from the first derivative to keep p Hermitian.
    momentum_diag(j) = (2 * j == n) ? 0.0 : kHbar * k(j);
  }
  MatrixXc kinetic = f.adjoint() * kinetic_diag.asDiagonal() * f;
  MatrixXc momentum = f.adjoint() * momentum_diag.asDiagonal() * f;
  kinetic = 0.5 * (kinetic + kinetic.adjoint()).eval();
  momentum = 0.5 * (momentum + momentum.adjoint()).eval();

  MatrixXc h_cell = kinetic;
  for (int j = 0; j < n; ++j) {
    h_cell(j, j) += params.v0(static_cast<Real>(j) / n);
  }
  h_cell = 0.5 * (h_cell + h_cell.adjoint()).eval();

  TwoScaleModel model;
  model.params = params;

  const SpectralDecomposition raw = diagonalize(h_cell);
  model.cell_ground_energy = raw.ground_shift;

  MatrixXc h_shifted = h_cell - model.cell_ground_energy * MatrixXc::Identity(n, n);
  const Real eps0 = params.epsilon_list.front();
  const MatrixXc v2_cell = params.v2(0.0) * MatrixXc::Identity(n, n);
  model.cell = std::make_shared<ModelSystem>(
      1, std::move(h_shifted), v2_cell,
      std::vector<MomentumOp>{{0, 0, momentum}}, params.mass, eps0);
  model.cell_spectrum = diagonalize(*model.cell);

  const DephasingParam eta(1e-7 * model.cell_spectrum.gap() / kHbar);
  const EffectiveMassTensor emt = mass_tensor(*model.cell, model.cell_spectrum, eta);
  model.chi_tilde = emt.chi_tilde(0, 0).real();
  model.mu = -kHbar * kHbar / (2.0 * params.mass) + model.chi_tilde;
  if (!(model.mu < 0.0)) {
    throw std::runtime_error(
        "build_two_scale_model: correlation shift exceeds the bare inverse mass");
  }
  return model;
}

TwoScaleRealization realize(const TwoScaleModel& model, Real epsilon) {
  const TwoScaleParams& params = model.params;
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("realize: epsilon must lie in (0, 1/2)");
  }

  TwoScaleRealization out;
  out.epsilon = epsilon;
  out.periods = static_cast<int>(
      std::ceil(params.min_periods_factor / epsilon - 1e-9));
  out.n_r = out.periods * params.points_per_period;
  out.length_r = static_cast<Real>(out.periods);
  out.dr = 1.0 / params.points_per_period;

  const Real length_R = epsilon * out.length_r;
  out.coarse_grid = Grid::make_1d(params.coarse_points, length_R, Grid::Boundary::periodic);

  out.r.resize(out.n_r);
  out.v_total.resize(out.n_r);
  const bool has_v1 = static_cast<bool>(params.v1);
  for (int i = 0; i < out.n_r; ++i) {
    const Real r = i * out.dr;
    out.r(i) = r;
    // Slow potentials take the centered coarse coordinate.
    const Real big_r = epsilon * r - 0.5 * length_R;
    Real v = params.v0(r - std::floor(r)) - model.cell_ground_energy +
             epsilon * epsilon * params.v2(big_r);
    if (has_v1) v += epsilon * params.v1(big_r);
    out.v_total(i) = v;
  }

  // The short-scale ground state is the cell ground state repeated: the cell
  // k = 0 level is the bottom of the lowest band.
  const VectorXc cell_ground = model.cell_spectrum.ground_state();
  out.psi_hat.resize(out.n_r);
  for (int i = 0; i < out.n_r; ++i) {
    out.psi_hat(i) = cell_ground(i % params.points_per_period);
  }
  out.psi_hat /= out.psi_hat.norm() * std::sqrt(out.dr);

  // Fix the (arbitrary) eigenvector sign so psi_hat is positive.
  Real mean_real = out.psi_hat.real().mean();
  if (mean_real < 0.0) out.psi_hat = -out.psi_hat;

  out.kernel_width_factor = params.kernel.width_factor;
  out.v2_coarse.resize(out.coarse_grid.size());
  for (Eigen::Index j = 0; j < out.coarse_grid.size(); ++j) {
    out.v2_coarse(j) = params.v2(out.coarse_grid.coordinate(0, static_cast<int>(j)));
  }
  return out;
}

FineGridPropagator::FineGridPropagator(const TwoScaleRealization& realization, Real dt,
                                       Real mass)
    : dt_(dt), dr_(realization.dr), potential_(realization.v_total) {
  if (!(dt > 0.0)) throw std::invalid_argument("FineGridPropagator: dt must be > 0");
  const int n = realization.n_r;
  kinetic_eigenvalues_ = fft_wavenumbers(n, realization.length_r);
  kinetic_phase_.resize(n);
  for (int j = 0; j < n; ++j) {
    const Real k = kinetic_eigenvalues_(j);
    const Real e_k = kHbar * kHbar * k * k / (2.0 * mass);
    kinetic_eigenvalues_(j) = e_k;
    kinetic_phase_(j) = std::exp(Complex(0, -e_k * dt / kHbar));
  }
  half_potential_phase_.resize(n);
  for (int j = 0; j < n; ++j) {
    half_potential_phase_(j) = std::exp(Complex(0, -potential_(j) * dt / (2.0 * kHbar)));
  }
}

void FineGridPropagator::advance(VectorXc& psi, long steps) const {
  if (psi.size() != half_potential_phase_.size()) {
    throw std::invalid_argument("FineGridPropagator: state size mismatch");
  }
  Eigen::FFT<Real> fft;
  VectorXc freq(psi.size());
  for (long s = 0; s < steps; ++s) {
    psi.array() *= half_potential_phase_.array();
    fft.fwd(freq, psi);
    freq.array() *= kinetic_phase_.array();
    fft.inv(psi, freq);
    psi.array() *= half_potential_phase_.array();
  }
}

Real FineGridPropagator::energy(const VectorXc& psi) const {
  Eigen::FFT<Real> fft;
  VectorXc freq(psi.size());
  VectorXc in = psi;
  fft.fwd(freq, in);
  const Real n = static_cast<Real>(psi.size());
  const Real kinetic =
      (kinetic_eigenvalues_.array() * freq.cwiseAbs2().array()).sum() * dr_ / n;
  const Real potential = (potential_.array() * psi.cwiseAbs2().array()).sum() * dr_;
  const Real norm2 = psi.squaredNorm() * dr_;
  return (kinetic + potential) / norm2;
}

CoarseExtraction extract_coarse_wavefunction(const TwoScaleRealization& realization,
                                             const VectorXc& psi_full,
                                             Real width_R, Real floor_rel) {
  if (psi_full.size() != realization.n_r) {
    throw std::invalid_argument("extract_coarse_wavefunction: state size mismatch");
  }
  const Real eps = realization.epsilon;
  if (width_R == 0.0) width_R = realization.kernel_width_factor * eps;
  if (width_R < eps * (1.0 - 1e-9)) {
    throw std::invalid_argument(
        "extract_coarse_wavefunction: kernel narrower than one lattice period would "
        "alias the short-scale structure");
  }

  const Grid& coarse = realization.coarse_grid;
  const Real length_R = coarse.extent(0);
  const Eigen::Index n_R = coarse.size();
  const int n_r = realization.n_r;
  const Real dr = realization.dr;

  // Window in fine-grid points; the Gaussian is truncated at 6 widths.
  const Real cut = 6.0 * width_R;
  const int half_window =
      std::min(n_r / 2, static_cast<int>(std::ceil(cut / (eps * dr))) + 1);

  VectorXc num = VectorXc::Zero(n_R);
  VectorXr den = VectorXr::Zero(n_R);
  for (Eigen::Index j = 0; j < n_R; ++j) {
    const Real x_j = coarse.coordinate(0, static_cast<int>(j));
    // Fine index whose mapped coordinate sits at x_j.
    const Real center = (x_j + 0.5 * length_R) / (eps * dr);
    const int i0 = static_cast<int>(std::llround(center));
    for (int kk = -half_window; kk <= half_window; ++kk) {
      const int i = ((i0 + kk) % n_r + n_r) % n_r;
      const Real mapped = eps * realization.r(i) - 0.5 * length_R;
      const Real d = wrap_periodic(x_j - mapped, length_R);
      if (std::abs(d) > cut) continue;
      const Real weight = std::exp(-d * d / (2.0 * width_R * width_R));
      num(j) += weight * std::conj(realization.psi_hat(i)) * psi_full(i) * dr;
      den(j) += weight * std::norm(realization.psi_hat(i)) * dr;
    }
  }

  CoarseExtraction out{GridFunction(coarse), {}, 0.0, 0};
  out.denominator_floor = floor_rel * den.maxCoeff();
  out.defined.assign(static_cast<std::size_t>(n_R), false);
  VectorXc values = VectorXc::Zero(n_R);
  for (Eigen::Index j = 0; j < n_R; ++j) {
    if (den(j) > out.denominator_floor) {
      values(j) = num(j) / den(j);
      out.defined[static_cast<std::size_t>(j)] = true;
      ++out.defined_count;
    }
  }
  out.w.set_values(std::move(values));
  return out;
}

namespace {

std::function<Complex(Real)> default_envelope(Real length_R) {
  const Real sigma = length_R / 8.0;
  return [sigma](Real x) { return Complex(std::exp(-x * x / (2.0 * sigma * sigma)), 0); };
}

VectorXc sample_envelope(const Grid& coarse, const std::function<Complex(Real)>& w0) {
  VectorXc values(coarse.size());
  for (Eigen::Index j = 0; j < coarse.size(); ++j) {
    values(j) = w0(coarse.coordinate(0, static_cast<int>(j)));
  }
  return values;
}

Real masked_relative_error(const VectorXc& extracted, const VectorXc& reference,
                           const std::vector<bool>& defined) {
  Real diff2 = 0.0, ref2 = 0.0;
  for (Eigen::Index j = 0; j < extracted.size(); ++j) {
    if (!defined[static_cast<std::size_t>(j)]) continue;
    diff2 += std::norm(extracted(j) - reference(j));
    ref2 += std::norm(reference(j));
  }
  if (ref2 == 0.0) throw std::runtime_error("masked_relative_error: empty reference");
  return std::sqrt(diff2 / ref2);
}

ConvergencePoint run_single_epsilon(const TwoScaleModel& model, Real epsilon,
                                    const ConvergenceOptions& opts) {
  const TwoScaleRealization realization = realize(model, epsilon);
  const Grid& coarse = realization.coarse_grid;
  const Real length_R = coarse.extent(0);

  const auto w0 = opts.w0 ? opts.w0 : default_envelope(length_R);

  // Initial product state psi_hat(r) W0(eps r); the envelope is normalized on
  // the coarse grid and the extraction ratio is insensitive to overall scale.
  GridFunction w_init(coarse, sample_envelope(coarse, w0));
  w_init.normalize();

  VectorXc psi(realization.n_r);
  for (int i = 0; i < realization.n_r; ++i) {
    const Real x = epsilon * realization.r(i) - 0.5 * length_R;
    psi(i) = realization.psi_hat(i) * w0(x);
  }
  const Real t_final = opts.t2_span / (epsilon * epsilon);
  const long n_steps = static_cast<long>(std::ceil(t_final / opts.dt_fine - 1e-9));
  const Real dt = t_final / static_cast<Real>(n_steps);

  const FineGridPropagator propagator(realization, dt, model.params.mass);
  const Real norm0 = psi.norm();
  const Real energy0 = propagator.energy(psi);
  propagator.advance(psi, n_steps);

  ConvergencePoint point;
  point.epsilon = epsilon;
  point.norm_drift = std::abs(psi.norm() - norm0) / norm0;
  point.energy_drift = std::abs(propagator.energy(psi) - energy0) /
                       std::max(std::abs(energy0), Real(1e-12));

  // Coarse side: same initial envelope, inverse mass and potential from the
  // model, independent norm-preserving propagation on the slow clock.
  MeanFieldProblem coarse_problem;
  coarse_problem.n_particles = 1;
  coarse_problem.mu_tilde = MatrixXr::Constant(1, 1, model.mu);
  coarse_problem.mass = model.params.mass;
  coarse_problem.external_field = realization.v2_coarse;

  const Real lambda_bound = 4.0 * std::abs(model.mu) /
                            (coarse.spacing(0) * coarse.spacing(0));
  const Real dt_coarse = 0.099 * kHbar / lambda_bound;
  const Trajectory traj =
      cgwe_propagate(coarse_problem, w_init, opts.t2_span, dt_coarse, 0);
  VectorXc w_final = traj.states.back().values();
  // Undo the envelope normalization so the comparison is in W0's own scale.
  w_final *= grid_norm(coarse, sample_envelope(coarse, w0));

  const CoarseExtraction full_kernel =
      extract_coarse_wavefunction(realization, psi);
  point.err = masked_relative_error(full_kernel.w.values(), w_final,
                                    full_kernel.defined);

  const Real half_width =
      std::max(epsilon, model.params.kernel.width_factor * epsilon / 2.0);
  const CoarseExtraction half_kernel =
      extract_coarse_wavefunction(realization, psi, half_width);
  point.err_half_kernel = masked_relative_error(half_kernel.w.values(), w_final,
                                                half_kernel.defined);
  return point;
}

}  // namespace

ConvergenceReport compare_full_vs_cgwe(const TwoScaleModel& model,
                                       const ConvergenceOptions& opts) {
  const std::vector<Real>& eps_list = model.params.epsilon_list;
  ConvergenceReport report;
  report.t2_span = opts.t2_span;
  report.mu = model.mu;
  report.chi_tilde = model.chi_tilde;
  report.points.resize(eps_list.size());

  const int workers = std::max(1, std::min<int>(opts.workers,
                                                static_cast<int>(eps_list.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      report.points[i] = run_single_epsilon(model, eps_list[i], opts);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(eps_list.size());
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < eps_list.size();
             i = next.fetch_add(1)) {
          try {
            report.points[i] = run_single_epsilon(model, eps_list[i], opts);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<Real> log_eps, log_err;
  for (const auto& p : report.points) {
    log_eps.push_back(std::log(p.epsilon));
    log_err.push_back(std::log(p.err));
  }
  report.fitted_slope = fit_line(log_eps, log_err).slope;
  return report;
}

EnvelopeExpectationResult envelope_expectation(const TwoScaleRealization& realization,
                                               const std::function<Complex(Real)>& w,
                                               Real mass) {
  (void)mass;
  const int n = realization.n_r;
  const Real dr = realization.dr;
  const Real length_R = realization.coarse_grid.extent(0);

  VectorXc w_samples(n), product(n);
  for (int i = 0; i < n; ++i) {
    const Real x = realization.epsilon * realization.r(i) - 0.5 * length_R;
    w_samples(i) = w(x);
    product(i) = realization.psi_hat(i) * w_samples(i);
  }

  Eigen::FFT<Real> fft;
  const VectorXr k = fft_wavenumbers(n, realization.length_r);
  const auto spectral_derivative = [&](const VectorXc& f) {
    VectorXc freq(n), out(n);
    VectorXc in = f;
    fft.fwd(freq, in);
    for (int j = 0; j < n; ++j) {
      const Real kj = (2 * j == n) ? 0.0 : k(j);
      freq(j) *= Complex(0, kj);
    }
    fft.inv(out, freq);
    return out;
  };

  const VectorXc dpsi_hat = spectral_derivative(realization.psi_hat);
  const VectorXc dw = spectral_derivative(w_samples);  // d/dr of W(eps r)

  EnvelopeExpectationResult out;
  const Complex minus_i_hbar(0, -kHbar);
  Complex short_term(0, 0), env_term(0, 0);
  Real norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Complex bra = std::conj(product(i));
    short_term += bra * dpsi_hat(i) * w_samples(i);
    env_term += bra * realization.psi_hat(i) * dw(i);
    norm2 += std::norm(product(i));
  }
  out.short_scale_term = minus_i_hbar * short_term * dr;
  out.envelope_term = minus_i_hbar * env_term * dr;
  out.total = out.short_scale_term + out.envelope_term;
  out.norm_squared = norm2 * dr;
  return out;
}

GradientGrowthReport v1_gradient_growth_diagnostic(const TwoScaleModel& model,
                                                   const GradientGrowthOptions& opts) {
  const Real epsilon = model.params.epsilon_list.front();
  const TwoScaleRealization realization = realize(model, epsilon);
  const Grid& coarse = realization.coarse_grid;
  const Real length_R = coarse.extent(0);

  const auto w0 = opts.w0 ? opts.w0 : default_envelope(length_R);
  VectorXc psi(realization.n_r);
  for (int i = 0; i < realization.n_r; ++i) {
    const Real x = epsilon * realization.r(i) - 0.5 * length_R;
    psi(i) = realization.psi_hat(i) * w0(x);
  }

  const Real t_final = opts.t1_span / epsilon;
  const int n_samples = std::max(3, opts.n_samples);
  const long steps_per_sample = std::max(
      1l, static_cast<long>(std::llround(t_final / (n_samples - 1) / opts.dt_fine)));
  const Real dt = t_final / static_cast<Real>(steps_per_sample * (n_samples - 1));
  const FineGridPropagator propagator(realization, dt, model.params.mass);

  GradientGrowthReport report;
  report.v1_present = static_cast<bool>(model.params.v1);

  const Real h_R = coarse.spacing(0);
  for (int s = 0; s < n_samples; ++s) {
    if (s > 0) propagator.advance(psi, steps_per_sample);
    const CoarseExtraction extraction = extract_coarse_wavefunction(realization, psi);
    const VectorXc& w_vals = extraction.w.values();

    Real grad2 = 0.0, val2 = 0.0;
    for (Eigen::Index j = 0; j < w_vals.size(); ++j) {
      const auto up = static_cast<std::size_t>((j + 1) % w_vals.size());
      const auto down = static_cast<std::size_t>((j - 1 + w_vals.size()) % w_vals.size());
      if (!extraction.defined[static_cast<std::size_t>(j)] || !extraction.defined[up] ||
          !extraction.defined[down]) {
        continue;
      }
      const Complex g =
          (w_vals(static_cast<Eigen::Index>(up)) - w_vals(static_cast<Eigen::Index>(down))) /
          (2.0 * h_R);
      grad2 += std::norm(g);
      val2 += std::norm(w_vals(j));
    }
    report.times.push_back(s * steps_per_sample * dt);
    report.grad_norms.push_back(std::sqrt(grad2 / val2));
  }

  const LinearFit fit = fit_line(report.times, report.grad_norms);
  report.slope = fit.slope;
  report.slope_sigma = fit.slope_sigma;
  return report;
}

TwoFermionCell build_two_fermion_cell(const TwoScaleParams& params, int periods) {
  if (periods < 1) throw std::invalid_argument("build_two_fermion_cell: periods >= 1");
  const int n = periods * params.points_per_period;
  const Grid grid = Grid::make_1d(n, static_cast<Real>(periods), Grid::Boundary::box);

  // Single-particle hard-wall problem: FD kinetic plus the lattice profile.
  const MatrixXr bare_mu =
      MatrixXr::Constant(1, 1, -kHbar * kHbar / (2.0 * params.mass));
  MatrixXr h1 = mixed_second_derivative_matrix(grid, bare_mu);
  for (int i = 0; i < n; ++i) {
    const Real r = grid.coordinate(0, i) + 0.5 * grid.extent(0);  // [0, periods)
    h1(i, i) += params.v0(r - std::floor(r));
  }
  Eigen::SelfAdjointEigenSolver<MatrixXr> single(h1);
  if (single.info() != Eigen::Success) {
    throw std::runtime_error("build_two_fermion_cell: single-particle solve failed");
  }

  // Central-difference momentum, Hermitian by construction.
  MatrixXc p1 = MatrixXc::Zero(n, n);
  const Real inv_2h = 1.0 / (2.0 * grid.spacing(0));
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) p1(i, i + 1) = Complex(0, -kHbar * inv_2h);
    if (i - 1 >= 0) p1(i, i - 1) = Complex(0, kHbar * inv_2h);
  }

  // Antisymmetric-pair embedding: columns are (|i j> - |j i>)/sqrt(2), i < j.
  const int dim_pair = n * (n - 1) / 2;
  MatrixXc embedding = MatrixXc::Zero(static_cast<Eigen::Index>(n) * n, dim_pair);
  {
    int col = 0;
    const Real inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++col) {
        embedding(static_cast<Eigen::Index>(i) * n + j, col) = inv_sqrt2;
        embedding(static_cast<Eigen::Index>(j) * n + i, col) = -inv_sqrt2;
      }
    }
  }

  const MatrixXc h1c = h1.cast<Complex>();
  const MatrixXc identity = MatrixXc::Identity(n, n);
  const auto kron = [n](const MatrixXc& a, const MatrixXc& b) {
    MatrixXc out(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n,
                  n) = a(i, j) * b;
      }
    }
    return out;
  };

  const MatrixXc h_pair = kron(h1c, identity) + kron(identity, h1c);
  MatrixXc v2_pair = MatrixXc::Zero(static_cast<Eigen::Index>(n) * n,
                                    static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Real eps0 = params.epsilon_list.empty() ? 0.25 : params.epsilon_list.front();
      const Real xi = eps0 * (grid.coordinate(0, i) + 0.5 * grid.extent(0));
      const Real xj = eps0 * (grid.coordinate(0, j) + 0.5 * grid.extent(0));
      v2_pair(static_cast<Eigen::Index>(i) * n + j, static_cast<Eigen::Index>(i) * n + j) =
          params.v2(xi) + params.v2(xj);
    }
  }

  TwoFermionCell out;
  out.orbital_energies = single.eigenvalues();
  out.orbitals = single.eigenvectors();
  out.embedding = embedding;

  MatrixXc h_a = embedding.adjoint() * h_pair * embedding;
  MatrixXc v2_a = embedding.adjoint() * v2_pair * embedding;
  MatrixXc p1_a = embedding.adjoint() * kron(p1, identity) * embedding;
  MatrixXc p2_a = embedding.adjoint() * kron(identity, p1) * embedding;
  h_a = 0.5 * (h_a + h_a.adjoint()).eval();
  v2_a = 0.5 * (v2_a + v2_a.adjoint()).eval();
  p1_a = 0.5 * (p1_a + p1_a.adjoint()).eval();
  p2_a = 0.5 * (p2_a + p2_a.adjoint()).eval();

  const Real eps0 = params.epsilon_list.empty() ? 0.25 : params.epsilon_list.front();
  out.system = std::make_shared<ModelSystem>(
      2, h_a, v2_a,
      std::vector<MomentumOp>{{0, 0, p1_a}, {1, 0, p2_a}}, params.mass, eps0);

  // Slater state from the two lowest orbitals, expressed in the pair basis.
  VectorXc product = VectorXc::Zero(static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      product(static_cast<Eigen::Index>(i) * n + j) =
          single.eigenvectors()(i, 0) * single.eigenvectors()(j, 1);
    }
  }
  out.slater_ground = embedding.adjoint() * product;
  out.slater_ground /= out.slater_ground.norm();
  return out;
}

}  // namespace cgwe
