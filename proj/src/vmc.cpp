#include "cgwe/vmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace cgwe::vmc {

namespace {

struct FactorData {
  Real value = 0.0;
  VectorXr grad;  // dimension-sized
  Real lap = 0.0;
};

FactorData gaussian_data(const VectorXr& x, const VectorXr& center, Real width) {
  const int d = static_cast<int>(x.size());
  const VectorXr dx = x - center;
  const Real s2 = width * width;
  const Real u = dx.squaredNorm() / (4.0 * s2);
  FactorData f;
  f.value = std::exp(-u);
  f.grad = -f.value / (2.0 * s2) * dx;
  f.lap = f.value * (dx.squaredNorm() / (4.0 * s2 * s2) - d / (2.0 * s2));
  return f;
}

// Orbital factor with derivatives; the hermite flavor multiplies the Gaussian
// by (x0 - c0), putting one node along the first axis.
FactorData orbital_data(const Orbital& orb, const VectorXr& x) {
  FactorData g = gaussian_data(x, orb.center, orb.width);
  if (orb.kind == Orbital::Kind::gaussian) return g;

  const Real t = x(0) - orb.center(0);
  FactorData f;
  f.value = t * g.value;
  f.grad = t * g.grad;
  f.grad(0) += g.value;
  f.lap = t * g.lap + 2.0 * g.grad(0);
  return f;
}

// Slot factor: orbital(r) times envelope(eps r); derivatives in r.
FactorData slot_data(const TrialFunction& trial, int slot, const VectorXr& r) {
  const FactorData phi = orbital_data(trial.short_orbitals[slot], r);
  if (trial.long_envelopes.empty()) return phi;

  const int q = std::min(slot, trial.n_star);  // slots past N* share the last envelope
  const Real eps = trial.epsilon;
  const VectorXr big_r = eps * r;
  const FactorData w = orbital_data(trial.long_envelopes[q], big_r);

  FactorData f;
  f.value = phi.value * w.value;
  f.grad = phi.grad * w.value + phi.value * eps * w.grad;
  f.lap = phi.lap * w.value + 2.0 * eps * phi.grad.dot(w.grad) +
          phi.value * eps * eps * w.lap;
  return f;
}

int permutation_parity(const std::vector<int>& perm) {
  int parity = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] > perm[j]) ++parity;
    }
  }
  return parity % 2;
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Real factorial(int n) {
  Real f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

struct TrialDerivatives {
  Real value = 0.0;
  MatrixXr grad;   // N x d, per particle
  Real lap = 0.0;  // sum over particles
};

// Permutation-summed value, per-particle gradient and total Laplacian of the
// antisymmetrized slot product (no Jastrow). Products excluding one factor
// use prefix/suffix arrays so nodes cost no divisions.
TrialDerivatives slater_part(const TrialFunction& trial, const Configuration& config) {
  const int n = trial.n_particles;
  const int d = trial.dimension;

  // factor[k][l]: slot k evaluated at particle l.
  std::vector<std::vector<FactorData>> factor(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    factor[k].resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
      factor[k][l] = slot_data(trial, k, config.row(l).transpose());
    }
  }

  TrialDerivatives out;
  out.grad = MatrixXr::Zero(n, d);
  const Real norm = 1.0 / std::sqrt(factorial(n));

  std::vector<Real> prefix(static_cast<std::size_t>(n) + 1);
  std::vector<Real> suffix(static_cast<std::size_t>(n) + 1);
  for (const auto& perm : all_permutations(n)) {
    const Real sign = permutation_parity(perm) ? -1.0 : 1.0;
    prefix[0] = 1.0;
    for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * factor[k][perm[k]].value;
    suffix[n] = 1.0;
    for (int k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] * factor[k][perm[k]].value;

    out.value += sign * prefix[n];
    for (int k = 0; k < n; ++k) {
      const Real others = prefix[k] * suffix[k + 1];
      const FactorData& f = factor[k][perm[k]];
      out.grad.row(perm[k]) += sign * others * f.grad.transpose();
      out.lap += sign * others * f.lap;
    }
  }
  out.value *= norm;
  out.grad *= norm;
  out.lap *= norm;
  return out;
}

struct JastrowDerivatives {
  Real log_value = 0.0;
  MatrixXr grad_u;  // N x d, gradient of U where J = exp(-U)
  VectorXr lap_u;   // per particle
};

JastrowDerivatives jastrow_part(const JastrowParams& params, const Configuration& config) {
  const int n = static_cast<int>(config.rows());
  const int d = static_cast<int>(config.cols());
  JastrowDerivatives out;
  out.grad_u = MatrixXr::Zero(n, d);
  out.lap_u = VectorXr::Zero(n);
  const Real s2 = params.range * params.range;
  Real u_total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const VectorXr diff = (config.row(i) - config.row(j)).transpose();
      const Real r2 = diff.squaredNorm();
      const Real u = params.strength * std::exp(-r2 / s2);
      u_total += u;
      const VectorXr grad_i = u * (-2.0 / s2) * diff;  // d u / d r_i
      out.grad_u.row(i) += grad_i.transpose();
      out.grad_u.row(j) -= grad_i.transpose();
      const Real lap = u * (4.0 * r2 / (s2 * s2) - 2.0 * d / s2);
      out.lap_u(i) += lap;
      out.lap_u(j) += lap;
    }
  }
  out.log_value = -u_total;
  return out;
}

}  // namespace

Real Orbital::value(const VectorXr& x) const { return orbital_data(*this, x).value; }

void TrialFunction::validate() const {
  if (n_particles < 1 || n_particles > 4) {
    throw std::invalid_argument("TrialFunction: n_particles must lie in [1, 4]");
  }
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("TrialFunction: dimension must lie in [1, 3]");
  }
  if (static_cast<int>(short_orbitals.size()) != n_particles) {
    throw std::invalid_argument("TrialFunction: need one short orbital per particle");
  }
  if (n_star < 0 || n_star > n_particles) {
    throw std::invalid_argument("TrialFunction: n_star must lie in [0, N]");
  }
  if (!long_envelopes.empty() &&
      static_cast<int>(long_envelopes.size()) != n_star + 1) {
    throw std::invalid_argument("TrialFunction: need n_star + 1 envelopes (or none)");
  }
  for (const auto& orb : short_orbitals) {
    if (orb.center.size() != dimension || !(orb.width > 0.0)) {
      throw std::invalid_argument("TrialFunction: malformed orbital");
    }
  }
  for (const auto& env : long_envelopes) {
    if (env.center.size() != dimension || !(env.width > 0.0)) {
      throw std::invalid_argument("TrialFunction: malformed envelope");
    }
  }
}

Real TrialFunction::value(const Configuration& config) const {
  validate();
  if (config.rows() != n_particles || config.cols() != dimension) {
    throw std::invalid_argument("TrialFunction: configuration shape mismatch");
  }
  const auto product = [this](const Configuration& c) {
    Real p = 1.0;
    for (int k = 0; k < n_particles; ++k) {
      p *= slot_data(*this, k, c.row(k).transpose()).value;
    }
    return p;
  };
  Real v = antisymmetrize(product, config);
  if (jastrow) {
    v *= std::exp(jastrow_part(*jastrow, config).log_value);
  }
  return v;
}

Real antisymmetrize(const std::function<Real(const Configuration&)>& f,
                    const Configuration& config) {
  const int n = static_cast<int>(config.rows());
  if (n < 1 || n > 4) {
    throw std::invalid_argument("antisymmetrize: particle count must lie in [1, 4]");
  }
  Real sum = 0.0;
  Configuration permuted(config.rows(), config.cols());
  for (const auto& perm : all_permutations(n)) {
    for (int l = 0; l < n; ++l) permuted.row(l) = config.row(perm[l]);
    const Real sign = permutation_parity(perm) ? -1.0 : 1.0;
    sum += sign * f(permuted);
  }
  return sum / std::sqrt(factorial(n));
}

Real local_energy(const TrialFunction& trial, const VmcHamiltonian& hamiltonian,
                  const Configuration& config) {
  trial.validate();
  const int n = trial.n_particles;
  const TrialDerivatives slater = slater_part(trial, config);

  Real kinetic_sum;  // sum_l (lap_l Psi) / Psi
  if (trial.jastrow) {
    const JastrowDerivatives jas = jastrow_part(*trial.jastrow, config);
    // Psi = e^{-U} Phi:
    // lap Psi / Psi = lap Phi / Phi - 2 grad U . grad Phi / Phi + |grad U|^2 - lap U
    Real acc = slater.lap / slater.value;
    for (int l = 0; l < n; ++l) {
      acc -= 2.0 * jas.grad_u.row(l).dot(slater.grad.row(l)) / slater.value;
      acc += jas.grad_u.row(l).squaredNorm() - jas.lap_u(l);
    }
    kinetic_sum = acc;
  } else {
    kinetic_sum = slater.lap / slater.value;
  }

  Real energy = -kHbar * kHbar / (2.0 * hamiltonian.mass) * kinetic_sum;
  if (hamiltonian.external) {
    for (int l = 0; l < n; ++l) {
      energy += hamiltonian.external(config.row(l).transpose());
    }
  }
  if (hamiltonian.pair) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        energy += hamiltonian.pair((config.row(i) - config.row(j)).norm());
      }
    }
  }
  return energy;
}

namespace {

struct ChainResult {
  Real mean = 0.0;
  Real std_error = 0.0;
  long samples = 0;
  long rejected = 0;
  Real acceptance = 0.0;
};

bool inside_cube(const std::optional<CubeSpec>& cube, const Configuration& config) {
  if (!cube) return true;
  const Real half = 0.5 * cube->edge;
  return ((config - cube->center).cwiseAbs().maxCoeff() <= half);
}

ChainResult run_chain(const TrialFunction& trial, const VmcHamiltonian& hamiltonian,
                      const SamplingSpec& sampling, long n_samples, unsigned seed) {
  const int n = trial.n_particles;
  const int d = trial.dimension;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> normal(0.0, 1.0);
  std::uniform_real_distribution<Real> uniform(0.0, 1.0);

  Configuration config = Configuration::Zero(n, d);
  if (sampling.cube) {
    config = sampling.cube->center;
    // Spread the walkers a little inside the cube.
    for (int l = 0; l < n; ++l) {
      for (int a = 0; a < d; ++a) {
        config(l, a) += 0.2 * sampling.cube->edge * (uniform(rng) - 0.5);
      }
    }
  } else {
    for (int l = 0; l < n; ++l) {
      config(l, 0) += 0.5 * (l - 0.5 * (n - 1));  // break exact-node starts
      for (int a = 0; a < d; ++a) config(l, a) += 0.1 * normal(rng);
    }
  }

  Real psi = trial.value(config);
  for (int attempt = 0; attempt < 64 && psi == 0.0; ++attempt) {
    for (int l = 0; l < n; ++l) {
      for (int a = 0; a < d; ++a) config(l, a) += 0.3 * normal(rng);
    }
    if (!inside_cube(sampling.cube, config) && sampling.cube) config = sampling.cube->center;
    psi = trial.value(config);
  }
  if (psi == 0.0) {
    throw std::runtime_error("mc_energy: could not find a nonzero starting point");
  }

  Real step = 0.5;
  long accepted = 0, proposed = 0;

  const auto sweep = [&](bool adapt) {
    for (int l = 0; l < n; ++l) {
      Configuration candidate = config;
      for (int a = 0; a < d; ++a) candidate(l, a) += step * normal(rng);
      ++proposed;
      if (!inside_cube(sampling.cube, candidate)) continue;  // hard wall
      const Real psi_new = trial.value(candidate);
      const Real ratio = (psi == 0.0) ? 1.0 : (psi_new * psi_new) / (psi * psi);
      if (ratio >= 1.0 || uniform(rng) < ratio) {
        config = candidate;
        psi = psi_new;
        ++accepted;
      }
    }
    if (adapt && proposed >= 50) {
      const Real rate = static_cast<Real>(accepted) / proposed;
      step *= (rate > 0.5) ? 1.1 : 0.9;  // nudge toward 50% acceptance
      accepted = 0;
      proposed = 0;
    }
  };

  for (int w = 0; w < sampling.warmup_sweeps; ++w) sweep(true);
  accepted = 0;
  proposed = 0;

  // Blocked accumulation; block means absorb autocorrelation.
  const int n_blocks = 64;
  const long per_block = std::max(1l, n_samples / n_blocks);
  std::vector<Real> block_means;
  block_means.reserve(n_blocks);

  ChainResult result;
  Real block_sum = 0.0;
  long block_count = 0;
  long collected = 0;
  while (collected < n_samples) {
    for (int s = 0; s < sampling.stride_sweeps; ++s) sweep(false);
    const Real e_loc = local_energy(trial, hamiltonian, config);
    ++collected;
    if (!std::isfinite(e_loc)) {
      ++result.rejected;  // node proximity: screened from the average
      continue;
    }
    block_sum += e_loc;
    ++block_count;
    if (block_count == per_block) {
      block_means.push_back(block_sum / block_count);
      block_sum = 0.0;
      block_count = 0;
    }
  }
  if (block_count > 0) block_means.push_back(block_sum / block_count);

  if (block_means.empty()) {
    throw std::runtime_error("mc_energy: every sample was rejected");
  }
  Real mean = 0.0;
  for (Real b : block_means) mean += b;
  mean /= block_means.size();
  Real var = 0.0;
  for (Real b : block_means) var += (b - mean) * (b - mean);
  if (block_means.size() > 1) {
    var /= (block_means.size() - 1.0) * block_means.size();
  }
  result.mean = mean;
  result.std_error = std::sqrt(var);
  result.samples = collected;
  result.acceptance = proposed > 0 ? static_cast<Real>(accepted) / proposed : 0.0;
  return result;
}

}  // namespace

McEstimate mc_energy(const TrialFunction& trial, const VmcHamiltonian& hamiltonian,
                     const SamplingSpec& sampling, long n_samples, unsigned seed) {
  trial.validate();
  if (n_samples < 1) throw std::invalid_argument("mc_energy: n_samples must be >= 1");
  if (sampling.cube) {
    if (!(sampling.cube->edge > 0.0)) {
      throw std::invalid_argument("mc_energy: cube edge must be > 0");
    }
    if (sampling.cube->center.rows() != trial.n_particles ||
        sampling.cube->center.cols() != trial.dimension) {
      throw std::invalid_argument("mc_energy: cube center shape mismatch");
    }
  }

  const int n_chains = std::max(1, sampling.n_chains);
  const long per_chain = (n_samples + n_chains - 1) / n_chains;
  std::vector<ChainResult> results(static_cast<std::size_t>(n_chains));

  const auto run = [&](int c) {
    const unsigned sub_seed = seed + 0x9e3779b9u * static_cast<unsigned>(c + 1);
    results[static_cast<std::size_t>(c)] =
        run_chain(trial, hamiltonian, sampling, per_chain, sub_seed);
  };
  if (sampling.parallel_chains && n_chains > 1) {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_chains));
    for (int c = 0; c < n_chains; ++c) pool.emplace_back(run, c);
    for (auto& t : pool) t.join();
  } else {
    for (int c = 0; c < n_chains; ++c) run(c);
  }

  // Inverse-variance merge in chain order. Zero-variance chains (exact
  // eigenstate trials) are floored to keep the weights finite.
  McEstimate out;
  out.seed = seed;
  Real weight_sum = 0.0, weighted_value = 0.0, acc_sum = 0.0;
  for (const auto& r : results) {
    const Real floor = 1e-15 * (std::abs(r.mean) + 1.0);
    const Real se = std::max(r.std_error, floor);
    const Real w = 1.0 / (se * se);
    weighted_value += w * r.mean;
    weight_sum += w;
    out.n_samples += r.samples;
    out.rejected_samples += r.rejected;
    acc_sum += r.acceptance;
  }
  out.value = weighted_value / weight_sum;
  out.std_error = 1.0 / std::sqrt(weight_sum);
  out.acceptance_rate = acc_sum / n_chains;
  return out;
}

McEstimate mc_energy(const TrialFamily& family, const VectorXr& lambda,
                     const VmcHamiltonian& hamiltonian, const SamplingSpec& sampling,
                     long n_samples, unsigned seed) {
  return mc_energy(family(lambda), hamiltonian, sampling, n_samples, seed);
}

OptimizeResult optimize_lambda(const TrialFamily& family,
                               const VmcHamiltonian& hamiltonian,
                               const SamplingSpec& sampling, const VectorXr& lambda0,
                               const OptimizeOptions& opts) {
  const int dim = static_cast<int>(lambda0.size());
  if (opts.lower.size() != dim || opts.upper.size() != dim) {
    throw std::invalid_argument("optimize_lambda: bounds must match lambda size");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(opts.lower(i) < opts.upper(i))) {
      throw std::invalid_argument("optimize_lambda: empty parameter box");
    }
  }

  int evals = 0;
  const auto clip = [&](VectorXr x) {
    for (int i = 0; i < dim; ++i) x(i) = std::clamp(x(i), opts.lower(i), opts.upper(i));
    return x;
  };
  // Common random numbers: the seed is fixed across evaluations, so the
  // landscape is deterministic and reusable.
  const auto objective = [&](const VectorXr& lambda) {
    ++evals;
    return mc_energy(family, lambda, hamiltonian, sampling, opts.samples_per_eval,
                     opts.seed);
  };

  struct Vertex {
    VectorXr x;
    Real f;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(dim) + 1);
  {
    const VectorXr x0 = clip(lambda0);
    simplex.push_back({x0, objective(x0).value});
    for (int i = 0; i < dim; ++i) {
      VectorXr x = x0;
      const Real span = opts.upper(i) - opts.lower(i);
      x(i) = std::clamp(x(i) + 0.15 * span, opts.lower(i), opts.upper(i));
      if (x(i) == x0(i)) x(i) = std::clamp(x0(i) - 0.15 * span, opts.lower(i), opts.upper(i));
      simplex.push_back({x, objective(x).value});
    }
  }

  OptimizeResult result;
  const auto sort_simplex = [&]() {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  sort_simplex();
  result.energy_trace.push_back(simplex.front().f);

  while (evals < opts.budget) {
    sort_simplex();
    if (simplex.front().f < result.energy_trace.back()) {
      result.energy_trace.push_back(simplex.front().f);
    }
    // Simplex diameter small enough -> done.
    Real diameter = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      diameter = std::max(diameter, (simplex[i].x - simplex[0].x).norm());
    }
    if (diameter < opts.simplex_tol) break;

    VectorXr centroid = VectorXr::Zero(dim);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i].x;
    centroid /= static_cast<Real>(dim);
    Vertex& worst = simplex.back();

    const VectorXr reflected = clip(centroid + (centroid - worst.x));
    const Real f_reflected = objective(reflected).value;
    if (f_reflected < simplex.front().f) {
      const VectorXr expanded = clip(centroid + 2.0 * (centroid - worst.x));
      const Real f_expanded = evals < opts.budget ? objective(expanded).value
                                                  : f_reflected + 1.0;
      worst = (f_expanded < f_reflected) ? Vertex{expanded, f_expanded}
                                         : Vertex{reflected, f_reflected};
    } else if (f_reflected < simplex[simplex.size() - 2].f) {
      worst = {reflected, f_reflected};
    } else {
      const VectorXr contracted = clip(centroid + 0.5 * (worst.x - centroid));
      const Real f_contracted = evals < opts.budget ? objective(contracted).value
                                                    : f_reflected + 1.0;
      if (f_contracted < worst.f) {
        worst = {contracted, f_contracted};
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 1; i < simplex.size() && evals < opts.budget; ++i) {
          simplex[i].x = clip(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
          simplex[i].f = objective(simplex[i].x).value;
        }
      }
    }
  }

  sort_simplex();
  if (simplex.front().f < result.energy_trace.back()) {
    result.energy_trace.push_back(simplex.front().f);
  }
  result.lambda = simplex.front().x;
  result.estimate = mc_energy(family, result.lambda, hamiltonian, sampling,
                              opts.samples_per_eval, opts.seed);
  result.budget_exhausted = evals >= opts.budget;
  return result;
}

}  // namespace cgwe::vmc
