#include "cgwe/cgmf.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <iostream>
#include <sstream>

namespace cgwe {

namespace {

Real get_param(const std::map<std::string, Real>& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument("pair kernel: missing parameter '" + key + "'");
  }
  return it->second;
}

Real sq_distance(const std::array<Real, 3>& x, const std::array<Real, 3>& y) {
  Real d2 = 0.0;
  for (int a = 0; a < 3; ++a) d2 += (x[a] - y[a]) * (x[a] - y[a]);
  return d2;
}

}  // namespace

PairKernel make_pair_kernel(const std::string& name,
                            const std::map<std::string, Real>& params) {
  if (name == "zero") {
    return PairKernel{};
  }
  if (name == "constant") {
    const Real c = get_param(params, "c");
    return [c](const std::array<Real, 3>&, const std::array<Real, 3>&) { return c; };
  }
  if (name == "gaussian") {
    const Real amplitude = get_param(params, "amplitude");
    const Real range = get_param(params, "range");
    if (!(range > 0.0)) throw std::invalid_argument("gaussian kernel: range must be > 0");
    return [amplitude, range](const std::array<Real, 3>& x, const std::array<Real, 3>& y) {
      return amplitude * std::exp(-sq_distance(x, y) / (range * range));
    };
  }
  if (name == "harmonic") {
    const Real k = get_param(params, "k");
    return [k](const std::array<Real, 3>& x, const std::array<Real, 3>& y) {
      return 0.5 * k * sq_distance(x, y);
    };
  }
  if (name == "cosine") {
    const Real amplitude = get_param(params, "amplitude");
    const Real length = get_param(params, "length");
    if (!(length > 0.0)) throw std::invalid_argument("cosine kernel: length must be > 0");
    return [amplitude, length](const std::array<Real, 3>& x, const std::array<Real, 3>& y) {
      Real c = 1.0;
      for (int a = 0; a < 3; ++a) c *= std::cos(2.0 * M_PI * (x[a] - y[a]) / length);
      return amplitude * c;
    };
  }
  throw std::invalid_argument("unknown pair kernel '" + name + "'");
}

MatrixXr MeanFieldProblem::chi_tilde() const {
  const int d = static_cast<int>(mu_tilde.rows());
  return mu_tilde + (kHbar * kHbar / (2.0 * mass)) * MatrixXr::Identity(d, d);
}

void MeanFieldProblem::validate(const Grid& grid) const {
  if (n_particles < 1) throw std::invalid_argument("MeanFieldProblem: n_particles must be >= 1");
  if (!(mass > 0.0)) throw std::invalid_argument("MeanFieldProblem: mass must be > 0");
  if (mu_tilde.rows() != grid.dimension() || mu_tilde.cols() != grid.dimension()) {
    throw std::invalid_argument("MeanFieldProblem: mu_tilde dimension does not match grid");
  }
  if ((mu_tilde - mu_tilde.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(mu_tilde.cwiseAbs().maxCoeff(), Real(1))) {
    throw std::invalid_argument("MeanFieldProblem: mu_tilde must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXr> es(mu_tilde);
  if (es.eigenvalues().maxCoeff() >= 0.0) {
    throw std::invalid_argument(
        "MeanFieldProblem: mu_tilde must be negative definite (the kinetic form is "
        "otherwise unbounded below)");
  }
  if (external_field && external_field->size() != grid.size()) {
    throw std::invalid_argument("MeanFieldProblem: external_field size does not match grid");
  }
}

namespace {

// Pair kernel sampled on the grid, weighted by the cell volume so that
// Q = (N-1) * V * rho is the quadrature of the mean-field integral. The
// dense table is skipped above a size cap to keep memory bounded.
class HartreeOperator {
 public:
  HartreeOperator(const MeanFieldProblem& problem, const Grid& grid)
      : problem_(&problem), grid_(&grid) {
    if (!problem.has_pair_terms()) return;
    check_symmetry();
    if (grid.size() <= kDenseCap) {
      table_.resize(grid.size(), grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const auto xi = grid.position(i);
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
          table_(i, j) = problem.pair_potential(xi, grid.position(j)) * grid.cell_volume();
        }
      }
    }
  }

  bool active() const { return problem_->has_pair_terms(); }

  /// (N-1) Int v(R, R') rho(R') dR'
  VectorXr field(const VectorXr& density) const {
    if (!active()) return VectorXr::Zero(grid_->size());
    const Real scale = static_cast<Real>(problem_->n_particles - 1);
    if (table_.size() > 0) return scale * (table_ * density);
    VectorXr out(grid_->size());
    for (Eigen::Index i = 0; i < grid_->size(); ++i) {
      const auto xi = grid_->position(i);
      Real acc = 0.0;
      for (Eigen::Index j = 0; j < grid_->size(); ++j) {
        acc += problem_->pair_potential(xi, grid_->position(j)) * density(j);
      }
      out(i) = scale * acc * grid_->cell_volume();
    }
    return out;
  }

  /// Int Int rho v rho'
  Real pair_energy(const VectorXr& density) const {
    if (!active()) return 0.0;
    if (table_.size() > 0) {
      return density.dot(table_ * density) * grid_->cell_volume();
    }
    const VectorXr f = field(density) / static_cast<Real>(problem_->n_particles - 1);
    return density.dot(f) * grid_->cell_volume();
  }

  static constexpr Eigen::Index kDenseCap = 8192;

 private:
  void check_symmetry() const {
    // Spot-check v(x,y) = v(y,x) on a few coordinate pairs.
    const Eigen::Index n = grid_->size();
    for (Eigen::Index k = 0; k < 5; ++k) {
      const Eigen::Index i = (k * 2654435761u) % n;
      const Eigen::Index j = (k * 40503u + n / 3) % n;
      const auto xi = grid_->position(i);
      const auto xj = grid_->position(j);
      const Real vij = problem_->pair_potential(xi, xj);
      const Real vji = problem_->pair_potential(xj, xi);
      if (std::abs(vij - vji) > 1e-10 * std::max({std::abs(vij), std::abs(vji), Real(1)})) {
        throw std::invalid_argument("MeanFieldProblem: pair potential is not symmetric");
      }
    }
  }

  const MeanFieldProblem* problem_;
  const Grid* grid_;
  MatrixXr table_;
};

VectorXr density_of(const VectorXc& values) { return values.cwiseAbs2(); }

// Spectral-radius bound for the kinetic stencil.
Real kinetic_bound(const Grid& grid, const MatrixXr& mu) {
  Real bound = 0.0;
  const int d = grid.dimension();
  for (int a = 0; a < d; ++a) {
    bound += 4.0 * std::abs(mu(a, a)) / (grid.spacing(a) * grid.spacing(a));
    for (int b = a + 1; b < d; ++b) {
      bound += std::abs(mu(a, b) + mu(b, a)) / (grid.spacing(a) * grid.spacing(b));
    }
  }
  return bound;
}

struct SingleParticleTerms {
  Real kinetic = 0.0;   // sum mu <A|d2 A>
  Real external = 0.0;  // <A|V_ext|A>
  Real pair = 0.0;      // Int Int |A|^2 v |A|^2
};

SingleParticleTerms single_particle_terms(const MeanFieldProblem& problem,
                                          const Grid& grid, const VectorXc& a,
                                          const HartreeOperator& hartree) {
  SingleParticleTerms terms;
  const VectorXc ka = apply_mixed_second_derivative(grid, problem.mu_tilde, a);
  terms.kinetic = grid_inner(grid, a, ka).real();
  if (problem.external_field) {
    terms.external = (problem.external_field->array() * density_of(a).array()).sum() *
                     grid.cell_volume();
  }
  terms.pair = hartree.pair_energy(density_of(a));
  return terms;
}

EnergyBookkeeping bookkeeping_from_terms(const MeanFieldProblem& problem,
                                         const Grid& grid, const VectorXc& a,
                                         const SingleParticleTerms& terms) {
  const Real n = static_cast<Real>(problem.n_particles);
  EnergyBookkeeping out;
  out.kinetic_single = terms.kinetic;
  out.external_single = terms.external;
  out.pair_single = terms.pair;
  const Real one_body = terms.kinetic + terms.external;
  out.e_tilde = n * one_body + 0.5 * n * (n - 1.0) * terms.pair;
  out.e_tilde_prime_rayleigh = one_body + (n - 1.0) * terms.pair;

  // Cross-kinetic part of the double-count correction: the mixed-derivative
  // operator applied to the right-hand pair of factors integrates to
  // sum chi (Int A dA) (Int A dA'), identically zero for real bound-state A.
  const MatrixXr chi = problem.chi_tilde();
  VectorXc grads[3];
  for (int axis = 0; axis < grid.dimension(); ++axis) {
    grads[axis] = apply_first_derivative(grid, axis, a);
  }
  Real cross = 0.0;
  for (int alpha = 0; alpha < grid.dimension(); ++alpha) {
    for (int beta = 0; beta < grid.dimension(); ++beta) {
      if (chi(alpha, beta) == 0.0) continue;
      const Complex g1 = grid_inner(grid, a, grads[alpha]);
      const Complex g2 = grid_inner(grid, a, grads[beta]);
      cross += chi(alpha, beta) * (g1 * g2).real();
    }
  }
  out.q_hat_kinetic_part = cross;
  out.q_hat_pair_term = 0.5 * terms.pair + cross;
  // Double-count removal: every one-body term (kinetic plus any external
  // field) appears once per particle, the pair term via the kernel-plus-cross
  // operator on the right-hand factor pair.
  out.e_tilde_prime_recovered = out.e_tilde -
                                (n - 1.0) * (terms.kinetic + terms.external) -
                                (n - 1.0) * (n - 2.0) * out.q_hat_pair_term;
  return out;
}

GridFunction default_initial_guess(const Grid& grid) {
  VectorXc values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto pos = grid.position(i);
    Real arg = 0.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const Real width = grid.extent(a) / 8.0;
      arg += pos[a] * pos[a] / (2.0 * width * width);
    }
    values(i) = std::exp(-arg);
  }
  GridFunction f(grid, std::move(values));
  f.normalize();
  return f;
}

}  // namespace

GridFunction hartree_potential(const MeanFieldProblem& problem, const GridFunction& a) {
  problem.validate(a.grid());
  VectorXc values = a.values();
  if (std::abs(a.norm() - 1.0) > 1e-8) {
    std::cerr << "hartree_potential: input not normalized (norm " << a.norm()
              << "), normalizing\n";
    values /= a.norm();
  }
  const HartreeOperator hartree(problem, a.grid());
  const VectorXr q = hartree.field(density_of(values));
  return GridFunction(a.grid(), q.cast<Complex>());
}

VectorXc apply_hamiltonian_with_field(const Grid& grid, const MatrixXr& mu,
                                      const VectorXr& q_field, const VectorXc& f) {
  VectorXc out = apply_mixed_second_derivative(grid, mu, f);
  out.array() += q_field.array().cast<Complex>() * f.array();
  return out;
}

GridFunction apply_cgmf_hamiltonian(const MeanFieldProblem& problem,
                                    const GridFunction& a_background,
                                    const GridFunction& f) {
  problem.validate(f.grid());
  if (!(a_background.grid() == f.grid())) {
    throw std::invalid_argument("apply_cgmf_hamiltonian: grids differ");
  }
  const GridFunction q = hartree_potential(problem, a_background);
  VectorXr field = q.values().real();
  if (problem.external_field) field += *problem.external_field;
  return GridFunction(f.grid(), apply_hamiltonian_with_field(f.grid(), problem.mu_tilde,
                                                             field, f.values()));
}

CondensateSolution solve_condensate(const MeanFieldProblem& problem, const Grid& grid,
                                    std::optional<GridFunction> init,
                                    const ScfOptions& opts) {
  problem.validate(grid);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_condensate: tol must be > 0");

  GridFunction a = init ? std::move(*init) : default_initial_guess(grid);
  if (!(a.grid() == grid)) {
    throw std::invalid_argument("solve_condensate: initial guess grid mismatch");
  }
  a.normalize();
  // The condensate factor is real; drop any stray imaginary part up front.
  {
    VectorXc re = a.values().real().cast<Complex>();
    a.set_values(std::move(re));
    a.normalize();
  }

  const HartreeOperator hartree(problem, grid);
  const Real kin_bound = kinetic_bound(grid, problem.mu_tilde);

  const VectorXr ext = problem.external_field ? *problem.external_field
                                              : VectorXr::Zero(grid.size());
  VectorXr q_hartree = hartree.field(density_of(a.values()));
  Real mixing = opts.mixing;

  CondensateSolution sol{GridFunction(grid), 0.0, 0.0, 0, 0.0, false, {}, {}};
  SingleParticleTerms terms = single_particle_terms(problem, grid, a.values(), hartree);
  Real energy_prev =
      bookkeeping_from_terms(problem, grid, a.values(), terms).e_tilde;

  VectorXc a_prev = a.values();
  int backtracks = 0;

  for (int outer = 1; outer <= opts.max_iter; ++outer) {
    // Imaginary-time relaxation at frozen field, renormalizing every step.
    const VectorXr q_frozen = q_hartree + ext;
    const Real spread = kin_bound + q_frozen.maxCoeff() - q_frozen.minCoeff();
    const Real dtau = 1.0 / std::max(spread, Real(1e-12));
    VectorXc cur = a.values();
    for (int s = 0; s < opts.inner_steps; ++s) {
      VectorXc h_cur = apply_hamiltonian_with_field(grid, problem.mu_tilde, q_frozen, cur);
      const Real lambda = grid_inner(grid, cur, h_cur).real();
      VectorXc resid = h_cur - lambda * cur;
      const Real rnorm = grid_norm(grid, resid);
      if (rnorm <= 0.05 * opts.residual_tol) break;
      cur -= dtau * resid;
      cur /= grid_norm(grid, cur);
    }

    // Energy with the self-consistent field of the candidate iterate.
    SingleParticleTerms cand_terms = single_particle_terms(problem, grid, cur, hartree);
    const EnergyBookkeeping cand_book =
        bookkeeping_from_terms(problem, grid, cur, cand_terms);

    if (cand_book.e_tilde > energy_prev + 1e-12 * std::max(std::abs(energy_prev), Real(1))) {
      // Reject the step: soften the field update and retry from the previous A.
      ++backtracks;
      mixing = std::max(0.05, 0.5 * mixing);
      if (backtracks > 40) {
        sol.iterations = outer;
        break;
      }
      q_hartree = (1.0 - mixing) * q_hartree + mixing * hartree.field(density_of(a_prev));
      continue;
    }

    a.set_values(cur);
    const Real delta = grid_norm(grid, a.values() - a_prev);
    a_prev = a.values();
    energy_prev = cand_book.e_tilde;
    terms = cand_terms;

    // Self-consistent residual (field rebuilt from the current iterate).
    const VectorXr q_sc = hartree.field(density_of(a.values()));
    const VectorXc h_a = apply_hamiltonian_with_field(grid, problem.mu_tilde,
                                                      (q_sc + ext).eval(), a.values());
    const Real e_prime = grid_inner(grid, a.values(), h_a).real();
    const Real residual = grid_norm(grid, (h_a - e_prime * a.values()).eval());

    sol.residual_history.push_back(residual);
    sol.energy_history.push_back(cand_book.e_tilde);
    sol.iterations = outer;
    sol.residual = residual;
    sol.e_tilde = cand_book.e_tilde;
    sol.e_tilde_prime = e_prime;

    if (delta <= opts.tol && residual <= opts.residual_tol) {
      sol.converged = true;
      break;
    }
    q_hartree = (1.0 - mixing) * q_hartree + mixing * q_sc;
  }

  sol.a = std::move(a);
  return sol;
}

EnergyBookkeeping energy_bookkeeping(const MeanFieldProblem& problem,
                                     const GridFunction& a) {
  problem.validate(a.grid());
  VectorXc values = a.values();
  if (std::abs(a.norm() - 1.0) > 1e-8) values /= a.norm();
  const HartreeOperator hartree(problem, a.grid());
  const SingleParticleTerms terms =
      single_particle_terms(problem, a.grid(), values, hartree);
  return bookkeeping_from_terms(problem, a.grid(), values, terms);
}

std::vector<ExcitationMode> solve_excitation(const MeanFieldProblem& problem,
                                             const CondensateSolution& condensate,
                                             int count) {
  const Grid& grid = condensate.a.grid();
  problem.validate(grid);
  const Eigen::Index n = grid.size();
  if (count < 1 || count > n - 1) {
    throw std::invalid_argument("solve_excitation: count must lie in [1, grid size - 1]");
  }
  if (n > 4096) {
    throw std::runtime_error("solve_excitation: grid too large for the dense solver");
  }

  const VectorXr a = condensate.a.values().real();
  const Real w = grid.cell_volume();

  const HartreeOperator hartree(problem, grid);
  const VectorXr q = hartree.field(a.cwiseAbs2());

  MatrixXr h = mixed_second_derivative_matrix(grid, problem.mu_tilde);
  h.diagonal() += q;
  if (problem.external_field) h.diagonal() += *problem.external_field;

  // Project onto the complement of A and push the A direction above the
  // spectrum so the low end is purely excitations.
  const MatrixXr projector = MatrixXr::Identity(n, n) - w * (a * a.transpose());
  MatrixXr m = projector * h * projector;
  const Real shift = h.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  m += shift * w * (a * a.transpose());
  m = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<MatrixXr> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("solve_excitation: eigensolver failed");
  }

  std::vector<ExcitationMode> modes;
  modes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    VectorXr b = solver.eigenvectors().col(k);
    // Remove any roundoff component along A, then renormalize on the grid.
    b -= (w * a.dot(b)) * a;
    b /= std::sqrt(w) * b.norm();
    modes.push_back({GridFunction(grid, b.cast<Complex>()), solver.eigenvalues()(k)});
  }
  return modes;
}

Trajectory cgwe_propagate(const MeanFieldProblem& problem, const GridFunction& w0,
                          Real t2_span, Real dt, int store_every) {
  const Grid& grid = w0.grid();
  problem.validate(grid);
  if (!(t2_span > 0.0)) throw std::invalid_argument("cgwe_propagate: t2_span must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("cgwe_propagate: dt must be positive and finite");
  }

  const Real lambda_max = kinetic_bound(grid, problem.mu_tilde);
  const Real dt_limit = 0.1 * kHbar / lambda_max;
  if (dt > dt_limit) {
    std::ostringstream msg;
    msg << "cgwe_propagate: dt " << dt << " does not resolve the kinetic scale; use dt <= "
        << dt_limit;
    throw std::invalid_argument(msg.str());
  }

  VectorXc psi = w0.values();
  if (std::abs(w0.norm() - 1.0) > 1e-8) {
    std::cerr << "cgwe_propagate: initial state not normalized (norm " << w0.norm()
              << "), normalizing\n";
    psi /= w0.norm();
  }

  const long n_steps = static_cast<long>(std::ceil(t2_span / dt - 1e-12));
  const Real dt_step = t2_span / static_cast<Real>(n_steps);
  if (store_every <= 0) {
    store_every = static_cast<int>(std::max(1l, n_steps / 200));
  }

  const HartreeOperator hartree(problem, grid);
  const Eigen::Index n = grid.size();

  // Crank-Nicolson in Cayley form: (I + i dt H / 2) psi' = (I - i dt H / 2) psi,
  // i.e. rhs = 2 psi - A_plus psi with a single assembled matrix.
  std::vector<Eigen::Triplet<Complex>> kinetic_triplets;
  const Complex step_factor = Complex(0, 1) * dt_step / (2.0 * kHbar);
  visit_second_derivative_stencil(
      grid, problem.mu_tilde, [&](Eigen::Index i, Eigen::Index j, Real v) {
        kinetic_triplets.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                      step_factor * v);
      });
  for (Eigen::Index i = 0; i < n; ++i) {
    kinetic_triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(1, 0));
  }

  Eigen::SparseMatrix<Complex> a_plus(n, n);
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  const auto assemble = [&](const VectorXr& q_field) {
    std::vector<Eigen::Triplet<Complex>> triplets = kinetic_triplets;
    for (Eigen::Index i = 0; i < n; ++i) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(i),
                            step_factor * q_field(i));
    }
    a_plus.setFromTriplets(triplets.begin(), triplets.end());
  };
  const auto factorize = [&](bool first) {
    if (first) {
      lu.analyzePattern(a_plus);
    }
    lu.factorize(a_plus);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("cgwe_propagate: sparse factorization failed");
    }
  };

  const bool self_consistent = hartree.active();
  const VectorXr ext =
      problem.external_field ? *problem.external_field : VectorXr::Zero(n);
  VectorXr q_field = self_consistent ? (hartree.field(density_of(psi)) + ext).eval() : ext;
  assemble(q_field);
  factorize(true);

  Trajectory traj;
  const auto record = [&](Real t, const VectorXc& state) {
    traj.times.push_back(t);
    traj.states.emplace_back(grid, state);
    traj.norms.push_back(grid_norm(grid, state));
    const VectorXc kin = apply_mixed_second_derivative(grid, problem.mu_tilde, state);
    Real energy = grid_inner(grid, state, kin).real();
    energy += (ext.array() * density_of(state).array()).sum() * grid.cell_volume();
    if (self_consistent) {
      energy += 0.5 * static_cast<Real>(problem.n_particles - 1) *
                hartree.pair_energy(density_of(state));
    }
    traj.energies.push_back(energy);
  };
  record(0.0, psi);

  const auto cn_step = [&](const VectorXc& state) {
    const VectorXc rhs = 2.0 * state - a_plus * state;
    VectorXc next = lu.solve(rhs);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("cgwe_propagate: sparse solve failed");
    }
    return next;
  };

  for (long step = 1; step <= n_steps; ++step) {
    if (self_consistent) {
      // Predictor pass fixes the field at the step midpoint.
      q_field = hartree.field(density_of(psi)) + ext;
      assemble(q_field);
      factorize(false);
      const VectorXc predicted = cn_step(psi);
      const VectorXr q_mid =
          hartree.field(0.5 * (density_of(psi) + density_of(predicted))) + ext;
      assemble(q_mid);
      factorize(false);
    }
    psi = cn_step(psi);
    if (step % store_every == 0 || step == n_steps) {
      record(step * dt_step, psi);
    }
  }
  return traj;
}

}  // namespace cgwe
