#include "cgwe/model_system.hpp"

#include <random>
#include <sstream>

namespace cgwe {

namespace {

void require_hermitian(const MatrixXc& m, const char* name) {
  const Real res = hermiticity_residual(m);
  if (res > ModelSystem::kHermitianTol) {
    std::ostringstream msg;
    msg << "ModelSystem: " << name << " is not Hermitian (residual " << res << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ModelSystem::ModelSystem(int n_particles, MatrixXc h0, MatrixXc v2,
                         std::vector<MomentumOp> momentum_ops, Real mass,
                         Real epsilon, std::optional<MatrixXc> v1)
    : n_particles_(n_particles),
      h0_(std::move(h0)),
      v2_(std::move(v2)),
      v1_(std::move(v1)),
      momentum_ops_(std::move(momentum_ops)),
      mass_(mass),
      epsilon_(epsilon) {
  if (n_particles_ < 1) {
    throw std::invalid_argument("ModelSystem: n_particles must be >= 1");
  }
  if (h0_.rows() != h0_.cols() || h0_.rows() < 1) {
    throw std::invalid_argument("ModelSystem: h0 must be square and non-empty");
  }
  if (v2_.rows() != h0_.rows() || v2_.cols() != h0_.cols()) {
    throw std::invalid_argument("ModelSystem: v2 dimension mismatch with h0");
  }
  if (!(epsilon_ > 0.0 && epsilon_ < 1.0)) {
    throw std::invalid_argument("ModelSystem: epsilon must lie in (0, 1)");
  }
  if (!(mass_ > 0.0)) {
    throw std::invalid_argument("ModelSystem: mass must be positive");
  }
  require_hermitian(h0_, "h0");
  require_hermitian(v2_, "v2");
  if (v1_) {
    if (v1_->rows() != h0_.rows() || v1_->cols() != h0_.cols()) {
      throw std::invalid_argument("ModelSystem: v1 dimension mismatch with h0");
    }
    require_hermitian(*v1_, "v1");
  }
  for (const auto& op : momentum_ops_) {
    if (op.matrix.rows() != h0_.rows() || op.matrix.cols() != h0_.cols()) {
      throw std::invalid_argument("ModelSystem: momentum operator dimension mismatch");
    }
    if (op.particle < 0 || op.particle >= n_particles_) {
      throw std::invalid_argument("ModelSystem: momentum operator particle index out of range");
    }
    require_hermitian(op.matrix, "momentum operator");
  }
}

const MomentumOp& ModelSystem::momentum_op(int particle, int axis) const {
  for (const auto& op : momentum_ops_) {
    if (op.particle == particle && op.axis == axis) return op;
  }
  std::ostringstream msg;
  msg << "ModelSystem: no momentum operator for particle " << particle
      << ", axis " << axis;
  throw std::invalid_argument(msg.str());
}

MatrixXc random_hermitian(Eigen::Index dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> dist(0.0, 1.0);
  MatrixXc a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      a(i, j) = Complex(dist(rng), dist(rng));
    }
  }
  return 0.5 * (a + a.adjoint());
}

MatrixXc random_momentum_like(Eigen::Index dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> dist(0.0, 1.0);
  MatrixXr a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      a(i, j) = dist(rng);
    }
  }
  const MatrixXr antisym = 0.5 * (a - a.transpose());
  return Complex(0, 1) * antisym.cast<Complex>();
}

MatrixXc random_real_symmetric(Eigen::Index dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> dist(0.0, 1.0);
  MatrixXr a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      a(i, j) = dist(rng);
    }
  }
  const MatrixXr sym = 0.5 * (a + a.transpose());
  return sym.cast<Complex>();
}

ModelSystem random_model(Eigen::Index dim, int n_axes, unsigned seed,
                         Real epsilon, Real mass) {
  std::vector<MomentumOp> ops;
  ops.reserve(static_cast<std::size_t>(n_axes));
  for (int axis = 0; axis < n_axes; ++axis) {
    ops.push_back({0, axis, random_momentum_like(dim, seed + 101u * (axis + 1))});
  }
  return ModelSystem(1, random_real_symmetric(dim, seed),
                     random_real_symmetric(dim, seed + 7u), std::move(ops),
                     mass, epsilon);
}

}  // namespace cgwe
