#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "cgwe/types.hpp"

namespace cgwe {

/// Uniform rectilinear grid in 1-3 dimensions with centered coordinates.
/// Box boundaries mean a hard-wall domain: stored points are interior, the
/// function vanishes on the walls. Periodic grids wrap.
class Grid {
 public:
  enum class Boundary { periodic, box };

  Grid(int dimension, std::array<int, 3> points, std::array<Real, 3> extents,
       Boundary boundary);

  static Grid make_1d(int points, Real extent, Boundary boundary);

  int dimension() const { return dimension_; }
  Boundary boundary() const { return boundary_; }
  int points(int axis) const { return points_[axis]; }
  Real extent(int axis) const { return extents_[axis]; }
  Real spacing(int axis) const { return spacing_[axis]; }
  Eigen::Index size() const { return size_; }
  Real cell_volume() const { return cell_volume_; }

  /// Physical coordinate of grid index i along an axis, centered on 0.
  Real coordinate(int axis, int index) const;

  /// Full coordinate vector of a flat index (unused axes are 0).
  std::array<Real, 3> position(Eigen::Index flat) const;

  /// Decompose a flat index into per-axis indices (x fastest).
  std::array<int, 3> unflatten(Eigen::Index flat) const;
  Eigen::Index flatten(const std::array<int, 3>& idx) const;

  /// Neighbor of `flat` displaced by `step` along `axis`. Wraps on periodic
  /// grids; returns -1 past a box wall (function value zero there).
  Eigen::Index neighbor(Eigen::Index flat, int axis, int step) const;

  bool operator==(const Grid& other) const;

 private:
  int dimension_;
  std::array<int, 3> points_;
  std::array<Real, 3> extents_;
  std::array<Real, 3> spacing_;
  Boundary boundary_;
  Eigen::Index size_;
  Real cell_volume_;
};

/// Complex field on a Grid with cached L2 norm (cell-volume weighted).
class GridFunction {
 public:
  GridFunction(Grid grid, VectorXc values);
  explicit GridFunction(Grid grid);  // zero-initialized

  const Grid& grid() const { return grid_; }
  const VectorXc& values() const { return values_; }
  Real norm() const { return norm_; }

  void set_values(VectorXc values);
  /// In-place access; call refresh_norm() after mutating.
  VectorXc& mutable_values() { return values_; }
  void refresh_norm();

  GridFunction& normalize();

  Complex inner(const GridFunction& other) const;

 private:
  Grid grid_;
  VectorXc values_;
  Real norm_ = 0.0;
};

Complex grid_inner(const Grid& grid, const VectorXc& a, const VectorXc& b);
Real grid_norm(const Grid& grid, const VectorXc& a);

/// Sum_{a,a'} mu(a,a') d^2 f / dR_a dR_a' with second-order central
/// differences (cross terms use the symmetric four-point stencil). The
/// resulting operator is self-adjoint on the grid for symmetric mu.
VectorXc apply_mixed_second_derivative(const Grid& grid, const MatrixXr& mu,
                                       const VectorXc& f);

/// Calls emit(row, col, weight) for every stencil entry of the mixed
/// second-derivative operator; rows/cols in flat grid order. Entries for the
/// same (row, col) may repeat and are meant to be accumulated.
template <typename F>
void visit_second_derivative_stencil(const Grid& grid, const MatrixXr& mu, F&& emit) {
  const int d = grid.dimension();
  if (mu.rows() != d || mu.cols() != d) {
    throw std::invalid_argument("visit_second_derivative_stencil: mu must be d x d");
  }
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      const Real h_a = grid.spacing(a);
      if (mu(a, a) != 0.0) {
        const Real w = mu(a, a) / (h_a * h_a);
        emit(i, i, -2.0 * w);
        for (int s : {-1, +1}) {
          const Eigen::Index j = grid.neighbor(i, a, s);
          if (j >= 0) emit(i, j, w);
        }
      }
      for (int b = a + 1; b < d; ++b) {
        const Real coeff = mu(a, b) + mu(b, a);
        if (coeff == 0.0) continue;
        const Real w = coeff / (4.0 * h_a * grid.spacing(b));
        for (int sa : {-1, +1}) {
          const Eigen::Index ja = grid.neighbor(i, a, sa);
          if (ja < 0) continue;
          for (int sb : {-1, +1}) {
            const Eigen::Index j = grid.neighbor(ja, b, sb);
            if (j >= 0) emit(i, j, w * sa * sb);
          }
        }
      }
    }
  }
}

/// Dense matrix of the operator above; rows/cols in flat grid order.
MatrixXr mixed_second_derivative_matrix(const Grid& grid, const MatrixXr& mu);

/// Central-difference first derivative along one axis.
VectorXc apply_first_derivative(const Grid& grid, int axis, const VectorXc& f);

void save_grid_function(const GridFunction& f, const std::string& path);
GridFunction load_grid_function(const std::string& path);

/// CSV (index, coordinate, re, im) for 1-d functions.
void write_grid_function_csv(const GridFunction& f, std::ostream& os);

}  // namespace cgwe
