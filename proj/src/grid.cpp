#include "cgwe/grid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>

namespace cgwe {

Grid::Grid(int dimension, std::array<int, 3> points, std::array<Real, 3> extents,
           Boundary boundary)
    : dimension_(dimension), points_(points), extents_(extents), boundary_(boundary) {
  if (dimension_ < 1 || dimension_ > 3) {
    throw std::invalid_argument("Grid: dimension must be 1, 2, or 3");
  }
  size_ = 1;
  cell_volume_ = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (axis >= dimension_) {
      points_[axis] = 1;
      extents_[axis] = 0.0;
      spacing_[axis] = 1.0;
      continue;
    }
    if (points_[axis] < 8) {
      throw std::invalid_argument("Grid: need at least 8 points per axis");
    }
    if (!(extents_[axis] > 0.0)) {
      throw std::invalid_argument("Grid: extents must be positive");
    }
    spacing_[axis] = (boundary_ == Boundary::periodic)
                         ? extents_[axis] / points_[axis]
                         : extents_[axis] / (points_[axis] + 1);
    size_ *= points_[axis];
    cell_volume_ *= spacing_[axis];
  }
}

Grid Grid::make_1d(int points, Real extent, Boundary boundary) {
  return Grid(1, {points, 1, 1}, {extent, 0.0, 0.0}, boundary);
}

Real Grid::coordinate(int axis, int index) const {
  const Real offset = (boundary_ == Boundary::periodic) ? 0.0 : spacing_[axis];
  return -0.5 * extents_[axis] + offset + index * spacing_[axis];
}

std::array<Real, 3> Grid::position(Eigen::Index flat) const {
  const std::array<int, 3> idx = unflatten(flat);
  std::array<Real, 3> pos{0.0, 0.0, 0.0};
  for (int axis = 0; axis < dimension_; ++axis) pos[axis] = coordinate(axis, idx[axis]);
  return pos;
}

std::array<int, 3> Grid::unflatten(Eigen::Index flat) const {
  std::array<int, 3> idx{0, 0, 0};
  idx[0] = static_cast<int>(flat % points_[0]);
  flat /= points_[0];
  idx[1] = static_cast<int>(flat % points_[1]);
  idx[2] = static_cast<int>(flat / points_[1]);
  return idx;
}

Eigen::Index Grid::flatten(const std::array<int, 3>& idx) const {
  return (static_cast<Eigen::Index>(idx[2]) * points_[1] + idx[1]) * points_[0] + idx[0];
}

Eigen::Index Grid::neighbor(Eigen::Index flat, int axis, int step) const {
  std::array<int, 3> idx = unflatten(flat);
  int shifted = idx[axis] + step;
  if (boundary_ == Boundary::periodic) {
    shifted = ((shifted % points_[axis]) + points_[axis]) % points_[axis];
  } else if (shifted < 0 || shifted >= points_[axis]) {
    return -1;
  }
  idx[axis] = shifted;
  return flatten(idx);
}

bool Grid::operator==(const Grid& other) const {
  return dimension_ == other.dimension_ && points_ == other.points_ &&
         extents_ == other.extents_ && boundary_ == other.boundary_;
}

GridFunction::GridFunction(Grid grid, VectorXc values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("GridFunction: value count does not match grid");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("GridFunction: values must be finite");
  }
  refresh_norm();
}

GridFunction::GridFunction(Grid grid)
    : GridFunction(std::move(grid), VectorXc::Zero(grid.size())) {
  // delegate checks
}

void GridFunction::set_values(VectorXc values) {
  if (values.size() != grid_.size()) {
    throw std::invalid_argument("GridFunction: value count does not match grid");
  }
  values_ = std::move(values);
  refresh_norm();
}

void GridFunction::refresh_norm() { norm_ = grid_norm(grid_, values_); }

GridFunction& GridFunction::normalize() {
  if (norm_ == 0.0) throw std::runtime_error("GridFunction: cannot normalize zero function");
  values_ /= norm_;
  norm_ = 1.0;
  return *this;
}

Complex GridFunction::inner(const GridFunction& other) const {
  if (!(grid_ == other.grid_)) {
    throw std::invalid_argument("GridFunction: grids differ in inner product");
  }
  return grid_inner(grid_, values_, other.values_);
}

Complex grid_inner(const Grid& grid, const VectorXc& a, const VectorXc& b) {
  return a.dot(b) * grid.cell_volume();
}

Real grid_norm(const Grid& grid, const VectorXc& a) {
  return a.norm() * std::sqrt(grid.cell_volume());
}

VectorXc apply_mixed_second_derivative(const Grid& grid, const MatrixXr& mu,
                                       const VectorXc& f) {
  const int d = grid.dimension();
  if (mu.rows() != d || mu.cols() != d) {
    throw std::invalid_argument("apply_mixed_second_derivative: mu must be d x d");
  }
  if (f.size() != grid.size()) {
    throw std::invalid_argument("apply_mixed_second_derivative: size mismatch");
  }

  VectorXc out = VectorXc::Zero(f.size());
  const auto value_at = [&f](Eigen::Index idx) {
    return idx < 0 ? Complex(0, 0) : f(idx);
  };

  for (Eigen::Index i = 0; i < f.size(); ++i) {
    Complex acc(0, 0);
    for (int a = 0; a < d; ++a) {
      const Real h_a = grid.spacing(a);
      if (mu(a, a) != 0.0) {
        const Complex lap = value_at(grid.neighbor(i, a, +1)) - 2.0 * f(i) +
                            value_at(grid.neighbor(i, a, -1));
        acc += mu(a, a) * lap / (h_a * h_a);
      }
      for (int b = a + 1; b < d; ++b) {
        const Real coeff = mu(a, b) + mu(b, a);
        if (coeff == 0.0) continue;
        const Real h_b = grid.spacing(b);
        const auto shifted = [&](int sa, int sb) -> Complex {
          const Eigen::Index j = grid.neighbor(i, a, sa);
          if (j < 0) return Complex(0, 0);
          return value_at(grid.neighbor(j, b, sb));
        };
        const Complex cross =
            shifted(+1, +1) - shifted(+1, -1) - shifted(-1, +1) + shifted(-1, -1);
        acc += coeff * cross / (4.0 * h_a * h_b);
      }
    }
    out(i) = acc;
  }
  return out;
}

MatrixXr mixed_second_derivative_matrix(const Grid& grid, const MatrixXr& mu) {
  MatrixXr out = MatrixXr::Zero(grid.size(), grid.size());
  visit_second_derivative_stencil(
      grid, mu, [&out](Eigen::Index i, Eigen::Index j, Real w) { out(i, j) += w; });
  return out;
}

VectorXc apply_first_derivative(const Grid& grid, int axis, const VectorXc& f) {
  if (axis < 0 || axis >= grid.dimension()) {
    throw std::invalid_argument("apply_first_derivative: axis out of range");
  }
  if (f.size() != grid.size()) {
    throw std::invalid_argument("apply_first_derivative: size mismatch");
  }
  VectorXc out(f.size());
  const Real inv_2h = 1.0 / (2.0 * grid.spacing(axis));
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const Eigen::Index up = grid.neighbor(i, axis, +1);
    const Eigen::Index down = grid.neighbor(i, axis, -1);
    const Complex f_up = up < 0 ? Complex(0, 0) : f(up);
    const Complex f_down = down < 0 ? Complex(0, 0) : f(down);
    out(i) = (f_up - f_down) * inv_2h;
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'C', 'G', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw std::runtime_error("grid function i/o requires a little-endian host");
  }
}

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& is, T& value) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void save_grid_function(const GridFunction& f, const std::string& path) {
  require_little_endian();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_grid_function: cannot open " + path);

  os.write(kMagic, 4);
  write_raw(os, kVersion);
  write_raw(os, static_cast<std::uint32_t>(f.grid().dimension()));
  write_raw(os, static_cast<std::uint32_t>(
                    f.grid().boundary() == Grid::Boundary::periodic ? 0 : 1));
  for (int axis = 0; axis < 3; ++axis) {
    write_raw(os, static_cast<std::uint32_t>(f.grid().points(axis)));
    write_raw(os, static_cast<double>(f.grid().extent(axis)));
  }
  write_raw(os, static_cast<std::uint64_t>(f.values().size()));
  for (Eigen::Index i = 0; i < f.values().size(); ++i) {
    write_raw(os, f.values()(i).real());
    write_raw(os, f.values()(i).imag());
  }
  if (!os) throw std::runtime_error("save_grid_function: write failed for " + path);
}

GridFunction load_grid_function(const std::string& path) {
  require_little_endian();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_grid_function: cannot open " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("load_grid_function: bad magic in " + path);
  }
  std::uint32_t version = 0, dimension = 0, boundary = 0;
  read_raw(is, version);
  if (version != kVersion) throw std::runtime_error("load_grid_function: unsupported version");
  read_raw(is, dimension);
  read_raw(is, boundary);

  std::array<int, 3> points{1, 1, 1};
  std::array<Real, 3> extents{0.0, 0.0, 0.0};
  for (int axis = 0; axis < 3; ++axis) {
    std::uint32_t p = 0;
    double e = 0.0;
    read_raw(is, p);
    read_raw(is, e);
    points[axis] = static_cast<int>(p);
    extents[axis] = e;
  }
  Grid grid(static_cast<int>(dimension), points, extents,
            boundary == 0 ? Grid::Boundary::periodic : Grid::Boundary::box);

  std::uint64_t count = 0;
  read_raw(is, count);
  if (static_cast<Eigen::Index>(count) != grid.size()) {
    throw std::runtime_error("load_grid_function: payload size mismatch");
  }
  VectorXc values(grid.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double re = 0.0, im = 0.0;
    read_raw(is, re);
    read_raw(is, im);
    values(i) = Complex(re, im);
  }
  if (!is) throw std::runtime_error("load_grid_function: truncated payload in " + path);
  return GridFunction(std::move(grid), std::move(values));
}

void write_grid_function_csv(const GridFunction& f, std::ostream& os) {
  if (f.grid().dimension() != 1) {
    throw std::invalid_argument("write_grid_function_csv: CSV output is 1-d only");
  }
  os << "index,coordinate,re,im\n";
  char line[128];
  for (Eigen::Index i = 0; i < f.values().size(); ++i) {
    std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(i), f.grid().coordinate(0, static_cast<int>(i)),
                  f.values()(i).real(), f.values()(i).imag());
    os << line;
  }
}

}  // namespace cgwe
