#include "cgwe/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace cgwe {

Json matrix_to_json(const MatrixXc& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXc matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw std::invalid_argument("matrix_from_json: expected {rows, cols, data}");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const Json& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  }
  MatrixXc m(rows, cols);
  Eigen::Index flat = 0;
  for (const auto& entry : data) {
    if (!entry.is_array() || entry.size() != 2) {
      throw std::invalid_argument("matrix_from_json: entries must be [re, im] pairs");
    }
    m(flat / cols, flat % cols) = Complex(entry[0].get<Real>(), entry[1].get<Real>());
    ++flat;
  }
  return m;
}

Json model_to_json(const ModelSystem& system) {
  Json ops = Json::array();
  for (const auto& op : system.momentum_ops()) {
    ops.push_back(Json{{"particle", op.particle},
                       {"axis", op.axis},
                       {"matrix", matrix_to_json(op.matrix)}});
  }
  Json j{{"n_particles", system.n_particles()},
         {"mass", system.mass()},
         {"epsilon", system.epsilon()},
         {"h0", matrix_to_json(system.h0())},
         {"v2", matrix_to_json(system.v2())},
         {"momentum_ops", std::move(ops)},
         {"units",
          Json{{"hbar", system.units().hbar},
               {"length", system.units().length},
               {"energy", system.units().energy},
               {"momentum", system.units().momentum}}}};
  j["v1"] = system.v1() ? matrix_to_json(*system.v1()) : Json();
  return j;
}

ModelSystem model_from_json(const Json& j) {
  std::vector<MomentumOp> ops;
  for (const auto& op : j.at("momentum_ops")) {
    ops.push_back({op.at("particle").get<int>(), op.at("axis").get<int>(),
                   matrix_from_json(op.at("matrix"))});
  }
  std::optional<MatrixXc> v1;
  if (j.contains("v1") && !j.at("v1").is_null()) {
    v1 = matrix_from_json(j.at("v1"));
  }
  return ModelSystem(j.at("n_particles").get<int>(), matrix_from_json(j.at("h0")),
                     matrix_from_json(j.at("v2")), std::move(ops),
                     j.at("mass").get<Real>(), j.at("epsilon").get<Real>(),
                     std::move(v1));
}

void save_model(const ModelSystem& system, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os << model_to_json(system).dump(2) << "\n";
}

ModelSystem load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  Json j;
  is >> j;
  return model_from_json(j);
}

void write_spectrum_csv(const SpectralDecomposition& spec, std::ostream& os) {
  os << "index,eigenvalue\n";
  char line[64];
  for (Eigen::Index n = 0; n < spec.eigenvalues.size(); ++n) {
    std::snprintf(line, sizeof(line), "%lld,%.17g\n", static_cast<long long>(n),
                  spec.eigenvalues(n));
    os << line;
  }
}

}  // namespace cgwe
