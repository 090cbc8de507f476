#pragma once

#include <iosfwd>

#include <json.hpp>

#include "cgwe/model_system.hpp"
#include "cgwe/spectral.hpp"

namespace cgwe {

using Json = nlohmann::json;

/// Dense complex matrix as {"rows", "cols", "data": [[re, im], ...]} with the
/// entries in row-major order.
Json matrix_to_json(const MatrixXc& m);
MatrixXc matrix_from_json(const Json& j);

Json model_to_json(const ModelSystem& system);
ModelSystem model_from_json(const Json& j);

void save_model(const ModelSystem& system, const std::string& path);
ModelSystem load_model(const std::string& path);

/// CSV (index, eigenvalue) with a header row.
void write_spectrum_csv(const SpectralDecomposition& spec, std::ostream& os);

}  // namespace cgwe
