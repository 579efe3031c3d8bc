#include "polynet/network_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace polynet {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError(path + ": expected a number");
  return v.get<double>();
}

Matrix matrix_from_json(const json& v, const std::string& path) {
  if (!v.is_array()) throw FormatError(path + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    if (!v[0].is_array()) throw FormatError(path + "[0]: expected an array");
    cols = static_cast<Eigen::Index>(v[0].size());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw FormatError(row_path + ": ragged row, expected " + std::to_string(cols) + " entries");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = number_at(row[static_cast<std::size_t>(j)], row_path + "[" + std::to_string(j) + "]");
  }
  return m;
}

Vector vector_from_json(const json& v, const std::string& path) {
  if (!v.is_array()) throw FormatError(path + ": expected an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = number_at(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

}  // namespace

std::string serialize(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json entry;
    entry["w"] = matrix_to_json(l.weights);
    entry["b"] = json(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
    entry["act"] = to_string(l.activation);
    layers.push_back(std::move(entry));
  }
  json doc;
  doc["version"] = kNetworkFormatVersion;
  doc["input_dim"] = net.input_dim();
  doc["layers"] = std::move(layers);
  return doc.dump() + "\n";
}

Network deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("network file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("network file must hold a JSON object");
  if (!doc.contains("version")) throw FormatError("version: missing");
  if (!doc["version"].is_string() || doc["version"].get<std::string>() != kNetworkFormatVersion)
    throw FormatError("version: unsupported network format version " + doc["version"].dump() +
                      " (expected \"" + kNetworkFormatVersion + "\")");
  if (!doc.contains("input_dim") || !doc["input_dim"].is_number_integer())
    throw FormatError("input_dim: expected an integer");
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw FormatError("layers: expected an array");

  std::vector<Layer> layers;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    const json& l = doc["layers"][i];
    const std::string path = "layers[" + std::to_string(i) + "]";
    if (!l.is_object()) throw FormatError(path + ": expected an object");
    if (!l.contains("act") || !l["act"].is_string()) throw FormatError(path + ".act: expected a string");
    Layer layer;
    try {
      layer.activation = activation_from_string(l["act"].get<std::string>());
    } catch (const FormatError& e) {
      throw FormatError(path + ".act: " + e.what());
    }
    layer.weights = l.contains("w") ? matrix_from_json(l["w"], path + ".w") : Matrix(0, 0);
    layer.bias = l.contains("b") ? vector_from_json(l["b"], path + ".b") : Vector(0);
    layers.push_back(std::move(layer));
  }
  try {
    return Network(doc["input_dim"].get<int>(), std::move(layers));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("shape error: ") + e.what());
  }
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open network file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace polynet
