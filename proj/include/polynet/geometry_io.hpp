#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "polynet/space.hpp"

namespace polynet {

/// Contents of a geometry file.
struct GeometrySpec {
  std::string kind;  // polytope | union | difference | complex | cuboid_holes
  Space space;
  std::optional<double> epsilon;
  std::optional<double> inner_shell;  // difference sets only
};

/// Parses a geometry file (UTF-8 JSON). Throws FormatError naming the
/// offending field, or GeometryError when the described set is invalid.
GeometrySpec parse_geometry(const std::string& text);
GeometrySpec load_geometry(const std::filesystem::path& path);

/// Serializes a set back into the same schema.
std::string geometry_to_json(const Space& space);

}  // namespace polynet
