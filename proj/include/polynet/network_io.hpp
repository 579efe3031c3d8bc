#pragma once

#include <filesystem>
#include <string>

#include "polynet/network.hpp"

namespace polynet {

inline constexpr const char* kNetworkFormatVersion = "v1";

/// {"version":"v1","input_dim":d,"layers":[{"w":[[...]],"b":[...],"act":"relu"}]}
/// Doubles are written in shortest round-trip decimal, so parse(serialize(n))
/// reproduces every weight bit for bit.
std::string serialize(const Network& net);
Network deserialize(const std::string& text);

Network load_network(const std::filesystem::path& path);

}  // namespace polynet
