#pragma once

// PWA v1 text format:
//
//   pwa 1
//   domain <a> <b>
//   nodes <k>
//   <x> <y_left|-> <y_right|->     (k lines, increasing x)

#include "slopeforge/pwa_map.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace slopeforge {

PwaMap parse_pwa(std::string_view text, MapKind kind = MapKind::self_map);

/// Exact serialization with lowest-terms rationals. Round-trips through parse_pwa.
std::string serialize_pwa(const PwaMap& f);

/// Same layout with decimal literals of `digits` significant digits; values
/// that are integers stay exact.
std::string serialize_pwa_decimal(const PwaMap& f, int digits = 15);

PwaMap read_pwa_file(const std::filesystem::path& path, MapKind kind = MapKind::self_map);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace slopeforge
