#pragma once

#include "slopeforge/pwa_io.hpp"

#include <string>

namespace testing_support {

inline slopeforge::PwaMap fixture(const std::string& name) {
  return slopeforge::read_pwa_file(std::string(FIXTURE_DIR) + "/" + name + ".pwa");
}

inline std::string fixture_path(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline slopeforge::Rational q(const char* text) { return slopeforge::parse_rational(text); }

}  // namespace testing_support
