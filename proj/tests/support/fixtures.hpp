#pragma once

#include "autoct/common/text.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace autoct::testing {

inline std::string fixture_path(const std::string& name) {
    return std::string(AUTOCT_FIXTURES_DIR) + "/" + name;
}

inline std::string fixture_text(const std::string& name) { return read_file(fixture_path(name)); }

inline nlohmann::json fixture_json(const std::string& name) {
    return nlohmann::json::parse(fixture_text(name));
}

}  // namespace autoct::testing
