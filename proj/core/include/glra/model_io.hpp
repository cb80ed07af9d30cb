#pragma once

#include "glra/rrr.hpp"

#include <filesystem>
#include <string>

namespace glra::io {

inline constexpr const char* kSchema = "glra/1";

/// JSON document {schema, dims, r, A_hat (row-major), weights?, fit_report}.
std::string model_to_json(const rrr::RrrModel& m, int indent = 2);
rrr::RrrModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const rrr::RrrModel& m);
rrr::RrrModel load_model(const std::filesystem::path& path);

Uniqueness uniqueness_from_string(std::string_view s);

}  // namespace glra::io
