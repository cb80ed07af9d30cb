#pragma once

#include "glra/linalg.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace glra::csv {

/// Parses a headerless CSV matrix: one row per line, comma-separated decimal floats.
/// Blank lines are ignored; ragged rows, empty fields and non-finite values are errors.
/// `source` is used in error messages.
Matrix parse(std::string_view text, std::string_view source = "<memory>");

/// Formats every entry with 17 significant digits so that parse(format(A)) == A bitwise.
std::string format(const Matrix& a);

Matrix read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Matrix& a);

}  // namespace glra::csv
