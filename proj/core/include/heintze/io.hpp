#pragma once

#include "heintze/linalg.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace heintze {

/// Parses {"rows": [[a11, a12, ...], ...]}. Errors name the offending
/// text line/column (syntax) or matrix row/column (structure).
MatrixSpec parse_matrix_json(std::string_view text);
MatrixSpec load_matrix(const std::filesystem::path& path);
std::string matrix_to_json(const MatrixSpec& m);

/// Comma-separated reals, e.g. "0,1.5,-2".
Vec parse_vector_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace heintze
