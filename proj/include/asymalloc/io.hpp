#pragma once

#include "asymalloc/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace asymalloc::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

Json matrix_to_json(const Matrix& M);  // row-major nested arrays
Matrix matrix_from_json(const Json& j, std::string_view field);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, std::string_view field);

/// Model document: {"v":1, "m", "n", "a", "A", "B", "Sigma", "Lambda"}.
Json model_to_json(const FactorModel& model);
/// Parses and validates. Throws DataError on schema problems, ValidationError on invariants.
FactorModel model_from_json(const Json& j);

FactorModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const FactorModel& model);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace asymalloc::io
