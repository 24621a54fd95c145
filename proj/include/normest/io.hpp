#pragma once

// CSV ingestion and stable JSON serialization.

#include "normest/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace normest::io {

/// Parses CSV text with one observation per row. A first row that contains
/// any non-numeric field is treated as a header and skipped. Blank lines are
/// ignored. `source` is used in error messages.
RowMatrix parse_csv(std::string_view text, std::string_view source = "<input>");

RowMatrix read_csv(const std::filesystem::path& path);

/// Reads a vector stored either as a single row or as a single column.
Vector read_csv_vector(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Serializes `value` with keys sorted and every floating-point number
/// printed with 17 significant digits. Non-finite numbers are written as
/// the strings "inf", "-inf", "nan".
std::string dump_stable(const nlohmann::json& value, int indent = 2);

/// Number formatting used by dump_stable and the CSV writers.
std::string format_double(double x);

nlohmann::json to_json(const Eigen::Ref<const Vector>& v);
Vector vector_from_json(const nlohmann::json& j, std::string_view field);

}  // namespace normest::io
