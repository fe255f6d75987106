#pragma once
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "eslope/types.hpp"

namespace eslope::io {

inline constexpr const char* kDatasetSchema = "eslope.dataset";
inline constexpr int kDatasetSchemaVersion = 1;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Headerless comma-separated matrix, one row per line.
void write_matrix_csv(std::ostream& out, const Matrix& M);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix_csv(std::istream& in, const std::string& name = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path& path);

/// A single column (or a single row) read as a vector.
Vector read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);

/// True when every column has unit l2 norm to 1e-10.
bool columns_unit_norm(const Matrix& X);

/// Writes X.csv, y.csv, truth.csv (when ground truth is present) and manifest.json.
/// `extra` is merged into the manifest (e.g. the generating config).
void save_dataset(const std::filesystem::path& dir, const Dataset& data,
                  const nlohmann::json& extra = nlohmann::json::object());

/// Reads a directory written by save_dataset; validates schema name, version and shapes.
Dataset load_dataset(const std::filesystem::path& dir);

/// Reads a manifest and checks its schema tag.
nlohmann::json load_manifest(const std::filesystem::path& dir);

/// Dataset from plain X/y CSV files; flagged normalized only if the columns are.
Dataset load_xy(const std::filesystem::path& x_path, const std::filesystem::path& y_path);

} // namespace eslope::io
