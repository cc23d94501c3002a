#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace regenstab {

/// Shortest 17-significant-digit decimal form, '.' separator, locale-free.
std::string format_double(double value);

/// RFC-4180-style field quoting (only applied when needed).
std::string csv_escape(const std::string& field);

/// Joins fields with commas and a CRLF-free newline.
std::string csv_row(const std::vector<std::string>& fields);

/// Writes via a temp file in the same directory followed by an atomic rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Matrix as CSV with the given column headers (one row per matrix row,
/// prefixed by the row header drawn from the same labels).
std::string matrix_csv(const Eigen::MatrixXd& mat, const std::vector<std::string>& labels);

}  // namespace regenstab
