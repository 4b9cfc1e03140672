#ifndef RRUM_CSV_IO_HPP
#define RRUM_CSV_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "rrum/common.hpp"
#include "rrum/patterns.hpp"

namespace rrum {

enum class MatrixKind { qmatrix, responses, attributes };

struct CsvMatrix {
  BinaryMatrix values;
  /// Column names when the first row was non-numeric; empty otherwise.
  std::vector<std::string> header;
};

/// Loads a 0/1 matrix from comma-separated text. No header is expected, but
/// a non-numeric first row is treated as one. Errors name the offending
/// row and column.
CsvMatrix load_matrix_csv(const std::filesystem::path& path, MatrixKind kind);

/// load_matrix_csv + QMatrix validation, carrying the header as attribute
/// names.
QMatrix load_qmatrix_csv(const std::filesystem::path& path);

void save_matrix_csv(const BinaryMatrix& m, const std::filesystem::path& path,
                     const std::vector<std::string>& header = {});

/// Numeric table for external baselines; blank cells become NaN.
struct NumericCsv {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
};
NumericCsv load_numeric_csv(const std::filesystem::path& path);

}  // namespace rrum

#endif  // RRUM_CSV_IO_HPP
