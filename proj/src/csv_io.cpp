#include "rrum/csv_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace rrum {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw io_error("empty file: " + path.string());
  return lines;
}

bool is_numeric_row(const std::vector<std::string>& cells) {
  double v;
  for (const auto& c : cells)
    if (!c.empty() && !parse_double(c, v)) return false;
  return true;
}

}  // namespace

CsvMatrix load_matrix_csv(const std::filesystem::path& path, MatrixKind kind) {
  const auto lines = read_lines(path);
  CsvMatrix out;
  std::size_t first = 0;

  auto first_cells = split_row(lines[0]);
  if (!is_numeric_row(first_cells)) {
    out.header = first_cells;
    first = 1;
    if (first == lines.size())
      throw io_error(path.string() + ": header row but no data");
  }

  const std::size_t cols = split_row(lines[first]).size();
  const std::size_t rows = lines.size() - first;
  out.values = BinaryMatrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto cells = split_row(lines[first + r]);
    if (cells.size() != cols)
      throw io_error(path.string() + ": row " + std::to_string(first + r + 1) +
                     " has " + std::to_string(cells.size()) +
                     " cells, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      double v;
      if (!parse_double(cells[c], v) || (v != 0.0 && v != 1.0))
        throw io_error(path.string() + ": row " + std::to_string(first + r + 1) +
                       ", column " + std::to_string(c + 1) +
                       ": expected 0 or 1, got '" + cells[c] + "'");
      out.values(r, c) = static_cast<std::uint8_t>(v);
    }
  }
  (void)kind;  // kind-specific structure is checked by the matching type
  return out;
}

QMatrix load_qmatrix_csv(const std::filesystem::path& path) {
  auto csv = load_matrix_csv(path, MatrixKind::qmatrix);
  return QMatrix(std::move(csv.values), std::move(csv.header));
}

void save_matrix_csv(const BinaryMatrix& m, const std::filesystem::path& path,
                     const std::vector<std::string>& header) {
  std::ofstream outf(path);
  if (!outf) throw io_error("cannot write " + path.string());
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      outf << (c ? "," : "") << header[c];
    outf << '\n';
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c)
      outf << (c ? "," : "") << static_cast<int>(m(r, c));
    outf << '\n';
  }
  if (!outf) throw io_error("write failed: " + path.string());
}

NumericCsv load_numeric_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  NumericCsv out;
  std::size_t first = 0;
  auto first_cells = split_row(lines[0]);
  if (!is_numeric_row(first_cells)) {
    out.header = first_cells;
    first = 1;
  }
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = split_row(lines[r]);
    std::vector<double> vals;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        vals.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v;
      if (!parse_double(cells[c], v))
        throw io_error(path.string() + ": row " + std::to_string(r + 1) +
                       ", column " + std::to_string(c + 1) +
                       ": expected a number, got '" + cells[c] + "'");
      vals.push_back(v);
    }
    out.rows.push_back(std::move(vals));
  }
  if (out.rows.empty()) throw io_error(path.string() + ": no data rows");
  return out;
}

}  // namespace rrum
