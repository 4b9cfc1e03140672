#ifndef RRUM_COMMON_HPP
#define RRUM_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrum {

/// Input failed a structural or range check (CLI maps this to exit code 2).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (non-PD matrix, degenerate posterior, ...).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of 0/1 cells.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (fill > 1) throw validation_error("BinaryMatrix: fill must be 0 or 1");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  std::uint8_t operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::uint8_t& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const std::uint8_t> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<std::uint8_t> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<std::uint8_t>& data() const { return data_; }

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// An examinee's mastery states over K attributes; element k is the
/// indicator for attribute k+1.
using AttributePattern = std::vector<std::uint8_t>;

/// Examinee-by-attribute mastery matrix (I x K).
using AttributeMatrix = BinaryMatrix;

/// Examinee-by-item response matrix (I x J).
using ResponseMatrix = BinaryMatrix;

}  // namespace rrum

#endif  // RRUM_COMMON_HPP
