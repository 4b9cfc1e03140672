#ifndef RRUM_PATTERNS_HPP
#define RRUM_PATTERNS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrum/common.hpp"

namespace rrum {

/// Pattern enumeration materializes all 2^K classes; beyond this the
/// sampler would exhaust memory, so constructors fail fast instead.
inline constexpr int kMaxAttributes = 20;

/// Decimal index of a binary attribute pattern. Attribute 1 is the most
/// significant digit: (1,0,1) -> 5.
std::uint32_t pattern_to_index(std::span<const std::uint8_t> pattern);

/// Inverse of pattern_to_index for a K-attribute pattern.
AttributePattern index_to_pattern(std::uint32_t index, int attr_count);

/// All 2^K patterns ordered by index.
std::vector<AttributePattern> enumerate_patterns(int attr_count);

struct CompletenessReport {
  bool complete = false;
  /// 1-based attributes with no item devoted solely to them.
  std::vector<int> missing_solo;
};

class QMatrix;

/// A Q-matrix is complete when every attribute has at least one item whose
/// row is that attribute's unit vector.
CompletenessReport check_complete(const QMatrix& q);

/// Item-by-attribute incidence matrix. Validated on construction: nonempty,
/// every row measures at least one attribute, K <= kMaxAttributes.
class QMatrix {
 public:
  explicit QMatrix(BinaryMatrix entries,
                   std::vector<std::string> attr_names = {});

  std::size_t items() const { return entries_.rows(); }
  std::size_t attrs() const { return entries_.cols(); }

  std::uint8_t operator()(std::size_t j, std::size_t k) const {
    return entries_(j, k);
  }
  std::span<const std::uint8_t> row(std::size_t j) const {
    return entries_.row(j);
  }
  const BinaryMatrix& entries() const { return entries_; }

  /// 0-based indices of the attributes item j requires.
  const std::vector<int>& required(std::size_t j) const {
    return required_[j];
  }

  /// Column names from the CSV header, or "A1".."AK" when none were given.
  const std::vector<std::string>& attr_names() const { return attr_names_; }

 private:
  BinaryMatrix entries_;
  std::vector<std::vector<int>> required_;
  std::vector<std::string> attr_names_;
};

}  // namespace rrum

#endif  // RRUM_PATTERNS_HPP
