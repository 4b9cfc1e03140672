#include "rrum/patterns.hpp"

#include <algorithm>

namespace rrum {

std::uint32_t pattern_to_index(std::span<const std::uint8_t> pattern) {
  const std::size_t K = pattern.size();
  if (K == 0) throw validation_error("pattern_to_index: empty pattern");
  if (K > 31) throw validation_error("pattern_to_index: more than 31 attributes");
  std::uint32_t value = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (pattern[k] > 1)
      throw validation_error("pattern_to_index: element is not 0/1");
    value = (value << 1) | pattern[k];
  }
  return value;
}

AttributePattern index_to_pattern(std::uint32_t index, int attr_count) {
  if (attr_count < 1 || attr_count > 31)
    throw validation_error("index_to_pattern: attribute count out of range");
  if (attr_count < 31 && index >= (1u << attr_count))
    throw validation_error("index_to_pattern: index out of range for K=" +
                           std::to_string(attr_count));
  AttributePattern bits(attr_count);
  for (int k = 0; k < attr_count; ++k)
    bits[k] = static_cast<std::uint8_t>((index >> (attr_count - 1 - k)) & 1u);
  return bits;
}

std::vector<AttributePattern> enumerate_patterns(int attr_count) {
  if (attr_count < 1 || attr_count > kMaxAttributes)
    throw validation_error("enumerate_patterns: K must lie in [1," +
                           std::to_string(kMaxAttributes) + "]");
  const std::uint32_t M = 1u << attr_count;
  std::vector<AttributePattern> out;
  out.reserve(M);
  for (std::uint32_t m = 0; m < M; ++m)
    out.push_back(index_to_pattern(m, attr_count));
  return out;
}

QMatrix::QMatrix(BinaryMatrix entries, std::vector<std::string> attr_names)
    : entries_(std::move(entries)), attr_names_(std::move(attr_names)) {
  const std::size_t J = entries_.rows();
  const std::size_t K = entries_.cols();
  if (J == 0 || K == 0) throw validation_error("QMatrix: empty matrix");
  if (K > static_cast<std::size_t>(kMaxAttributes))
    throw validation_error("QMatrix: K=" + std::to_string(K) + " exceeds cap " +
                           std::to_string(kMaxAttributes));
  required_.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      if (entries_(j, k) > 1)
        throw validation_error("QMatrix: non-binary entry at item " +
                               std::to_string(j + 1));
      if (entries_(j, k)) required_[j].push_back(static_cast<int>(k));
    }
    if (required_[j].empty())
      throw validation_error("QMatrix: item " + std::to_string(j + 1) +
                             " measures no attribute");
  }
  if (!attr_names_.empty() && attr_names_.size() != K)
    throw validation_error("QMatrix: header has " +
                           std::to_string(attr_names_.size()) +
                           " names for " + std::to_string(K) + " attributes");
  if (attr_names_.empty())
    for (std::size_t k = 0; k < K; ++k)
      attr_names_.push_back("A" + std::to_string(k + 1));
}

CompletenessReport check_complete(const QMatrix& q) {
  CompletenessReport report;
  for (std::size_t k = 0; k < q.attrs(); ++k) {
    bool solo = false;
    for (std::size_t j = 0; j < q.items() && !solo; ++j)
      solo = q.required(j).size() == 1 && q.required(j)[0] == static_cast<int>(k);
    if (!solo) report.missing_solo.push_back(static_cast<int>(k) + 1);
  }
  report.complete = report.missing_solo.empty();
  return report;
}

}  // namespace rrum
