#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirtlink {

// Integer score matrix, one row per examinee, one column per item id.
// kMissing marks an unanswered cell.
struct ResponseMatrix {
  static constexpr std::int16_t kMissing = -1;

  std::vector<std::string> item_ids;
  int n_persons = 0;
  std::vector<std::int16_t> scores;  // row-major, n_persons x item_ids.size()

  int n_items() const { return static_cast<int>(item_ids.size()); }

  std::int16_t operator()(int person, int item) const {
    return scores[static_cast<std::size_t>(person) * item_ids.size() + item];
  }
  std::int16_t& operator()(int person, int item) {
    return scores[static_cast<std::size_t>(person) * item_ids.size() + item];
  }

  static ResponseMatrix empty(std::vector<std::string> ids, int persons) {
    ResponseMatrix m;
    m.item_ids = std::move(ids);
    m.n_persons = persons;
    m.scores.assign(static_cast<std::size_t>(persons) * m.item_ids.size(), kMissing);
    return m;
  }
};

inline void check_shape(const ResponseMatrix& m) {
  if (m.scores.size() != static_cast<std::size_t>(m.n_persons) * m.item_ids.size())
    throw std::invalid_argument("response matrix: shape/storage mismatch");
}

}  // namespace mirtlink
