#include "strokekit/types.hpp"

#include <cmath>
#include <unordered_set>

#include "strokekit/errors.hpp"

namespace strokekit {

void FrameFeatureSeries::validate() const {
  if (feature_dim < 1) {
    throw InputError("rally '" + rally_id + "': feature dimension must be >= 1");
  }
  if (data.empty() || data.size() % static_cast<std::size_t>(feature_dim) != 0) {
    throw InputError("rally '" + rally_id +
                     "': frame data is empty or not a multiple of the feature dimension");
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw InputError("rally '" + rally_id + "': non-finite feature value");
    }
  }
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw InputError("label set must contain at least two techniques");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n == kNullNodeName) {
      throw InputError("label set must not contain the reserved name 'null'");
    }
    if (n.empty()) {
      throw InputError("label set must not contain empty names");
    }
    if (!seen.insert(n).second) {
      throw InputError("duplicate technique name '" + n + "' in label set");
    }
  }
}

LabelSet LabelSet::default_table_tennis() {
  return LabelSet({"Serve", "Topspin", "Short", "Block", "Push", "Flick",
                   "Smash", "Others"});
}

int LabelSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int LabelSet::require(std::string_view name) const {
  const int idx = index_of(name);
  if (idx < 0) {
    throw InputError("unknown technique label '" + std::string(name) + "'");
  }
  return idx;
}

}  // namespace strokekit
