#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mmvm {

/// Watched stream values for t = 0..horizon.
struct Trajectory {
  std::vector<std::string> nodes;
  /// values[t][k] is the value of nodes[k] at time t.
  std::vector<std::vector<double>> values;

  std::int64_t horizon() const { return static_cast<std::int64_t>(values.size()) - 1; }
  /// Throws std::out_of_range for an unwatched node or t outside the run.
  double at(std::int64_t t, std::string_view node) const;
};

}  // namespace mmvm
