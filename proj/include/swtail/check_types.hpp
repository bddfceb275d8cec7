#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace swtail {

struct CheckOptions {
  int grid_points = 64;
  std::int64_t mc_paths = 200000;
  std::uint64_t seed = 42;
  int workers = 0;
  // Test hook: scales every moment-kernel entry inside the battery's own
  // kappa route; any value != 1 must trip the cross-method item.
  double ms_entry_scale = 1.0;
};

struct CheckItem {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double limit = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_pass() const {
    for (const auto& item : items)
      if (!item.pass) return false;
    return true;
  }
};

}  // namespace swtail
