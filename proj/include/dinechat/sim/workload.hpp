#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dinechat::sim {

enum class WorkloadProfile { kDiurnal, kConstant, kBursty };

WorkloadProfile parse_profile(std::string_view name);
std::string_view profile_name(WorkloadProfile profile);

// Arrival rates (requests/second), one per timestep.
struct WorkloadTrace {
  std::vector<double> rates;

  std::size_t size() const { return rates.size(); }
  bool empty() const { return rates.empty(); }
};

// One non-negative number per line. Blank lines are skipped.
WorkloadTrace load_trace(const std::string& path);
WorkloadTrace parse_trace(std::string_view text);
void save_trace(const WorkloadTrace& trace, const std::string& path);

struct WorkloadShape {
  double min_rate = 5.0;
  double max_rate = 30.0;
  // Timesteps per full day cycle.
  int period = 200;
  double noise = 0.05;
};

WorkloadTrace generate_trace(std::uint64_t seed, int length, WorkloadProfile profile,
                             const WorkloadShape& shape = {});

}  // namespace dinechat::sim
