#include "dinechat/sim/workload.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dinechat/error.hpp"

namespace dinechat::sim {

WorkloadProfile parse_profile(std::string_view name) {
  if (name == "diurnal") return WorkloadProfile::kDiurnal;
  if (name == "constant") return WorkloadProfile::kConstant;
  if (name == "bursty") return WorkloadProfile::kBursty;
  throw ConfigError("unknown workload profile '" + std::string(name) + "'");
}

std::string_view profile_name(WorkloadProfile profile) {
  switch (profile) {
    case WorkloadProfile::kDiurnal: return "diurnal";
    case WorkloadProfile::kConstant: return "constant";
    case WorkloadProfile::kBursty: return "bursty";
  }
  return "unknown";
}

WorkloadTrace parse_trace(std::string_view text) {
  WorkloadTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    double rate = 0.0;
    try {
      std::size_t used = 0;
      rate = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + token + "'", line_no);
    }
    if (!std::isfinite(rate) || rate < 0.0) {
      throw ParseError("arrival rate must be a finite non-negative number, got '" +
                           token + "'",
                       line_no);
    }
    trace.rates.push_back(rate);
  }
  return trace;
}

WorkloadTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload trace '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_trace(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_trace(const WorkloadTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write workload trace '" + path + "'");
  out.precision(17);
  for (double rate : trace.rates) out << rate << '\n';
}

WorkloadTrace generate_trace(std::uint64_t seed, int length, WorkloadProfile profile,
                             const WorkloadShape& shape) {
  if (length <= 0) throw ConfigError("workload length must be positive");
  if (shape.min_rate < 0.0 || shape.max_rate < shape.min_rate) {
    throw ConfigError("workload shape needs 0 <= min_rate <= max_rate");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, shape.noise);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = shape.max_rate - shape.min_rate;
  const double mid = shape.min_rate + 0.5 * span;
  // Random phase so that different seeds see different parts of the day.
  const double phase = 2.0 * std::numbers::pi * unit(rng);

  WorkloadTrace trace;
  trace.rates.reserve(static_cast<std::size_t>(length));
  double burst = 0.0;
  for (int t = 0; t < length; ++t) {
    double base = mid;
    switch (profile) {
      case WorkloadProfile::kDiurnal: {
        const double angle = 2.0 * std::numbers::pi * t / shape.period + phase;
        base = shape.min_rate + span * 0.5 * (1.0 - std::cos(angle));
        break;
      }
      case WorkloadProfile::kConstant:
        break;
      case WorkloadProfile::kBursty:
        if (unit(rng) < 0.05) burst = 0.5 * span * unit(rng);
        burst *= 0.8;
        base = shape.min_rate + 0.3 * span + burst;
        break;
    }
    const double rate = base * (1.0 + noise(rng));
    trace.rates.push_back(std::max(0.0, rate));
  }
  return trace;
}

}  // namespace dinechat::sim
