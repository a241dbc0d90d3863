#include "dinechat/eval/metrics.hpp"

#include <cmath>
#include <string>

#include "dinechat/error.hpp"

namespace dinechat::eval {
namespace {

double rate(const std::vector<int>& grades, const char* what) {
  if (grades.empty()) throw ConfigError(std::string(what) + " needs at least one grade");
  long correct = 0;
  for (int g : grades) {
    if (g != 0 && g != 1) throw ConfigError(std::string(what) + " grades must be 0 or 1");
    correct += g;
  }
  return static_cast<double>(correct) / static_cast<double>(grades.size());
}

}  // namespace

double compute_fidelity(const std::vector<int>& grades) { return rate(grades, "fidelity"); }

double compute_effectiveness(const std::vector<int>& participant_grades) {
  return rate(participant_grades, "effectiveness");
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_stddev(const std::vector<double>& values) {
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double compute_stability(const std::vector<double>& fidelities) {
  if (fidelities.size() < 2) throw ConfigError("stability needs at least two repetitions");
  return 1.0 - population_stddev(fidelities);
}

}  // namespace dinechat::eval
