#pragma once

#include <vector>

namespace dinechat::eval {

// Share of correct explanations: sum(x_i) / m over 0/1 grades.
double compute_fidelity(const std::vector<int>& grades);

// Mean of real values (fidelity of a repetition averaged over questions).
double mean(const std::vector<double>& values);

// Population standard deviation (divides by m).
double population_stddev(const std::vector<double>& values);

// 1 - population standard deviation of repetition fidelities; needs >= 2.
double compute_stability(const std::vector<double>& fidelities);

// Share of participants' correct answers; same formula as fidelity.
double compute_effectiveness(const std::vector<int>& participant_grades);

}  // namespace dinechat::eval
