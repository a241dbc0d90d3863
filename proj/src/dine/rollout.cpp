#include "dinechat/dine/rollout.hpp"

#include "dinechat/error.hpp"

namespace dinechat::dine {

TimestepRecord make_record(int timestep, const sim::EnvState& state,
                           const rl::ChannelActionTable& q_values,
                           const sim::RewardVector& reward, double uncertainty_threshold) {
  TimestepRecord r;
  r.timestep = timestep;
  r.state = state;
  r.q_values = q_values;
  r.chosen_action = q_values.actions[q_values.argmax_summed()];
  r.reward = reward;
  r.dominance = compute_dominance(q_values);
  const auto u = compute_uncertainty(q_values, uncertainty_threshold);
  r.uncertainty_score = u.score;
  r.uncertain = u.uncertain;
  return r;
}

DecisionTrace rollout_and_record(const rl::DecomposedDqn& agent,
                                 const sim::WorkloadTrace& workload,
                                 const RolloutOptions& options) {
  if (options.steps <= 0) throw ConfigError("rollout needs at least one step");
  if (options.warmup < 0) throw ConfigError("rollout warmup must not be negative");
  sim::WebshopEnv env(agent.env_config());
  DecisionTrace trace;
  trace.trace_id = options.trace_id;
  trace.description = options.description;
  trace.checkpoint = options.checkpoint;
  sim::EnvState state = env.reset(options.seed, workload);
  for (int t = 0; t < options.warmup; ++t) {
    state = env.step(state, agent.greedy_action(state).action).state;
  }
  for (int t = 0; t < options.steps; ++t) {
    const auto choice = agent.greedy_action(state);
    const auto step = env.step(state, choice.action);
    trace.records.push_back(
        make_record(t, state, choice.q_values, step.reward, options.uncertainty_threshold));
    state = step.state;
  }
  return trace;
}

}  // namespace dinechat::dine
