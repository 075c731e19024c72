#pragma once

// Black-box Plan(M, s) solvers: UCT tree search, breadth-first search with
// replanning, asynchronous value iteration and uniform-cost optimal search.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "camp/core.hpp"

namespace camp {

enum class PlannerKind { mcts, bfs_replan, value_iteration, optimal_search };

PlannerKind parse_planner_kind(std::string_view text);
std::string to_string(PlannerKind kind);

inline constexpr double kMaxPlanningSeconds = 60.0;

struct PlannerConfig {
    PlannerKind kind = PlannerKind::bfs_replan;
    /// Per-call cap for every planner (clamped to 60 s).
    double timeout_seconds = kMaxPlanningSeconds;
    /// Anytime budget for tree search.
    double mcts_budget_seconds = 0.25;
    int mcts_iterations_cap = 10000;
    double mcts_exploration = 1.41;
    double vi_tolerance = 1e-6;
    std::size_t vi_state_cap = 200000;
    /// 0: discounted backups until convergence; > 0: exactly this many
    /// finite-horizon backups.
    int vi_horizon = 0;

    double effective_timeout() const;
};

struct PlanResult {
    Action action;
    PlanStats stats;
    /// Full action sequence when the planner produces one.
    std::vector<Action> plan;
    /// Planner's own value estimate for the returned plan or action.
    double value = 0.0;
};

PlanResult mcts_plan(const FactoredMdp& mdp, const State& s, const PlannerConfig& cfg, Rng& rng,
                     int remaining_horizon = -1);

/// Determinises by most-likely outcome and searches breadth-first (duplicate
/// detection on full states) for the nearest state of maximal reward within
/// the remaining horizon. Returns the first action of that plan.
PlanResult bfs_replan_plan(const FactoredMdp& mdp, const State& s, const PlannerConfig& cfg, Rng& rng,
                           int remaining_horizon = -1);

/// Most likely successor; ties go to the first listed outcome.
State most_likely_successor(const FactoredMdp& mdp, const State& s, const Action& a);

class StateSpaceTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ValueIterationResult {
    std::vector<State> states;
    std::unordered_map<State, std::size_t, VectorHash> index;
    std::vector<double> values;
    /// Greedy action index into mdp.actions, per state.
    std::vector<std::size_t> policy;
    double residual = 0.0;
    int sweeps = 0;
    std::int64_t backups = 0;
    bool converged = false;

    double value(const State& s) const { return values.at(index.at(s)); }
    std::size_t action_index(const State& s) const { return policy.at(index.at(s)); }
};

/// Enumerates the states reachable from `root` and runs in-place Bellman
/// backups, V(s) = R(s) + gamma max_a sum_s' T(s,a,s') V(s'), with
/// V(s) = R(s) at terminal states.
ValueIterationResult value_iteration(const FactoredMdp& mdp, const State& root, double gamma,
                                     const PlannerConfig& cfg);

struct SearchResult {
    std::vector<Action> plan;
    /// Sum of R(s_t) along the plan, t = 0 .. end.
    double total_reward = 0.0;
    std::int64_t expansions = 0;
    bool optimal = true;
};

/// Uniform-cost search over (state, t) for a reward-maximising plan within
/// the horizon. Per-slot cost is max_reward - R(s); paths are padded to the
/// horizon with zero-reward slots so every complete path has equal length.
/// Requires a deterministic model with `max_reward` set.
SearchResult optimal_search(const FactoredMdp& mdp, const State& s0, const PlannerConfig& cfg,
                            int horizon = -1);

/// Wraps a planner as a policy. Online planners are called every step;
/// value iteration and optimal search are solved once on the first call and
/// then replayed (optimal search replans if the state leaves the plan).
Policy make_planner_policy(std::shared_ptr<const FactoredMdp> mdp, const PlannerConfig& cfg);

/// Uniform choice over the model's action set.
Action random_action(const FactoredMdp& mdp, Rng& rng);

}  // namespace camp
