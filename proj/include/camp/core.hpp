#pragma once

// Factored state/action spaces, tasks, trajectories and the
// reward-versus-compute objective shared by every other module.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace camp {

using Rng = std::mt19937_64;

enum class VarKind { state, action };

struct VariableSpec {
    std::string name;
    VarKind kind = VarKind::state;
    std::vector<std::string> domain;

    int size() const { return static_cast<int>(domain.size()); }
    /// Index of a value label, or -1 when absent.
    int value_index(std::string_view label) const;
};

/// Value indices, one per declared state variable (in declaration order).
using State = std::vector<int>;
/// Value indices, one per declared action variable.
using Action = std::vector<int>;
/// Joint (state ++ action) assignment; the global variable index of action
/// variable j is n_state_vars + j.
using JointAssignment = std::vector<int>;

using StateDistribution = std::vector<std::pair<State, double>>;
/// Per-state-variable successor marginals, each over that variable's domain.
using Marginals = std::vector<std::vector<double>>;

struct VectorHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept;
};

class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A factored MDP accessed through black-box callbacks. Optional callbacks
/// are left empty when the model cannot provide them.
struct FactoredMdp {
    std::vector<VariableSpec> state_vars;
    std::vector<VariableSpec> action_vars;
    /// The enumerated action set A (a subset of the joint action domain).
    std::vector<Action> actions;

    std::function<State(const State&, const Action&, Rng&)> sample;
    std::function<StateDistribution(const State&, const Action&)> distribution;
    std::function<Marginals(const State&, const Action&)> marginals;
    std::function<double(const State&)> reward;
    std::function<bool(const State&)> terminal;
    /// True when every action from the state leads to an absorbing failure,
    /// so there is nothing left to plan for.
    std::function<bool(const State&)> dead_end;

    std::vector<std::size_t> reward_vars;
    int horizon = 25;
    double discount = 1.0;
    /// Upper bound on R(s), when known. Used as an early goal test.
    std::optional<double> max_reward;
    bool deterministic = false;

    std::size_t num_vars() const { return state_vars.size() + action_vars.size(); }
    std::vector<VariableSpec> all_vars() const;
    const VariableSpec& var(std::size_t global_index) const;
    /// Global index of a variable name, or throws ModelError.
    std::size_t var_index(std::string_view name) const;

    bool is_terminal(const State& s) const { return terminal && terminal(s); }
    bool is_dead_end(const State& s) const { return dead_end && dead_end(s); }

    /// Exact per-variable marginals from `marginals` or, failing that,
    /// aggregated from `distribution`. Empty optional when neither exists.
    std::optional<Marginals> exact_marginals(const State& s, const Action& a) const;

    bool valid_state(const State& s) const;
    bool valid_action(const Action& a) const;
    /// Throws ModelError when a structural invariant is broken.
    void validate() const;
    /// Throws ModelError unless the exact distribution at (s, a) sums to one.
    void check_distribution(const State& s, const Action& a, double tolerance = 1e-9) const;
};

JointAssignment join(const State& s, const Action& a);
std::pair<State, Action> split(const JointAssignment& u, std::size_t n_state_vars);

struct Task {
    std::string id;
    State initial_state;
    std::vector<double> features;
    std::shared_ptr<const FactoredMdp> mdp;
    /// Identifies the transition model the task is bound to. Tasks sharing a
    /// key share CSIs.
    std::string model_key;
};

void validate_task(const Task& task);

struct PlanStats {
    std::int64_t expansions = 0;
    bool flagged = false;
    std::string note;
};

struct PolicyOutput {
    Action action;
    PlanStats stats;
};

/// A policy is called once per timestep with the current base state.
using Policy = std::function<PolicyOutput(const State& s, int t, Rng& rng)>;

struct Step {
    State state;
    Action action;  // empty on the final step
    double reward = 0.0;
    double compute_seconds = 0.0;
    std::int64_t expansions = 0;
    bool flagged = false;
};

struct Trajectory {
    std::vector<Step> steps;
    double discount = 1.0;

    double discounted_return() const;
    double total_seconds() const;
    std::int64_t total_expansions() const;
    bool any_flagged() const;
};

class RolloutError : public std::runtime_error {
  public:
    RolloutError(int step, const std::string& what);
    int step() const { return step_; }

  private:
    int step_;
};

/// Runs `policy` from the task's initial state for at most H steps,
/// sampling the transition once per step. Stops early on terminal states.
Trajectory rollout(const FactoredMdp& mdp, const Policy& policy, const Task& task, Rng& rng);

enum class CostChannel { wallclock, expansions };

CostChannel parse_cost_channel(std::string_view text);
std::string to_string(CostChannel channel);

/// Converts a step's metered compute into seconds on the chosen channel.
/// The expansion channel charges a fixed nominal time per node expansion so
/// objective values stay comparable to the wall-clock channel.
struct CostModel {
    CostChannel channel = CostChannel::wallclock;
    double seconds_per_expansion = 1e-5;

    double step_cost(const Step& step) const;
    double trajectory_cost(const Trajectory& traj) const;
};

/// Mean over trajectories of sum_t gamma^t r_t - lambda * sum_t cost_t.
double evaluate_objective(const std::vector<Trajectory>& trajectories, double lambda,
                          const CostModel& cost = {});

/// splitmix64 finaliser; used to derive independent RNG streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_string(std::string_view text);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t run = 0);

}  // namespace camp
