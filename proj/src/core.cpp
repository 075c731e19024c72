#include "camp/core.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <set>

namespace camp {

int VariableSpec::value_index(std::string_view label) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
        if (domain[i] == label) return static_cast<int>(i);
    return -1;
}

std::size_t VectorHash::operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ v.size();
    for (int x : v) h = mix_seed(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)));
    return static_cast<std::size_t>(h);
}

std::vector<VariableSpec> FactoredMdp::all_vars() const {
    std::vector<VariableSpec> vars = state_vars;
    vars.insert(vars.end(), action_vars.begin(), action_vars.end());
    return vars;
}

const VariableSpec& FactoredMdp::var(std::size_t global_index) const {
    if (global_index < state_vars.size()) return state_vars[global_index];
    global_index -= state_vars.size();
    if (global_index < action_vars.size()) return action_vars[global_index];
    throw ModelError("variable index out of range");
}

std::size_t FactoredMdp::var_index(std::string_view name) const {
    for (std::size_t i = 0; i < num_vars(); ++i)
        if (var(i).name == name) return i;
    throw ModelError("unknown variable '" + std::string(name) + "'");
}

std::optional<Marginals> FactoredMdp::exact_marginals(const State& s, const Action& a) const {
    if (marginals) return marginals(s, a);
    if (!distribution) return std::nullopt;
    Marginals m(state_vars.size());
    for (std::size_t i = 0; i < state_vars.size(); ++i) m[i].assign(state_vars[i].domain.size(), 0.0);
    for (const auto& [next, p] : distribution(s, a))
        for (std::size_t i = 0; i < next.size(); ++i) m[i][next[i]] += p;
    return m;
}

namespace {

bool valid_assignment(const std::vector<int>& values, const std::vector<VariableSpec>& vars) {
    if (values.size() != vars.size()) return false;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (values[i] < 0 || values[i] >= vars[i].size()) return false;
    return true;
}

}  // namespace

bool FactoredMdp::valid_state(const State& s) const { return valid_assignment(s, state_vars); }
bool FactoredMdp::valid_action(const Action& a) const { return valid_assignment(a, action_vars); }

void FactoredMdp::validate() const {
    std::set<std::string> names;
    for (std::size_t i = 0; i < num_vars(); ++i) {
        const auto& v = var(i);
        if (v.domain.empty()) throw ModelError("variable '" + v.name + "' has an empty domain");
        std::set<std::string> values(v.domain.begin(), v.domain.end());
        if (values.size() != v.domain.size())
            throw ModelError("variable '" + v.name + "' has duplicate values");
        if (!names.insert(v.name).second) throw ModelError("duplicate variable name '" + v.name + "'");
    }
    for (std::size_t r : reward_vars)
        if (r >= state_vars.size()) throw ModelError("reward variable is not a state variable");
    if (horizon <= 0) throw ModelError("horizon must be positive");
    if (!sample || !reward) throw ModelError("transition sampler and reward are required");
    if (actions.empty()) throw ModelError("action set is empty");
    for (const auto& a : actions)
        if (!valid_action(a)) throw ModelError("action outside the declared action domains");
}

void FactoredMdp::check_distribution(const State& s, const Action& a, double tolerance) const {
    if (!distribution) return;
    double total = 0.0;
    for (const auto& entry : distribution(s, a)) total += entry.second;
    if (std::abs(total - 1.0) > tolerance)
        throw ModelError("transition distribution sums to " + std::to_string(total));
}

JointAssignment join(const State& s, const Action& a) {
    JointAssignment u = s;
    u.insert(u.end(), a.begin(), a.end());
    return u;
}

std::pair<State, Action> split(const JointAssignment& u, std::size_t n_state_vars) {
    return {State(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n_state_vars)),
            Action(u.begin() + static_cast<std::ptrdiff_t>(n_state_vars), u.end())};
}

void validate_task(const Task& task) {
    if (!task.mdp) throw ModelError("task '" + task.id + "' has no model");
    if (!task.mdp->valid_state(task.initial_state))
        throw ModelError("task '" + task.id + "' has an invalid initial state");
    for (double f : task.features)
        if (!std::isfinite(f)) throw ModelError("task '" + task.id + "' has non-finite features");
}

double Trajectory::discounted_return() const {
    double total = 0.0, g = 1.0;
    for (const auto& step : steps) {
        total += g * step.reward;
        g *= discount;
    }
    return total;
}

double Trajectory::total_seconds() const {
    double total = 0.0;
    for (const auto& step : steps) total += step.compute_seconds;
    return total;
}

std::int64_t Trajectory::total_expansions() const {
    std::int64_t total = 0;
    for (const auto& step : steps) total += step.expansions;
    return total;
}

bool Trajectory::any_flagged() const {
    for (const auto& step : steps)
        if (step.flagged) return true;
    return false;
}

RolloutError::RolloutError(int step, const std::string& what)
    : std::runtime_error("policy failed at step " + std::to_string(step) + ": " + what), step_(step) {}

Trajectory rollout(const FactoredMdp& mdp, const Policy& policy, const Task& task, Rng& rng) {
    validate_task(task);
    Trajectory traj;
    traj.discount = mdp.discount;
    State s = task.initial_state;
    for (int t = 0;; ++t) {
        Step step;
        step.state = s;
        step.reward = mdp.reward(s);
        if (t == mdp.horizon || mdp.is_terminal(s)) {
            traj.steps.push_back(std::move(step));
            break;
        }
        PolicyOutput out;
        auto start = std::chrono::steady_clock::now();
        try {
            out = policy(s, t, rng);
        } catch (const std::exception& e) {
            throw RolloutError(t, e.what());
        }
        step.compute_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!mdp.valid_action(out.action)) throw RolloutError(t, "policy returned an invalid action");
        step.action = out.action;
        step.expansions = out.stats.expansions;
        step.flagged = out.stats.flagged;
        s = mdp.sample(s, out.action, rng);
        traj.steps.push_back(std::move(step));
    }
    return traj;
}

CostChannel parse_cost_channel(std::string_view text) {
    if (text == "wallclock") return CostChannel::wallclock;
    if (text == "expansions") return CostChannel::expansions;
    throw std::invalid_argument("unknown cost channel '" + std::string(text) + "'");
}

std::string to_string(CostChannel channel) {
    return channel == CostChannel::wallclock ? "wallclock" : "expansions";
}

double CostModel::step_cost(const Step& step) const {
    if (channel == CostChannel::wallclock) return step.compute_seconds;
    return static_cast<double>(step.expansions) * seconds_per_expansion;
}

double CostModel::trajectory_cost(const Trajectory& traj) const {
    double total = 0.0;
    for (const auto& step : traj.steps) total += step_cost(step);
    return total;
}

double evaluate_objective(const std::vector<Trajectory>& trajectories, double lambda,
                          const CostModel& cost) {
    if (trajectories.empty()) throw std::invalid_argument("objective of an empty trajectory set");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    double total = 0.0;
    for (const auto& traj : trajectories)
        total += traj.discounted_return() - lambda * cost.trajectory_cost(traj);
    return total / static_cast<double>(trajectories.size());
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ull + (b << 6) + (b >> 2) + b * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t hash_string(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t run) {
    return mix_seed(mix_seed(seed, hash_string(key)), run);
}

}  // namespace camp
