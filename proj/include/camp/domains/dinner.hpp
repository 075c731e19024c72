#pragma once

// Dinner-making: three operator chains (ramen, sandwich, steak) gated on the
// agent's location. Finishing any meal ends the episode.

#include <array>
#include <memory>
#include <string>

#include "camp/core.hpp"

namespace camp::dinner {

enum class Meal { ramen = 0, sandwich = 1, steak = 2 };

struct DinnerConfig {
    /// Terminal rewards for ramen, sandwich and steak.
    std::array<double, 3> rewards{10.0, 50.0, 100.0};
    double step_penalty = 1.0;
    int horizon = 25;
    /// Range for sampled task rewards.
    double reward_min = 10.0;
    double reward_max = 100.0;
};

/// Number of actions in the shortest plan for each meal from the start state.
inline constexpr std::array<int, 3> kPlanLengths{2, 16, 22};

/// Variable 0 is `location`; the rest are binary progress fluents.
std::shared_ptr<const FactoredMdp> build(const DinnerConfig& cfg);
State initial_state(const FactoredMdp& mdp);

/// Operator labels of the `op` action variable, in domain order.
const std::vector<std::string>& operator_names();
Action op(const FactoredMdp& mdp, const std::string& name);
/// The shortest operator sequence that makes `meal` from the start state.
std::vector<std::string> meal_plan(Meal meal);

/// Location one-hot followed by the fluents.
std::vector<double> state_features(const State& s);
std::string model_key(const DinnerConfig& cfg);

Task make_task(const DinnerConfig& cfg, const std::string& id);
/// Draws each meal reward uniformly from [reward_min, reward_max].
DinnerConfig sample_config(const DinnerConfig& cfg, Rng& rng);
Task sample_task(const DinnerConfig& cfg, Rng& rng, const std::string& id);

std::string write_manifest(const DinnerConfig& cfg);
DinnerConfig read_manifest(const std::string& text);

}  // namespace camp::dinner
