#pragma once

// Experiment driver: task splits, method roster, evaluation rows, sweeps and
// summaries.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camp/contexts.hpp"
#include "camp/core.hpp"
#include "camp/csi.hpp"
#include "camp/domains/dinner.hpp"
#include "camp/domains/gridworld.hpp"
#include "camp/learner.hpp"
#include "camp/planners.hpp"
#include "camp/selector.hpp"

namespace camp {

enum class DomainKind { gridworld, dinner };
DomainKind parse_domain(std::string_view text);
std::string to_string(DomainKind kind);

enum class MethodKind {
    camp,
    camp_ablation,
    pure_planning,
    plan_transfer,
    policy_learning,
    task_conditioned_policy,
    random_policy,
};
MethodKind parse_method(std::string_view text);
std::string to_string(MethodKind kind);
const std::vector<MethodKind>& all_methods();

enum class Profile { paper, fast };
Profile parse_profile(std::string_view text);
std::string to_string(Profile profile);

struct ExperimentConfig {
    DomainKind domain = DomainKind::gridworld;
    PlannerConfig planner;
    std::vector<MethodKind> methods;
    double lambda = 100.0;
    std::uint64_t seed = 0;
    int n_train = 50;
    int n_test = 10;
    int runs = 10;
    /// Evaluation rollouts per test task and method.
    int eval_rollouts = 1;
    CostModel cost{CostChannel::expansions, 1e-3};
    gridworld::GridworldConfig grid;
    dinner::DinnerConfig dinner;
    ContextSpaceOptions contexts;
    CsiOptions csi;
    /// Rollouts per context score; 0 picks by determinism.
    int score_rollouts = 0;
    TrainOptions selector_train;
    TrainOptions policy_train;
    /// Skips the selector and uses this index of the context list.
    std::optional<std::size_t> forced_context;
};

/// Defaults for a domain. `fast` trims runs and task counts for desk-scale
/// checks; `paper` follows the published protocol.
ExperimentConfig default_config(DomainKind domain, Profile profile = Profile::paper);

/// A sampled task together with its state featuriser and text manifest.
struct DomainTask {
    Task task;
    std::function<std::vector<double>(const State&)> state_features;
    std::string manifest;
};

DomainTask make_domain_task(DomainKind domain, const std::string& manifest, const std::string& id);
/// The first `count` tasks of the run's train or test stream.
std::vector<DomainTask> sample_tasks(const ExperimentConfig& cfg, int run, bool train, int count);

std::uint64_t run_seed(const ExperimentConfig& cfg, int run);

struct ResultRow {
    std::string method;
    std::string domain;
    std::string planner;
    std::string task_id;
    std::uint64_t seed = 0;
    int run = 0;
    int rollout = 0;
    int n_train = 0;
    double ret = 0.0;
    double compute_seconds = 0.0;
    std::int64_t expansions = 0;
    std::string cost_channel;
    /// Compute charged on the cost channel, in seconds.
    double cost = 0.0;
    double lambda = 0.0;
    double objective = 0.0;
    std::string context;
    bool flagged = false;
    std::string note;
};

/// Shared between experiments so sweeps reuse CSIs, context scores and
/// lambda-independent trajectories.
struct ExperimentCache {
    explicit ExperimentCache(CsiOptions options = {}, std::uint64_t seed = 0) : csis(options, seed) {}

    CsiCache csis;
    std::map<std::string, LabelRow> labels;
    std::map<std::string, Trajectory> trajectories;
};

/// Runs every configured method on every test task of every run. Failures
/// become flagged rows; the batch continues.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, ExperimentCache* cache = nullptr);

/// Plays, at step t, the most common step-t action of the training plans
/// (lowest action index on ties); random and flagged once every plan is
/// exhausted. Plans hold indices into mdp->actions.
Policy plan_transfer_policy(std::vector<std::vector<std::size_t>> plans, std::shared_ptr<const FactoredMdp> mdp);

enum class SweepKind { lambda, n_train };
SweepKind parse_sweep_kind(std::string_view text);

/// One run_experiment per grid value, sharing a cache.
std::vector<ResultRow> sweep(SweepKind kind, const std::vector<double>& grid, const ExperimentConfig& base,
                             ExperimentCache* cache = nullptr);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ResultRow& row);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);

struct SummaryRow {
    std::string method;
    std::string domain;
    std::string planner;
    double lambda = 0.0;
    int n_train = 0;
    int n = 0;
    double objective_mean = 0.0, objective_sd = 0.0;
    double return_mean = 0.0, return_sd = 0.0;
    double expansions_mean = 0.0, expansions_sd = 0.0;
    double seconds_mean = 0.0, seconds_sd = 0.0;
};

/// Mean and sample deviation per (method, domain, planner, lambda, n_train); rows
/// that failed outright are skipped.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& summary);

/// Task manifests separated by `---` lines, each preceded by `id <name>`.
void write_task_manifest(std::ostream& out, const std::vector<DomainTask>& tasks);
std::vector<DomainTask> read_task_manifest(std::istream& in, DomainKind domain);

/// The generated contexts minus logical repeats: a context whose truth table
/// matches an earlier one (e.g. OR(x=1,NOT(x=1)) after TRUE) is dropped.
std::vector<Context> context_space(const ExperimentConfig& cfg, const FactoredMdp& mdp);

}  // namespace camp
