#pragma once

// Context scoring on training tasks and the learned context selector.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "camp/abstraction.hpp"
#include "camp/contexts.hpp"
#include "camp/core.hpp"
#include "camp/csi.hpp"
#include "camp/learner.hpp"
#include "camp/planners.hpp"

namespace camp {

/// Plans in the CAMP at every step: projects the base state, calls the
/// planner on the abstract model and lifts the chosen action. Once the
/// context is violated it acts uniformly at random over the base actions for
/// the rest of the episode, mirroring the absorbing sink.
Policy make_camp_policy(std::shared_ptr<const Camp> camp, const PlannerConfig& cfg);

struct ScoreOptions {
    PlannerConfig planner;
    double lambda = 0.0;
    /// 0 picks 1 for deterministic models and 3 otherwise.
    int n_rollouts = 0;
    CostModel cost;
    CampOptions camp;

    int rollouts_for(const FactoredMdp& mdp) const;
};

struct ContextScore {
    double objective = 0.0;
    double mean_return = 0.0;
    double mean_cost = 0.0;
    double mean_expansions = 0.0;
    bool flagged = false;
};

/// Mean objective of rollouts that plan in the CAMP for `ctx`. Rollout i uses
/// the stream derive_seed(seed, task.id, i), so every context of a task sees
/// the same random numbers.
ContextScore score_context(const Task& task, const Context& ctx, const CsiSet& csis, const ScoreOptions& options,
                           std::uint64_t seed);

/// Supplies the CSI set of a context for a task's model.
using CsiProvider = std::function<const CsiSet&(const Task&, const Context&)>;

CsiProvider cache_provider(CsiCache& cache);

struct LabelRow {
    std::string task_id;
    std::string features_digest;
    std::size_t label = 0;
    std::vector<ContextScore> scores;
};

struct Selector {
    Classifier classifier;
    std::vector<Context> contexts;
    double lambda = 0.0;
    PlannerConfig planner;

    std::size_t predict(const std::vector<double>& theta) const;
};

struct SelectorTraining {
    Selector selector;
    std::vector<LabelRow> labels;
    TrainResult training;
};

/// Scores every context on every task, labels each task with its best
/// context (lowest index on ties) and fits the classifier to the labels.
SelectorTraining train_selector(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                                const CsiProvider& csis, const ScoreOptions& options,
                                const TrainOptions& train_options, std::uint64_t seed);

/// Label pass only; used by train_selector and by sweeps that reuse scores.
std::vector<LabelRow> label_tasks(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                                  const CsiProvider& csis, const ScoreOptions& options, std::uint64_t seed);

/// Fits the classifier to an existing label table.
SelectorTraining fit_selector(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                              std::vector<LabelRow> labels, const ScoreOptions& options,
                              const TrainOptions& train_options, std::uint64_t seed);

/// Re-derives labels from stored per-context scores at a different lambda.
void relabel(std::vector<LabelRow>& labels, double lambda);

const Context& select_context(const Selector& selector, const std::vector<double>& theta);

std::string features_digest(const std::vector<double>& features);

/// CSV: task_id, features_digest, label, then one objective column per context.
void write_label_table(std::ostream& out, const std::vector<LabelRow>& labels, const std::vector<Context>& contexts,
                       const std::vector<VariableSpec>& vars);

}  // namespace camp
