#include "camp/selector.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace camp {

Policy make_camp_policy(std::shared_ptr<const Camp> camp, const PlannerConfig& cfg) {
    Policy inner = make_planner_policy(camp->abstract_mdp(), cfg);
    auto absorbed = std::make_shared<bool>(false);
    return [camp, inner, absorbed](const State& s, int t, Rng& rng) {
        const auto& base = camp->base();
        if (t == 0) *absorbed = false;
        *absorbed = *absorbed || std::none_of(base.actions.begin(), base.actions.end(), [&](const Action& a) {
            return camp->context().contains(join(s, a));
        });
        if (*absorbed) {
            PolicyOutput out{random_action(camp->base(), rng), {}};
            out.stats.flagged = true;
            out.stats.note = "context violated";
            return out;
        }
        PolicyOutput out = inner(camp->project(s), t, rng);
        out.action = camp->lift_action(out.action);
        return out;
    };
}

int ScoreOptions::rollouts_for(const FactoredMdp& mdp) const {
    if (n_rollouts > 0) return n_rollouts;
    return mdp.deterministic ? 1 : 3;
}

ContextScore score_context(const Task& task, const Context& ctx, const CsiSet& csis, const ScoreOptions& options,
                           std::uint64_t seed) {
    auto camp = std::make_shared<const Camp>(task.mdp, ctx, csis, options.camp);
    const int n = options.rollouts_for(*task.mdp);
    std::vector<Trajectory> trajectories;
    ContextScore score;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, task.id, static_cast<std::uint64_t>(i)));
        try {
            Policy policy = make_camp_policy(camp, options.planner);
            trajectories.push_back(rollout(*task.mdp, policy, task, rng));
            score.flagged = score.flagged || trajectories.back().any_flagged();
        } catch (const std::exception&) {
            score.flagged = true;
        }
    }
    if (trajectories.empty()) {
        score.objective = score.mean_return = options.camp.sink_reward;
        return score;
    }
    for (const auto& traj : trajectories) {
        score.mean_return += traj.discounted_return() / static_cast<double>(trajectories.size());
        score.mean_cost += options.cost.trajectory_cost(traj) / static_cast<double>(trajectories.size());
        score.mean_expansions += static_cast<double>(traj.total_expansions()) / static_cast<double>(trajectories.size());
    }
    score.objective = evaluate_objective(trajectories, options.lambda, options.cost);
    return score;
}

CsiProvider cache_provider(CsiCache& cache) {
    return [&cache](const Task& task, const Context& ctx) -> const CsiSet& {
        return cache.get(task.model_key, *task.mdp, ctx);
    };
}

std::size_t Selector::predict(const std::vector<double>& theta) const {
    return static_cast<std::size_t>(classifier.predict(theta));
}

const Context& select_context(const Selector& selector, const std::vector<double>& theta) {
    return selector.contexts.at(selector.predict(theta));
}

std::string features_digest(const std::vector<double>& features) {
    std::ostringstream text;
    text << std::setprecision(17);
    for (double f : features) text << f << ',';
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash_string(text.str());
    return out.str();
}

namespace {

std::size_t best_context(const std::vector<ContextScore>& scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c].objective > scores[best].objective) best = c;
    return best;
}

}  // namespace

std::vector<LabelRow> label_tasks(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                                  const CsiProvider& csis, const ScoreOptions& options, std::uint64_t seed) {
    if (tasks.empty()) throw std::invalid_argument("selector training needs at least one task");
    if (contexts.empty() || contexts.front().shape() != ContextShape::universal)
        throw std::invalid_argument("the context list must start with the universal context");
    std::vector<LabelRow> labels;
    for (const Task& task : tasks) {
        LabelRow row;
        row.task_id = task.id;
        row.features_digest = features_digest(task.features);
        for (const Context& ctx : contexts) row.scores.push_back(score_context(task, ctx, csis(task, ctx), options, seed));
        row.label = best_context(row.scores);
        labels.push_back(std::move(row));
    }
    return labels;
}

void relabel(std::vector<LabelRow>& labels, double lambda) {
    for (auto& row : labels) {
        for (auto& s : row.scores) s.objective = s.mean_return - lambda * s.mean_cost;
        row.label = best_context(row.scores);
    }
}

SelectorTraining fit_selector(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                              std::vector<LabelRow> labels, const ScoreOptions& options,
                              const TrainOptions& train_options, std::uint64_t seed) {
    if (labels.size() != tasks.size()) throw std::invalid_argument("label table does not match the task list");
    std::vector<std::vector<double>> X;
    std::vector<int> Y;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        X.push_back(tasks[i].features);
        Y.push_back(static_cast<int>(labels[i].label));
    }
    SelectorTraining out;
    out.training = train_classifier(X, Y, static_cast<int>(contexts.size()), train_options, seed);
    out.selector.classifier = out.training.classifier;
    out.selector.contexts = contexts;
    out.selector.lambda = options.lambda;
    out.selector.planner = options.planner;
    out.labels = std::move(labels);
    return out;
}

SelectorTraining train_selector(const std::vector<Task>& tasks, const std::vector<Context>& contexts,
                                const CsiProvider& csis, const ScoreOptions& options,
                                const TrainOptions& train_options, std::uint64_t seed) {
    auto labels = label_tasks(tasks, contexts, csis, options, seed);
    return fit_selector(tasks, contexts, std::move(labels), options, train_options, seed);
}

void write_label_table(std::ostream& out, const std::vector<LabelRow>& labels, const std::vector<Context>& contexts,
                       const std::vector<VariableSpec>& vars) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    out << "task_id,features_digest,label";
    for (const auto& ctx : contexts) out << ',' << quote(ctx.to_string(vars));
    out << '\n' << std::setprecision(10);
    for (const auto& row : labels) {
        out << quote(row.task_id) << ',' << row.features_digest << ',' << quote(contexts.at(row.label).to_string(vars));
        for (const auto& s : row.scores) out << ',' << s.objective;
        out << '\n';
    }
}

}  // namespace camp
