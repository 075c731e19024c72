#include "camp/harness.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace camp {

DomainKind parse_domain(std::string_view text) {
    if (text == "gridworld") return DomainKind::gridworld;
    if (text == "dinner") return DomainKind::dinner;
    throw std::invalid_argument("unknown domain '" + std::string(text) + "'");
}

std::string to_string(DomainKind kind) { return kind == DomainKind::gridworld ? "gridworld" : "dinner"; }

namespace {

const std::vector<std::pair<MethodKind, std::string>>& method_names() {
    static const std::vector<std::pair<MethodKind, std::string>> names{
        {MethodKind::camp, "camp"},
        {MethodKind::camp_ablation, "camp_ablation"},
        {MethodKind::pure_planning, "pure_planning"},
        {MethodKind::plan_transfer, "plan_transfer"},
        {MethodKind::policy_learning, "policy_learning"},
        {MethodKind::task_conditioned_policy, "task_conditioned_policy"},
        {MethodKind::random_policy, "random_policy"},
    };
    return names;
}

}  // namespace

MethodKind parse_method(std::string_view text) {
    for (const auto& [kind, name] : method_names())
        if (name == text) return kind;
    throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

std::string to_string(MethodKind kind) {
    for (const auto& [k, name] : method_names())
        if (k == kind) return name;
    return "?";
}

const std::vector<MethodKind>& all_methods() {
    static const std::vector<MethodKind> methods = [] {
        std::vector<MethodKind> out;
        for (const auto& entry : method_names()) out.push_back(entry.first);
        return out;
    }();
    return methods;
}

Profile parse_profile(std::string_view text) {
    if (text == "paper") return Profile::paper;
    if (text == "fast") return Profile::fast;
    throw std::invalid_argument("unknown profile '" + std::string(text) + "'");
}

std::string to_string(Profile profile) { return profile == Profile::paper ? "paper" : "fast"; }

SweepKind parse_sweep_kind(std::string_view text) {
    if (text == "lambda") return SweepKind::lambda;
    if (text == "n_train" || text == "n-train") return SweepKind::n_train;
    throw std::invalid_argument("unknown sweep kind '" + std::string(text) + "'");
}

ExperimentConfig default_config(DomainKind domain, Profile profile) {
    ExperimentConfig cfg;
    cfg.domain = domain;
    cfg.methods = all_methods();
    cfg.contexts.max_len = 2;
    cfg.contexts.conjunctions = false;
    if (domain == DomainKind::gridworld) {
        cfg.planner.kind = PlannerKind::bfs_replan;
        cfg.lambda = 100.0;
        cfg.n_train = 50;
        cfg.n_test = 10;
        cfg.csi.k1 = cfg.csi.k2 = 50;
        cfg.contexts.allowed = std::vector<std::string>{"agent_room"};
    } else {
        cfg.planner.kind = PlannerKind::optimal_search;
        cfg.lambda = 250.0;
        cfg.n_train = 20;
        cfg.n_test = 25;
        cfg.csi.k1 = 3000;
        cfg.cost.seconds_per_expansion = 1e-4;
        cfg.csi.k2 = 40;
        cfg.contexts.allowed = std::vector<std::string>{"location"};
    }
    cfg.runs = 10;
    if (profile == Profile::fast) {
        cfg.runs = 3;
        cfg.selector_train.max_epochs = 5000;
        cfg.policy_train.max_epochs = 2000;
        if (domain == DomainKind::gridworld) cfg.n_train = 30;
    }
    return cfg;
}

std::uint64_t run_seed(const ExperimentConfig& cfg, int run) {
    return derive_seed(cfg.seed, "run", static_cast<std::uint64_t>(run));
}

DomainTask make_domain_task(DomainKind domain, const std::string& manifest, const std::string& id) {
    DomainTask out;
    out.manifest = manifest;
    if (domain == DomainKind::gridworld) {
        auto world = std::make_shared<const gridworld::Gridworld>(gridworld::read_manifest(manifest));
        out.task.id = id;
        out.task.initial_state = world->initial_state();
        out.task.features = world->render(out.task.initial_state);
        out.task.mdp = world->mdp();
        out.task.model_key = world->model_key();
        out.state_features = [world](const State& s) { return world->render(s); };
    } else {
        out.task = dinner::make_task(dinner::read_manifest(manifest), id);
        out.state_features = [](const State& s) { return dinner::state_features(s); };
    }
    return out;
}

std::vector<DomainTask> sample_tasks(const ExperimentConfig& cfg, int run, bool train, int count) {
    Rng rng(derive_seed(run_seed(cfg, run), train ? "train" : "test"));
    std::vector<DomainTask> tasks;
    for (int i = 0; i < count; ++i) {
        const std::string manifest = cfg.domain == DomainKind::gridworld
                                         ? gridworld::write_manifest(gridworld::sample_task_spec(cfg.grid, rng))
                                         : dinner::write_manifest(dinner::sample_config(cfg.dinner, rng));
        const std::string id = "r" + std::to_string(run) + (train ? "-train" : "-test") + std::to_string(i);
        tasks.push_back(make_domain_task(cfg.domain, manifest, id));
    }
    return tasks;
}

std::vector<Context> context_space(const ExperimentConfig& cfg, const FactoredMdp& mdp) {
    const auto vars = mdp.all_vars();
    auto contexts = generate_contexts(vars, cfg.contexts);
    std::set<std::size_t> used;
    std::size_t table_size = 1;
    for (const auto& ctx : contexts)
        for (auto v : ctx.variables())
            if (used.insert(v).second) table_size *= static_cast<std::size_t>(vars[v].size());
    if (table_size > 4096) return contexts;

    // Keep the first context of each truth table over the constrained variables.
    std::set<std::vector<bool>> seen;
    std::vector<Context> out;
    for (auto& ctx : contexts) {
        std::vector<bool> table;
        JointAssignment u(vars.size(), 0);
        for (std::size_t code = 0; code < table_size; ++code) {
            std::size_t rest = code;
            for (auto v : used) {
                const auto n = static_cast<std::size_t>(vars[v].size());
                u[v] = static_cast<int>(rest % n);
                rest /= n;
            }
            table.push_back(ctx.contains(u));
        }
        if (seen.insert(std::move(table)).second) out.push_back(std::move(ctx));
    }
    return out;
}

Policy plan_transfer_policy(std::vector<std::vector<std::size_t>> plans, std::shared_ptr<const FactoredMdp> mdp) {
    if (plans.empty()) throw std::invalid_argument("plan transfer needs at least one training plan");
    return [plans = std::move(plans), mdp](const State&, int t, Rng& rng) {
        std::map<std::size_t, int> votes;
        for (const auto& plan : plans)
            if (static_cast<std::size_t>(t) < plan.size()) ++votes[plan[static_cast<std::size_t>(t)]];
        PolicyOutput out;
        if (votes.empty()) {
            out.action = random_action(*mdp, rng);
            out.stats.flagged = true;
            out.stats.note = "training plans exhausted";
            return out;
        }
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it)
            if (it->second > best->second) best = it;
        out.action = mdp->actions.at(best->first);
        return out;
    };
}

namespace {

std::size_t action_index(const FactoredMdp& mdp, const Action& a) {
    auto it = std::find(mdp.actions.begin(), mdp.actions.end(), a);
    if (it == mdp.actions.end()) throw ModelError("action is not in the model's action set");
    return static_cast<std::size_t>(it - mdp.actions.begin());
}

Policy classifier_policy(std::shared_ptr<const Classifier> clf, std::shared_ptr<const FactoredMdp> mdp,
                         std::function<std::vector<double>(const State&)> features, std::vector<double> theta) {
    return [clf, mdp, features, theta](const State& s, int, Rng&) {
        std::vector<double> x = features(s);
        x.insert(x.end(), theta.begin(), theta.end());
        PolicyOutput out;
        out.action = mdp->actions.at(static_cast<std::size_t>(clf->predict(x)));
        return out;
    };
}

// Everything one run needs besides the test tasks.
struct RunState {
    int run = 0;
    std::uint64_t seed = 0;
    std::vector<DomainTask> train;
    std::vector<Context> contexts;
    std::optional<Selector> selector;
    std::vector<Trajectory> train_trajectories;
    std::shared_ptr<const Classifier> state_policy;
    std::shared_ptr<const Classifier> conditioned_policy;
};

bool uses(const ExperimentConfig& cfg, MethodKind kind) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), kind) != cfg.methods.end();
}

std::string cache_key(std::initializer_list<std::string> parts) {
    std::string key;
    for (const auto& p : parts) key += p + "|";
    return key;
}

Trajectory cached_rollout(ExperimentCache* cache, const std::string& key, const std::function<Trajectory()>& run) {
    if (cache) {
        auto it = cache->trajectories.find(key);
        if (it != cache->trajectories.end()) return it->second;
    }
    Trajectory traj = run();
    if (cache) cache->trajectories.emplace(key, traj);
    return traj;
}

void prepare_training(const ExperimentConfig& cfg, RunState& rs, ExperimentCache& cache) {
    const bool need_camp = uses(cfg, MethodKind::camp) || uses(cfg, MethodKind::camp_ablation);
    const bool need_plans = uses(cfg, MethodKind::plan_transfer) || uses(cfg, MethodKind::policy_learning) ||
                            uses(cfg, MethodKind::task_conditioned_policy);
    if (rs.train.empty()) {
        if (need_camp || need_plans) throw std::invalid_argument("learning methods need at least one training task");
        return;
    }
    rs.contexts = context_space(cfg, *rs.train.front().task.mdp);
    const std::string planner = to_string(cfg.planner.kind);

    if (need_camp && !cfg.forced_context) {
        ScoreOptions so;
        so.planner = cfg.planner;
        so.lambda = cfg.lambda;
        so.n_rollouts = cfg.score_rollouts;
        so.cost = cfg.cost;
        CsiProvider csis = cache_provider(cache.csis);
        std::vector<Task> tasks;
        std::vector<LabelRow> labels;
        for (const auto& dt : rs.train) {
            tasks.push_back(dt.task);
            const std::string key = cache_key({planner, std::to_string(rs.seed), dt.task.id});
            auto it = cache.labels.find(key);
            if (it == cache.labels.end()) {
                auto row = label_tasks({dt.task}, rs.contexts, csis, so, rs.seed);
                it = cache.labels.emplace(key, row.front()).first;
            }
            labels.push_back(it->second);
        }
        relabel(labels, cfg.lambda);
        auto trained = fit_selector(tasks, rs.contexts, std::move(labels), so, cfg.selector_train,
                                    derive_seed(rs.seed, "selector"));
        rs.selector = std::move(trained.selector);
    }

    if (!need_plans) return;
    for (const auto& dt : rs.train) {
        const std::string key = cache_key({"train", planner, std::to_string(rs.seed), dt.task.id});
        rs.train_trajectories.push_back(cached_rollout(&cache, key, [&] {
            Rng rng(derive_seed(rs.seed, dt.task.id));
            return rollout(*dt.task.mdp, make_planner_policy(dt.task.mdp, cfg.planner), dt.task, rng);
        }));
    }
    std::vector<std::vector<double>> X, Xc;
    std::vector<int> Y;
    for (std::size_t i = 0; i < rs.train.size(); ++i) {
        const auto& dt = rs.train[i];
        for (const auto& step : rs.train_trajectories[i].steps) {
            if (step.action.empty()) continue;
            X.push_back(dt.state_features(step.state));
            Xc.push_back(X.back());
            Xc.back().insert(Xc.back().end(), dt.task.features.begin(), dt.task.features.end());
            Y.push_back(static_cast<int>(action_index(*dt.task.mdp, step.action)));
        }
    }
    if (X.empty()) return;
    const int n_actions = static_cast<int>(rs.train.front().task.mdp->actions.size());
    if (uses(cfg, MethodKind::policy_learning))
        rs.state_policy = std::make_shared<const Classifier>(
            train_classifier(X, Y, n_actions, cfg.policy_train, derive_seed(rs.seed, "policy")).classifier);
    if (uses(cfg, MethodKind::task_conditioned_policy))
        rs.conditioned_policy = std::make_shared<const Classifier>(
            train_classifier(Xc, Y, n_actions, cfg.policy_train, derive_seed(rs.seed, "conditioned")).classifier);
}

ResultRow make_row(const ExperimentConfig& cfg, const RunState& rs, MethodKind method, const Task& task, int rollout_index) {
    ResultRow row;
    row.method = to_string(method);
    row.domain = to_string(cfg.domain);
    row.planner = to_string(cfg.planner.kind);
    row.task_id = task.id;
    row.seed = rs.seed;
    row.run = rs.run;
    row.rollout = rollout_index;
    row.n_train = cfg.n_train;
    row.cost_channel = to_string(cfg.cost.channel);
    row.lambda = cfg.lambda;
    return row;
}

void fill_row(ResultRow& row, const Trajectory& traj, const CostModel& cost) {
    row.ret = traj.discounted_return();
    row.compute_seconds = traj.total_seconds();
    row.expansions = traj.total_expansions();
    row.cost = cost.trajectory_cost(traj);
    row.objective = row.ret - row.lambda * row.cost;
    row.flagged = traj.any_flagged();
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, ExperimentCache* shared_cache) {
    if (cfg.runs < 1 || cfg.n_test < 1 || cfg.n_train < 0) throw std::invalid_argument("runs and n_test must be positive");
    if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    ExperimentCache local(cfg.csi, cfg.seed);
    ExperimentCache& cache = shared_cache ? *shared_cache : local;
    const std::string planner = to_string(cfg.planner.kind);
    std::vector<ResultRow> rows;

    for (int run = 0; run < cfg.runs; ++run) {
        RunState rs;
        rs.run = run;
        rs.seed = run_seed(cfg, run);
        rs.train = sample_tasks(cfg, run, true, cfg.n_train);
        const auto test = sample_tasks(cfg, run, false, cfg.n_test);
        if (rs.train.empty() && !test.empty()) rs.contexts = context_space(cfg, *test.front().task.mdp);

        std::string training_error;
        try {
            prepare_training(cfg, rs, cache);
        } catch (const std::exception& e) {
            training_error = e.what();
        }
        if (rs.contexts.empty() && !test.empty()) rs.contexts = context_space(cfg, *test.front().task.mdp);

        std::vector<std::vector<std::size_t>> plans;
        for (std::size_t i = 0; i < rs.train_trajectories.size(); ++i) {
            std::vector<std::size_t> plan;
            for (const auto& step : rs.train_trajectories[i].steps)
                if (!step.action.empty()) plan.push_back(action_index(*rs.train[i].task.mdp, step.action));
            plans.push_back(std::move(plan));
        }
        const std::string n_train = std::to_string(cfg.n_train);

        for (const auto& dt : test) {
            const Task& task = dt.task;
            for (MethodKind method : cfg.methods) {
                for (int i = 0; i < cfg.eval_rollouts; ++i) {
                    ResultRow row = make_row(cfg, rs, method, task, i);
                    try {
                        if (!training_error.empty() && method != MethodKind::pure_planning &&
                            method != MethodKind::random_policy)
                            throw std::runtime_error("training failed: " + training_error);
                        std::string key;
                        std::function<Policy()> make_policy;
                        switch (method) {
                            case MethodKind::pure_planning:
                                make_policy = [&] { return make_planner_policy(task.mdp, cfg.planner); };
                                key = cache_key({row.method, planner, std::to_string(rs.seed), task.id, std::to_string(i)});
                                break;
                            case MethodKind::random_policy:
                                make_policy = [&] {
                                    return Policy([mdp = task.mdp](const State&, int, Rng& rng) {
                                        return PolicyOutput{random_action(*mdp, rng), {}};
                                    });
                                };
                                key = cache_key({row.method, std::to_string(rs.seed), task.id, std::to_string(i)});
                                break;
                            case MethodKind::camp:
                            case MethodKind::camp_ablation: {
                                const Context ctx = cfg.forced_context ? rs.contexts.at(*cfg.forced_context)
                                                                       : select_context(*rs.selector, task.features);
                                row.context = ctx.to_string(task.mdp->all_vars());
                                CampOptions options;
                                options.project = method == MethodKind::camp;
                                make_policy = [&, ctx, options] {
                                    const CsiSet& csis = cache.csis.get(task.model_key, *task.mdp, ctx);
                                    return make_camp_policy(std::make_shared<const Camp>(task.mdp, ctx, csis, options),
                                                            cfg.planner);
                                };
                                key = cache_key({row.method, planner, std::to_string(rs.seed), task.id, std::to_string(i),
                                                 row.context});
                                break;
                            }
                            case MethodKind::plan_transfer:
                                if (plans.empty()) throw std::runtime_error("no training plans");
                                make_policy = [&] { return plan_transfer_policy(plans, task.mdp); };
                                key = cache_key({row.method, planner, std::to_string(rs.seed), task.id, std::to_string(i), n_train});
                                break;
                            case MethodKind::policy_learning:
                            case MethodKind::task_conditioned_policy: {
                                const bool conditioned = method == MethodKind::task_conditioned_policy;
                                auto clf = conditioned ? rs.conditioned_policy : rs.state_policy;
                                if (!clf) throw std::runtime_error("no trained policy");
                                make_policy = [&, clf, conditioned] {
                                    return classifier_policy(clf, task.mdp, dt.state_features,
                                                             conditioned ? task.features : std::vector<double>{});
                                };
                                key = cache_key({row.method, planner, std::to_string(rs.seed), task.id, std::to_string(i), n_train});
                                break;
                            }
                        }
                        const Trajectory traj = cached_rollout(&cache, key, [&] {
                            Rng rng(derive_seed(rs.seed, task.id, static_cast<std::uint64_t>(i)));
                            return rollout(*task.mdp, make_policy(), task, rng);
                        });
                        fill_row(row, traj, cfg.cost);
                    } catch (const std::exception& e) {
                        row.flagged = true;
                        row.note = std::string("error: ") + e.what();
                    }
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

std::vector<ResultRow> sweep(SweepKind kind, const std::vector<double>& grid, const ExperimentConfig& base,
                             ExperimentCache* shared_cache) {
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    ExperimentCache local(base.csi, base.seed);
    ExperimentCache& cache = shared_cache ? *shared_cache : local;
    std::vector<ResultRow> rows;
    for (double value : grid) {
        ExperimentConfig cfg = base;
        if (kind == SweepKind::lambda)
            cfg.lambda = value;
        else
            cfg.n_train = static_cast<int>(value);
        std::vector<ResultRow> point;
        try {
            point = run_experiment(cfg, &cache);
        } catch (const std::exception& e) {
            ResultRow row;
            row.domain = to_string(cfg.domain);
            row.planner = to_string(cfg.planner.kind);
            row.lambda = cfg.lambda;
            row.n_train = cfg.n_train;
            row.flagged = true;
            row.note = std::string("error: ") + e.what();
            point.push_back(row);
        }
        rows.insert(rows.end(), point.begin(), point.end());
    }
    return rows;
}

}  // namespace camp
