// Acceptance run: one PASS/FAIL line per criterion, then a tally. Criterion
// ids given as arguments restrict the run. The exit status is non-zero only
// if a criterion could not be evaluated at all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "camp/abstraction.hpp"
#include "camp/csi.hpp"
#include "camp/domains/dinner.hpp"
#include "camp/domains/gridworld.hpp"
#include "camp/harness.hpp"
#include "camp/learner.hpp"
#include "camp/planners.hpp"
#include "camp/selector.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace camp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CsiSet exact_csis(const FactoredMdp& mdp, const Context& ctx) {
    CsiOptions o;
    o.k1 = 2000;
    o.k2 = 8;
    o.mode = CsiMode::exact;
    Rng rng(11);
    return learn_csis(mdp, ctx, o, rng);
}

struct MethodMeans {
    double objective = 0.0, ret = 0.0, expansions = 0.0, seconds = 0.0;
    int n = 0;
};

std::map<std::string, MethodMeans> means(const std::vector<ResultRow>& rows) {
    std::map<std::string, MethodMeans> out;
    for (const auto& r : rows) {
        if (r.note.rfind("error:", 0) == 0) continue;
        auto& m = out[r.method];
        m.objective += r.objective;
        m.ret += r.ret;
        m.expansions += static_cast<double>(r.expansions);
        m.seconds += r.compute_seconds;
        ++m.n;
    }
    for (auto& [name, m] : out) {
        if (m.n == 0) continue;
        m.objective /= m.n;
        m.ret /= m.n;
        m.expansions /= m.n;
        m.seconds /= m.n;
    }
    return out;
}

Outcome abstract_model_matches_definition() {
    auto mdp = fixtures::gated_flip();
    const auto ctx = parse_context("s2=1", mdp->all_vars());
    Camp camp(mdp, ctx, exact_csis(*mdp, ctx));
    const auto& abs = *camp.abstract_mdp();
    const oracles::AbstractModel oracle{camp.kept_state_vars(), camp.kept_action_vars(), false};
    int checked = 0;
    double worst = 0.0;
    for (const auto& x : oracles::enumerate(abs.state_vars)) {
        worst = std::max(worst, std::abs(abs.reward(x) - oracle.reward(*mdp, x)));
        for (const auto& y : abs.actions) {
            const auto [to_sink, expected] = oracle.step(*mdp, ctx, x, y);
            std::map<State, double> got;
            for (const auto& [z, p] : abs.distribution(x, y)) got[z] += p;
            ++checked;
            if (to_sink) {
                if (got.size() != 1 || !camp.is_sink(got.begin()->first)) return {false, "missing sink transition"};
                continue;
            }
            if (got.size() != expected.size()) return {false, "support differs"};
            for (const auto& [z, p] : expected) worst = std::max(worst, std::abs(got[z] - p));
        }
    }
    const State sink = camp.sink();
    for (const auto& y : abs.actions)
        if (!camp.is_sink(abs.distribution(sink, y).front().first)) return {false, "sink is not absorbing"};
    if (abs.reward(sink) != camp.sink_reward()) return {false, "sink reward"};
    return {worst <= 1e-9, fmt("%d abstract transitions, max abs error %.2e", checked, worst)};
}

Outcome csi_learning_is_exact() {
    ContextSpaceOptions space;
    space.max_len = 2;
    space.conjunctions = true;
    int contexts = 0, mismatches = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto fx = fixtures::random_mdp(seed);
        for (const auto& ctx : generate_contexts(fx.mdp->all_vars(), space)) {
            CsiOptions o;
            o.k1 = 2000;
            o.k2 = 8;
            o.mode = CsiMode::exact;
            Rng rng(seed);
            ++contexts;
            if (learn_csis(*fx.mdp, ctx, o, rng).independent_pairs != oracles::ground_truth_csis(*fx.mdp, ctx))
                ++mismatches;
        }
    }
    return {mismatches == 0, fmt("%d contexts over 10 models, %d mismatches", contexts, mismatches)};
}

Outcome gridworld_relevance() {
    const auto cfg = default_config(DomainKind::gridworld, Profile::fast);
    int wrong = 0, checks = 0;
    std::string first_wrong;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(seed, "acceptance-layout"));
        gridworld::Gridworld world(gridworld::sample_task_spec(cfg.grid, rng));
        auto mdp = world.mdp();
        const auto vars = mdp->all_vars();
        for (int r = 0; r < world.spec().layout.num_rooms; ++r) {
            const auto ctx = parse_context("NOT(agent_room=" + vars[gridworld::kAgentRoom].domain[static_cast<std::size_t>(r)] + ")", vars);
            Rng csi_rng(derive_seed(seed, "acceptance-csi", static_cast<std::uint64_t>(r)));
            Camp camp(mdp, ctx, learn_csis(*mdp, ctx, cfg.csi, csi_rng));
            const auto& kept = camp.kept_state_vars();
            for (std::size_t k = 0; k < world.spec().obstacles.size(); ++k) {
                const bool in_room = world.room_of_cell(world.spec().obstacles[k]) == r;
                const bool is_kept =
                    std::find(kept.begin(), kept.end(), gridworld::obstacle_pos(k)) != kept.end();
                ++checks;
                if (is_kept == in_room) {
                    ++wrong;
                    if (first_wrong.empty()) first_wrong = fmt(" (first: layout %d room %d obstacle %d)", int(seed), r, int(k));
                }
            }
        }
    }
    return {wrong == 0, fmt("%d obstacle/room checks, %d misclassified", checks, wrong) + first_wrong};
}

std::vector<ResultRow> gridworld_rows;

Outcome tradeoff_reproduction() {
    auto cfg = default_config(DomainKind::gridworld, Profile::fast);
    cfg.methods = {MethodKind::camp, MethodKind::camp_ablation, MethodKind::pure_planning};
    cfg.lambda = 100.0;
    cfg.runs = 3;
    gridworld_rows = run_experiment(cfg);
    auto m = means(gridworld_rows);
    const auto& c = m["camp"];
    const auto& p = m["pure_planning"];
    const bool pass = c.objective > p.objective && c.expansions <= 0.5 * p.expansions && c.ret >= 0.9 * p.ret;
    return {pass, fmt("objective camp %.1f vs pure %.1f; expansions %.0f vs %.0f (ratio %.2f); return %.1f vs %.1f",
                      c.objective, p.objective, c.expansions, p.expansions, c.expansions / p.expansions, c.ret, p.ret)};
}

Outcome ablation_ordering() {
    if (gridworld_rows.empty()) return {false, "trade-off run produced no rows"};
    auto m = means(gridworld_rows);
    const auto& c = m["camp"];
    const auto& a = m["camp_ablation"];
    const auto& p = m["pure_planning"];
    const bool pass = c.expansions <= a.expansions && a.expansions <= p.expansions && c.objective >= a.objective;
    return {pass, fmt("expansions camp %.0f, ablation %.0f, pure %.0f; objective camp %.1f, ablation %.1f",
                      c.expansions, a.expansions, p.expansions, c.objective, a.objective)};
}

Outcome lambda_endpoints() {
    auto cfg = default_config(DomainKind::dinner, Profile::fast);
    cfg.runs = 1;
    ExperimentCache cache(cfg.csi, cfg.seed);

    cfg.lambda = 0.0;
    cfg.methods = {MethodKind::camp, MethodKind::pure_planning};
    auto free = means(run_experiment(cfg, &cache));
    const double gap = std::abs(free["camp"].ret - free["pure_planning"].ret) / std::abs(free["pure_planning"].ret);

    cfg.lambda = 1e6;
    cfg.methods = {MethodKind::camp, MethodKind::random_policy};
    std::map<std::string, std::map<std::string, double>> per_task;
    for (const auto& r : run_experiment(cfg, &cache)) per_task[r.task_id][r.method] = r.objective;
    int worse = 0;
    for (auto& [task, by_method] : per_task)
        if (by_method["camp"] < by_method["random_policy"] - 1e-9) ++worse;

    return {gap <= 0.05 && worse == 0,
            fmt("lambda=0: return camp %.2f vs optimal %.2f (gap %.1f%%); lambda=1e6: camp below random on %d of %d tasks",
                free["camp"].ret, free["pure_planning"].ret, 100 * gap, worse, int(per_task.size()))};
}

Outcome training_size_trend() {
    auto cfg = default_config(DomainKind::dinner, Profile::fast);
    cfg.runs = 1;
    cfg.n_train = 8;
    cfg.methods = {MethodKind::camp, MethodKind::policy_learning};
    double camp_total = 0.0, policy_total = 0.0;
    std::string per_seed;
    for (std::uint64_t seed : {0, 1, 2}) {
        cfg.seed = seed;
        auto m = means(run_experiment(cfg));
        camp_total += m["camp"].objective / 3;
        policy_total += m["policy_learning"].objective / 3;
        per_seed += fmt(" [seed %d: %.1f vs %.1f]", int(seed), m["camp"].objective, m["policy_learning"].objective);
    }
    return {camp_total >= policy_total,
            fmt("8 training tasks, mean objective camp %.1f vs policy learning %.1f;", camp_total, policy_total) +
                per_seed};
}

Outcome offline_value_iteration() {
    auto cfg = default_config(DomainKind::gridworld, Profile::fast);
    cfg.grid.width = 9;
    cfg.grid.height = 9;
    cfg.grid.horizon = 20;
    cfg.planner.kind = PlannerKind::value_iteration;
    cfg.cost.channel = CostChannel::wallclock;
    cfg.lambda = 100.0;
    cfg.runs = 1;
    cfg.n_train = 10;
    cfg.n_test = 5;
    cfg.methods = {MethodKind::camp, MethodKind::pure_planning};
    const auto rows = run_experiment(cfg);

    // Context acquisition on a cold cache, charged to the CAMP.
    double csi_seconds = 0.0, camp_seconds = 0.0, pure_seconds = 0.0;
    CsiCache cold(cfg.csi, cfg.seed);
    const auto tests = sample_tasks(cfg, 0, false, cfg.n_test);
    std::map<std::string, const Task*> by_id;
    for (const auto& dt : tests) by_id[dt.task.id] = &dt.task;
    for (const auto& r : rows) {
        if (r.note.rfind("error:", 0) == 0) return {false, "run failed: " + r.note};
        if (r.method == "camp") {
            camp_seconds += r.compute_seconds;
            const Task& task = *by_id.at(r.task_id);
            const auto start = std::chrono::steady_clock::now();
            cold.get(task.model_key, *task.mdp, parse_context(r.context, task.mdp->all_vars()));
            csi_seconds += seconds_since(start);
        } else {
            pure_seconds += r.compute_seconds;
        }
    }
    auto m = means(rows);
    const double camp_total = camp_seconds + csi_seconds;
    const bool pass = pure_seconds >= 2.0 * camp_total && m["camp"].objective >= m["pure_planning"].objective;
    return {pass, fmt("compute camp %.3fs (VI %.3fs + CSI %.3fs) vs pure VI %.3fs (%.1fx); objective %.1f vs %.1f; "
                      "return %.1f vs %.1f",
                      camp_total, camp_seconds, csi_seconds, pure_seconds, pure_seconds / camp_total,
                      m["camp"].objective, m["pure_planning"].objective, m["camp"].ret, m["pure_planning"].ret)};
}

Outcome planner_properties() {
    gridworld::GridworldConfig gc;
    Rng rng(4);
    auto task = gridworld::sample_task(gc, rng, "budget");
    PlannerConfig timed;
    timed.mcts_iterations_cap = 1 << 30;
    const auto start = std::chrono::steady_clock::now();
    mcts_plan(*task.mdp, task.initial_state, timed, rng);
    const double mcts_seconds = seconds_since(start);

    gridworld::TaskSpec spec;
    spec.layout = gridworld::parse_layout({"#######", "#00000#", "#00000#", "#00000#", "#######"});
    spec.start = spec.layout.cell(1, 1);
    spec.goal = spec.layout.cell(3, 5);
    spec.obstacles = {spec.layout.cell(2, 3)};
    spec.obstacle_move_prob = 0.6;
    gridworld::Gridworld world(spec);
    const auto& mdp = *world.mdp();
    auto vi = value_iteration(mdp, world.initial_state(), mdp.discount, {});
    double residual = 0.0;
    for (std::size_t k = 0; k < vi.states.size(); ++k) {
        const State& s = vi.states[k];
        double target = mdp.reward(s);
        if (!mdp.is_terminal(s)) {
            double best = -1e300;
            for (const auto& a : mdp.actions) {
                double q = 0.0;
                for (const auto& [next, p] : mdp.distribution(s, a)) q += p * vi.value(next);
                best = std::max(best, q);
            }
            target += mdp.discount * best;
        }
        residual = std::max(residual, std::abs(target - vi.values[k]));
    }

    dinner::DinnerConfig steak;
    dinner::DinnerConfig ramen;
    ramen.rewards = {90.0, 50.0, 10.0};
    const double net_steak = optimal_search(*dinner::build(steak), dinner::initial_state(*dinner::build(steak)), {}).total_reward;
    const double net_ramen = optimal_search(*dinner::build(ramen), dinner::initial_state(*dinner::build(ramen)), {}).total_reward;

    const bool pass = mcts_seconds <= 0.25 * 1.2 && vi.converged && residual < 1e-6 &&
                      std::abs(net_steak - 78.0) < 1e-9 && std::abs(net_ramen - 88.0) < 1e-9;
    return {pass, fmt("MCTS %.3fs of 0.25s; VI residual %.1e over %d states; dinner nets %.0f / %.0f", mcts_seconds,
                      residual, int(vi.states.size()), net_steak, net_ramen)};
}

Outcome learner_numerics() {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> width(1, 6);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int net = 0; net < 20; ++net) {
        const int in = width(rng), classes = 1 + width(rng) % 4;
        std::vector<int> hidden(static_cast<std::size_t>(width(rng) % 3));
        for (auto& h : hidden) h = width(rng);
        Classifier clf(in, classes, hidden, static_cast<std::uint64_t>(net));
        // Random biases keep pre-activations away from the ReLU kink.
        auto random_params = clf.parameters();
        for (auto& p : random_params) p = normal(rng);
        clf.set_parameters(random_params);
        std::vector<std::vector<double>> X(5, std::vector<double>(static_cast<std::size_t>(in)));
        std::vector<int> Y;
        for (auto& x : X) {
            for (auto& v : x) v = normal(rng);
            Y.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(classes)));
        }
        const auto grad = clf.loss_and_gradient(X, Y).second;
        const auto params = clf.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto plus = params, minus = params;
            plus[k] += 1e-6;
            minus[k] -= 1e-6;
            Classifier a = clf, b = clf;
            a.set_parameters(plus);
            b.set_parameters(minus);
            const double numeric = (a.loss(X, Y) - b.loss(X, Y)) / 2e-6;
            worst = std::max(worst, std::abs(numeric - grad[k]) / std::max(1e-3, std::abs(numeric) + std::abs(grad[k])));
        }
    }

    auto cfg = default_config(DomainKind::dinner, Profile::paper);
    auto train = sample_tasks(cfg, 0, true, 20);
    std::vector<Task> tasks;
    for (const auto& dt : train) tasks.push_back(dt.task);
    const auto contexts = context_space(cfg, *tasks.front().mdp);
    CsiCache cache(cfg.csi, cfg.seed);
    ScoreOptions so;
    so.planner = cfg.planner;
    so.lambda = cfg.lambda;
    so.cost = cfg.cost;
    auto labels = label_tasks(tasks, contexts, cache_provider(cache), so, run_seed(cfg, 0));
    const auto fit = fit_selector(tasks, contexts, std::move(labels), so, cfg.selector_train, 0);
    const bool pass = worst < 1e-4 && fit.training.final_loss <= 1e-3;
    return {pass, fmt("max relative gradient error %.1e on 20 networks; selector loss %.2e after %d epochs", worst,
                      fit.training.final_loss, fit.training.epochs)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    // The ablation ordering reads the trade-off run's rows.
    if (only.count(5)) only.insert(4);
    const std::vector<Criterion> criteria{
        {1, "abstract model matches its definition", 1.0, abstract_model_matches_definition},
        {2, "CSI learning is exact with exhaustive budgets", 30.0, csi_learning_is_exact},
        {3, "gridworld obstacle relevance", 60.0, gridworld_relevance},
        {4, "gridworld trade-off (BFS replanning)", 600.0, tradeoff_reproduction},
        {5, "ablation ordering", 600.0, ablation_ordering},
        {6, "lambda sweep endpoints on dinner", 300.0, lambda_endpoints},
        {7, "small training sets on dinner", 600.0, training_size_trend},
        {8, "offline value iteration", 900.0, offline_value_iteration},
        {9, "planner properties", 60.0, planner_properties},
        {10, "learner numerics", 120.0, learner_numerics},
    };
    int passed = 0, errors = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
            ++errors;
        }
        const double elapsed = seconds_since(start);
        if (elapsed > c.limit_seconds) {
            out.pass = false;
            out.detail += fmt("; exceeded %.0fs limit", c.limit_seconds);
        }
        passed += out.pass;
        std::printf("%s criterion %d: %s (%.1fs) %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), elapsed,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", passed, ran);
    return errors == 0 ? 0 : 1;
}
