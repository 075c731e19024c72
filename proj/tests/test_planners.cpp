#include <chrono>
#include <cmath>

#include "camp/domains/dinner.hpp"
#include "camp/domains/gridworld.hpp"
#include "camp/planners.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace camp;

namespace {

/// One step: pick arm 0 or 1; the successor state equals the arm and pays
/// its index.
std::shared_ptr<const FactoredMdp> two_arms() {
    auto mdp = std::make_shared<FactoredMdp>();
    mdp->state_vars = {fixtures::state_var("s", 2)};
    mdp->action_vars = {fixtures::action_var("arm", 2)};
    mdp->actions = fixtures::all_actions(mdp->action_vars);
    mdp->distribution = [](const State&, const Action& a) { return StateDistribution{{State{a[0]}, 1.0}}; };
    fixtures::complete_from_distribution(*mdp);
    mdp->reward = [](const State& s) { return static_cast<double>(s[0]); };
    mdp->reward_vars = {0};
    mdp->horizon = 1;
    mdp->max_reward = 1.0;
    mdp->deterministic = true;
    return mdp;
}

gridworld::TaskSpec corridor_with_obstacle() {
    gridworld::TaskSpec spec;
    spec.layout = gridworld::parse_layout({"#######", "#00000#", "#######"});
    spec.start = spec.layout.cell(1, 1);
    spec.goal = spec.layout.cell(1, 5);
    spec.obstacles = {spec.layout.cell(1, 2)};
    spec.obstacle_move_prob = 0.0;
    spec.horizon = 10;
    return spec;
}

double plan_return(const FactoredMdp& mdp, State s, const std::vector<Action>& plan) {
    double total = mdp.reward(s);
    for (const auto& a : plan) {
        s = most_likely_successor(mdp, s, a);
        total += mdp.reward(s);
    }
    return total;
}

std::vector<Action> ops(const FactoredMdp& mdp, const std::vector<std::string>& names) {
    std::vector<Action> out;
    for (const auto& n : names) out.push_back(dinner::op(mdp, n));
    return out;
}

}  // namespace

TEST_CASE("planner names parse in both spellings") {
    CHECK(parse_planner_kind("bfs-replan") == PlannerKind::bfs_replan);
    CHECK(parse_planner_kind("bfs_replan") == PlannerKind::bfs_replan);
    CHECK(parse_planner_kind("vi") == PlannerKind::value_iteration);
    CHECK(parse_planner_kind("optimal") == PlannerKind::optimal_search);
    CHECK(parse_planner_kind(to_string(PlannerKind::mcts)) == PlannerKind::mcts);
    CHECK_THROWS(parse_planner_kind("astar"));
    PlannerConfig cfg;
    cfg.timeout_seconds = 1e6;
    CHECK(cfg.effective_timeout() == kMaxPlanningSeconds);
}

TEST_CASE("MCTS: single action, two arms, and the time budget") {
    auto single = fixtures::chain(3);
    FactoredMdp one = *single;
    one.actions = {{1}};
    PlannerConfig cfg;
    Rng rng(1);
    CHECK(mcts_plan(one, {0}, cfg, rng).action == Action{1});

    cfg.mcts_iterations_cap = 200;
    auto arms = two_arms();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng r(seed);
        auto result = mcts_plan(*arms, {0}, cfg, r);
        CHECK(result.action == Action{1});
        CHECK(result.stats.expansions >= 100);
    }

    gridworld::GridworldConfig gc;
    Rng task_rng(4);
    auto task = gridworld::sample_task(gc, task_rng, "budget");
    PlannerConfig timed;
    timed.mcts_iterations_cap = 1 << 30;
    const auto start = std::chrono::steady_clock::now();
    auto result = mcts_plan(*task.mdp, task.initial_state, timed, rng);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed <= 0.25 * 1.2);
    CHECK(task.mdp->valid_action(result.action));
}

TEST_CASE("BFS replanning: terminal start, open room, and a blocking obstacle") {
    gridworld::TaskSpec open;
    open.layout = gridworld::parse_layout({"#######", "#00000#", "#00000#", "#00000#", "#00000#", "#00000#",
                                           "#######"});
    open.start = open.layout.cell(3, 1);
    open.goal = open.layout.cell(3, 4);
    gridworld::Gridworld world(open);
    PlannerConfig cfg;
    Rng rng(0);
    auto r = bfs_replan_plan(*world.mdp(), world.initial_state(), cfg, rng);
    CHECK(r.action == world.move_action(gridworld::right));
    CHECK(r.plan.size() == 3);

    open.start = open.goal;
    gridworld::Gridworld done(open);
    auto at_goal = bfs_replan_plan(*done.mdp(), done.initial_state(), cfg, rng);
    CHECK(at_goal.action == done.mdp()->actions.front());
    CHECK(at_goal.plan.empty());

    gridworld::Gridworld blocked(corridor_with_obstacle());
    auto cleared = bfs_replan_plan(*blocked.mdp(), blocked.initial_state(), cfg, rng);
    CHECK(cleared.action == blocked.remove_action(0));
}

TEST_CASE("BFS replanning and optimal search are seed-free") {
    dinner::DinnerConfig dc;
    auto task = dinner::make_task(dc, "d");
    PlannerConfig cfg;
    Rng a(1), b(2);
    auto p1 = bfs_replan_plan(*task.mdp, task.initial_state, cfg, a);
    auto p2 = bfs_replan_plan(*task.mdp, task.initial_state, cfg, b);
    CHECK(p1.plan == p2.plan);
    CHECK(p1.stats.expansions == p2.stats.expansions);
    auto s1 = optimal_search(*task.mdp, task.initial_state, cfg);
    auto s2 = optimal_search(*task.mdp, task.initial_state, cfg);
    CHECK(s1.plan == s2.plan);
    CHECK(s1.expansions == s2.expansions);
}

TEST_CASE("value iteration: geometric series and a hand-checked chain") {
    auto mdp = std::make_shared<FactoredMdp>();
    mdp->state_vars = {fixtures::state_var("s", 1)};
    mdp->action_vars = {fixtures::action_var("a", 1)};
    mdp->actions = {{0}};
    mdp->distribution = [](const State& s, const Action&) { return StateDistribution{{s, 1.0}}; };
    mdp->reward = [](const State&) { return 2.0; };
    mdp->horizon = 25;
    PlannerConfig cfg;
    cfg.vi_horizon = 25;
    const double gamma = 0.99;
    auto vi = value_iteration(*mdp, {0}, gamma, cfg);
    CHECK(vi.value({0}) == doctest::Approx(2.0 * (1 - std::pow(gamma, 25)) / (1 - gamma)).epsilon(1e-12));

    PlannerConfig infinite;
    auto inf = value_iteration(*mdp, {0}, 0.5, infinite);
    CHECK(inf.converged);
    CHECK(inf.value({0}) == doctest::Approx(4.0).epsilon(1e-6));

    auto chain = fixtures::chain(2);
    auto two = value_iteration(*chain, {0}, 0.9, infinite);
    CHECK(two.value({1}) == doctest::Approx(1.0));
    CHECK(two.value({0}) == doctest::Approx(0.9));
    CHECK(chain->actions[two.action_index({0})] == Action{1});
}

TEST_CASE("value iteration converges with a small Bellman residual on a gridworld") {
    auto spec = corridor_with_obstacle();
    spec.layout = gridworld::parse_layout({"#######", "#00000#", "#00000#", "#00000#", "#######"});
    spec.obstacles = {spec.layout.cell(2, 3)};
    spec.obstacle_move_prob = 0.6;
    gridworld::Gridworld world(spec);
    const auto& mdp = *world.mdp();
    PlannerConfig cfg;
    auto vi = value_iteration(mdp, world.initial_state(), mdp.discount, cfg);
    REQUIRE(vi.converged);
    CHECK(vi.residual < 1e-6);

    // One synchronous sweep in double precision as an independent check.
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
    CHECK(residual < 1e-6);
}

TEST_CASE("value iteration greedy policy survives a positive affine reward change") {
    auto base = fixtures::gated_flip();
    FactoredMdp shifted = *base;
    shifted.reward = [r = base->reward](const State& s) { return 3.0 * r(s) + 7.0; };
    PlannerConfig cfg;
    auto vi = value_iteration(*base, {0, 0, 0}, 0.9, cfg);
    auto vs = value_iteration(shifted, {0, 0, 0}, 0.9, cfg);
    for (std::size_t k = 0; k < vi.states.size(); ++k) {
        const State& s = vi.states[k];
        double q = 0.0;
        for (const auto& [next, p] : base->distribution(s, base->actions[vs.action_index(s)])) q += p * vi.value(next);
        CHECK(base->reward(s) + 0.9 * q == doctest::Approx(vi.values[k]).epsilon(1e-6));
    }
}

TEST_CASE("value iteration refuses oversized spaces") {
    gridworld::GridworldConfig gc;
    Rng rng(2);
    auto task = gridworld::sample_task(gc, rng, "big");
    PlannerConfig cfg;
    cfg.vi_state_cap = 100;
    CHECK_THROWS_AS(value_iteration(*task.mdp, task.initial_state, 0.99, cfg), StateSpaceTooLarge);
}

TEST_CASE("optimal search: empty plan at a goal and the two dinner reward settings") {
    PlannerConfig cfg;
    auto chain = fixtures::chain(3);
    auto at_goal = optimal_search(*chain, {2}, cfg);
    CHECK(at_goal.plan.empty());

    dinner::DinnerConfig steak;
    auto t1 = dinner::make_task(steak, "steak");
    auto r1 = optimal_search(*t1.mdp, t1.initial_state, cfg);
    CHECK(r1.plan.size() == 22);
    CHECK(r1.total_reward == doctest::Approx(78.0));
    CHECK(plan_return(*t1.mdp, t1.initial_state, r1.plan) == doctest::Approx(78.0));
    CHECK(r1.optimal);

    dinner::DinnerConfig ramen;
    ramen.rewards = {90.0, 50.0, 10.0};
    auto t2 = dinner::make_task(ramen, "ramen");
    auto r2 = optimal_search(*t2.mdp, t2.initial_state, cfg);
    CHECK(r2.plan == ops(*t2.mdp, dinner::meal_plan(dinner::Meal::ramen)));
    CHECK(r2.total_reward == doctest::Approx(88.0));
}

TEST_CASE("optimal search is never beaten by BFS replanning on deterministic tasks") {
    dinner::DinnerConfig dc;
    PlannerConfig cfg;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng(seed);
        auto task = dinner::sample_task(dc, rng, "d" + std::to_string(seed));
        auto best = optimal_search(*task.mdp, task.initial_state, cfg);
        auto bfs = bfs_replan_plan(*task.mdp, task.initial_state, cfg, rng);
        CHECK(best.total_reward >= plan_return(*task.mdp, task.initial_state, bfs.plan) - 1e-9);
    }
}

TEST_CASE("planner policies replay offline solutions") {
    dinner::DinnerConfig dc;
    auto task = dinner::make_task(dc, "steak");
    PlannerConfig cfg;
    cfg.kind = PlannerKind::optimal_search;
    Rng rng(0);
    auto traj = rollout(*task.mdp, make_planner_policy(task.mdp, cfg), task, rng);
    CHECK(traj.discounted_return() == doctest::Approx(78.0));
    CHECK(traj.steps.front().expansions > 0);
    std::int64_t later = 0;
    for (std::size_t t = 1; t < traj.steps.size(); ++t) later += traj.steps[t].expansions;
    CHECK(later == 0);
}
