#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "camp/domains/dinner.hpp"
#include "camp/domains/gridworld.hpp"
#include "camp/planners.hpp"
#include "doctest.h"

using namespace camp;
namespace gw = camp::gridworld;

namespace {

gw::TaskSpec open_room() {
    gw::TaskSpec spec;
    spec.layout = gw::parse_layout({"######", "#0000#", "#0000#", "#0000#", "######"});
    spec.start = spec.layout.cell(1, 1);
    spec.goal = spec.layout.cell(3, 4);
    spec.obstacles = {spec.layout.cell(2, 2)};
    spec.obstacle_move_prob = 0.5;
    return spec;
}

/// Free cells reachable from `from` over 4-neighbours.
std::set<int> flood(const gw::Layout& layout, int from) {
    std::set<int> seen{from};
    std::deque<int> queue{from};
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        for (int n : layout.neighbours(c))
            if (seen.insert(n).second) queue.push_back(n);
    }
    return seen;
}

}  // namespace

TEST_CASE("gridworld distributions are normalised and match their samples") {
    gw::GridworldConfig cfg;
    Rng rng(3);
    auto task = gw::sample_task(cfg, rng, "g");
    const auto& mdp = *task.mdp;
    State s = task.initial_state;
    for (int step = 0; step < 15; ++step) {
        for (const auto& a : mdp.actions) {
            const auto d = mdp.distribution(s, a);
            double total = 0.0;
            for (const auto& entry : d) total += entry.second;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            const auto m = mdp.marginals(s, a);
            for (std::size_t j = 0; j < m.size(); ++j) {
                std::vector<double> from_joint(m[j].size(), 0.0);
                for (const auto& [next, p] : d) from_joint[static_cast<std::size_t>(next[j])] += p;
                for (std::size_t v = 0; v < m[j].size(); ++v) CHECK(m[j][v] == doctest::Approx(from_joint[v]));
            }
        }
        const auto& a = mdp.actions[static_cast<std::size_t>(step) % mdp.actions.size()];
        std::map<State, int> counts;
        for (int n = 0; n < 2000; ++n) ++counts[mdp.sample(s, a, rng)];
        for (const auto& [next, p] : mdp.distribution(s, a)) CHECK(std::abs(counts[next] / 2000.0 - p) < 0.05);
        s = mdp.sample(s, random_action(mdp, rng), rng);
        if (mdp.is_terminal(s)) break;
    }
}

TEST_CASE("sampled gridworld tasks follow the room layout and are solvable") {
    gw::GridworldConfig cfg;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto spec = gw::sample_task_spec(cfg, rng);
        const auto& L = spec.layout;
        CHECK(L.num_rooms == 4);
        CHECK(L.room[static_cast<std::size_t>(spec.start)] == 0);
        CHECK(L.room[static_cast<std::size_t>(spec.goal)] == 3);
        REQUIRE(spec.obstacles.size() == 2);
        std::set<int> rooms;
        for (int c : spec.obstacles) rooms.insert(L.room[static_cast<std::size_t>(c)]);
        CHECK(rooms == std::set<int>{1, 2});
        CHECK(flood(L, spec.start).count(spec.goal) == 1);
    }
}

TEST_CASE("gridworld manifests round-trip") {
    gw::GridworldConfig cfg;
    Rng rng(5);
    const auto spec = gw::sample_task_spec(cfg, rng);
    const auto back = gw::read_manifest(gw::write_manifest(spec));
    CHECK(back.layout.room == spec.layout.room);
    CHECK(back.layout.doorway == spec.layout.doorway);
    CHECK(back.start == spec.start);
    CHECK(back.goal == spec.goal);
    CHECK(back.obstacles == spec.obstacles);
    CHECK(gw::Gridworld(back).model_key() == gw::Gridworld(spec).model_key());
    CHECK_THROWS(gw::read_manifest("garbage"));
}

TEST_CASE("gridworld dynamics: walls, goal, collisions and removal") {
    gw::Gridworld world(open_room());
    const auto& mdp = *world.mdp();
    Rng rng(0);
    State s = world.initial_state();
    CHECK(world.cell_of(s, gw::kAgentPos) == open_room().start);

    // Walking into a wall stays put.
    const State up = most_likely_successor(mdp, s, world.move_action(gw::up));
    CHECK(world.cell_of(up, gw::kAgentPos) == open_room().start);

    // Removal needs adjacency.
    State far = most_likely_successor(mdp, s, world.remove_action(0));
    CHECK(far[gw::obstacle_alive(0)] == 1);
    State next = most_likely_successor(mdp, s, world.move_action(gw::right));
    State removed = most_likely_successor(mdp, next, world.remove_action(0));
    CHECK(removed[gw::obstacle_alive(0)] == 0);

    // Stepping onto a static obstacle sends the agent back to its start.
    auto still = open_room();
    still.obstacle_move_prob = 0.0;
    still.obstacles = {still.layout.cell(1, 3)};
    gw::Gridworld blocked(still);
    State b = most_likely_successor(*blocked.mdp(), blocked.initial_state(), blocked.move_action(gw::right));
    b = blocked.mdp()->sample(b, blocked.move_action(gw::right), rng);
    CHECK(blocked.cell_of(b, gw::kAgentPos) == still.start);

    // The goal pays once and ends the episode.
    auto at_goal = open_room();
    at_goal.start = at_goal.layout.cell(3, 3);
    gw::Gridworld near(at_goal);
    State g = most_likely_successor(*near.mdp(), near.initial_state(), near.move_action(gw::right));
    CHECK(near.mdp()->reward(g) == 1000.0);
    CHECK(near.mdp()->is_terminal(g));
    CHECK(near.mdp()->reward(near.initial_state()) == 0.0);
}

TEST_CASE("gridworld renders four occupancy planes") {
    gw::Gridworld world(open_room());
    const auto& spec = world.spec();
    const auto image = world.render(world.initial_state());
    const std::size_t plane = static_cast<std::size_t>(spec.layout.width * spec.layout.height);
    REQUIRE(image.size() == 4 * plane);
    auto sum = [&](std::size_t k) {
        return std::accumulate(image.begin() + static_cast<long>(k * plane),
                               image.begin() + static_cast<long>((k + 1) * plane), 0.0);
    };
    CHECK(sum(0) == 18.0);
    CHECK(sum(1) == 1.0);
    CHECK(sum(2) == 1.0);
    CHECK(sum(3) == 1.0);
    CHECK(world.state_space_size() == 12.0 * 12.0 * 2.0);
}

TEST_CASE("dinner meals take their shortest plan lengths") {
    dinner::DinnerConfig cfg;
    auto mdp = dinner::build(cfg);
    CHECK(mdp->deterministic);
    CHECK(mdp->max_reward == 100.0);
    for (auto meal : {dinner::Meal::ramen, dinner::Meal::sandwich, dinner::Meal::steak}) {
        const auto plan = dinner::meal_plan(meal);
        CHECK(plan.size() == static_cast<std::size_t>(dinner::kPlanLengths[static_cast<std::size_t>(meal)]));
        State s = dinner::initial_state(*mdp);
        double total = mdp->reward(s);
        for (std::size_t k = 0; k < plan.size(); ++k) {
            CHECK_FALSE(mdp->is_terminal(s));
            const auto d = mdp->distribution(s, dinner::op(*mdp, plan[k]));
            REQUIRE(d.size() == 1);
            CHECK(d[0].second == 1.0);
            s = d[0].first;
            total += mdp->reward(s);
        }
        CHECK(mdp->is_terminal(s));
        CHECK(total == doctest::Approx(cfg.rewards[static_cast<std::size_t>(meal)] - static_cast<double>(plan.size())));
    }
}

TEST_CASE("dinner operators need their location") {
    dinner::DinnerConfig cfg;
    auto mdp = dinner::build(cfg);
    const int n_locations = mdp->state_vars[0].size();
    State cur = dinner::initial_state(*mdp);
    int gated = 0;
    for (const auto& name : dinner::meal_plan(dinner::Meal::steak)) {
        const Action a = dinner::op(*mdp, name);
        const State next = most_likely_successor(*mdp, cur, a);
        if (next[0] == cur[0] && next != cur) {
            for (int loc = 0; loc < n_locations; ++loc) {
                if (loc == cur[0]) continue;
                State elsewhere = cur;
                elsewhere[0] = loc;
                CHECK(most_likely_successor(*mdp, elsewhere, a) == elsewhere);
                ++gated;
            }
        }
        cur = next;
    }
    CHECK(gated > 0);
    CHECK_THROWS(dinner::op(*mdp, "no-such-op"));
}

TEST_CASE("dinner tasks: sampled rewards, manifests and features") {
    dinner::DinnerConfig cfg;
    Rng rng(4);
    for (int n = 0; n < 20; ++n) {
        const auto c = dinner::sample_config(cfg, rng);
        for (double r : c.rewards) {
            CHECK(r >= cfg.reward_min);
            CHECK(r <= cfg.reward_max);
        }
        const auto back = dinner::read_manifest(dinner::write_manifest(c));
        CHECK(back.rewards == c.rewards);
        CHECK(back.horizon == c.horizon);
        CHECK(dinner::model_key(back) == dinner::model_key(c));
    }
    const auto task = dinner::make_task(cfg, "t");
    CHECK(task.features == std::vector<double>{10.0, 50.0, 100.0});
    const auto f = dinner::state_features(task.initial_state);
    CHECK(f.size() == 3 + task.initial_state.size() - 1);
    CHECK(std::accumulate(f.begin(), f.begin() + 3, 0.0) == 1.0);
}
