#include "camp/planners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>

namespace camp {

namespace {

using Clock = std::chrono::steady_clock;

class Deadline {
  public:
    explicit Deadline(double seconds)
        : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds))) {}
    bool passed() const { return Clock::now() >= end_; }

  private:
    Clock::time_point end_;
};

int remaining_or_default(const FactoredMdp& mdp, int remaining) { return remaining < 0 ? mdp.horizon : remaining; }

PlanResult random_fallback(const FactoredMdp& mdp, Rng& rng, std::int64_t expansions, std::string note) {
    PlanResult r;
    r.action = random_action(mdp, rng);
    r.stats.expansions = expansions;
    r.stats.flagged = true;
    r.stats.note = std::move(note);
    return r;
}

}  // namespace

PlannerKind parse_planner_kind(std::string_view text) {
    if (text == "mcts") return PlannerKind::mcts;
    if (text == "bfs-replan" || text == "bfs_replan") return PlannerKind::bfs_replan;
    if (text == "vi" || text == "value_iteration") return PlannerKind::value_iteration;
    if (text == "optimal" || text == "optimal_search") return PlannerKind::optimal_search;
    throw std::invalid_argument("unknown planner '" + std::string(text) + "'");
}

std::string to_string(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::mcts: return "mcts";
        case PlannerKind::bfs_replan: return "bfs-replan";
        case PlannerKind::value_iteration: return "vi";
        case PlannerKind::optimal_search: return "optimal";
    }
    return "?";
}

double PlannerConfig::effective_timeout() const { return std::clamp(timeout_seconds, 0.0, kMaxPlanningSeconds); }

Action random_action(const FactoredMdp& mdp, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, mdp.actions.size() - 1);
    return mdp.actions[pick(rng)];
}

// ---------------------------------------------------------------------------
// UCT

namespace {

struct MctsNode;

struct ActionEdge {
    double total = 0.0;
    int visits = 0;
    std::unordered_map<State, std::unique_ptr<MctsNode>, VectorHash> outcomes;
};

struct MctsNode {
    std::vector<ActionEdge> edges;
    int visits = 0;
};

class Uct {
  public:
    Uct(const FactoredMdp& mdp, const PlannerConfig& cfg, Rng& rng, int horizon)
        : mdp_(mdp), cfg_(cfg), rng_(rng), horizon_(horizon) {}

    double simulate(MctsNode& node, const State& s, int depth) {
        if (depth >= horizon_ || mdp_.is_terminal(s)) return 0.0;
        if (node.edges.empty()) node.edges.resize(mdp_.actions.size());
        std::size_t a = select(node);
        State next = mdp_.sample(s, mdp_.actions[a], rng_);
        double g = mdp_.reward(next);
        if (!mdp_.is_terminal(next) && depth + 1 < horizon_) {
            auto& child = node.edges[a].outcomes[next];
            if (child) {
                g += mdp_.discount * simulate(*child, next, depth + 1);
            } else {
                child = std::make_unique<MctsNode>();
                g += mdp_.discount * random_rollout(next, depth + 1);
            }
        }
        node.visits += 1;
        node.edges[a].visits += 1;
        node.edges[a].total += g;
        return g;
    }

  private:
    std::size_t select(const MctsNode& node) const {
        for (std::size_t a = 0; a < node.edges.size(); ++a)
            if (node.edges[a].visits == 0) return a;
        double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < node.edges.size(); ++a) {
            const auto& e = node.edges[a];
            double score = e.total / e.visits + cfg_.mcts_exploration * std::sqrt(log_n / e.visits);
            if (score > best_score) {
                best_score = score;
                best = a;
            }
        }
        return best;
    }

    double random_rollout(State s, int depth) {
        double g = 0.0, discount = 1.0;
        std::uniform_int_distribution<std::size_t> pick(0, mdp_.actions.size() - 1);
        while (depth < horizon_ && !mdp_.is_terminal(s)) {
            s = mdp_.sample(s, mdp_.actions[pick(rng_)], rng_);
            g += discount * mdp_.reward(s);
            discount *= mdp_.discount;
            ++depth;
        }
        return g;
    }

    const FactoredMdp& mdp_;
    const PlannerConfig& cfg_;
    Rng& rng_;
    int horizon_;
};

}  // namespace

PlanResult mcts_plan(const FactoredMdp& mdp, const State& s, const PlannerConfig& cfg, Rng& rng,
                     int remaining_horizon) {
    if (mdp.actions.size() == 1) return {mdp.actions.front(), {}, {}, 0.0};
    if (mdp.is_dead_end(s)) return random_fallback(mdp, rng, 0, "dead end");
    const int horizon = remaining_or_default(mdp, remaining_horizon);
    Deadline deadline(std::min(cfg.mcts_budget_seconds, cfg.effective_timeout()));
    Uct uct(mdp, cfg, rng, horizon);
    MctsNode root;
    int iterations = 0;
    while (iterations < cfg.mcts_iterations_cap && !deadline.passed()) {
        uct.simulate(root, s, 0);
        ++iterations;
    }
    if (iterations == 0 || root.edges.empty()) return random_fallback(mdp, rng, 0, "no iterations completed");

    std::size_t best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < root.edges.size(); ++a) {
        const auto& e = root.edges[a];
        if (e.visits == 0) continue;
        double mean = e.total / e.visits;
        if (mean > best_mean) {
            best_mean = mean;
            best = a;
        }
    }
    PlanResult r;
    r.action = mdp.actions[best];
    r.stats.expansions = iterations;
    r.value = best_mean;
    return r;
}

// ---------------------------------------------------------------------------
// Breadth-first search with replanning

State most_likely_successor(const FactoredMdp& mdp, const State& s, const Action& a) {
    if (mdp.distribution) {
        auto dist = mdp.distribution(s, a);
        if (dist.empty()) throw ModelError("empty transition distribution");
        auto best = dist.begin();
        for (auto it = dist.begin(); it != dist.end(); ++it)
            if (it->second > best->second + 1e-12) best = it;
        return best->first;
    }
    // No distribution: a fixed-seed sample is the deterministic stand-in.
    Rng fixed(0);
    return mdp.sample(s, a, fixed);
}

PlanResult bfs_replan_plan(const FactoredMdp& mdp, const State& s, const PlannerConfig& cfg, Rng& rng,
                           int remaining_horizon) {
    PlanResult result;
    if (mdp.is_terminal(s)) {
        result.action = mdp.actions.front();
        return result;
    }
    if (mdp.actions.size() == 1) {
        result.action = mdp.actions.front();
        return result;
    }
    if (mdp.is_dead_end(s)) return random_fallback(mdp, rng, 0, "dead end");
    const int horizon = remaining_or_default(mdp, remaining_horizon);
    Deadline deadline(cfg.effective_timeout());

    struct Record {
        State state;
        std::int64_t parent;
        std::size_t action;
        int depth;
    };
    std::vector<Record> records{{s, -1, 0, 0}};
    std::unordered_map<State, std::int64_t, VectorHash> seen{{s, 0}};
    std::deque<std::int64_t> frontier{0};

    const double root_reward = mdp.reward(s);
    std::int64_t best = -1;
    double best_reward = root_reward;
    bool timed_out = false;
    std::int64_t expansions = 0;

    while (!frontier.empty()) {
        if ((expansions & 63) == 0 && deadline.passed()) {
            timed_out = true;
            break;
        }
        auto id = frontier.front();
        frontier.pop_front();
        ++expansions;
        const int depth = records[static_cast<std::size_t>(id)].depth;
        if (depth >= horizon) continue;
        const State current = records[static_cast<std::size_t>(id)].state;
        bool done = false;
        for (std::size_t a = 0; a < mdp.actions.size() && !done; ++a) {
            State next = most_likely_successor(mdp, current, mdp.actions[a]);
            if (seen.count(next)) continue;
            auto child = static_cast<std::int64_t>(records.size());
            seen.emplace(next, child);
            double r = mdp.reward(next);
            records.push_back({next, id, a, depth + 1});
            if (r > best_reward) {
                best_reward = r;
                best = child;
                if (mdp.max_reward && r >= *mdp.max_reward) done = true;
            }
            if (!mdp.is_terminal(next)) frontier.push_back(child);
        }
        if (done) break;
    }

    result.stats.expansions = expansions;
    if (best < 0) {
        auto fallback = random_fallback(mdp, rng, expansions, timed_out ? "timeout" : "no improving state");
        return fallback;
    }
    std::vector<Action> plan;
    for (auto id = best; records[static_cast<std::size_t>(id)].parent >= 0;
         id = records[static_cast<std::size_t>(id)].parent)
        plan.push_back(mdp.actions[records[static_cast<std::size_t>(id)].action]);
    std::reverse(plan.begin(), plan.end());
    result.action = plan.front();
    result.plan = std::move(plan);
    result.value = best_reward;
    if (timed_out) {
        result.stats.flagged = true;
        result.stats.note = "timeout";
    }
    return result;
}

// ---------------------------------------------------------------------------
// Value iteration

ValueIterationResult value_iteration(const FactoredMdp& mdp, const State& root, double gamma,
                                     const PlannerConfig& cfg) {
    if (!mdp.distribution) throw ModelError("value iteration needs exact transition distributions");
    ValueIterationResult out;
    struct Edge {
        std::uint32_t next;
        double probability;
    };
    // transitions[s][a] lists successors; empty for terminal states.
    std::vector<std::vector<std::vector<Edge>>> transitions;
    std::vector<double> rewards;
    std::vector<bool> terminal;

    auto intern = [&](const State& s) {
        auto [it, fresh] = out.index.emplace(s, out.states.size());
        if (fresh) {
            if (out.states.size() >= cfg.vi_state_cap)
                throw StateSpaceTooLarge("state space exceeds " + std::to_string(cfg.vi_state_cap) +
                                         " states; use an online planner");
            out.states.push_back(s);
        }
        return it->second;
    };
    intern(root);
    for (std::size_t k = 0; k < out.states.size(); ++k) {
        const State s = out.states[k];
        rewards.push_back(mdp.reward(s));
        terminal.push_back(mdp.is_terminal(s));
        transitions.emplace_back();
        if (terminal.back()) continue;
        auto& per_action = transitions.back();
        per_action.resize(mdp.actions.size());
        for (std::size_t a = 0; a < mdp.actions.size(); ++a) {
            ++out.backups;
            for (const auto& [next, p] : mdp.distribution(s, mdp.actions[a]))
                per_action[a].push_back({static_cast<std::uint32_t>(intern(next)), p});
        }
    }

    const std::size_t n = out.states.size();
    out.values.assign(n, 0.0);
    out.policy.assign(n, 0);
    auto backup = [&](std::size_t k, const std::vector<double>& source, std::size_t& argmax) {
        if (terminal[k]) return rewards[k];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < transitions[k].size(); ++a) {
            double q = 0.0;
            for (const auto& e : transitions[k][a]) q += e.probability * source[e.next];
            if (q > best + 1e-12) {
                best = q;
                argmax = a;
            }
        }
        out.backups += static_cast<std::int64_t>(transitions[k].size());
        return rewards[k] + gamma * best;
    };

    if (cfg.vi_horizon > 0) {
        // Finite horizon: synchronous stages, V_1 = R.
        std::vector<double> previous(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) previous[k] = rewards[k];
        out.values = previous;
        for (int stage = 1; stage < cfg.vi_horizon; ++stage) {
            double residual = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                out.values[k] = backup(k, previous, out.policy[k]);
                residual = std::max(residual, std::abs(out.values[k] - previous[k]));
            }
            previous = out.values;
            out.residual = residual;
            ++out.sweeps;
        }
        out.converged = true;
        return out;
    }

    Deadline deadline(cfg.effective_timeout());
    for (;;) {
        double residual = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double v = backup(k, out.values, out.policy[k]);
            residual = std::max(residual, std::abs(v - out.values[k]));
            out.values[k] = v;
        }
        ++out.sweeps;
        out.residual = residual;
        if (residual < cfg.vi_tolerance) {
            out.converged = true;
            break;
        }
        if (deadline.passed()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Uniform-cost search

SearchResult optimal_search(const FactoredMdp& mdp, const State& s0, const PlannerConfig& cfg, int horizon) {
    if (!mdp.max_reward) throw ModelError("optimal search needs an upper bound on the reward");
    const int H = horizon < 0 ? mdp.horizon : horizon;
    const double M = *mdp.max_reward;
    Deadline deadline(cfg.effective_timeout());

    auto slot_cost = [&](const State& s) {
        double c = M - mdp.reward(s);
        if (c < -1e-9) throw ModelError("reward exceeds the declared upper bound");
        return std::max(c, 0.0);
    };

    struct Record {
        std::int64_t parent;
        std::size_t action;
        int t;
        std::uint32_t state;
        double cost;
    };
    std::vector<State> states;
    std::unordered_map<State, std::uint32_t, VectorHash> state_ids;
    auto intern = [&](const State& s) {
        auto [it, fresh] = state_ids.emplace(s, static_cast<std::uint32_t>(states.size()));
        if (fresh) states.push_back(s);
        return it->second;
    };

    std::vector<Record> records;
    using Entry = std::pair<double, std::int64_t>;  // (cost, record id); id breaks ties FIFO
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::unordered_map<std::uint64_t, bool> closed;
    constexpr std::int64_t kEnd = -2;
    std::vector<std::int64_t> end_parent;  // record id for END entries

    records.push_back({-1, 0, 0, intern(s0), slot_cost(s0)});
    open.push({records[0].cost, 0});

    SearchResult result;
    std::int64_t finished = -1;
    std::int64_t best_partial = 0;
    auto accumulated = [&](const Record& r) { return (r.t + 1) * M - r.cost; };

    while (!open.empty()) {
        if ((result.expansions & 63) == 0 && deadline.passed()) break;
        auto [cost, id] = open.top();
        open.pop();
        if (id <= kEnd) {
            finished = end_parent[static_cast<std::size_t>(-id + kEnd)];
            break;
        }
        const Record rec = records[static_cast<std::size_t>(id)];
        std::uint64_t key = static_cast<std::uint64_t>(rec.state) * static_cast<std::uint64_t>(H + 1) +
                            static_cast<std::uint64_t>(rec.t);
        if (closed.count(key)) continue;
        closed[key] = true;
        ++result.expansions;
        if (accumulated(rec) > accumulated(records[static_cast<std::size_t>(best_partial)])) best_partial = id;

        const State s = states[rec.state];
        if (rec.t == H || mdp.is_terminal(s)) {
            // Pad the remaining slots with zero reward.
            end_parent.push_back(id);
            open.push({cost + (H - rec.t) * M, kEnd - static_cast<std::int64_t>(end_parent.size() - 1)});
            continue;
        }
        for (std::size_t a = 0; a < mdp.actions.size(); ++a) {
            State next = most_likely_successor(mdp, s, mdp.actions[a]);
            std::uint32_t sid = intern(next);
            std::uint64_t child_key =
                static_cast<std::uint64_t>(sid) * static_cast<std::uint64_t>(H + 1) + static_cast<std::uint64_t>(rec.t + 1);
            if (closed.count(child_key)) continue;
            records.push_back({id, a, rec.t + 1, sid, cost + slot_cost(next)});
            open.push({records.back().cost, static_cast<std::int64_t>(records.size() - 1)});
        }
    }

    std::int64_t tail = finished;
    if (tail < 0) {
        tail = best_partial;
        result.optimal = false;
    }
    const Record& last = records[static_cast<std::size_t>(tail)];
    result.total_reward = accumulated(last);
    for (auto id = tail; records[static_cast<std::size_t>(id)].parent >= 0; id = records[static_cast<std::size_t>(id)].parent)
        result.plan.push_back(mdp.actions[records[static_cast<std::size_t>(id)].action]);
    std::reverse(result.plan.begin(), result.plan.end());
    return result;
}

// ---------------------------------------------------------------------------

Policy make_planner_policy(std::shared_ptr<const FactoredMdp> mdp, const PlannerConfig& cfg) {
    switch (cfg.kind) {
        case PlannerKind::mcts:
            return [mdp, cfg](const State& s, int t, Rng& rng) {
                auto r = mcts_plan(*mdp, s, cfg, rng, mdp->horizon - t);
                return PolicyOutput{r.action, r.stats};
            };
        case PlannerKind::bfs_replan:
            return [mdp, cfg](const State& s, int t, Rng& rng) {
                auto r = bfs_replan_plan(*mdp, s, cfg, rng, mdp->horizon - t);
                return PolicyOutput{r.action, r.stats};
            };
        case PlannerKind::value_iteration: {
            auto solved = std::make_shared<std::unique_ptr<ValueIterationResult>>();
            return [mdp, cfg, solved](const State& s, int, Rng& rng) {
                PlanStats stats;
                if (mdp->is_dead_end(s)) return PolicyOutput{random_action(*mdp, rng), {0, true, "dead end"}};
                if (!*solved || !(*solved)->index.count(s)) {
                    *solved = std::make_unique<ValueIterationResult>(value_iteration(*mdp, s, mdp->discount, cfg));
                    stats.expansions = (*solved)->backups;
                    stats.flagged = !(*solved)->converged;
                }
                return PolicyOutput{mdp->actions[(*solved)->action_index(s)], stats};
            };
        }
        case PlannerKind::optimal_search: {
            struct Cache {
                std::vector<Action> plan;
                std::vector<State> expected;
                int start = 0;
            };
            auto cache = std::make_shared<Cache>();
            return [mdp, cfg, cache](const State& s, int t, Rng& rng) {
                int k = t - cache->start;
                if (k >= 0 && k < static_cast<int>(cache->plan.size()) && cache->expected[static_cast<std::size_t>(k)] == s)
                    return PolicyOutput{cache->plan[static_cast<std::size_t>(k)], {}};
                if (mdp->actions.size() == 1) return PolicyOutput{mdp->actions.front(), {}};
                if (mdp->is_dead_end(s)) return PolicyOutput{random_action(*mdp, rng), {0, true, "dead end"}};
                auto r = optimal_search(*mdp, s, cfg, mdp->horizon - t);
                PlanStats stats{r.expansions, !r.optimal, r.optimal ? "" : "timeout"};
                if (r.plan.empty()) {
                    cache->plan.clear();
                    return PolicyOutput{mdp->actions.front(), stats};
                }
                cache->plan = r.plan;
                cache->start = t;
                cache->expected.clear();
                State cur = s;
                for (const auto& a : r.plan) {
                    cache->expected.push_back(cur);
                    cur = most_likely_successor(*mdp, cur, a);
                }
                return PolicyOutput{cache->plan.front(), stats};
            };
        }
    }
    throw std::invalid_argument("unknown planner kind");
}

}  // namespace camp
