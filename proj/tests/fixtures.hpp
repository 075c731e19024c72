#pragma once

// Small hand-built models shared by the unit and acceptance tests.

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "camp/core.hpp"

namespace fixtures {

using camp::Action;
using camp::FactoredMdp;
using camp::Marginals;
using camp::Rng;
using camp::State;
using camp::StateDistribution;
using camp::VarKind;
using camp::VariableSpec;

inline VariableSpec state_var(std::string name, int size) {
    VariableSpec v{std::move(name), VarKind::state, {}};
    for (int i = 0; i < size; ++i) v.domain.push_back(std::to_string(i));
    return v;
}

inline VariableSpec action_var(std::string name, int size) {
    VariableSpec v = state_var(std::move(name), size);
    v.kind = VarKind::action;
    return v;
}

inline std::vector<Action> all_actions(const std::vector<VariableSpec>& action_vars) {
    std::vector<Action> out{Action(action_vars.size(), 0)};
    for (std::size_t j = 0; j < action_vars.size(); ++j) {
        std::vector<Action> next;
        for (const auto& a : out)
            for (int v = 0; v < action_vars[j].size(); ++v) {
                Action b = a;
                b[j] = v;
                next.push_back(b);
            }
        out = std::move(next);
    }
    return out;
}

/// Fills `sample` from a `distribution` callback.
inline void complete_from_distribution(FactoredMdp& mdp) {
    auto dist = mdp.distribution;
    mdp.sample = [dist](const State& s, const Action& a, Rng& rng) {
        const auto d = dist(s, a);
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        for (const auto& [next, p] : d) {
            if (u < p) return next;
            u -= p;
        }
        return d.back().first;
    };
}

/// Deterministic chain 0 -> 1 -> ... -> n-1 under action `advance` (value 1);
/// reward 1 at the last state, which is terminal.
inline std::shared_ptr<const FactoredMdp> chain(int n, int horizon = 10) {
    auto mdp = std::make_shared<FactoredMdp>();
    mdp->state_vars = {state_var("pos", n)};
    mdp->action_vars = {action_var("move", 2)};
    mdp->actions = all_actions(mdp->action_vars);
    mdp->distribution = [n](const State& s, const Action& a) {
        return StateDistribution{{State{a[0] == 1 ? std::min(s[0] + 1, n - 1) : s[0]}, 1.0}};
    };
    complete_from_distribution(*mdp);
    mdp->reward = [n](const State& s) { return s[0] == n - 1 ? 1.0 : 0.0; };
    mdp->terminal = [n](const State& s) { return s[0] == n - 1; };
    mdp->reward_vars = {0};
    mdp->horizon = horizon;
    mdp->discount = 1.0;
    mdp->max_reward = 1.0;
    mdp->deterministic = true;
    return mdp;
}

/// Three binary state variables, two binary actions, reward on s1:
///   s1' = s1 xor (a1 and s2) with probability 0.9, else s1
///   s2' = s2 when s2 = 1, else s3
///   s3' = a2 with probability 0.8, else 1 - a2
/// With s2 = 1 imposed, s2 no longer reads s3, so s3 and a2 stop mattering.
inline std::shared_ptr<const FactoredMdp> gated_flip() {
    auto mdp = std::make_shared<FactoredMdp>();
    mdp->state_vars = {state_var("s1", 2), state_var("s2", 2), state_var("s3", 2)};
    mdp->action_vars = {action_var("a1", 2), action_var("a2", 2)};
    mdp->actions = all_actions(mdp->action_vars);
    mdp->distribution = [](const State& s, const Action& a) {
        const int flipped = s[0] ^ (a[0] & s[1]);
        const int s2 = s[1] == 1 ? 1 : s[2];
        StateDistribution d;
        for (auto [s1, p1] : {std::pair{flipped, 0.9}, std::pair{s[0], 0.1}})
            for (auto [s3, p3] : {std::pair{a[1], 0.8}, std::pair{1 - a[1], 0.2}}) {
                State n{s1, s2, s3};
                auto it = std::find_if(d.begin(), d.end(), [&](const auto& e) { return e.first == n; });
                if (it == d.end())
                    d.push_back({n, p1 * p3});
                else
                    it->second += p1 * p3;
            }
        return d;
    };
    complete_from_distribution(*mdp);
    mdp->reward = [](const State& s) { return static_cast<double>(s[0]); };
    mdp->reward_vars = {0};
    mdp->horizon = 4;
    mdp->discount = 1.0;
    mdp->max_reward = 1.0;
    return mdp;
}

/// Random tabular factored MDP: each next-state variable reads a random
/// subset of parents, with a random conditional table (some rows
/// deterministic, some stochastic). Small enough to enumerate.
struct RandomMdp {
    std::shared_ptr<const FactoredMdp> mdp;
    /// parents[j]: global indices read by next-state variable j.
    std::vector<std::vector<std::size_t>> parents;
};

inline RandomMdp random_mdp(std::uint64_t seed, int n_state = 3, int n_action = 1) {
    Rng rng(seed);
    auto mdp = std::make_shared<FactoredMdp>();
    std::uniform_int_distribution<int> size2or3(2, 3);
    for (int i = 0; i < n_state; ++i) mdp->state_vars.push_back(state_var("x" + std::to_string(i), 2));
    for (int j = 0; j < n_action; ++j) mdp->action_vars.push_back(action_var("a" + std::to_string(j), 2));
    // Keep the joint domain at most 2^5 * 2 = 64 with one ternary variable.
    mdp->state_vars[0] = state_var("x0", size2or3(rng));
    mdp->actions = all_actions(mdp->action_vars);
    const std::size_t n_vars = mdp->num_vars();

    RandomMdp out;
    using Table = std::map<std::vector<int>, std::vector<double>>;
    auto tables = std::make_shared<std::vector<Table>>();
    std::bernoulli_distribution coin(0.4);
    for (int j = 0; j < n_state; ++j) {
        std::vector<std::size_t> ps;
        for (std::size_t i = 0; i < n_vars; ++i)
            if (coin(rng)) ps.push_back(i);
        out.parents.push_back(ps);
        tables->emplace_back();
    }
    auto parents = std::make_shared<std::vector<std::vector<std::size_t>>>(out.parents);
    auto vars = std::make_shared<std::vector<VariableSpec>>(mdp->all_vars());

    // Precompute a conditional table entry for every parent configuration.
    for (int j = 0; j < n_state; ++j) {
        const auto& ps = (*parents)[j];
        std::vector<int> key(ps.size(), 0);
        const int dom = mdp->state_vars[j].size();
        for (;;) {
            std::vector<double> probs(dom, 0.0);
            if (coin(rng)) {
                probs[std::uniform_int_distribution<int>(0, dom - 1)(rng)] = 1.0;
            } else {
                double total = 0.0;
                for (auto& p : probs) total += (p = std::uniform_real_distribution<double>(0.1, 1.0)(rng));
                for (auto& p : probs) p /= total;
            }
            (*tables)[j][key] = probs;
            std::size_t k = 0;
            while (k < ps.size() && ++key[k] == (*vars)[ps[k]].size()) key[k++] = 0;
            if (k == ps.size()) break;
        }
    }

    auto conditional = [tables, parents](const State& s, const Action& a, std::size_t j) {
        std::vector<int> key;
        for (auto p : (*parents)[j]) key.push_back(p < s.size() ? s[p] : a[p - s.size()]);
        return (*tables)[j].at(key);
    };
    mdp->marginals = [conditional](const State& s, const Action& a) {
        Marginals m;
        for (std::size_t j = 0; j < s.size(); ++j) m.push_back(conditional(s, a, j));
        return m;
    };
    mdp->distribution = [conditional](const State& s, const Action& a) {
        StateDistribution d{{State{}, 1.0}};
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto probs = conditional(s, a, j);
            StateDistribution next;
            for (const auto& [partial, p] : d)
                for (std::size_t v = 0; v < probs.size(); ++v) {
                    if (probs[v] == 0.0) continue;
                    State ext = partial;
                    ext.push_back(static_cast<int>(v));
                    next.push_back({ext, p * probs[v]});
                }
            d = std::move(next);
        }
        return d;
    };
    complete_from_distribution(*mdp);
    mdp->reward = [](const State& s) { return static_cast<double>(s.back()); };
    mdp->reward_vars = {static_cast<std::size_t>(n_state - 1)};
    mdp->horizon = 5;
    out.mdp = mdp;
    return out;
}

}  // namespace fixtures
