#include "camp/abstraction.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace camp {

DependencyGraph::DependencyGraph(const CsiSet& csis, const std::vector<std::size_t>& reward_vars,
                                 std::size_t num_vars)
    : adjacency_(num_vars, std::vector<bool>(num_vars, false)), present_(num_vars, false) {
    for (std::size_t i = 0; i < num_vars; ++i)
        if (!csis.context.constrains(i)) present_[i] = true;
    for (auto r : reward_vars) present_.at(r) = true;
    for (std::size_t i = 0; i < num_vars; ++i)
        if (present_[i]) nodes_.push_back(i);
    // Only pairs outside C were tested; a reward variable inside C is a node
    // without edges.
    for (auto i : nodes_)
        for (auto j : nodes_)
            adjacency_[i][j] = !csis.context.constrains(i) && !csis.context.constrains(j) && !csis.independent(i, j);
}

bool DependencyGraph::has_edge(std::size_t from, std::size_t to) const {
    return present_.at(from) && present_.at(to) && adjacency_[from][to];
}

std::vector<std::size_t> DependencyGraph::ancestors_of(const std::vector<std::size_t>& targets) const {
    std::vector<bool> seen(present_.size(), false);
    std::vector<std::size_t> stack;
    for (auto t : targets)
        if (t < seen.size() && !seen[t]) {
            seen[t] = true;
            stack.push_back(t);
        }
    while (!stack.empty()) {
        auto j = stack.back();
        stack.pop_back();
        for (auto i : nodes_)
            if (!seen[i] && adjacency_[i][j]) {
                seen[i] = true;
                stack.push_back(i);
            }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

std::vector<std::size_t> relevant_variables(const CsiSet& csis, const std::vector<std::size_t>& reward_vars,
                                            const std::vector<VariableSpec>& all_vars) {
    DependencyGraph graph(csis, reward_vars, all_vars.size());
    return graph.ancestors_of(reward_vars);
}

State Camp::Data::project(const State& s) const {
    State x;
    x.reserve(kept_state.size());
    for (auto i : kept_state) x.push_back(s.at(i));
    return x;
}

Action Camp::Data::project_action(const Action& a) const {
    Action y;
    y.reserve(kept_action.size());
    for (auto i : kept_action) y.push_back(a.at(i));
    return y;
}

State Camp::Data::lift(const State& x) const {
    if (is_sink(x)) throw std::invalid_argument("the sink state has no concrete counterpart");
    State s(base->state_vars.size(), 0);
    for (std::size_t k = 0; k < kept_state.size(); ++k) s[kept_state[k]] = x.at(k);
    return s;
}

Action Camp::Data::lift_action(const Action& y) const {
    Action a(base->action_vars.size(), 0);
    for (std::size_t k = 0; k < kept_action.size(); ++k) a[kept_action[k]] = y.at(k);
    return a;
}

bool Camp::Data::is_sink(const State& x) const { return !x.empty() && x.front() < 0; }

bool Camp::Data::violates(const State& x, const Action& y) const {
    return !context.contains(join(lift(x), lift_action(y)));
}

Camp::Camp(std::shared_ptr<const FactoredMdp> base, Context context, const CsiSet& csis, CampOptions options) {
    if (!base) throw std::invalid_argument("CAMP needs a base model");
    if (!(csis.context == context)) throw std::invalid_argument("CSI set was learned for a different context");
    auto data = std::make_shared<Data>();
    const std::size_t n_state = base->state_vars.size();
    const auto vars = base->all_vars();

    std::vector<bool> keep(vars.size(), !options.project);
    if (options.project) {
        for (auto v : relevant_variables(csis, base->reward_vars, vars)) keep[v] = true;
        for (auto v : context.variables()) keep[v] = true;
    }
    for (auto r : base->reward_vars) keep[r] = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!keep[i]) continue;
        if (i < n_state)
            data->kept_state.push_back(i);
        else
            data->kept_action.push_back(i - n_state);
    }
    data->base = std::move(base);
    data->context = std::move(context);
    data->sink_reward = options.sink_reward;
    data_ = data;
    abstract_ = build_abstract(data);
}

std::shared_ptr<const FactoredMdp> Camp::build_abstract(std::shared_ptr<const Data> d) {
    const FactoredMdp& base = *d->base;
    auto m = std::make_shared<FactoredMdp>();
    for (auto i : d->kept_state) m->state_vars.push_back(base.state_vars[i]);
    for (auto i : d->kept_action) m->action_vars.push_back(base.action_vars[i]);
    for (const auto& a : base.actions) {
        Action y = d->project_action(a);
        if (std::find(m->actions.begin(), m->actions.end(), y) == m->actions.end()) m->actions.push_back(y);
    }
    for (auto r : base.reward_vars) {
        auto it = std::find(d->kept_state.begin(), d->kept_state.end(), r);
        m->reward_vars.push_back(static_cast<std::size_t>(it - d->kept_state.begin()));
    }
    m->horizon = base.horizon;
    m->discount = base.discount;
    m->max_reward = base.max_reward;
    m->deterministic = base.deterministic;

    const State sink(std::max<std::size_t>(d->kept_state.size(), 1), -1);

    m->sample = [d, sink](const State& x, const Action& y, Rng& rng) -> State {
        if (d->is_sink(x) || d->violates(x, y)) return sink;
        return d->project(d->base->sample(d->lift(x), d->lift_action(y), rng));
    };
    if (base.distribution) {
        m->distribution = [d, sink](const State& x, const Action& y) -> StateDistribution {
            if (d->is_sink(x) || d->violates(x, y)) return {{sink, 1.0}};
            std::unordered_map<State, double, VectorHash> merged;
            StateDistribution out;
            for (const auto& [next, p] : d->base->distribution(d->lift(x), d->lift_action(y))) {
                State z = d->project(next);
                auto [it, fresh] = merged.emplace(z, 0.0);
                if (fresh) out.emplace_back(z, 0.0);
                it->second += p;
            }
            for (auto& entry : out) entry.second = merged[entry.first];
            return out;
        };
    }
    m->reward = [d](const State& x) {
        if (d->is_sink(x)) return d->sink_reward;
        return d->base->reward(d->lift(x));
    };
    m->terminal = [d](const State& x) { return d->is_sink(x) || d->base->is_terminal(d->lift(x)); };
    auto abstract_actions = m->actions;
    m->dead_end = [d, abstract_actions](const State& x) {
        if (d->is_sink(x)) return true;
        return std::all_of(abstract_actions.begin(), abstract_actions.end(),
                           [&](const Action& y) { return d->violates(x, y); });
    };
    return m;
}

State Camp::project(const State& s) const { return data_->project(s); }
Action Camp::project_action(const Action& a) const { return data_->project_action(a); }
State Camp::lift(const State& x) const { return data_->lift(x); }
Action Camp::lift_action(const Action& y) const { return data_->lift_action(y); }
State Camp::sink() const { return State(std::max<std::size_t>(data_->kept_state.size(), 1), -1); }
bool Camp::is_sink(const State& x) const { return data_->is_sink(x); }

Camp build_camp(std::shared_ptr<const FactoredMdp> mdp, const Context& ctx, const CsiSet& csis,
                CampOptions options) {
    return Camp(std::move(mdp), ctx, csis, options);
}

}  // namespace camp
