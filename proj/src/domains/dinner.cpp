#include "camp/domains/dinner.hpp"

#include <iomanip>
#include <sstream>

namespace camp::dinner {

namespace {

enum Location { living_room = 0, kitchen = 1, store = 2 };

struct Operator {
    std::string name;
    int location = -1;  // required location, -1 for none
    int needs = -1;     // fluent that must hold, -1 for none
    int sets = -1;      // fluent made true, -1 for none
    int moves_to = -1;  // new location, -1 for none
};

struct Domain {
    std::vector<std::string> fluents;
    std::vector<Operator> ops;
    std::vector<std::string> op_names;
    std::array<int, 3> done{};  // fluent index of each finished meal
};

const Domain& domain() {
    static const Domain d = [] {
        Domain d;
        auto fluent = [&](const std::string& name) {
            d.fluents.push_back(name);
            return static_cast<int>(d.fluents.size()) - 1;
        };
        d.ops.push_back({"wait"});
        d.ops.push_back({"go_living_room", -1, -1, -1, living_room});
        d.ops.push_back({"go_kitchen", -1, -1, -1, kitchen});
        d.ops.push_back({"go_store", -1, -1, -1, store});
        auto chain = [&](const std::string& prefix, int length, int location, int after) {
            int prev = after;
            for (int i = 1; i <= length; ++i) {
                const int f = fluent(prefix + std::to_string(i));
                d.ops.push_back({prefix + std::to_string(i), location, prev, f, -1});
                prev = f;
            }
            return prev;
        };
        const int boiled = chain("ramen_", 1, living_room, -1);
        d.done[0] = fluent("ramen_done");
        d.ops.push_back({"make_ramen", living_room, boiled, d.done[0], -1});

        const int bread = chain("sandwich_", 14, kitchen, -1);
        d.done[1] = fluent("sandwich_done");
        d.ops.push_back({"make_sandwich", kitchen, bread, d.done[1], -1});

        const int bought = chain("steak_store_", 10, store, -1);
        const int prepped = chain("steak_kitchen_", 9, kitchen, bought);
        d.done[2] = fluent("steak_done");
        d.ops.push_back({"cook_steak", kitchen, prepped, d.done[2], -1});

        for (const auto& o : d.ops) d.op_names.push_back(o.name);
        return d;
    }();
    return d;
}

State apply(const State& s, int op_index) {
    const Domain& d = domain();
    const Operator& o = d.ops[static_cast<std::size_t>(op_index)];
    if (o.location >= 0 && s[0] != o.location) return s;
    if (o.needs >= 0 && s[static_cast<std::size_t>(1 + o.needs)] != 1) return s;
    State next = s;
    if (o.sets >= 0) next[static_cast<std::size_t>(1 + o.sets)] = 1;
    if (o.moves_to >= 0) next[0] = o.moves_to;
    return next;
}

}  // namespace

const std::vector<std::string>& operator_names() { return domain().op_names; }

std::shared_ptr<const FactoredMdp> build(const DinnerConfig& cfg) {
    const Domain& d = domain();
    auto mdp = std::make_shared<FactoredMdp>();
    mdp->state_vars.push_back({"location", VarKind::state, {"living_room", "kitchen", "store"}});
    for (const auto& f : d.fluents) mdp->state_vars.push_back({f, VarKind::state, {"0", "1"}});
    mdp->action_vars.push_back({"op", VarKind::action, d.op_names});
    for (std::size_t i = 0; i < d.ops.size(); ++i) mdp->actions.push_back({static_cast<int>(i)});

    mdp->sample = [](const State& s, const Action& a, Rng&) { return apply(s, a[0]); };
    mdp->distribution = [](const State& s, const Action& a) { return StateDistribution{{apply(s, a[0]), 1.0}}; };
    const auto done = d.done;
    mdp->terminal = [done](const State& s) {
        for (int f : done)
            if (s[static_cast<std::size_t>(1 + f)] == 1) return true;
        return false;
    };
    const auto rewards = cfg.rewards;
    const double penalty = cfg.step_penalty;
    mdp->reward = [done, rewards, penalty](const State& s) {
        double r = 0.0;
        bool finished = false;
        for (std::size_t m = 0; m < 3; ++m)
            if (s[static_cast<std::size_t>(1 + done[m])] == 1) {
                r += rewards[m];
                finished = true;
            }
        return finished ? r : -penalty;
    };
    for (int f : d.done) mdp->reward_vars.push_back(static_cast<std::size_t>(1 + f));
    mdp->horizon = cfg.horizon;
    mdp->discount = 1.0;
    double best = -penalty;
    for (double r : cfg.rewards) best = std::max(best, r);
    mdp->max_reward = best;
    mdp->deterministic = true;
    mdp->validate();
    return mdp;
}

State initial_state(const FactoredMdp& mdp) { return State(mdp.state_vars.size(), 0); }

Action op(const FactoredMdp& mdp, const std::string& name) {
    const int v = mdp.action_vars.at(0).value_index(name);
    if (v < 0) throw std::invalid_argument("unknown operator '" + name + "'");
    return {v};
}

std::vector<std::string> meal_plan(Meal meal) {
    std::vector<std::string> plan;
    auto chain = [&](const std::string& prefix, int n) {
        for (int i = 1; i <= n; ++i) plan.push_back(prefix + std::to_string(i));
    };
    switch (meal) {
        case Meal::ramen:
            chain("ramen_", 1);
            plan.push_back("make_ramen");
            break;
        case Meal::sandwich:
            plan.push_back("go_kitchen");
            chain("sandwich_", 14);
            plan.push_back("make_sandwich");
            break;
        case Meal::steak:
            plan.push_back("go_store");
            chain("steak_store_", 10);
            plan.push_back("go_kitchen");
            chain("steak_kitchen_", 9);
            plan.push_back("cook_steak");
            break;
    }
    return plan;
}

std::vector<double> state_features(const State& s) {
    std::vector<double> out(3, 0.0);
    out[static_cast<std::size_t>(s.at(0))] = 1.0;
    for (std::size_t i = 1; i < s.size(); ++i) out.push_back(static_cast<double>(s[i]));
    return out;
}

std::string write_manifest(const DinnerConfig& cfg) {
    std::ostringstream out;
    out << std::setprecision(17) << "dinner 1\nrewards " << cfg.rewards[0] << ' ' << cfg.rewards[1] << ' '
        << cfg.rewards[2] << "\nstep_penalty " << cfg.step_penalty << "\nhorizon " << cfg.horizon << '\n';
    return out.str();
}

DinnerConfig read_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string magic, key;
    int version = 0;
    in >> magic >> version;
    if (magic != "dinner" || version != 1) throw std::invalid_argument("not a dinner manifest");
    DinnerConfig cfg;
    while (in >> key) {
        if (key == "rewards") in >> cfg.rewards[0] >> cfg.rewards[1] >> cfg.rewards[2];
        else if (key == "step_penalty") in >> cfg.step_penalty;
        else if (key == "horizon") in >> cfg.horizon;
        else throw std::invalid_argument("unknown manifest key '" + key + "'");
        if (!in) throw std::invalid_argument("truncated manifest near '" + key + "'");
    }
    return cfg;
}

std::string model_key(const DinnerConfig& cfg) {
    // Rewards do not enter the transition model, so every task shares CSIs.
    return "dinner:h" + std::to_string(cfg.horizon);
}

Task make_task(const DinnerConfig& cfg, const std::string& id) {
    Task task;
    task.id = id;
    task.mdp = build(cfg);
    task.initial_state = initial_state(*task.mdp);
    task.features.assign(cfg.rewards.begin(), cfg.rewards.end());
    task.model_key = model_key(cfg);
    return task;
}

DinnerConfig sample_config(const DinnerConfig& cfg, Rng& rng) {
    DinnerConfig out = cfg;
    std::uniform_real_distribution<double> reward(cfg.reward_min, cfg.reward_max);
    for (auto& r : out.rewards) r = reward(rng);
    return out;
}

Task sample_task(const DinnerConfig& cfg, Rng& rng, const std::string& id) {
    return make_task(sample_config(cfg, rng), id);
}

}  // namespace camp::dinner
