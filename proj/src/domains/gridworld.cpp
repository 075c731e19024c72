#include "camp/domains/gridworld.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace camp::gridworld {

std::vector<int> Layout::neighbours(int c) const {
    std::vector<int> out;
    const int r = row(c), k = col(c);
    if (r > 0 && free(c - width)) out.push_back(c - width);
    if (r + 1 < height && free(c + width)) out.push_back(c + width);
    if (k > 0 && free(c - 1)) out.push_back(c - 1);
    if (k + 1 < width && free(c + 1)) out.push_back(c + 1);
    return out;
}

struct Gridworld::Data {
    TaskSpec spec;
    std::size_t n_obs = 0;
    std::vector<int> free_cells;
    std::vector<int> free_index;  // cell -> value index, -1 for walls
    std::vector<std::vector<int>> room_cells;
    std::vector<int> local_index;  // cell -> index within its room
    std::vector<std::vector<int>> obs_cells;
    std::vector<std::vector<int>> obs_index;
    std::vector<int> obs_room;
    // [k][value] -> reachable values, staying first.
    std::vector<std::vector<std::vector<int>>> obs_options;

    const Layout& layout() const { return spec.layout; }

    int agent_cell(const State& s) const {
        const auto& cells = room_cells[static_cast<std::size_t>(s[kAgentRoom])];
        return cells[std::min(static_cast<std::size_t>(s[kAgentPos]), cells.size() - 1)];
    }

    bool terminal(const State& s) const { return agent_cell(s) == free_cells[static_cast<std::size_t>(s[kGoalPos])]; }

    int agent_target(int cell, int move) const {
        const Layout& L = layout();
        int r = L.row(cell), c = L.col(cell);
        switch (move) {
            case up: --r; break;
            case down: ++r; break;
            case left: --c; break;
            case right: ++c; break;
            default: return cell;
        }
        if (r < 0 || c < 0 || r >= L.height || c >= L.width) return cell;
        const int target = L.cell(r, c);
        return L.free(target) ? target : cell;
    }

    bool adjacent(int a, int b) const {
        const Layout& L = layout();
        return std::abs(L.row(a) - L.row(b)) + std::abs(L.col(a) - L.col(b)) == 1;
    }

    double option_prob(std::size_t n_options, std::size_t j) const {
        const double p = spec.obstacle_move_prob;
        return p / static_cast<double>(n_options) + (j == 0 ? 1.0 - p : 0.0);
    }

    // Removals, then the agent's intended cell. Writes alive flags into `next`.
    int pre_move(const State& s, const Action& a, State& next) const {
        const int agent = agent_cell(s);
        for (std::size_t k = 0; k < n_obs; ++k) {
            if (a[1 + k] != 1 || s[obstacle_alive(k)] != 1) continue;
            const int oc = obs_cells[k][static_cast<std::size_t>(s[obstacle_pos(k)])];
            if (adjacent(agent, oc)) next[obstacle_alive(k)] = 0;
        }
        return agent_target(agent, a[0]);
    }

    bool collides(std::size_t k, const State& s, int old_cell, int new_cell, int obs_new_value) const {
        if (obs_room[k] != s[kAgentRoom]) return false;
        const int o_old = obs_cells[k][static_cast<std::size_t>(s[obstacle_pos(k)])];
        const int o_new = obs_cells[k][static_cast<std::size_t>(obs_new_value)];
        if (o_new == new_cell) return true;
        return new_cell != old_cell && o_new == old_cell && o_old == new_cell;
    }

    void place_agent(State& next, int cell) const {
        next[kAgentPos] = local_index[static_cast<std::size_t>(cell)];
        next[kAgentRoom] = layout().room[static_cast<std::size_t>(cell)];
    }

    // Successor when obstacle k takes option choice[k].
    State successor(const State& s, const Action& a, const std::vector<std::size_t>& choice) const {
        if (terminal(s)) return s;
        State next = s;
        const int old_cell = agent_cell(s);
        const int new_cell = pre_move(s, a, next);
        bool collided = false;
        for (std::size_t k = 0; k < n_obs; ++k) {
            if (next[obstacle_alive(k)] != 1) continue;
            const auto& opts = obs_options[k][static_cast<std::size_t>(s[obstacle_pos(k)])];
            const int v = opts[std::min(choice[k], opts.size() - 1)];
            next[obstacle_pos(k)] = v;
            collided = collided || collides(k, s, old_cell, new_cell, v);
        }
        place_agent(next, collided ? free_cells[static_cast<std::size_t>(s[kAgentStart])] : new_cell);
        return next;
    }

    State sample(const State& s, const Action& a, Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::size_t> choice(n_obs, 0);
        const double p = spec.obstacle_move_prob;
        for (std::size_t k = 0; k < n_obs; ++k) {
            const double u = unit(rng);
            const auto& opts = obs_options[k][static_cast<std::size_t>(s[obstacle_pos(k)])];
            if (u < p) choice[k] = std::min(opts.size() - 1, static_cast<std::size_t>(u / p * static_cast<double>(opts.size())));
        }
        return successor(s, a, choice);
    }

    StateDistribution distribution(const State& s, const Action& a) const {
        if (terminal(s)) return {{s, 1.0}};
        State probe = s;
        pre_move(s, a, probe);
        std::vector<std::size_t> counts(n_obs, 1);
        for (std::size_t k = 0; k < n_obs; ++k)
            if (probe[obstacle_alive(k)] == 1) counts[k] = obs_options[k][static_cast<std::size_t>(s[obstacle_pos(k)])].size();

        StateDistribution out;
        std::unordered_map<State, std::size_t, VectorHash> seen;
        std::vector<std::size_t> choice(n_obs, 0);
        while (true) {
            double prob = 1.0;
            for (std::size_t k = 0; k < n_obs; ++k)
                if (counts[k] > 1 || probe[obstacle_alive(k)] == 1) prob *= option_prob(counts[k], choice[k]);
            if (prob > 0.0) {
                State next = successor(s, a, choice);
                auto [it, inserted] = seen.emplace(next, out.size());
                if (inserted)
                    out.emplace_back(std::move(next), prob);
                else
                    out[it->second].second += prob;
            }
            std::size_t k = 0;
            while (k < n_obs && ++choice[k] == counts[k]) choice[k++] = 0;
            if (k == n_obs) break;
        }
        return out;
    }

    Marginals marginals(const State& s, const Action& a, const std::vector<VariableSpec>& vars) const {
        Marginals m(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) m[i].assign(static_cast<std::size_t>(vars[i].size()), 0.0);
        if (terminal(s)) {
            for (std::size_t i = 0; i < vars.size(); ++i) m[i][static_cast<std::size_t>(s[i])] = 1.0;
            return m;
        }
        State next = s;
        const int old_cell = agent_cell(s);
        const int new_cell = pre_move(s, a, next);
        double no_collision = 1.0;
        for (std::size_t k = 0; k < n_obs; ++k) {
            auto& pos = m[obstacle_pos(k)];
            if (next[obstacle_alive(k)] != 1) {
                pos[static_cast<std::size_t>(s[obstacle_pos(k)])] = 1.0;
                continue;
            }
            const auto& opts = obs_options[k][static_cast<std::size_t>(s[obstacle_pos(k)])];
            double hit = 0.0;
            for (std::size_t j = 0; j < opts.size(); ++j) {
                const double q = option_prob(opts.size(), j);
                pos[static_cast<std::size_t>(opts[j])] += q;
                if (collides(k, s, old_cell, new_cell, opts[j])) hit += q;
            }
            no_collision *= 1.0 - hit;
        }
        const int start = free_cells[static_cast<std::size_t>(s[kAgentStart])];
        const double p_col = 1.0 - no_collision;
        auto put_agent = [&](int cell, double p) {
            if (p <= 0.0) return;
            m[kAgentPos][static_cast<std::size_t>(local_index[static_cast<std::size_t>(cell)])] += p;
            m[kAgentRoom][static_cast<std::size_t>(layout().room[static_cast<std::size_t>(cell)])] += p;
        };
        put_agent(new_cell, 1.0 - p_col);
        put_agent(start, p_col);
        for (std::size_t i : {kGoalPos, kAgentStart}) m[i][static_cast<std::size_t>(s[i])] = 1.0;
        for (std::size_t k = 0; k < n_obs; ++k) {
            m[obstacle_room(k)][static_cast<std::size_t>(s[obstacle_room(k)])] = 1.0;
            m[obstacle_alive(k)][static_cast<std::size_t>(next[obstacle_alive(k)])] = 1.0;
        }
        return m;
    }
};

namespace {

std::string cell_label(const Layout& L, int c) { return "r" + std::to_string(L.row(c)) + "c" + std::to_string(L.col(c)); }

void check_spec(const TaskSpec& spec) {
    const Layout& L = spec.layout;
    if (L.width < 1 || L.height < 1 || L.room.size() != static_cast<std::size_t>(L.width * L.height) ||
        L.doorway.size() != L.room.size())
        throw ModelError("layout arrays do not match its dimensions");
    if (!L.free(spec.start) || !L.free(spec.goal)) throw ModelError("start and goal must be free cells");
    for (int o : spec.obstacles)
        if (!L.free(o) || L.doorway[static_cast<std::size_t>(o)]) throw ModelError("obstacles must start on non-doorway room cells");
    if (spec.obstacle_move_prob < 0.0 || spec.obstacle_move_prob > 1.0) throw ModelError("obstacle_move_prob outside [0, 1]");
    if (spec.horizon < 1) throw ModelError("horizon must be positive");
}

}  // namespace

Gridworld::Gridworld(TaskSpec spec) {
    check_spec(spec);
    auto data = std::make_shared<Data>();
    data->spec = std::move(spec);
    Data& d = *data;
    const Layout& L = d.layout();
    d.n_obs = d.spec.obstacles.size();

    d.free_index.assign(L.room.size(), -1);
    for (int c = 0; c < L.width * L.height; ++c)
        if (L.free(c)) {
            d.free_index[static_cast<std::size_t>(c)] = static_cast<int>(d.free_cells.size());
            d.free_cells.push_back(c);
        }
    d.room_cells.resize(static_cast<std::size_t>(L.num_rooms));
    d.local_index.assign(L.room.size(), -1);
    for (int c : d.free_cells) {
        auto& cells = d.room_cells[static_cast<std::size_t>(L.room[static_cast<std::size_t>(c)])];
        d.local_index[static_cast<std::size_t>(c)] = static_cast<int>(cells.size());
        cells.push_back(c);
    }
    std::size_t max_room = 0;
    for (const auto& cells : d.room_cells) {
        if (cells.empty()) throw ModelError("every room needs at least one cell");
        max_room = std::max(max_room, cells.size());
    }

    for (std::size_t k = 0; k < d.n_obs; ++k) {
        const int room = L.room[static_cast<std::size_t>(d.spec.obstacles[k])];
        d.obs_room.push_back(room);
        std::vector<int> cells;
        std::vector<int> index(L.room.size(), -1);
        for (int c : d.free_cells)
            if (L.room[static_cast<std::size_t>(c)] == room && !L.doorway[static_cast<std::size_t>(c)]) {
                index[static_cast<std::size_t>(c)] = static_cast<int>(cells.size());
                cells.push_back(c);
            }
        std::vector<std::vector<int>> options(cells.size());
        for (std::size_t v = 0; v < cells.size(); ++v) {
            options[v].push_back(static_cast<int>(v));
            for (int nb : L.neighbours(cells[v]))
                if (index[static_cast<std::size_t>(nb)] >= 0) options[v].push_back(index[static_cast<std::size_t>(nb)]);
        }
        d.obs_cells.push_back(std::move(cells));
        d.obs_index.push_back(std::move(index));
        d.obs_options.push_back(std::move(options));
    }

    auto mdp = std::make_shared<FactoredMdp>();
    std::vector<std::string> cell_domain;
    for (int c : d.free_cells) cell_domain.push_back(cell_label(L, c));
    std::vector<std::string> rooms;
    for (int r = 0; r < L.num_rooms; ++r) rooms.push_back(std::to_string(r));
    std::vector<std::string> local_domain;
    for (std::size_t i = 0; i < max_room; ++i) local_domain.push_back("l" + std::to_string(i));
    mdp->state_vars.push_back({"agent_pos", VarKind::state, local_domain});
    mdp->state_vars.push_back({"agent_room", VarKind::state, rooms});
    mdp->state_vars.push_back({"goal_pos", VarKind::state, cell_domain});
    mdp->state_vars.push_back({"agent_start", VarKind::state, cell_domain});
    for (std::size_t k = 0; k < d.n_obs; ++k) {
        const std::string prefix = "obs" + std::to_string(k) + "_";
        std::vector<std::string> cells;
        for (int c : d.obs_cells[k]) cells.push_back(cell_label(L, c));
        mdp->state_vars.push_back({prefix + "pos", VarKind::state, cells});
        mdp->state_vars.push_back({prefix + "room", VarKind::state, {std::to_string(d.obs_room[k])}});
        mdp->state_vars.push_back({prefix + "alive", VarKind::state, {"0", "1"}});
    }
    mdp->action_vars.push_back({"move", VarKind::action, {"noop", "up", "down", "left", "right"}});
    for (std::size_t k = 0; k < d.n_obs; ++k)
        mdp->action_vars.push_back({"remove" + std::to_string(k), VarKind::action, {"0", "1"}});

    for (int m = up; m <= right; ++m) {
        Action a(1 + d.n_obs, 0);
        a[0] = m;
        mdp->actions.push_back(a);
    }
    for (std::size_t k = 0; k < d.n_obs; ++k) {
        Action a(1 + d.n_obs, 0);
        a[1 + k] = 1;
        mdp->actions.push_back(a);
    }

    std::shared_ptr<const Data> cd = data;
    const std::vector<VariableSpec> vars = mdp->state_vars;
    mdp->sample = [cd](const State& s, const Action& a, Rng& rng) { return cd->sample(s, a, rng); };
    mdp->distribution = [cd](const State& s, const Action& a) { return cd->distribution(s, a); };
    mdp->marginals = [cd, vars](const State& s, const Action& a) { return cd->marginals(s, a, vars); };
    const double goal_reward = d.spec.goal_reward;
    mdp->reward = [cd, goal_reward](const State& s) { return cd->terminal(s) ? goal_reward : 0.0; };
    mdp->terminal = [cd](const State& s) { return cd->terminal(s); };
    mdp->reward_vars = {kAgentPos, kAgentRoom, kGoalPos};
    mdp->horizon = d.spec.horizon;
    mdp->discount = d.spec.discount;
    mdp->max_reward = std::max(0.0, goal_reward);
    mdp->deterministic = d.spec.obstacle_move_prob == 0.0 || d.n_obs == 0;
    mdp->validate();

    data_ = std::move(data);
    mdp_ = std::move(mdp);
}

const TaskSpec& Gridworld::spec() const { return data_->spec; }

State Gridworld::initial_state() const {
    const Data& d = *data_;
    State s(mdp_->state_vars.size(), 0);
    d.place_agent(s, d.spec.start);
    s[kGoalPos] = d.free_index[static_cast<std::size_t>(d.spec.goal)];
    s[kAgentStart] = d.free_index[static_cast<std::size_t>(d.spec.start)];
    for (std::size_t k = 0; k < d.n_obs; ++k) {
        s[obstacle_pos(k)] = d.obs_index[k][static_cast<std::size_t>(d.spec.obstacles[k])];
        s[obstacle_room(k)] = 0;
        s[obstacle_alive(k)] = 1;
    }
    return s;
}

int Gridworld::cell_of(const State& s, std::size_t var) const {
    const Data& d = *data_;
    const auto v = static_cast<std::size_t>(s.at(var));
    if (var == kAgentPos) return d.agent_cell(s);
    if (var == kGoalPos || var == kAgentStart) return d.free_cells.at(v);
    if (var >= 4 && (var - 4) % 3 == 0) return d.obs_cells.at((var - 4) / 3).at(v);
    throw std::invalid_argument("variable " + std::to_string(var) + " is not a position");
}

int Gridworld::position_value(std::size_t var, int cell) const {
    const Data& d = *data_;
    const auto c = static_cast<std::size_t>(cell);
    if (var == kAgentPos) return d.local_index.at(c);
    if (var == kGoalPos || var == kAgentStart) return d.free_index.at(c);
    if (var >= 4 && (var - 4) % 3 == 0) return d.obs_index.at((var - 4) / 3).at(c);
    throw std::invalid_argument("variable " + std::to_string(var) + " is not a position");
}

int Gridworld::room_of_cell(int cell) const { return data_->layout().room.at(static_cast<std::size_t>(cell)); }

Action Gridworld::move_action(Move m) const {
    Action a(1 + data_->n_obs, 0);
    a[0] = m;
    return a;
}

Action Gridworld::remove_action(std::size_t k) const {
    Action a(1 + data_->n_obs, 0);
    a.at(1 + k) = 1;
    return a;
}

std::vector<double> Gridworld::render(const State& s) const {
    const Data& d = *data_;
    const Layout& L = d.layout();
    const std::size_t plane = static_cast<std::size_t>(L.width * L.height);
    std::vector<double> out(4 * plane, 0.0);
    for (std::size_t c = 0; c < plane; ++c)
        if (L.room[c] < 0) out[c] = 1.0;
    for (std::size_t k = 0; k < d.n_obs; ++k)
        if (s[obstacle_alive(k)] == 1) out[plane + static_cast<std::size_t>(cell_of(s, obstacle_pos(k)))] = 1.0;
    out[2 * plane + static_cast<std::size_t>(cell_of(s, kAgentPos))] = 1.0;
    out[3 * plane + static_cast<std::size_t>(cell_of(s, kGoalPos))] = 1.0;
    return out;
}

std::string Gridworld::model_key() const {
    std::ostringstream key;
    key << "gridworld:" << std::hex << hash_string(write_manifest(data_->spec));
    return key.str();
}

double Gridworld::state_space_size() const {
    const Data& d = *data_;
    double n = static_cast<double>(d.free_cells.size());
    for (std::size_t k = 0; k < d.n_obs; ++k) n *= 2.0 * static_cast<double>(d.obs_cells[k].size());
    return n;
}

namespace {

bool all_reachable(const Layout& L, int start) {
    std::vector<bool> seen(L.room.size(), false);
    std::deque<int> queue{start};
    seen[static_cast<std::size_t>(start)] = true;
    std::size_t count = 1;
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        for (int nb : L.neighbours(c))
            if (!seen[static_cast<std::size_t>(nb)]) {
                seen[static_cast<std::size_t>(nb)] = true;
                ++count;
                queue.push_back(nb);
            }
    }
    return count == static_cast<std::size_t>(std::count_if(L.room.begin(), L.room.end(), [](int r) { return r >= 0; }));
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Layout sample_layout(const GridworldConfig& cfg, Rng& rng) {
    const int W = cfg.width, H = cfg.height;
    Layout L;
    L.width = W;
    L.height = H;
    L.num_rooms = 4;
    L.room.assign(static_cast<std::size_t>(W * H), -1);
    L.doorway.assign(L.room.size(), false);
    const int vx = uniform_int(rng, W / 2 - 1, W / 2 + 1);
    const int hy = uniform_int(rng, H / 2 - 1, H / 2 + 1);
    for (int r = 1; r < H - 1; ++r)
        for (int c = 1; c < W - 1; ++c) {
            if (r == hy || c == vx) continue;
            L.room[static_cast<std::size_t>(L.cell(r, c))] = (r < hy ? 0 : 2) + (c < vx ? 0 : 1);
        }
    struct Door {
        int cell;
        int room;
    };
    std::vector<Door> doors{
        {L.cell(uniform_int(rng, 1, hy - 1), vx), 0},      // rooms 0-1
        {L.cell(uniform_int(rng, hy + 1, H - 2), vx), 2},  // rooms 2-3
        {L.cell(hy, uniform_int(rng, 1, vx - 1)), 0},      // rooms 0-2
        {L.cell(hy, uniform_int(rng, vx + 1, W - 2)), 1},  // rooms 1-3
    };
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool close = unit(rng) < cfg.close_door_prob;
    const int closed = uniform_int(rng, 0, 3);
    for (int i = 0; i < 4; ++i) {
        if (close && i == closed) continue;
        L.room[static_cast<std::size_t>(doors[static_cast<std::size_t>(i)].cell)] = doors[static_cast<std::size_t>(i)].room;
        L.doorway[static_cast<std::size_t>(doors[static_cast<std::size_t>(i)].cell)] = true;
    }
    return L;
}

int random_room_cell(const Layout& L, int room, const std::vector<int>& taken, Rng& rng) {
    std::vector<int> cells;
    for (int c = 0; c < L.width * L.height; ++c)
        if (L.room[static_cast<std::size_t>(c)] == room && !L.doorway[static_cast<std::size_t>(c)] &&
            std::find(taken.begin(), taken.end(), c) == taken.end())
            cells.push_back(c);
    if (cells.empty()) return -1;
    return cells[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cells.size()) - 1))];
}

}  // namespace

TaskSpec sample_task_spec(const GridworldConfig& cfg, Rng& rng) {
    if (cfg.width < 5 || cfg.height < 5) throw std::invalid_argument("gridworld needs at least 5x5 cells for four rooms");
    if (cfg.n_obstacles < 0) throw std::invalid_argument("negative obstacle count");
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        TaskSpec spec;
        spec.layout = sample_layout(cfg, rng);
        spec.obstacle_move_prob = cfg.obstacle_move_prob;
        spec.goal_reward = cfg.goal_reward;
        spec.horizon = cfg.horizon;
        spec.discount = cfg.discount;
        std::vector<int> taken;
        spec.start = random_room_cell(spec.layout, 0, taken, rng);
        taken.push_back(spec.start);
        spec.goal = random_room_cell(spec.layout, 3, taken, rng);
        taken.push_back(spec.goal);
        const int offset = uniform_int(rng, 0, 1);
        bool ok = spec.start >= 0 && spec.goal >= 0;
        for (int k = 0; ok && k < cfg.n_obstacles; ++k) {
            const int cell = random_room_cell(spec.layout, 1 + (k + offset) % 2, taken, rng);
            ok = cell >= 0;
            taken.push_back(cell);
            spec.obstacles.push_back(cell);
        }
        if (ok && all_reachable(spec.layout, spec.start)) return spec;
    }
    throw ModelError("could not sample a connected gridworld layout");
}

Task make_task(const TaskSpec& spec, const std::string& id) {
    Gridworld world(spec);
    Task task;
    task.id = id;
    task.initial_state = world.initial_state();
    task.features = world.render(task.initial_state);
    task.mdp = world.mdp();
    task.model_key = world.model_key();
    return task;
}

Task sample_task(const GridworldConfig& cfg, Rng& rng, const std::string& id) {
    return make_task(sample_task_spec(cfg, rng), id);
}

Layout parse_layout(const std::vector<std::string>& rows) {
    if (rows.empty() || rows.front().empty()) throw std::invalid_argument("empty layout");
    Layout L;
    L.height = static_cast<int>(rows.size());
    L.width = static_cast<int>(rows.front().size());
    L.room.assign(static_cast<std::size_t>(L.width * L.height), -1);
    L.doorway.assign(L.room.size(), false);
    for (int r = 0; r < L.height; ++r) {
        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != L.width)
            throw std::invalid_argument("layout rows differ in length");
        for (int c = 0; c < L.width; ++c) {
            const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            const auto cell = static_cast<std::size_t>(L.cell(r, c));
            if (ch == '#') continue;
            if (ch >= '0' && ch <= '9') {
                L.room[cell] = ch - '0';
            } else if (ch >= 'a' && ch <= 'j') {
                L.room[cell] = ch - 'a';
                L.doorway[cell] = true;
            } else {
                throw std::invalid_argument(std::string("bad layout character '") + ch + "'");
            }
            L.num_rooms = std::max(L.num_rooms, L.room[cell] + 1);
        }
    }
    return L;
}

std::string write_manifest(const TaskSpec& spec) {
    const Layout& L = spec.layout;
    std::ostringstream out;
    out << std::setprecision(17);
    out << "gridworld 1\nsize " << L.height << ' ' << L.width << '\n';
    for (int r = 0; r < L.height; ++r) {
        for (int c = 0; c < L.width; ++c) {
            const auto cell = static_cast<std::size_t>(L.cell(r, c));
            const int room = L.room[cell];
            out << (room < 0 ? '#' : static_cast<char>((L.doorway[cell] ? 'a' : '0') + room));
        }
        out << '\n';
    }
    out << "start " << L.row(spec.start) << ' ' << L.col(spec.start) << '\n';
    out << "goal " << L.row(spec.goal) << ' ' << L.col(spec.goal) << '\n';
    for (int o : spec.obstacles) out << "obstacle " << L.row(o) << ' ' << L.col(o) << '\n';
    out << "move_prob " << spec.obstacle_move_prob << "\ngoal_reward " << spec.goal_reward << "\nhorizon "
        << spec.horizon << "\ndiscount " << spec.discount << '\n';
    return out.str();
}

TaskSpec read_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0, height = 0, width = 0;
    std::string size_kw;
    in >> magic >> version >> size_kw >> height >> width;
    if (magic != "gridworld" || version != 1 || size_kw != "size" || height < 1 || width < 1)
        throw std::invalid_argument("not a gridworld manifest");
    std::vector<std::string> rows(static_cast<std::size_t>(height));
    for (auto& row : rows) in >> row;
    TaskSpec spec;
    spec.layout = parse_layout(rows);
    std::string key;
    while (in >> key) {
        if (key == "start" || key == "goal" || key == "obstacle") {
            int r = 0, c = 0;
            in >> r >> c;
            const int cell = spec.layout.cell(r, c);
            if (key == "start") spec.start = cell;
            else if (key == "goal") spec.goal = cell;
            else spec.obstacles.push_back(cell);
        } else if (key == "move_prob") {
            in >> spec.obstacle_move_prob;
        } else if (key == "goal_reward") {
            in >> spec.goal_reward;
        } else if (key == "horizon") {
            in >> spec.horizon;
        } else if (key == "discount") {
            in >> spec.discount;
        } else {
            throw std::invalid_argument("unknown manifest key '" + key + "'");
        }
        if (!in) throw std::invalid_argument("truncated manifest near '" + key + "'");
    }
    check_spec(spec);
    return spec;
}

}  // namespace camp::gridworld
