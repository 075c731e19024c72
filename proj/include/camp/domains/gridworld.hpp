#pragma once

// Maze-style gridworld: rooms joined by doorways, obstacles that wander
// inside their room, remove(obstacle) actions, and a sparse goal reward.

#include <memory>
#include <string>
#include <vector>

#include "camp/core.hpp"

namespace camp::gridworld {

struct GridworldConfig {
    int width = 11;
    int height = 11;
    int n_obstacles = 2;
    double obstacle_move_prob = 1.0;
    double goal_reward = 1000.0;
    int horizon = 25;
    double discount = 0.99;
    /// Probability that one of the four doorways is walled off.
    double close_door_prob = 0.0;
    int max_retries = 100;
};

/// Cell grid in row-major order. room[c] is -1 for walls.
struct Layout {
    int width = 0;
    int height = 0;
    int num_rooms = 0;
    std::vector<int> room;
    std::vector<bool> doorway;

    int cell(int row, int col) const { return row * width + col; }
    int row(int c) const { return c / width; }
    int col(int c) const { return c % width; }
    bool free(int c) const { return c >= 0 && c < width * height && room[static_cast<std::size_t>(c)] >= 0; }
    /// 4-neighbours that are free, in up/down/left/right order.
    std::vector<int> neighbours(int c) const;
};

struct TaskSpec {
    Layout layout;
    int start = 0;
    int goal = 0;
    std::vector<int> obstacles;  // initial cells; an obstacle's room is its cell's room
    double obstacle_move_prob = 1.0;
    double goal_reward = 1000.0;
    int horizon = 25;
    double discount = 0.99;
};

// State variable layout.
inline constexpr std::size_t kAgentPos = 0;
inline constexpr std::size_t kAgentRoom = 1;
inline constexpr std::size_t kGoalPos = 2;
inline constexpr std::size_t kAgentStart = 3;
inline constexpr std::size_t obstacle_pos(std::size_t k) { return 4 + 3 * k; }
inline constexpr std::size_t obstacle_room(std::size_t k) { return 5 + 3 * k; }
inline constexpr std::size_t obstacle_alive(std::size_t k) { return 6 + 3 * k; }

enum Move { noop = 0, up = 1, down = 2, left = 3, right = 4 };

/// A bound gridworld instance. The model's callbacks share its data, so the
/// instance may be dropped once the model has been taken.
class Gridworld {
  public:
    explicit Gridworld(TaskSpec spec);

    const TaskSpec& spec() const;
    std::shared_ptr<const FactoredMdp> mdp() const { return mdp_; }
    State initial_state() const;

    int cell_of(const State& s, std::size_t var) const;
    /// Value index of `cell` in the domain of position variable `var`.
    int position_value(std::size_t var, int cell) const;
    int room_of_cell(int cell) const;
    Action move_action(Move m) const;
    Action remove_action(std::size_t k) const;

    /// Four occupancy channels (walls, obstacles, agent, goal), flattened.
    std::vector<double> render(const State& s) const;
    std::string model_key() const;

    /// Size of the state space: agent cells x per-obstacle (cells x alive).
    double state_space_size() const;

  private:
    struct Data;
    std::shared_ptr<const Data> data_;
    std::shared_ptr<const FactoredMdp> mdp_;
};

/// Two-by-two rooms with jittered walls and random doorways; start in room 0,
/// goal in room 3, obstacles in rooms 1 and 2.
TaskSpec sample_task_spec(const GridworldConfig& cfg, Rng& rng);
Task sample_task(const GridworldConfig& cfg, Rng& rng, const std::string& id);
Task make_task(const TaskSpec& spec, const std::string& id);

/// A layout from rows of characters: '#' wall, digit = room cell,
/// lower-case letter = doorway of room (letter - 'a').
Layout parse_layout(const std::vector<std::string>& rows);

/// Text manifest: layout rows, then `start r c`, `goal r c`, `obstacle r c`.
std::string write_manifest(const TaskSpec& spec);
TaskSpec read_manifest(const std::string& text);

}  // namespace camp::gridworld
