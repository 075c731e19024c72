#pragma once

// Context-specific relevance and the context-specific abstract MDP (CAMP):
// a projection that drops variables irrelevant under a context and routes
// every context violation to an absorbing sink.

#include <cstddef>
#include <memory>
#include <vector>

#include "camp/contexts.hpp"
#include "camp/core.hpp"
#include "camp/csi.hpp"

namespace camp {

/// Directed dependence graph over V \ C plus the reward variables. For
/// i, j outside C an edge i -> j exists unless (i, j) is an independent pair
/// of the CSI set; variables in C have no edges.
class DependencyGraph {
  public:
    DependencyGraph(const CsiSet& csis, const std::vector<std::size_t>& reward_vars, std::size_t num_vars);

    const std::vector<std::size_t>& nodes() const { return nodes_; }
    bool has_edge(std::size_t from, std::size_t to) const;
    /// Nodes with a directed path to some member of `targets` (targets included).
    std::vector<std::size_t> ancestors_of(const std::vector<std::size_t>& targets) const;

  private:
    std::vector<std::size_t> nodes_;
    std::vector<std::vector<bool>> adjacency_;
    std::vector<bool> present_;
};

/// Reward variables plus every variable that reaches one in the dependence
/// graph. Relevance is treated as time-independent. Sorted global indices.
std::vector<std::size_t> relevant_variables(const CsiSet& csis, const std::vector<std::size_t>& reward_vars,
                                            const std::vector<VariableSpec>& all_vars);

inline constexpr double kDefaultSinkReward = -1e9;

struct CampOptions {
    /// Finite stand-in for the sink's -infinity reward.
    double sink_reward = kDefaultSinkReward;
    /// When false, every variable is kept and only the sink rule applies.
    bool project = true;
};

class Camp {
  public:
    Camp(std::shared_ptr<const FactoredMdp> base, Context context, const CsiSet& csis,
         CampOptions options = {});

    const FactoredMdp& base() const { return *data_->base; }
    const Context& context() const { return data_->context; }
    /// The abstract MDP M'; its callbacks keep the CAMP alive.
    const std::shared_ptr<const FactoredMdp>& abstract_mdp() const { return abstract_; }

    /// Kept variables as indices into the base state/action variable lists.
    const std::vector<std::size_t>& kept_state_vars() const { return data_->kept_state; }
    const std::vector<std::size_t>& kept_action_vars() const { return data_->kept_action; }
    double sink_reward() const { return data_->sink_reward; }

    State project(const State& s) const;
    Action project_action(const Action& a) const;
    /// Right inverse: fills dropped variables with their first domain value.
    /// Lifting the sink throws std::invalid_argument.
    State lift(const State& abstract_state) const;
    Action lift_action(const Action& abstract_action) const;

    State sink() const;
    bool is_sink(const State& abstract_state) const;

  private:
    struct Data {
        std::shared_ptr<const FactoredMdp> base;
        Context context;
        std::vector<std::size_t> kept_state;
        std::vector<std::size_t> kept_action;
        double sink_reward = kDefaultSinkReward;

        State project(const State& s) const;
        Action project_action(const Action& a) const;
        State lift(const State& x) const;
        Action lift_action(const Action& x) const;
        bool is_sink(const State& x) const;
        bool violates(const State& x, const Action& y) const;
    };

    static std::shared_ptr<const FactoredMdp> build_abstract(std::shared_ptr<const Data> data);

    std::shared_ptr<const Data> data_;
    std::shared_ptr<const FactoredMdp> abstract_;
};

/// The CAMP for `ctx` given its CSIs.
Camp build_camp(std::shared_ptr<const FactoredMdp> mdp, const Context& ctx, const CsiSet& csis,
                CampOptions options = {});

}  // namespace camp
