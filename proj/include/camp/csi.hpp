#pragma once

// Approximate context-specific independence discovery.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "camp/contexts.hpp"
#include "camp/core.hpp"

namespace camp {

/// Ordered (source, target) pairs, as global variable indices, for which
/// target_{t+1} is independent of source_t under `context`.
struct CsiSet {
    Context context;
    std::set<std::pair<std::size_t, std::size_t>> independent_pairs;

    bool independent(std::size_t source, std::size_t target) const {
        return independent_pairs.count({source, target}) > 0;
    }
};

enum class CsiMode {
    automatic,  // exact when the model exposes distributions, else sampling
    exact,
    sampling,
};

struct CsiOptions {
    int k1 = 50;
    int k2 = 50;
    CsiMode mode = CsiMode::automatic;
    double exact_tolerance = 1e-9;
    int samples_per_query = 64;
    double tv_threshold = 0.15;
    /// Rejection attempts per sample before a satisfying atom is forced.
    int max_rejections = 1000;
};

/// Up to k1 joint assignments drawn uniformly over the joint domains and
/// conditioned on membership in `ctx`.
std::vector<JointAssignment> sample_in_context(const std::vector<VariableSpec>& vars, const Context& ctx,
                                               int k1, Rng& rng, int max_rejections = 1000);

/// Starts from every pair over V \ C being independent and removes a pair
/// whenever perturbing the source changes the target's successor marginal.
/// Targets that are action variables are never produced by the transition
/// and so remain independent.
CsiSet learn_csis(const FactoredMdp& mdp, const Context& ctx, const CsiOptions& options, Rng& rng);

/// One record per context: `context<TAB>src>dst;src>dst;...` by variable name.
void write_csi_records(std::ostream& out, const std::vector<CsiSet>& sets, const std::vector<VariableSpec>& vars);
std::vector<CsiSet> read_csi_records(std::istream& in, const std::vector<VariableSpec>& vars);

/// Memoises learn_csis per (model key, context text). Thread-safe.
class CsiCache {
  public:
    explicit CsiCache(CsiOptions options = {}, std::uint64_t seed = 0) : options_(options), seed_(seed) {}

    const CsiSet& get(const std::string& model_key, const FactoredMdp& mdp, const Context& ctx);
    void insert(const std::string& model_key, CsiSet set, const std::vector<VariableSpec>& vars);
    std::size_t size() const;
    const CsiOptions& options() const { return options_; }
    /// Number of learn_csis calls made on a miss.
    std::size_t misses() const;

    void save(std::ostream& out, const std::string& model_key, const std::vector<VariableSpec>& vars) const;
    void load(std::istream& in, const std::string& model_key, const std::vector<VariableSpec>& vars);

  private:
    CsiOptions options_;
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, CsiSet> sets_;
    std::size_t misses_ = 0;
};

}  // namespace camp
