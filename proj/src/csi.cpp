#include "camp/csi.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace camp {

namespace {

int uniform_int(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

// Draws a value for `var` consistent with every conjunctive atom on it.
int draw_filtered(const VariableSpec& spec, const std::vector<Atom>& atoms, std::size_t var, Rng& rng) {
    std::vector<int> allowed;
    for (int v = 0; v < spec.size(); ++v) {
        bool ok = true;
        for (const auto& a : atoms)
            if (a.variable == var && (v == a.value) == a.negated) ok = false;
        if (ok) allowed.push_back(v);
    }
    if (allowed.empty()) throw std::invalid_argument("context is unsatisfiable");
    return allowed[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(allowed.size())))];
}

}  // namespace

std::vector<JointAssignment> sample_in_context(const std::vector<VariableSpec>& vars, const Context& ctx,
                                               int k1, Rng& rng, int max_rejections) {
    if (k1 < 1) throw std::invalid_argument("k1 must be at least 1");
    if (!satisfiable(ctx, vars)) throw std::invalid_argument("context is unsatisfiable");
    std::vector<JointAssignment> out;
    out.reserve(static_cast<std::size_t>(k1));
    for (int n = 0; n < k1; ++n) {
        JointAssignment u(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) u[i] = uniform_int(rng, vars[i].size());
        switch (ctx.shape()) {
            case ContextShape::universal:
                break;
            case ContextShape::literal:
            case ContextShape::conjunction:
                for (std::size_t var : ctx.variables()) u[var] = draw_filtered(vars[var], ctx.atoms(), var, rng);
                break;
            case ContextShape::disjunction: {
                int tries = 0;
                while (!ctx.contains(u) && tries++ < max_rejections)
                    for (std::size_t var : ctx.variables()) u[var] = uniform_int(rng, vars[var].size());
                if (!ctx.contains(u)) {
                    // Force one disjunct, chosen uniformly among the satisfiable ones.
                    const auto& atoms = ctx.atoms();
                    const Atom& atom = atoms[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(atoms.size())))];
                    u[atom.variable] = draw_filtered(vars[atom.variable], {atom}, atom.variable, rng);
                }
                break;
            }
        }
        out.push_back(std::move(u));
    }
    return out;
}

namespace {

using Marginal = std::vector<double>;

class MarginalOracle {
  public:
    MarginalOracle(const FactoredMdp& mdp, const CsiOptions& options, Rng& rng)
        : mdp_(mdp), options_(options), rng_(rng) {
        bool have_exact = static_cast<bool>(mdp.marginals) || static_cast<bool>(mdp.distribution);
        if (options.mode == CsiMode::exact && !have_exact)
            throw ModelError("exact CSI mode requires transition distributions");
        exact_ = options.mode == CsiMode::exact || (options.mode == CsiMode::automatic && have_exact);
    }

    bool exact() const { return exact_; }

    Marginals query(const JointAssignment& u) {
        auto [s, a] = split(u, mdp_.state_vars.size());
        if (exact_) return *mdp_.exact_marginals(s, a);
        Marginals m(mdp_.state_vars.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i].assign(mdp_.state_vars[i].domain.size(), 0.0);
        const double w = 1.0 / options_.samples_per_query;
        for (int k = 0; k < options_.samples_per_query; ++k) {
            State next = mdp_.sample(s, a, rng_);
            for (std::size_t i = 0; i < next.size(); ++i) m[i][static_cast<std::size_t>(next[i])] += w;
        }
        return m;
    }

    bool differ(const Marginal& p, const Marginal& q) const {
        if (exact_) {
            for (std::size_t k = 0; k < p.size(); ++k)
                if (std::abs(p[k] - q[k]) > options_.exact_tolerance) return true;
            return false;
        }
        double tv = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
        return 0.5 * tv > options_.tv_threshold;
    }

  private:
    const FactoredMdp& mdp_;
    const CsiOptions& options_;
    Rng& rng_;
    bool exact_ = false;
};

}  // namespace

CsiSet learn_csis(const FactoredMdp& mdp, const Context& ctx, const CsiOptions& options, Rng& rng) {
    if (options.k1 < 1 || options.k2 < 1) throw std::invalid_argument("k1 and k2 must be at least 1");
    const auto vars = mdp.all_vars();
    const std::size_t n_state = mdp.state_vars.size();

    std::vector<std::size_t> free_vars;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (!ctx.constrains(i)) free_vars.push_back(i);

    CsiSet result{ctx, {}};
    for (auto i : free_vars)
        for (auto j : free_vars) result.independent_pairs.insert({i, j});

    // Perturbation order per (sample, source) comes from its own stream so a
    // larger k2 extends, rather than reshuffles, the values tried.
    const std::uint64_t perturb_seed = rng();
    auto samples = sample_in_context(vars, ctx, options.k1, rng, options.max_rejections);
    MarginalOracle oracle(mdp, options, rng);

    for (std::size_t n = 0; n < samples.size(); ++n) {
        const auto& u = samples[n];
        Marginals base = oracle.query(u);
        for (auto i : free_vars) {
            std::vector<std::size_t> open_targets;
            for (auto j : free_vars)
                if (j < n_state && result.independent(i, j)) open_targets.push_back(j);
            if (open_targets.empty()) continue;

            std::vector<int> values(static_cast<std::size_t>(vars[i].size()));
            std::iota(values.begin(), values.end(), 0);
            if (vars[i].size() > options.k2) {
                Rng order(mix_seed(perturb_seed, n * 1000003ull + i));
                std::shuffle(values.begin(), values.end(), order);
                values.resize(static_cast<std::size_t>(options.k2));
            }
            for (int v : values) {
                if (v == u[i] || open_targets.empty()) continue;
                JointAssignment perturbed = u;
                perturbed[i] = v;
                Marginals m = oracle.query(perturbed);
                std::erase_if(open_targets, [&](std::size_t j) {
                    if (!oracle.differ(base[j], m[j])) return false;
                    result.independent_pairs.erase({i, j});
                    return true;
                });
            }
        }
    }
    return result;
}

void write_csi_records(std::ostream& out, const std::vector<CsiSet>& sets, const std::vector<VariableSpec>& vars) {
    for (const auto& set : sets) {
        out << set.context.to_string(vars) << '\t';
        bool first = true;
        for (const auto& [i, j] : set.independent_pairs) {
            if (!first) out << ';';
            out << vars.at(i).name << '>' << vars.at(j).name;
            first = false;
        }
        out << '\n';
    }
}

std::vector<CsiSet> read_csi_records(std::istream& in, const std::vector<VariableSpec>& vars) {
    auto index_of = [&](std::string_view name) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return i;
        throw std::invalid_argument("unknown variable '" + std::string(name) + "' in CSI record");
    };
    std::vector<CsiSet> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::invalid_argument("malformed CSI record: " + line);
        CsiSet set{parse_context(line.substr(0, tab), vars), {}};
        std::stringstream pairs(line.substr(tab + 1));
        std::string item;
        while (std::getline(pairs, item, ';')) {
            if (item.empty()) continue;
            auto gt = item.find('>');
            if (gt == std::string::npos) throw std::invalid_argument("malformed CSI pair: " + item);
            set.independent_pairs.insert({index_of(item.substr(0, gt)), index_of(item.substr(gt + 1))});
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

const CsiSet& CsiCache::get(const std::string& model_key, const FactoredMdp& mdp, const Context& ctx) {
    const auto vars = mdp.all_vars();
    auto key = std::make_pair(model_key, ctx.to_string(vars));
    {
        std::lock_guard lock(mutex_);
        auto it = sets_.find(key);
        if (it != sets_.end()) return it->second;
    }
    Rng rng(derive_seed(seed_, key.first + "|" + key.second));
    CsiSet set = learn_csis(mdp, ctx, options_, rng);
    std::lock_guard lock(mutex_);
    ++misses_;
    return sets_.emplace(std::move(key), std::move(set)).first->second;
}

void CsiCache::insert(const std::string& model_key, CsiSet set, const std::vector<VariableSpec>& vars) {
    std::lock_guard lock(mutex_);
    sets_[{model_key, set.context.to_string(vars)}] = std::move(set);
}

std::size_t CsiCache::size() const {
    std::lock_guard lock(mutex_);
    return sets_.size();
}

std::size_t CsiCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void CsiCache::save(std::ostream& out, const std::string& model_key, const std::vector<VariableSpec>& vars) const {
    std::vector<CsiSet> sets;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [key, set] : sets_)
            if (key.first == model_key) sets.push_back(set);
    }
    write_csi_records(out, sets, vars);
}

void CsiCache::load(std::istream& in, const std::string& model_key, const std::vector<VariableSpec>& vars) {
    for (auto& set : read_csi_records(in, vars)) insert(model_key, std::move(set), vars);
}

}  // namespace camp
