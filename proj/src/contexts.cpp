#include "camp/contexts.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace camp {

Context Context::literal(Atom atom) { return Context(ContextShape::literal, {atom}); }

Context Context::conjunction(std::vector<Atom> atoms) {
    if (atoms.empty()) return universal();
    std::set<std::size_t> seen;
    for (const auto& a : atoms)
        if (!seen.insert(a.variable).second)
            throw std::invalid_argument("conjunction atoms must reference distinct variables");
    if (atoms.size() == 1) return literal(atoms.front());
    return Context(ContextShape::conjunction, std::move(atoms));
}

Context Context::disjunction(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("empty disjunction");
    if (atoms.size() == 1) return literal(atoms.front());
    return Context(ContextShape::disjunction, std::move(atoms));
}

std::vector<std::size_t> Context::variables() const {
    std::vector<std::size_t> vars;
    for (const auto& a : atoms_) vars.push_back(a.variable);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

bool Context::constrains(std::size_t variable) const {
    return std::any_of(atoms_.begin(), atoms_.end(),
                       [&](const Atom& a) { return a.variable == variable; });
}

bool Context::contains(const JointAssignment& u) const {
    switch (shape_) {
        case ContextShape::universal:
            return true;
        case ContextShape::literal:
        case ContextShape::conjunction:
            return std::all_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return a.holds(u); });
        case ContextShape::disjunction:
            return std::any_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return a.holds(u); });
    }
    return false;
}

namespace {

std::string atom_text(const Atom& a, const std::vector<VariableSpec>& vars) {
    const auto& v = vars.at(a.variable);
    std::string core = v.name + "=" + v.domain.at(static_cast<std::size_t>(a.value));
    return a.negated ? "NOT(" + core + ")" : core;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

bool strip_wrapper(std::string_view& s, std::string_view head) {
    if (s.size() > head.size() + 1 && s.substr(0, head.size()) == head && s[head.size()] == '(' &&
        s.back() == ')') {
        s = s.substr(head.size() + 1, s.size() - head.size() - 2);
        return true;
    }
    return false;
}

Atom parse_atom(std::string_view s, const std::vector<VariableSpec>& vars) {
    s = trim(s);
    Atom atom;
    if (strip_wrapper(s, "NOT")) atom.negated = true;
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("malformed atom '" + std::string(s) + "'");
    auto name = trim(s.substr(0, eq));
    auto value = trim(s.substr(eq + 1));
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].name != name) continue;
        int idx = vars[i].value_index(value);
        if (idx < 0)
            throw std::invalid_argument("unknown value '" + std::string(value) + "' for " + std::string(name));
        atom.variable = i;
        atom.value = idx;
        return atom;
    }
    throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
}

std::vector<std::string_view> split_top_level(std::string_view s) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (s[i] == ',' && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

}  // namespace

std::string Context::to_string(const std::vector<VariableSpec>& vars) const {
    if (shape_ == ContextShape::universal) return "TRUE";
    if (shape_ == ContextShape::literal) return atom_text(atoms_.front(), vars);
    std::string out = shape_ == ContextShape::conjunction ? "AND(" : "OR(";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out += ",";
        out += atom_text(atoms_[i], vars);
    }
    return out + ")";
}

bool in_context(const Context& ctx, const State& s, const Action& a) { return ctx.contains(join(s, a)); }

Context parse_context(std::string_view text, const std::vector<VariableSpec>& vars) {
    text = trim(text);
    if (text == "TRUE") return Context::universal();
    std::string_view body = text;
    for (auto [head, shape] : {std::pair{std::string_view("AND"), ContextShape::conjunction},
                               std::pair{std::string_view("OR"), ContextShape::disjunction}}) {
        body = text;
        if (!strip_wrapper(body, head)) continue;
        std::vector<Atom> atoms;
        for (auto part : split_top_level(body)) atoms.push_back(parse_atom(part, vars));
        return shape == ContextShape::conjunction ? Context::conjunction(std::move(atoms))
                                                  : Context::disjunction(std::move(atoms));
    }
    return Context::literal(parse_atom(text, vars));
}

bool satisfiable(const Context& ctx, const std::vector<VariableSpec>& vars) {
    auto cvars = ctx.variables();
    JointAssignment u(vars.size(), 0);
    std::function<bool(std::size_t)> search = [&](std::size_t k) {
        if (k == cvars.size()) return ctx.contains(u);
        for (int v = 0; v < vars[cvars[k]].size(); ++v) {
            u[cvars[k]] = v;
            if (search(k + 1)) return true;
        }
        return false;
    };
    return search(0);
}

std::vector<Context> generate_contexts(const std::vector<VariableSpec>& vars,
                                       const ContextSpaceOptions& options) {
    if (options.max_len < 1) throw std::invalid_argument("max_len must be at least 1");
    if (options.domain_size_threshold < 1) throw std::invalid_argument("threshold must be at least 1");

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].size() > options.domain_size_threshold) continue;
        if (options.allowed &&
            std::find(options.allowed->begin(), options.allowed->end(), vars[i].name) == options.allowed->end())
            continue;
        eligible.push_back(i);
    }
    std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
        return vars[a].name < vars[b].name || (vars[a].name == vars[b].name && a < b);
    });

    std::vector<Atom> atoms;
    for (std::size_t var : eligible)
        for (int value = 0; value < vars[var].size(); ++value) {
            atoms.push_back({var, value, false});
            atoms.push_back({var, value, true});
        }

    std::vector<Context> out{Context::universal()};
    if (options.literals)
        for (const auto& a : atoms) out.push_back(Context::literal(a));

    std::vector<std::size_t> pick;
    std::function<void(std::size_t, std::size_t, bool)> choose = [&](std::size_t from, std::size_t len,
                                                                     bool conj) {
        if (pick.size() == len) {
            std::vector<Atom> chosen;
            for (auto k : pick) chosen.push_back(atoms[k]);
            if (conj) {
                std::set<std::size_t> distinct;
                for (const auto& a : chosen) distinct.insert(a.variable);
                if (distinct.size() != chosen.size()) return;
                out.push_back(Context::conjunction(std::move(chosen)));
            } else {
                out.push_back(Context::disjunction(std::move(chosen)));
            }
            return;
        }
        for (std::size_t k = from; k < atoms.size(); ++k) {
            pick.push_back(k);
            choose(k + 1, len, conj);
            pick.pop_back();
        }
    };
    for (int len = 2; len <= options.max_len; ++len) {
        if (options.conjunctions) choose(0, static_cast<std::size_t>(len), true);
        if (options.disjunctions) choose(0, static_cast<std::size_t>(len), false);
    }
    return out;
}

}  // namespace camp
