#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camp/core.hpp"

namespace camp {

/// `variable = value`, or its negation. `variable` is a global index into the
/// joint (state ++ action) variable list the context was built against.
struct Atom {
    std::size_t variable = 0;
    int value = 0;
    bool negated = false;

    bool holds(const JointAssignment& u) const { return (u[variable] == value) != negated; }
    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom&, const Atom&) = default;
};

enum class ContextShape { universal, literal, conjunction, disjunction };

class Context {
  public:
    /// The universal context.
    Context() = default;

    static Context universal() { return {}; }
    static Context literal(Atom atom);
    static Context conjunction(std::vector<Atom> atoms);
    static Context disjunction(std::vector<Atom> atoms);

    ContextShape shape() const { return shape_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool is_universal() const { return shape_ == ContextShape::universal; }

    /// The constrained variable set C, sorted and unique.
    std::vector<std::size_t> variables() const;
    bool constrains(std::size_t variable) const;

    bool contains(const JointAssignment& u) const;

    /// Canonical text, e.g. `TRUE`, `NOT(room=2)`, `OR(room=1,room=3)`.
    std::string to_string(const std::vector<VariableSpec>& vars) const;

    friend bool operator==(const Context&, const Context&) = default;

  private:
    Context(ContextShape shape, std::vector<Atom> atoms) : shape_(shape), atoms_(std::move(atoms)) {}

    ContextShape shape_ = ContextShape::universal;
    std::vector<Atom> atoms_;
};

bool in_context(const Context& ctx, const State& s, const Action& a);

/// Parses the canonical text form against a variable list. Throws
/// std::invalid_argument on unknown variables, values or syntax.
Context parse_context(std::string_view text, const std::vector<VariableSpec>& vars);

/// True when some joint assignment of the context's own variables satisfies it.
bool satisfiable(const Context& ctx, const std::vector<VariableSpec>& vars);

struct ContextSpaceOptions {
    int max_len = 2;
    /// Variables whose domain size exceeds this are not eligible.
    int domain_size_threshold = 8;
    bool literals = true;
    bool conjunctions = true;
    bool disjunctions = true;
    /// When set, only these variable names are eligible.
    std::optional<std::vector<std::string>> allowed;
};

/// Universal context first, then literals, then multi-atom terms by length
/// (conjunctions before disjunctions); atoms ordered by variable name, value
/// index, positive before negated.
std::vector<Context> generate_contexts(const std::vector<VariableSpec>& vars,
                                       const ContextSpaceOptions& options = {});

}  // namespace camp
