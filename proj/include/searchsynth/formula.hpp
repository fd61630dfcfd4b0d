#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace searchsynth {

using Int = std::int64_t;
using Point = std::vector<Int>;
using PointView = std::span<const Int>;

/// Which side of the search a variable belongs to.
enum class Role : std::uint8_t { Target, Query };

enum class Op : std::uint8_t {
    // integer terms
    Const,
    Var,
    Plus,
    Times,
    // boolean formulas
    True,
    False,
    And,
    Or,
    Not,
    Less,
    Equal,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// One vertex of a term/formula DAG. Nodes are immutable once built and are
/// shared freely between formulas.
struct Node {
    Op op = Op::Const;
    Role role = Role::Target;
    std::uint32_t index = 0;
    Int value = 0;
    std::vector<NodePtr> kids;
};

/// Integer term over target and query coordinates.
class Term {
public:
    Term();  // constant 0

    static Term constant(Int value);
    static Term variable(Role role, std::uint32_t index);

    friend Term operator+(const Term& a, const Term& b);
    friend Term operator*(const Term& a, const Term& b);
    friend Term operator-(const Term& a, const Term& b);

    bool is_constant() const { return node_->op == Op::Const; }
    Int constant_value() const { return node_->value; }

    const Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }
    static Term wrap(NodePtr node) { return Term(std::move(node)); }

private:
    explicit Term(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

/// Quantifier-free boolean constraint over integer terms.
///
/// Factories fold constants, flatten nested conjunctions/disjunctions and drop
/// double negations; nothing else is rewritten.
class Formula {
public:
    Formula();  // true

    static Formula top();
    static Formula bottom();
    static Formula boolean(bool value) { return value ? top() : bottom(); }
    static Formula less(const Term& a, const Term& b);
    static Formula equal(const Term& a, const Term& b);
    static Formula less_equal(const Term& a, const Term& b);
    static Formula all_of(const std::vector<Formula>& parts);
    static Formula any_of(const std::vector<Formula>& parts);

    friend Formula operator&&(const Formula& a, const Formula& b);
    friend Formula operator||(const Formula& a, const Formula& b);
    friend Formula operator!(const Formula& a);

    bool is_true() const { return node_->op == Op::True; }
    bool is_false() const { return node_->op == Op::False; }
    bool is_constant() const { return is_true() || is_false(); }

    const Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }
    static Formula wrap(NodePtr node) { return Formula(std::move(node)); }

private:
    explicit Formula(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

/// Evaluates an integer term; throws UnboundVariable for coordinates outside
/// the supplied assignment and EvalError on overflow.
Int eval_term(const Node& term, PointView target, PointView query);

/// Evaluates `f` under the full assignment (target, query).
bool eval_formula(const Formula& f, PointView target, PointView query);

/// Replaces every query coordinate by the matching entry of `query` and folds
/// the result. The returned formula mentions target variables only.
Formula substitute_query(const Formula& f, PointView query);

/// Rebuilds `f` through the folding factories.
Formula simplify(const Formula& f);

bool mentions(const Formula& f, Role role);

/// Number of distinct nodes reachable from `f`.
std::size_t formula_size(const Formula& f);

/// S-expression form, e.g. `(and (le 1 t0) (lt t0 10))`.
std::string to_sexpr(const Formula& f);
std::string to_sexpr(const Term& t);

/// Conjunction of per-coordinate box bounds lo[i] <= t_i <= hi[i].
Formula box_formula(Role role, std::span<const Int> lo, std::span<const Int> hi);

} // namespace searchsynth
