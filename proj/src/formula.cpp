#include "searchsynth/formula.hpp"

#include "searchsynth/checked.hpp"
#include "searchsynth/errors.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace searchsynth {

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> kids = {}) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->kids = std::move(kids);
    return n;
}

const NodePtr& true_node() {
    static const NodePtr n = make_node(Op::True);
    return n;
}

const NodePtr& false_node() {
    static const NodePtr n = make_node(Op::False);
    return n;
}

bool same_node(const Node& a, const Node& b) {
    if (&a == &b)
        return true;
    if (a.op != b.op || a.role != b.role || a.index != b.index || a.value != b.value ||
        a.kids.size() != b.kids.size())
        return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!same_node(*a.kids[i], *b.kids[i]))
            return false;
    return true;
}

// Repeated conjuncts are common along a path (the same test taken twice);
// only short conjunctions are checked to keep this quadratic step cheap.
constexpr std::size_t dedupe_limit = 64;

void add_kid(Op op, std::vector<NodePtr>& kids, const NodePtr& k) {
    if (op == Op::And && kids.size() < dedupe_limit)
        for (const auto& existing : kids)
            if (same_node(*existing, *k))
                return;
    kids.push_back(k);
}

Formula build_junction(Op op, const std::vector<Formula>& parts) {
    const Op absorbing = op == Op::And ? Op::False : Op::True;
    const Op neutral = op == Op::And ? Op::True : Op::False;
    std::vector<NodePtr> kids;
    kids.reserve(parts.size());
    for (const auto& p : parts) {
        const Op pop = p.node().op;
        if (pop == absorbing)
            return Formula::wrap(p.ptr());
        if (pop == neutral)
            continue;
        if (pop == op) {
            for (const auto& k : p.node().kids)
                add_kid(op, kids, k);
        } else {
            add_kid(op, kids, p.ptr());
        }
    }
    if (kids.empty())
        return Formula::wrap(neutral == Op::True ? true_node() : false_node());
    if (kids.size() == 1)
        return Formula::wrap(kids.front());
    return Formula::wrap(make_node(op, std::move(kids)));
}

} // namespace

Term::Term() : Term(constant(0)) {}

Term Term::constant(Int value) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = value;
    return Term(std::move(n));
}

Term Term::variable(Role role, std::uint32_t index) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->role = role;
    n->index = index;
    return Term(std::move(n));
}

Term operator+(const Term& a, const Term& b) {
    if (a.is_constant() && b.is_constant())
        return Term::constant(checked_add(a.constant_value(), b.constant_value()));
    if (a.is_constant() && a.constant_value() == 0)
        return b;
    if (b.is_constant() && b.constant_value() == 0)
        return a;
    return Term(make_node(Op::Plus, {a.ptr(), b.ptr()}));
}

Term operator*(const Term& a, const Term& b) {
    if (a.is_constant() && b.is_constant())
        return Term::constant(checked_mul(a.constant_value(), b.constant_value()));
    if (a.is_constant() && a.constant_value() == 1)
        return b;
    if (b.is_constant() && b.constant_value() == 1)
        return a;
    if ((a.is_constant() && a.constant_value() == 0) ||
        (b.is_constant() && b.constant_value() == 0))
        return Term::constant(0);
    return Term(make_node(Op::Times, {a.ptr(), b.ptr()}));
}

Term operator-(const Term& a, const Term& b) {
    return a + Term::constant(-1) * b;
}

Formula::Formula() : node_(true_node()) {}

Formula Formula::top() { return Formula(true_node()); }
Formula Formula::bottom() { return Formula(false_node()); }

Formula Formula::less(const Term& a, const Term& b) {
    if (a.is_constant() && b.is_constant())
        return boolean(a.constant_value() < b.constant_value());
    return Formula(make_node(Op::Less, {a.ptr(), b.ptr()}));
}

Formula Formula::equal(const Term& a, const Term& b) {
    if (a.is_constant() && b.is_constant())
        return boolean(a.constant_value() == b.constant_value());
    return Formula(make_node(Op::Equal, {a.ptr(), b.ptr()}));
}

Formula Formula::less_equal(const Term& a, const Term& b) {
    return !less(b, a);
}

Formula Formula::all_of(const std::vector<Formula>& parts) {
    return build_junction(Op::And, parts);
}

Formula Formula::any_of(const std::vector<Formula>& parts) {
    return build_junction(Op::Or, parts);
}

Formula operator&&(const Formula& a, const Formula& b) {
    return build_junction(Op::And, {a, b});
}

Formula operator||(const Formula& a, const Formula& b) {
    return build_junction(Op::Or, {a, b});
}

Formula operator!(const Formula& a) {
    switch (a.node().op) {
    case Op::True:
        return Formula::bottom();
    case Op::False:
        return Formula::top();
    case Op::Not:
        return Formula(a.node().kids.front());
    default:
        return Formula(make_node(Op::Not, {a.ptr()}));
    }
}

Int eval_term(const Node& n, PointView target, PointView query) {
    switch (n.op) {
    case Op::Const:
        return n.value;
    case Op::Var: {
        const auto& src = n.role == Role::Target ? target : query;
        if (n.index >= src.size())
            throw UnboundVariable(std::string("no value for ") +
                                  (n.role == Role::Target ? "t" : "q") +
                                  std::to_string(n.index));
        return src[n.index];
    }
    case Op::Plus:
        return checked_add(eval_term(*n.kids[0], target, query),
                           eval_term(*n.kids[1], target, query));
    case Op::Times:
        return checked_mul(eval_term(*n.kids[0], target, query),
                           eval_term(*n.kids[1], target, query));
    default:
        throw EvalError("boolean node used as integer term");
    }
}

namespace {

bool eval_node(const Node& n, PointView target, PointView query) {
    switch (n.op) {
    case Op::True:
        return true;
    case Op::False:
        return false;
    case Op::And:
        for (const auto& k : n.kids)
            if (!eval_node(*k, target, query))
                return false;
        return true;
    case Op::Or:
        for (const auto& k : n.kids)
            if (eval_node(*k, target, query))
                return true;
        return false;
    case Op::Not:
        return !eval_node(*n.kids[0], target, query);
    case Op::Less:
        return eval_term(*n.kids[0], target, query) < eval_term(*n.kids[1], target, query);
    case Op::Equal:
        return eval_term(*n.kids[0], target, query) == eval_term(*n.kids[1], target, query);
    default:
        throw EvalError("integer term used as formula");
    }
}

class Rebuilder {
public:
    Rebuilder(const PointView* query) : query_(query) {}

    NodePtr rebuild(const NodePtr& n) {
        if (auto it = memo_.find(n.get()); it != memo_.end())
            return it->second;
        NodePtr out = rebuild_uncached(n);
        memo_.emplace(n.get(), out);
        return out;
    }

private:
    NodePtr rebuild_uncached(const NodePtr& n) {
        switch (n->op) {
        case Op::Const:
        case Op::True:
        case Op::False:
            return n;
        case Op::Var:
            if (query_ != nullptr && n->role == Role::Query) {
                if (n->index >= query_->size())
                    throw UnboundVariable("no value for q" + std::to_string(n->index));
                return Term::constant((*query_)[n->index]).ptr();
            }
            return n;
        case Op::Plus:
            return (term(n->kids[0]) + term(n->kids[1])).ptr();
        case Op::Times:
            return (term(n->kids[0]) * term(n->kids[1])).ptr();
        case Op::Less:
            return Formula::less(term(n->kids[0]), term(n->kids[1])).ptr();
        case Op::Equal:
            return Formula::equal(term(n->kids[0]), term(n->kids[1])).ptr();
        case Op::Not:
            return (!formula(n->kids[0])).ptr();
        case Op::And:
        case Op::Or: {
            std::vector<Formula> parts;
            parts.reserve(n->kids.size());
            for (const auto& k : n->kids)
                parts.push_back(formula(k));
            return (n->op == Op::And ? Formula::all_of(parts) : Formula::any_of(parts)).ptr();
        }
        }
        return n;
    }

    Term term(const NodePtr& n) { return Term::wrap(rebuild(n)); }
    Formula formula(const NodePtr& n) { return Formula::wrap(rebuild(n)); }

    const PointView* query_;
    std::unordered_map<const Node*, NodePtr> memo_;
};

void write_sexpr(std::ostream& out, const Node& n) {
    switch (n.op) {
    case Op::Const:
        out << n.value;
        return;
    case Op::Var:
        out << (n.role == Role::Target ? 't' : 'q') << n.index;
        return;
    case Op::True:
        out << "true";
        return;
    case Op::False:
        out << "false";
        return;
    case Op::Not:
        // not (a < b) prints as (le b a)
        if (n.kids[0]->op == Op::Less) {
            out << "(le ";
            write_sexpr(out, *n.kids[0]->kids[1]);
            out << ' ';
            write_sexpr(out, *n.kids[0]->kids[0]);
            out << ')';
            return;
        }
        out << "(not ";
        write_sexpr(out, *n.kids[0]);
        out << ')';
        return;
    default:
        break;
    }
    const char* head = "";
    switch (n.op) {
    case Op::Plus: head = "+"; break;
    case Op::Times: head = "*"; break;
    case Op::And: head = "and"; break;
    case Op::Or: head = "or"; break;
    case Op::Less: head = "lt"; break;
    case Op::Equal: head = "="; break;
    default: break;
    }
    out << '(' << head;
    for (const auto& k : n.kids) {
        out << ' ';
        write_sexpr(out, *k);
    }
    out << ')';
}

bool mentions_node(const Node& n, Role role, std::unordered_set<const Node*>& seen) {
    if (!seen.insert(&n).second)
        return false;
    if (n.op == Op::Var)
        return n.role == role;
    for (const auto& k : n.kids)
        if (mentions_node(*k, role, seen))
            return true;
    return false;
}

void collect(const Node& n, std::unordered_set<const Node*>& seen) {
    if (!seen.insert(&n).second)
        return;
    for (const auto& k : n.kids)
        collect(*k, seen);
}

} // namespace

bool eval_formula(const Formula& f, PointView target, PointView query) {
    return eval_node(f.node(), target, query);
}

Formula substitute_query(const Formula& f, PointView query) {
    Rebuilder r(&query);
    return Formula::wrap(r.rebuild(f.ptr()));
}

Formula simplify(const Formula& f) {
    Rebuilder r(nullptr);
    return Formula::wrap(r.rebuild(f.ptr()));
}

bool mentions(const Formula& f, Role role) {
    std::unordered_set<const Node*> seen;
    return mentions_node(f.node(), role, seen);
}

std::size_t formula_size(const Formula& f) {
    std::unordered_set<const Node*> seen;
    collect(f.node(), seen);
    return seen.size();
}

std::string to_sexpr(const Formula& f) {
    std::ostringstream out;
    write_sexpr(out, f.node());
    return out.str();
}

std::string to_sexpr(const Term& t) {
    std::ostringstream out;
    write_sexpr(out, t.node());
    return out.str();
}

Formula box_formula(Role role, std::span<const Int> lo, std::span<const Int> hi) {
    std::vector<Formula> parts;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const auto v = Term::variable(role, static_cast<std::uint32_t>(i));
        parts.push_back(Formula::less_equal(Term::constant(lo[i]), v));
        parts.push_back(Formula::less_equal(v, Term::constant(hi[i])));
    }
    return Formula::all_of(parts);
}

} // namespace searchsynth
