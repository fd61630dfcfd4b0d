#include "searchsynth/symexec.hpp"

#include "searchsynth/interpreter.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <random>

namespace searchsynth {

std::size_t OutcomeConstraintMap::reachable() const {
    return static_cast<std::size_t>(
        std::count_if(phi.begin(), phi.end(), [](const Formula& f) { return !f.is_false(); }));
}

namespace {

struct Witness {
    std::size_t target = 0;
    std::size_t query = 0;
};

enum class Verdict { Feasible, Infeasible, Unknown };

/// Decides whether a conjunction of path conditions has a model in the valid
/// (target, query) domain.
class Feasibility {
public:
    Feasibility(std::span<const Point> targets, std::span<const Point> queries,
                std::vector<Interval> target_box, std::vector<Interval> query_box,
                const SymexecConfig& cfg)
        : targets_(targets), queries_(queries), target_box_(std::move(target_box)),
          query_box_(std::move(query_box)) {
        const std::uint64_t nt = targets.size();
        const std::uint64_t nq = queries.size();
        std::uint64_t pairs = 0;
        exhaustive_ = !__builtin_mul_overflow(nt, nq, &pairs) && pairs <= cfg.exhaustive_cap;
        if (!exhaustive_) {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_int_distribution<std::size_t> pick_t(0, targets.size() - 1);
            std::uniform_int_distribution<std::size_t> pick_q(0, queries.size() - 1);
            samples_.reserve(cfg.sample_size);
            for (std::size_t i = 0; i < cfg.sample_size; ++i) {
                const auto t = pick_t(rng);
                samples_.push_back({t, pick_q(rng)});
            }
        }
    }

    Verdict check(const std::vector<Formula>& conj, const std::optional<Witness>& hint,
                  std::optional<Witness>& found) const {
        if (refuted_by_bounds(conj))
            return Verdict::Infeasible;
        if (hint && satisfies(conj, *hint)) {
            found = hint;
            return Verdict::Feasible;
        }
        if (exhaustive_) {
            for (std::size_t t = 0; t < targets_.size(); ++t)
                for (std::size_t q = 0; q < queries_.size(); ++q)
                    if (satisfies(conj, {t, q})) {
                        found = Witness{t, q};
                        return Verdict::Feasible;
                    }
            return Verdict::Infeasible;
        }
        for (const auto& w : samples_)
            if (satisfies(conj, w)) {
                found = w;
                return Verdict::Feasible;
            }
        return Verdict::Unknown;
    }

    std::optional<Witness> first() const {
        if (targets_.empty() || queries_.empty())
            return std::nullopt;
        return Witness{0, 0};
    }

private:
    bool satisfies(const std::vector<Formula>& conj, const Witness& w) const {
        const auto& t = targets_[w.target];
        const auto& q = queries_[w.query];
        for (auto it = conj.rbegin(); it != conj.rend(); ++it)
            if (!eval_formula(*it, t, q))
                return false;
        return true;
    }

    struct Bounds {
        Int lo;
        Int hi;
    };

    static void collect_atoms(const Node& n, std::vector<const Node*>& atoms) {
        if (n.op == Op::And) {
            for (const auto& k : n.kids)
                collect_atoms(*k, atoms);
        } else {
            atoms.push_back(&n);
        }
    }

    // Interval propagation over simple variable/constant comparisons.
    bool refuted_by_bounds(const std::vector<Formula>& conj) const {
        std::vector<Bounds> tb(target_box_.size());
        std::vector<Bounds> qb(query_box_.size());
        for (std::size_t i = 0; i < tb.size(); ++i)
            tb[i] = {target_box_[i].lo, target_box_[i].hi};
        for (std::size_t i = 0; i < qb.size(); ++i)
            qb[i] = {query_box_[i].lo, query_box_[i].hi};
        auto bounds_of = [&](const Node& v) -> Bounds* {
            auto& vec = v.role == Role::Target ? tb : qb;
            return v.index < vec.size() ? &vec[v.index] : nullptr;
        };

        std::vector<const Node*> atoms;
        for (const auto& f : conj)
            collect_atoms(f.node(), atoms);

        std::vector<std::pair<const Node*, Int>> disequalities;
        for (const Node* a : atoms) {
            bool negated = false;
            const Node* core = a;
            if (core->op == Op::Not) {
                negated = true;
                core = core->kids[0].get();
            }
            if (core->op != Op::Less && core->op != Op::Equal)
                continue;
            const Node& l = *core->kids[0];
            const Node& r = *core->kids[1];
            if (l.op == Op::Var && r.op == Op::Var && core->op == Op::Less) {
                const Bounds* bl = bounds_of(l);
                const Bounds* br = bounds_of(r);
                if (!bl || !br)
                    continue;
                // l < r needs lo(l) < hi(r); not(l < r) needs hi(l) >= lo(r)
                if (!negated && bl->lo >= br->hi)
                    return true;
                if (negated && bl->hi < br->lo)
                    return true;
                continue;
            }
            const bool var_left = l.op == Op::Var && r.op == Op::Const;
            const bool var_right = r.op == Op::Var && l.op == Op::Const;
            if (!var_left && !var_right)
                continue;
            Bounds* b = bounds_of(var_left ? l : r);
            if (!b)
                continue;
            const Int c = var_left ? r.value : l.value;
            if (core->op == Op::Equal) {
                if (negated) {
                    disequalities.emplace_back(var_left ? &l : &r, c);
                } else {
                    b->lo = std::max(b->lo, c);
                    b->hi = std::min(b->hi, c);
                }
            } else if (var_left) {
                // x < c, or x >= c when negated
                if (negated)
                    b->lo = std::max(b->lo, c);
                else
                    b->hi = std::min(b->hi, c - 1);
            } else {
                // c < x, or x <= c when negated
                if (negated)
                    b->hi = std::min(b->hi, c);
                else
                    b->lo = std::max(b->lo, c + 1);
            }
            if (b->lo > b->hi)
                return true;
        }
        for (const auto& [v, c] : disequalities) {
            const Bounds* b = bounds_of(*v);
            if (b->lo == b->hi && b->lo == c)
                return true;
        }
        return false;
    }

    std::span<const Point> targets_;
    std::span<const Point> queries_;
    std::vector<Interval> target_box_;
    std::vector<Interval> query_box_;
    bool exhaustive_ = false;
    std::vector<Witness> samples_;
};

struct SymValue {
    enum class Type : std::uint8_t { Unset, Int, Bool, Array };
    Type type = Type::Unset;
    Term term;
    Formula formula;
    std::vector<Term> arr;

    static SymValue integer(Term t) {
        SymValue v;
        v.type = Type::Int;
        v.term = std::move(t);
        return v;
    }
    static SymValue boolean(Formula f) {
        SymValue v;
        v.type = Type::Bool;
        v.formula = std::move(f);
        return v;
    }
    static SymValue array(std::vector<Term> a) {
        SymValue v;
        v.type = Type::Array;
        v.arr = std::move(a);
        return v;
    }
};

struct SymState {
    std::vector<Formula> psi;
    std::optional<Witness> witness;
    std::vector<SymValue> frame;
    bool returned = false;
    SymValue ret;
    std::size_t outcome = 0;
};

using States = std::vector<SymState>;

struct Branch {
    SymState st;
    SymValue v;
};

using Branches = std::vector<Branch>;

class Executor {
public:
    Executor(const SearchSpec& spec, const Feasibility& feas, const SymexecConfig& cfg,
             SymexecStats& stats)
        : spec_(spec), feas_(feas), cfg_(cfg), stats_(stats) {
        auto globals_for = [](const std::vector<VarDecl>& decls, Role role) {
            std::vector<SymValue> out;
            for (const auto& d : decls) {
                std::vector<Term> coords;
                for (std::size_t i = 0; i < d.dim(); ++i)
                    coords.push_back(
                        Term::variable(role, static_cast<std::uint32_t>(d.offset + i)));
                out.push_back(d.is_array ? SymValue::array(std::move(coords))
                                         : SymValue::integer(coords.front()));
            }
            return out;
        };
        targets_ = globals_for(spec.target_decls, Role::Target);
        queries_ = globals_for(spec.query_decls, Role::Query);
        for (const auto& c : spec.constants) {
            std::vector<Term> vals;
            for (Int v : c.values)
                vals.push_back(Term::constant(v));
            constants_.push_back(c.is_array ? SymValue::array(std::move(vals))
                                            : SymValue::integer(vals.front()));
        }
    }

    States run() {
        SymState init;
        init.witness = feas_.first();
        init.frame.resize(spec_.evaluate.num_slots);
        States out = exec(spec_.evaluate.body(), std::move(init));
        for (const auto& s : out)
            if (!s.returned)
                throw EvalError("evaluate finished without returning an outcome");
        return out;
    }

private:
    [[noreturn]] static void fail(const AstNode& n, const std::string& msg) {
        throw EvalError(msg + " at " + std::to_string(n.pos.line) + ":" +
                        std::to_string(n.pos.column));
    }

    void check_cap(std::size_t n) const {
        if (n > cfg_.path_cap)
            throw PathExplosion("symbolic execution exceeded " + std::to_string(cfg_.path_cap) +
                                " paths");
    }

    /// `st` further constrained by `f`, unless that is proven infeasible.
    std::optional<SymState> assume(const SymState& st, const Formula& f) {
        if (f.is_true())
            return st;
        if (f.is_false())
            return std::nullopt;
        SymState next = st;
        next.psi.push_back(f);
        std::optional<Witness> found;
        switch (feas_.check(next.psi, st.witness, found)) {
        case Verdict::Feasible:
            next.witness = found;
            return next;
        case Verdict::Unknown:
            ++stats_.unproven;
            next.witness.reset();
            return next;
        case Verdict::Infeasible:
            ++stats_.pruned;
            return std::nullopt;
        }
        return std::nullopt;
    }

    /// True only when `f` provably has a model on the path.
    bool reachable(const SymState& st, const Formula& f) {
        if (f.is_false())
            return false;
        auto conj = st.psi;
        conj.push_back(f);
        std::optional<Witness> found;
        return feas_.check(conj, st.witness, found) == Verdict::Feasible;
    }

    const Term& as_int(const AstNode& n, const SymValue& v) {
        if (v.type != SymValue::Type::Int)
            fail(n, "expected integer");
        return v.term;
    }

    const Formula& as_bool(const AstNode& n, const SymValue& v) {
        if (v.type != SymValue::Type::Bool)
            fail(n, "expected boolean");
        return v.formula;
    }

    const SymValue& read(const AstNode& n, const SymState& st) {
        switch (n.ref) {
        case RefKind::Local:
            if (st.frame[n.slot].type == SymValue::Type::Unset)
                fail(n, "'" + n.name + "' read before assignment");
            return st.frame[n.slot];
        case RefKind::Target:
            return targets_[n.slot];
        case RefKind::Query:
            return queries_[n.slot];
        case RefKind::Constant:
            return constants_[n.slot];
        default:
            fail(n, "unresolved identifier '" + n.name + "'");
        }
    }

    const std::vector<Term>& array_of(const AstNode& n, const SymState& st) {
        const SymValue& v = read(n, st);
        if (v.type != SymValue::Type::Array)
            fail(n, "'" + n.name + "' is not an array");
        return v.arr;
    }

    static Formula in_range(const Term& idx, std::size_t size) {
        return Formula::less_equal(Term::constant(0), idx) &&
               Formula::less(idx, Term::constant(static_cast<Int>(size)));
    }

    /// Forks `st` over the concrete values a symbolic index can take.
    template <class F>
    void for_each_index(const AstNode& n, const SymState& st, const Term& idx, std::size_t size,
                        F&& body) {
        if (idx.is_constant()) {
            const Int i = idx.constant_value();
            if (i < 0 || static_cast<std::size_t>(i) >= size)
                fail(n, "index " + std::to_string(i) + " out of range for '" + n.name + "'");
            body(SymState(st), static_cast<std::size_t>(i));
            return;
        }
        for (std::size_t k = 0; k < size; ++k)
            if (auto s = assume(st, Formula::equal(idx, Term::constant(static_cast<Int>(k)))))
                body(std::move(*s), k);
        if (reachable(st, !in_range(idx, size)))
            fail(n, "index may be out of range for '" + n.name + "'");
    }

    template <class F>
    Branches binary(const AstNode& n, SymState st, F&& combine) {
        Branches out;
        for (auto& b1 : eval(*n.kids[0], std::move(st)))
            for (auto& b2 : eval(*n.kids[1], std::move(b1.st)))
                out.push_back({std::move(b2.st), combine(b1.v, b2.v)});
        return out;
    }

    Branches junction(const AstNode& n, SymState st, bool is_and) {
        Branches out;
        for (auto& b1 : eval(*n.kids[0], std::move(st))) {
            const Formula fa = as_bool(n, b1.v);
            // short-circuit value: false for &&, true for ||
            const Formula decided = Formula::boolean(!is_and);
            if (fa.is_constant()) {
                if (fa.is_true() != is_and) {
                    out.push_back({std::move(b1.st), SymValue::boolean(decided)});
                } else {
                    for (auto& b2 : eval(*n.kids[1], std::move(b1.st)))
                        out.push_back({std::move(b2.st), SymValue::boolean(as_bool(n, b2.v))});
                }
                continue;
            }
            // Without forks or faults in the right operand a plain connective suffices.
            try {
                auto rhs = eval(*n.kids[1], b1.st);
                if (rhs.size() == 1 && rhs.front().st.psi.size() == b1.st.psi.size()) {
                    const Formula fb = as_bool(n, rhs.front().v);
                    out.push_back({std::move(rhs.front().st),
                                   SymValue::boolean(is_and ? (fa && fb) : (fa || fb))});
                    continue;
                }
            } catch (const EvalError&) {
            }
            const Formula continue_cond = is_and ? fa : !fa;
            if (auto s = assume(b1.st, continue_cond))
                for (auto& b2 : eval(*n.kids[1], std::move(*s)))
                    out.push_back({std::move(b2.st), SymValue::boolean(as_bool(n, b2.v))});
            if (auto s = assume(b1.st, !continue_cond))
                out.push_back({std::move(*s), SymValue::boolean(decided)});
        }
        return out;
    }

    Branches call(const AstNode& n, SymState st) {
        const FunctionDef& f = spec_.functions[n.slot];
        std::vector<std::pair<SymState, std::vector<SymValue>>> partial;
        partial.push_back({std::move(st), {}});
        for (const auto& arg : n.kids) {
            std::vector<std::pair<SymState, std::vector<SymValue>>> next;
            for (auto& [s, args] : partial)
                for (auto& b : eval(*arg, std::move(s))) {
                    auto a = args;
                    a.push_back(std::move(b.v));
                    next.push_back({std::move(b.st), std::move(a)});
                }
            partial = std::move(next);
        }
        Branches out;
        for (auto& [s, args] : partial) {
            std::vector<SymValue> caller = std::move(s.frame);
            s.frame.assign(f.num_slots, SymValue{});
            for (std::size_t i = 0; i < args.size(); ++i)
                s.frame[i] = std::move(args[i]);
            for (auto& r : exec(f.body(), std::move(s))) {
                if (!r.returned)
                    fail(n, "'" + f.name + "' finished without returning");
                SymValue v = std::move(r.ret);
                r.returned = false;
                r.ret = SymValue{};
                r.frame = caller;
                out.push_back({std::move(r), std::move(v)});
            }
            check_cap(out.size());
        }
        return out;
    }

    Branches eval(const AstNode& n, SymState st) {
        switch (n.kind) {
        case AstKind::IntConst:
            return {{std::move(st), SymValue::integer(Term::constant(n.value))}};
        case AstKind::BoolConst:
            return {{std::move(st), SymValue::boolean(Formula::boolean(n.value != 0))}};
        case AstKind::VarRef: {
            SymValue v = read(n, st);
            return {{std::move(st), std::move(v)}};
        }
        case AstKind::Length: {
            const auto size = array_of(n, st).size();
            return {{std::move(st), SymValue::integer(Term::constant(static_cast<Int>(size)))}};
        }
        case AstKind::ArrayAccess: {
            Branches out;
            for (auto& b : eval(*n.kids[0], std::move(st))) {
                const Term idx = as_int(n, b.v);
                const std::vector<Term> arr = array_of(n, b.st);
                for_each_index(n, b.st, idx, arr.size(), [&](SymState s, std::size_t k) {
                    out.push_back({std::move(s), SymValue::integer(arr[k])});
                });
            }
            return out;
        }
        case AstKind::FunctionCall:
            return call(n, std::move(st));
        case AstKind::And:
            return junction(n, std::move(st), true);
        case AstKind::Or:
            return junction(n, std::move(st), false);
        case AstKind::Not: {
            auto bs = eval(*n.kids[0], std::move(st));
            for (auto& b : bs)
                b.v = SymValue::boolean(!as_bool(n, b.v));
            return bs;
        }
        case AstKind::Less:
            return binary(n, std::move(st), [&](const SymValue& a, const SymValue& b) {
                return SymValue::boolean(Formula::less(as_int(n, a), as_int(n, b)));
            });
        case AstKind::Equal:
            return binary(n, std::move(st), [&](const SymValue& a, const SymValue& b) {
                return SymValue::boolean(Formula::equal(as_int(n, a), as_int(n, b)));
            });
        case AstKind::Plus:
            return binary(n, std::move(st), [&](const SymValue& a, const SymValue& b) {
                return SymValue::integer(as_int(n, a) + as_int(n, b));
            });
        case AstKind::Times:
            return binary(n, std::move(st), [&](const SymValue& a, const SymValue& b) {
                return SymValue::integer(as_int(n, a) * as_int(n, b));
            });
        default:
            fail(n, "not an expression");
        }
    }

    States exec_list(const AstNode& n, SymState st) {
        States states;
        states.push_back(std::move(st));
        for (const auto& k : n.kids) {
            States next;
            for (auto& s : states) {
                if (s.returned) {
                    next.push_back(std::move(s));
                    continue;
                }
                for (auto& r : exec(*k, std::move(s)))
                    next.push_back(std::move(r));
            }
            check_cap(next.size());
            states = std::move(next);
        }
        return states;
    }

    template <class Then, class Else>
    void branch_on(const Formula& c, SymState s, Then&& on_true, Else&& on_false) {
        if (c.is_true()) {
            on_true(std::move(s));
            return;
        }
        if (c.is_false()) {
            on_false(std::move(s));
            return;
        }
        auto yes = assume(s, c);
        auto no = assume(s, !c);
        if (yes)
            on_true(std::move(*yes));
        if (no)
            on_false(std::move(*no));
    }

    States exec_while(const AstNode& n, SymState st, std::size_t iteration) {
        States out;
        for (auto& b : eval(*n.kids[0], std::move(st))) {
            const Formula c = as_bool(n, b.v);
            branch_on(
                c, std::move(b.st),
                [&](SymState s) {
                    if (iteration >= spec_.loop_bound)
                        fail(n, "loop exceeded bound of " + std::to_string(spec_.loop_bound) +
                                    " iterations");
                    for (auto& r : exec(*n.kids[1], std::move(s))) {
                        if (r.returned) {
                            out.push_back(std::move(r));
                        } else {
                            for (auto& r2 : exec_while(n, std::move(r), iteration + 1))
                                out.push_back(std::move(r2));
                        }
                    }
                },
                [&](SymState s) { out.push_back(std::move(s)); });
            check_cap(out.size());
        }
        return out;
    }

    States exec(const AstNode& n, SymState st) {
        switch (n.kind) {
        case AstKind::StatementList:
            return exec_list(n, std::move(st));
        case AstKind::If:
        case AstKind::IfElse: {
            States out;
            for (auto& b : eval(*n.kids[0], std::move(st))) {
                const Formula c = as_bool(n, b.v);
                branch_on(
                    c, std::move(b.st),
                    [&](SymState s) {
                        for (auto& r : exec(*n.kids[1], std::move(s)))
                            out.push_back(std::move(r));
                    },
                    [&](SymState s) {
                        if (n.kind == AstKind::If) {
                            out.push_back(std::move(s));
                            return;
                        }
                        for (auto& r : exec(*n.kids[2], std::move(s)))
                            out.push_back(std::move(r));
                    });
                check_cap(out.size());
            }
            return out;
        }
        case AstKind::While:
            return exec_while(n, std::move(st), 0);
        case AstKind::Assign: {
            States out;
            if (n.array_literal) {
                std::vector<std::pair<SymState, std::vector<Term>>> partial;
                partial.push_back({std::move(st), {}});
                for (const auto& e : n.kids) {
                    std::vector<std::pair<SymState, std::vector<Term>>> next;
                    for (auto& [s, elems] : partial)
                        for (auto& b : eval(*e, std::move(s))) {
                            auto el = elems;
                            el.push_back(as_int(n, b.v));
                            next.push_back({std::move(b.st), std::move(el)});
                        }
                    partial = std::move(next);
                }
                for (auto& [s, elems] : partial) {
                    s.frame[n.slot] = SymValue::array(std::move(elems));
                    out.push_back(std::move(s));
                }
                return out;
            }
            for (auto& b : eval(*n.kids[0], std::move(st))) {
                b.st.frame[n.slot] = std::move(b.v);
                out.push_back(std::move(b.st));
            }
            return out;
        }
        case AstKind::ArrayDeclare: {
            States out;
            for (auto& b : eval(*n.kids[0], std::move(st))) {
                const Term size = as_int(n, b.v);
                if (!size.is_constant())
                    fail(n, "array length must not depend on target or query");
                if (size.constant_value() < 0 || size.constant_value() > 1'000'000)
                    fail(n, "invalid array size " + std::to_string(size.constant_value()));
                b.st.frame[n.slot] = SymValue::array(std::vector<Term>(
                    static_cast<std::size_t>(size.constant_value()), Term::constant(0)));
                out.push_back(std::move(b.st));
            }
            return out;
        }
        case AstKind::ArrayStore: {
            States out;
            for (auto& bi : eval(*n.kids[0], std::move(st)))
                for (auto& bv : eval(*n.kids[1], std::move(bi.st))) {
                    const Term idx = as_int(n, bi.v);
                    const Term val = as_int(n, bv.v);
                    const auto size = array_of(n, bv.st).size();
                    for_each_index(n, bv.st, idx, size, [&](SymState s, std::size_t k) {
                        s.frame[n.slot].arr[k] = val;
                        out.push_back(std::move(s));
                    });
                }
            return out;
        }
        case AstKind::Return: {
            if (n.outcome_label) {
                st.returned = true;
                st.outcome = n.slot;
                return {std::move(st)};
            }
            States out;
            for (auto& b : eval(*n.kids[0], std::move(st))) {
                b.st.returned = true;
                b.st.ret = std::move(b.v);
                out.push_back(std::move(b.st));
            }
            return out;
        }
        default:
            fail(n, "not a statement");
        }
    }

    const SearchSpec& spec_;
    const Feasibility& feas_;
    const SymexecConfig& cfg_;
    SymexecStats& stats_;
    std::vector<SymValue> targets_;
    std::vector<SymValue> queries_;
    std::vector<SymValue> constants_;
};

} // namespace

SymexecResult symbolic_execute(const SearchSpec& spec, std::span<const Point> targets,
                               std::span<const Point> queries, const SymexecConfig& config) {
    if (targets.empty())
        throw SemanticError("spec has no valid targets");
    if (queries.empty())
        throw SemanticError("spec has no valid queries");
    const auto start = std::chrono::steady_clock::now();

    SymexecResult result;
    Feasibility feas(targets, queries, spec.target_box(), spec.query_box(), config);
    Executor ex(spec, feas, config, result.stats);
    States finals = ex.run();

    std::vector<std::vector<Formula>> per_outcome(spec.outcomes.size());
    result.paths.reserve(finals.size());
    for (auto& s : finals) {
        PathConstraint pc{Formula::all_of(s.psi), s.outcome};
        per_outcome[s.outcome].push_back(pc.psi);
        result.paths.push_back(std::move(pc));
    }
    for (auto& parts : per_outcome)
        result.phi.phi.push_back(Formula::any_of(parts));
    result.stats.paths = result.paths.size();
    result.stats.outcomes = result.phi.reachable();
    result.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

SymexecResult symbolic_execute(const SearchSpec& spec, const SymexecConfig& config) {
    const auto targets = enumerate_targets(spec);
    const auto queries = enumerate_queries(spec);
    return symbolic_execute(spec, targets, queries, config);
}

} // namespace searchsynth
