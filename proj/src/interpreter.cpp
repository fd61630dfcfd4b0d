#include "searchsynth/interpreter.hpp"

#include "searchsynth/checked.hpp"

namespace searchsynth {

namespace {

struct Value {
    enum class Type : std::uint8_t { Unset, Int, Bool, Array };
    Type type = Type::Unset;
    Int i = 0;
    std::vector<Int> arr;

    static Value integer(Int v) { return {Type::Int, v, {}}; }
    static Value boolean(bool b) { return {Type::Bool, b ? 1 : 0, {}}; }
    static Value array(std::vector<Int> a) { return {Type::Array, 0, std::move(a)}; }
};

class Machine {
public:
    Machine(const SearchSpec& spec, PointView target, PointView query)
        : spec_(spec), target_(target), query_(query) {}

    Value call(const FunctionDef& f, std::vector<Value> args) {
        std::vector<Value> frame(f.num_slots);
        for (std::size_t i = 0; i < args.size(); ++i)
            frame[i] = std::move(args[i]);
        Value ret;
        if (!exec(f.body(), frame, ret))
            throw EvalError("'" + f.name + "' finished without returning");
        return ret;
    }

private:
    [[noreturn]] static void fail(const AstNode& n, const std::string& msg) {
        throw EvalError(msg + " at " + std::to_string(n.pos.line) + ":" +
                        std::to_string(n.pos.column));
    }

    Int as_int(const AstNode& n, const Value& v) {
        if (v.type != Value::Type::Int)
            fail(n, "expected integer");
        return v.i;
    }

    bool as_bool(const AstNode& n, const Value& v) {
        if (v.type != Value::Type::Bool)
            fail(n, "expected boolean");
        return v.i != 0;
    }

    PointView decl_view(const AstNode& n) const {
        if (n.ref == RefKind::Target) {
            const auto& d = spec_.target_decls[n.slot];
            return target_.subspan(d.offset, d.dim());
        }
        const auto& d = spec_.query_decls[n.slot];
        return query_.subspan(d.offset, d.dim());
    }

    Value read(const AstNode& n, std::vector<Value>& frame) {
        switch (n.ref) {
        case RefKind::Local: {
            const Value& v = frame[n.slot];
            if (v.type == Value::Type::Unset)
                fail(n, "'" + n.name + "' read before assignment");
            return v;
        }
        case RefKind::Constant: {
            const auto& c = spec_.constants[n.slot];
            return c.is_array ? Value::array(c.values) : Value::integer(c.values.front());
        }
        case RefKind::Target:
        case RefKind::Query: {
            const bool arr = n.ref == RefKind::Target ? spec_.target_decls[n.slot].is_array
                                                      : spec_.query_decls[n.slot].is_array;
            auto view = decl_view(n);
            if (!arr)
                return Value::integer(view.front());
            return Value::array(std::vector<Int>(view.begin(), view.end()));
        }
        default:
            fail(n, "unresolved identifier '" + n.name + "'");
        }
    }

    Int element(const AstNode& n, std::vector<Value>& frame, Int idx) {
        auto check = [&](std::size_t size) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= size)
                fail(n, "index " + std::to_string(idx) + " out of range for '" + n.name + "'");
        };
        switch (n.ref) {
        case RefKind::Local: {
            const Value& v = frame[n.slot];
            if (v.type != Value::Type::Array)
                fail(n, "'" + n.name + "' is not an array");
            check(v.arr.size());
            return v.arr[static_cast<std::size_t>(idx)];
        }
        case RefKind::Constant: {
            const auto& c = spec_.constants[n.slot];
            check(c.values.size());
            return c.values[static_cast<std::size_t>(idx)];
        }
        default: {
            auto view = decl_view(n);
            check(view.size());
            return view[static_cast<std::size_t>(idx)];
        }
        }
    }

    std::size_t length(const AstNode& n, std::vector<Value>& frame) {
        switch (n.ref) {
        case RefKind::Local:
            if (frame[n.slot].type != Value::Type::Array)
                fail(n, "len of non-array '" + n.name + "'");
            return frame[n.slot].arr.size();
        case RefKind::Constant:
            return spec_.constants[n.slot].values.size();
        default:
            return decl_view(n).size();
        }
    }

    Value eval(const AstNode& n, std::vector<Value>& frame) {
        switch (n.kind) {
        case AstKind::IntConst:
            return Value::integer(n.value);
        case AstKind::BoolConst:
            return Value::boolean(n.value != 0);
        case AstKind::VarRef:
            return read(n, frame);
        case AstKind::ArrayAccess:
            return Value::integer(element(n, frame, as_int(n, eval(*n.kids[0], frame))));
        case AstKind::Length:
            return Value::integer(static_cast<Int>(length(n, frame)));
        case AstKind::FunctionCall: {
            std::vector<Value> args;
            args.reserve(n.kids.size());
            for (const auto& k : n.kids)
                args.push_back(eval(*k, frame));
            return call(spec_.functions[n.slot], std::move(args));
        }
        case AstKind::And:
            if (!as_bool(n, eval(*n.kids[0], frame)))
                return Value::boolean(false);
            return Value::boolean(as_bool(n, eval(*n.kids[1], frame)));
        case AstKind::Or:
            if (as_bool(n, eval(*n.kids[0], frame)))
                return Value::boolean(true);
            return Value::boolean(as_bool(n, eval(*n.kids[1], frame)));
        case AstKind::Not:
            return Value::boolean(!as_bool(n, eval(*n.kids[0], frame)));
        case AstKind::Less:
            return Value::boolean(as_int(n, eval(*n.kids[0], frame)) <
                                  as_int(n, eval(*n.kids[1], frame)));
        case AstKind::Equal:
            return Value::boolean(as_int(n, eval(*n.kids[0], frame)) ==
                                  as_int(n, eval(*n.kids[1], frame)));
        case AstKind::Plus:
            return Value::integer(checked_add(as_int(n, eval(*n.kids[0], frame)),
                                              as_int(n, eval(*n.kids[1], frame))));
        case AstKind::Times:
            return Value::integer(checked_mul(as_int(n, eval(*n.kids[0], frame)),
                                              as_int(n, eval(*n.kids[1], frame))));
        default:
            fail(n, "not an expression");
        }
    }

    bool exec(const AstNode& n, std::vector<Value>& frame, Value& ret) {
        switch (n.kind) {
        case AstKind::StatementList:
            for (const auto& k : n.kids)
                if (exec(*k, frame, ret))
                    return true;
            return false;
        case AstKind::If:
            if (as_bool(n, eval(*n.kids[0], frame)))
                return exec(*n.kids[1], frame, ret);
            return false;
        case AstKind::IfElse:
            return exec(as_bool(n, eval(*n.kids[0], frame)) ? *n.kids[1] : *n.kids[2], frame, ret);
        case AstKind::While: {
            std::size_t iterations = 0;
            while (as_bool(n, eval(*n.kids[0], frame))) {
                if (++iterations > spec_.loop_bound)
                    fail(n, "loop exceeded bound of " + std::to_string(spec_.loop_bound) +
                                " iterations");
                if (exec(*n.kids[1], frame, ret))
                    return true;
            }
            return false;
        }
        case AstKind::Assign:
            if (n.array_literal) {
                std::vector<Int> elems;
                elems.reserve(n.kids.size());
                for (const auto& k : n.kids)
                    elems.push_back(as_int(n, eval(*k, frame)));
                frame[n.slot] = Value::array(std::move(elems));
            } else {
                frame[n.slot] = eval(*n.kids[0], frame);
            }
            return false;
        case AstKind::ArrayDeclare: {
            const Int size = as_int(n, eval(*n.kids[0], frame));
            if (size < 0 || size > 1'000'000)
                fail(n, "invalid array size " + std::to_string(size));
            frame[n.slot] = Value::array(std::vector<Int>(static_cast<std::size_t>(size), 0));
            return false;
        }
        case AstKind::ArrayStore: {
            const Int idx = as_int(n, eval(*n.kids[0], frame));
            const Int v = as_int(n, eval(*n.kids[1], frame));
            Value& arr = frame[n.slot];
            if (arr.type != Value::Type::Array)
                fail(n, "'" + n.name + "' is not an array");
            if (idx < 0 || static_cast<std::size_t>(idx) >= arr.arr.size())
                fail(n, "index " + std::to_string(idx) + " out of range for '" + n.name + "'");
            arr.arr[static_cast<std::size_t>(idx)] = v;
            return false;
        }
        case AstKind::Return:
            ret = n.outcome_label ? Value::integer(static_cast<Int>(n.slot))
                                  : eval(*n.kids[0], frame);
            return true;
        default:
            fail(n, "not a statement");
        }
    }

    const SearchSpec& spec_;
    PointView target_;
    PointView query_;
};

void check_box(const std::vector<Interval>& box, PointView p, const char* what) {
    if (p.size() != box.size())
        throw EvalError(std::string(what) + " has dimension " + std::to_string(p.size()) +
                        ", expected " + std::to_string(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i)
        if (p[i] < box[i].lo || p[i] > box[i].hi)
            throw EvalError(std::string(what) + " coordinate " + std::to_string(i) +
                            " outside its declared range");
}

std::vector<Point> enumerate(const std::vector<Interval>& box, std::uint64_t cap,
                             const char* what, auto&& keep) {
    const auto n = box_size(box);
    if (n > cap)
        throw CapacityError(std::string(what) + " box has " + std::to_string(n) +
                            " points, above the enumeration cap of " + std::to_string(cap));
    std::vector<Point> out;
    Point p(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
        p[i] = box[i].lo;
    do {
        if (keep(p))
            out.push_back(p);
    } while (next_in_box(p, box));
    return out;
}

} // namespace

bool next_in_box(Point& p, const std::vector<Interval>& box) {
    for (std::size_t i = box.size(); i-- > 0;) {
        if (p[i] < box[i].hi) {
            ++p[i];
            return true;
        }
        p[i] = box[i].lo;
    }
    return false;
}

std::size_t Interpreter::evaluate(PointView query, PointView target) const {
    check_box(query_box_, query, "query");
    check_box(target_box_, target, "target");
    Machine m(*spec_, target, query);
    return static_cast<std::size_t>(m.call(spec_->evaluate, {}).i);
}

bool Interpreter::holds(const FunctionDef& pred, PointView target, PointView query) const {
    Machine m(*spec_, target, query);
    const auto v = m.call(pred, {});
    if (v.type != Value::Type::Bool)
        throw EvalError("'" + pred.name + "' must return a boolean");
    return v.i != 0;
}

bool Interpreter::target_valid(PointView target) const {
    return !spec_->target_validity || holds(*spec_->target_validity, target, {});
}

bool Interpreter::query_valid(PointView query) const {
    return !spec_->query_validity || holds(*spec_->query_validity, {}, query);
}

std::string evaluate_concrete(const SearchSpec& spec, PointView query, PointView target) {
    return spec.outcomes[Interpreter(spec).evaluate(query, target)];
}

std::vector<Point> enumerate_targets(const SearchSpec& spec, std::uint64_t cap) {
    Interpreter in(spec);
    return enumerate(spec.target_box(), cap, "target",
                     [&](const Point& p) { return in.target_valid(p); });
}

std::vector<Point> enumerate_queries(const SearchSpec& spec, std::uint64_t cap) {
    Interpreter in(spec);
    return enumerate(spec.query_box(), cap, "query",
                     [&](const Point& p) { return in.query_valid(p); });
}

} // namespace searchsynth
