#include "searchsynth/spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace searchsynth {

std::string_view to_string(AstKind kind) {
    switch (kind) {
    case AstKind::Program: return "Program";
    case AstKind::StatementList: return "StatementList";
    case AstKind::If: return "If";
    case AstKind::IfElse: return "IfElse";
    case AstKind::While: return "While";
    case AstKind::Assign: return "Assign";
    case AstKind::ArrayStore: return "ArrayStore";
    case AstKind::Return: return "Return";
    case AstKind::FunctionDefine: return "FunctionDefine";
    case AstKind::FunctionCall: return "FunctionCall";
    case AstKind::ArrayDeclare: return "ArrayDeclare";
    case AstKind::ArrayAccess: return "ArrayAccess";
    case AstKind::Length: return "Length";
    case AstKind::And: return "And";
    case AstKind::Or: return "Or";
    case AstKind::Not: return "Not";
    case AstKind::Less: return "Less";
    case AstKind::Equal: return "Equal";
    case AstKind::Plus: return "Plus";
    case AstKind::Times: return "Times";
    case AstKind::IntConst: return "IntConst";
    case AstKind::BoolConst: return "BoolConst";
    case AstKind::VarRef: return "VarRef";
    }
    return "?";
}

namespace {

using MutNode = std::shared_ptr<AstNode>;

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, String, Punct, Newline, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Int value = 0;
    SourcePos pos;
};

const std::set<std::string, std::less<>> reserved_words = {
    "targets", "queries", "outcomes", "constant", "loop_bound", "valid_target",
    "valid_query", "evaluate", "function", "if", "else", "while", "return",
    "array", "len", "true", "false", "in",
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t col = 1;
    int depth = 0;  // ( and [ nesting; newlines inside are whitespace

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < src.size()) {
        const char c = src[i];
        const SourcePos pos{line, col};
        if (c == '\n') {
            if (depth == 0)
                out.push_back({Tok::Newline, "\n", 0, pos});
            advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0, pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                ++j;
            Int v = 0;
            auto [p, ec] = std::from_chars(src.data() + i, src.data() + j, v);
            if (ec != std::errc())
                throw ParseError(pos, "integer literal out of range");
            out.push_back({Tok::Int, std::string(src.substr(i, j - i)), v, pos});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n')
                ++j;
            if (j >= src.size() || src[j] != '"')
                throw ParseError(pos, "unterminated string literal");
            out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), 0, pos});
            advance(j + 1 - i);
            continue;
        }
        static const char* two_char[] = {"==", "!=", "<=", ">=", "&&", "||", ".."};
        bool matched = false;
        for (const char* op : two_char) {
            if (src.substr(i, 2) == op) {
                out.push_back({Tok::Punct, op, 0, pos});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched)
            continue;
        if (std::string_view("()[]{},;=<>+-*!").find(c) != std::string_view::npos) {
            if (c == '(' || c == '[')
                ++depth;
            if ((c == ')' || c == ']') && depth > 0)
                --depth;
            out.push_back({Tok::Punct, std::string(1, c), 0, pos});
            advance(1);
            continue;
        }
        throw ParseError(pos, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", 0, SourcePos{line, col}});
    return out;
}

// ---------------------------------------------------------------------------
// Parser

MutNode node(AstKind kind, SourcePos pos, std::vector<AstPtr> kids = {}) {
    auto n = std::make_shared<AstNode>();
    n->kind = kind;
    n->pos = pos;
    n->kids = std::move(kids);
    return n;
}

MutNode int_const(Int v, SourcePos pos) {
    auto n = node(AstKind::IntConst, pos);
    n->value = v;
    return n;
}

struct RawFunction {
    std::string name;
    std::vector<std::string> params;
    MutNode define;
};

struct RawSpec {
    std::vector<VarDecl> targets;
    std::vector<VarDecl> queries;
    std::vector<std::string> outcomes;
    std::vector<Constant> constants;
    std::optional<RawFunction> valid_target;
    std::optional<RawFunction> valid_query;
    std::optional<RawFunction> evaluate;
    std::vector<RawFunction> functions;
    std::size_t loop_bound = default_loop_bound;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    RawSpec parse_file() {
        RawSpec spec;
        skip_separators();
        while (!at_end()) {
            parse_item(spec);
            expect_terminator();
            skip_separators();
        }
        return spec;
    }

    AstPtr parse_lone_expression() {
        skip_newlines();
        auto e = expr();
        skip_separators();
        if (!at_end())
            fail("unexpected trailing input");
        return e;
    }

private:
    // token helpers
    const Token& peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_punct(std::string_view p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }
    bool is_word(std::string_view w) const {
        return peek().kind == Tok::Ident && peek().text == w;
    }
    Token take() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string found = t.kind == Tok::End       ? "end of input"
                            : t.kind == Tok::Newline ? "end of line"
                                                     : "'" + t.text + "'";
        throw ParseError(t.pos, msg + " (found " + found + ")");
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p))
            fail("expected '" + std::string(p) + "'");
        ++pos_;
    }

    void expect_word(std::string_view w) {
        if (!is_word(w))
            fail("expected '" + std::string(w) + "'");
        ++pos_;
    }

    std::string expect_ident() {
        if (peek().kind != Tok::Ident)
            fail("expected identifier");
        if (reserved_words.contains(peek().text))
            fail("reserved word used as identifier");
        return take().text;
    }

    Int expect_signed_int() {
        bool neg = false;
        if (is_punct("-")) {
            neg = true;
            ++pos_;
        }
        if (peek().kind != Tok::Int)
            fail("expected integer");
        Int v = take().value;
        return neg ? -v : v;
    }

    void skip_newlines() {
        while (peek().kind == Tok::Newline)
            ++pos_;
    }

    void skip_separators() {
        while (peek().kind == Tok::Newline || is_punct(";"))
            ++pos_;
    }

    void expect_terminator() {
        if (peek().kind == Tok::Newline || is_punct(";")) {
            ++pos_;
            return;
        }
        if (at_end() || is_punct("}"))
            return;
        fail("expected end of statement");
    }

    // top-level items
    void parse_item(RawSpec& spec) {
        if (peek().kind != Tok::Ident)
            fail("expected a declaration");
        const std::string kw = peek().text;
        if (kw == "targets" || kw == "queries") {
            ++pos_;
            auto d = parse_decl();
            (kw == "targets" ? spec.targets : spec.queries).push_back(std::move(d));
        } else if (kw == "outcomes") {
            ++pos_;
            do {
                if (peek().kind == Tok::String || peek().kind == Tok::Ident) {
                    spec.outcomes.push_back(take().text);
                } else {
                    fail("expected outcome label");
                }
            } while (is_punct(",") && (++pos_, true));
        } else if (kw == "constant") {
            ++pos_;
            Constant c;
            c.name = expect_ident();
            expect_punct("=");
            if (is_punct("[")) {
                ++pos_;
                c.is_array = true;
                if (!is_punct("]")) {
                    do {
                        c.values.push_back(expect_signed_int());
                    } while (is_punct(",") && (++pos_, true));
                }
                expect_punct("]");
            } else {
                c.values.push_back(expect_signed_int());
            }
            spec.constants.push_back(std::move(c));
        } else if (kw == "loop_bound") {
            ++pos_;
            if (peek().kind != Tok::Int)
                fail("expected loop bound");
            spec.loop_bound = static_cast<std::size_t>(take().value);
        } else if (kw == "valid_target" || kw == "valid_query" || kw == "evaluate") {
            const auto p = peek().pos;
            ++pos_;
            auto& slot = kw == "valid_target" ? spec.valid_target
                         : kw == "valid_query" ? spec.valid_query
                                               : spec.evaluate;
            if (slot)
                throw SemanticError("duplicate '" + kw + "' block");
            RawFunction f{kw, {}, node(AstKind::FunctionDefine, p, {block()})};
            f.define->name = kw;
            slot = std::move(f);
        } else if (kw == "function") {
            const auto p = peek().pos;
            ++pos_;
            RawFunction f;
            f.name = expect_ident();
            expect_punct("(");
            if (!is_punct(")")) {
                do {
                    f.params.push_back(expect_ident());
                } while (is_punct(",") && (++pos_, true));
            }
            expect_punct(")");
            f.define = node(AstKind::FunctionDefine, p, {block()});
            f.define->name = f.name;
            f.define->params = f.params;
            spec.functions.push_back(std::move(f));
        } else {
            fail("unknown declaration '" + kw + "'");
        }
    }

    Interval parse_range() {
        Interval r;
        r.lo = expect_signed_int();
        expect_punct("..");
        r.hi = expect_signed_int();
        return r;
    }

    VarDecl parse_decl() {
        VarDecl d;
        d.name = expect_ident();
        std::optional<std::size_t> dim;
        if (is_punct("[")) {
            ++pos_;
            if (peek().kind != Tok::Int || peek().value < 1)
                fail("expected positive dimension");
            dim = static_cast<std::size_t>(take().value);
            expect_punct("]");
            d.is_array = true;
        }
        expect_word("in");
        if (is_punct("[")) {
            ++pos_;
            d.is_array = true;
            do {
                d.bounds.push_back(parse_range());
            } while (is_punct(",") && (++pos_, true));
            expect_punct("]");
            if (dim && *dim != d.bounds.size())
                throw SemanticError("declaration of '" + d.name +
                                    "' lists a different number of ranges than its dimension");
        } else {
            d.bounds.assign(dim.value_or(1), parse_range());
        }
        return d;
    }

    // statements
    AstPtr block() {
        const auto p = peek().pos;
        expect_punct("{");
        auto list = node(AstKind::StatementList, p);
        skip_separators();
        while (!is_punct("}")) {
            if (at_end())
                fail("unterminated block");
            list->kids.push_back(statement());
            skip_separators();
        }
        ++pos_;
        return list;
    }

    AstPtr statement() {
        const auto p = peek().pos;
        if (is_punct("{"))
            return block();
        if (is_word("if"))
            return if_statement();
        if (is_word("while")) {
            ++pos_;
            expect_punct("(");
            auto c = expr();
            expect_punct(")");
            return node(AstKind::While, p, {c, block()});
        }
        AstPtr s;
        if (is_word("return")) {
            ++pos_;
            auto r = node(AstKind::Return, p);
            if (peek().kind == Tok::String) {
                r->outcome_label = true;
                r->name = take().text;
            } else {
                r->kids.push_back(expr());
            }
            s = r;
        } else if (is_word("array")) {
            ++pos_;
            auto a = node(AstKind::ArrayDeclare, p);
            a->name = expect_ident();
            expect_punct("[");
            a->kids.push_back(expr());
            expect_punct("]");
            s = a;
        } else {
            const std::string id = expect_ident();
            if (is_punct("[")) {
                ++pos_;
                auto idx = expr();
                expect_punct("]");
                expect_punct("=");
                auto st = node(AstKind::ArrayStore, p, {idx, expr()});
                st->name = id;
                s = st;
            } else {
                expect_punct("=");
                auto a = node(AstKind::Assign, p);
                a->name = id;
                if (is_punct("[")) {
                    ++pos_;
                    a->array_literal = true;
                    if (!is_punct("]")) {
                        do {
                            a->kids.push_back(expr());
                        } while (is_punct(",") && (++pos_, true));
                    }
                    expect_punct("]");
                } else {
                    a->kids.push_back(expr());
                }
                s = a;
            }
        }
        expect_terminator();
        return s;
    }

    AstPtr if_statement() {
        const auto p = peek().pos;
        expect_word("if");
        expect_punct("(");
        auto c = expr();
        expect_punct(")");
        auto then = block();
        const std::size_t save = pos_;
        skip_newlines();
        if (!is_word("else")) {
            pos_ = save;
            return node(AstKind::If, p, {c, then});
        }
        ++pos_;
        AstPtr otherwise = is_word("if") ? if_statement() : block();
        return node(AstKind::IfElse, p, {c, then, otherwise});
    }

    // expressions
    AstPtr expr() { return or_expr(); }

    AstPtr or_expr() {
        auto lhs = and_expr();
        while (is_punct("||")) {
            const auto p = take().pos;
            lhs = node(AstKind::Or, p, {lhs, and_expr()});
        }
        return lhs;
    }

    AstPtr and_expr() {
        auto lhs = cmp_expr();
        while (is_punct("&&")) {
            const auto p = take().pos;
            lhs = node(AstKind::And, p, {lhs, cmp_expr()});
        }
        return lhs;
    }

    AstPtr cmp_expr() {
        auto lhs = add_expr();
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        for (const char* op : ops) {
            if (!is_punct(op))
                continue;
            const auto p = take().pos;
            auto rhs = add_expr();
            const std::string_view o = op;
            if (o == "<")
                return node(AstKind::Less, p, {lhs, rhs});
            if (o == ">")
                return node(AstKind::Less, p, {rhs, lhs});
            if (o == "<=")
                return node(AstKind::Not, p, {node(AstKind::Less, p, {rhs, lhs})});
            if (o == ">=")
                return node(AstKind::Not, p, {node(AstKind::Less, p, {lhs, rhs})});
            if (o == "==")
                return node(AstKind::Equal, p, {lhs, rhs});
            return node(AstKind::Not, p, {node(AstKind::Equal, p, {lhs, rhs})});
        }
        return lhs;
    }

    AstPtr add_expr() {
        auto lhs = mul_expr();
        while (is_punct("+") || is_punct("-")) {
            const Token op = take();
            auto rhs = mul_expr();
            if (op.text == "-")
                rhs = node(AstKind::Times, op.pos, {int_const(-1, op.pos), rhs});
            lhs = node(AstKind::Plus, op.pos, {lhs, rhs});
        }
        return lhs;
    }

    AstPtr mul_expr() {
        auto lhs = unary();
        while (is_punct("*")) {
            const auto p = take().pos;
            lhs = node(AstKind::Times, p, {lhs, unary()});
        }
        return lhs;
    }

    AstPtr unary() {
        const auto p = peek().pos;
        if (is_punct("-")) {
            ++pos_;
            if (peek().kind == Tok::Int)
                return int_const(-take().value, p);
            return node(AstKind::Times, p, {int_const(-1, p), unary()});
        }
        if (is_punct("!")) {
            ++pos_;
            return node(AstKind::Not, p, {unary()});
        }
        return primary();
    }

    AstPtr primary() {
        const auto p = peek().pos;
        if (peek().kind == Tok::Int)
            return int_const(take().value, p);
        if (is_word("true") || is_word("false")) {
            auto b = node(AstKind::BoolConst, p);
            b->value = take().text == "true" ? 1 : 0;
            return b;
        }
        if (is_punct("(")) {
            ++pos_;
            auto e = expr();
            expect_punct(")");
            return e;
        }
        if (is_word("len")) {
            ++pos_;
            expect_punct("(");
            auto l = node(AstKind::Length, p);
            l->name = expect_ident();
            expect_punct(")");
            return l;
        }
        const std::string id = expect_ident();
        if (is_punct("(")) {
            ++pos_;
            auto call = node(AstKind::FunctionCall, p);
            call->name = id;
            if (!is_punct(")")) {
                do {
                    call->kids.push_back(expr());
                } while (is_punct(",") && (++pos_, true));
            }
            expect_punct(")");
            return call;
        }
        if (is_punct("[")) {
            ++pos_;
            auto acc = node(AstKind::ArrayAccess, p, {expr()});
            acc->name = id;
            expect_punct("]");
            return acc;
        }
        auto v = node(AstKind::VarRef, p);
        v->name = id;
        return v;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Semantic analysis

enum class Context { Evaluate, ValidTarget, ValidQuery, Aux, Filter };

std::string where(const AstNode& n) {
    return " at " + std::to_string(n.pos.line) + ":" + std::to_string(n.pos.column);
}

bool always_returns(const AstNode& s) {
    switch (s.kind) {
    case AstKind::Return:
        return true;
    case AstKind::StatementList:
        return std::any_of(s.kids.begin(), s.kids.end(),
                           [](const AstPtr& k) { return always_returns(*k); });
    case AstKind::IfElse:
        return always_returns(*s.kids[1]) && always_returns(*s.kids[2]);
    default:
        return false;
    }
}

class Analyzer {
public:
    explicit Analyzer(const SearchSpec& spec) : spec_(spec) {
        for (std::size_t i = 0; i < spec.functions.size(); ++i)
            fn_index_.emplace(spec.functions[i].name, i);
    }

    /// Resolves identifiers in `def`, assigning local slots. Returns the set of
    /// aux functions called directly.
    std::set<std::size_t> resolve(FunctionDef& def, Context ctx) {
        ctx_ = ctx;
        locals_.clear();
        calls_.clear();
        for (const auto& p : def.params) {
            if (locals_.contains(p))
                throw SemanticError("duplicate parameter '" + p + "' in " + def.name);
            if (global_kind(p) != RefKind::Unresolved)
                throw SemanticError("parameter '" + p + "' of " + def.name +
                                    " shadows a global name");
            locals_.emplace(p, locals_.size());
        }
        auto body = mut(def.node->kids.front());
        stmt(*body);
        if (!always_returns(*body))
            throw SemanticError("'" + def.name + "' does not return on every path");
        def.num_slots = locals_.size();
        return calls_;
    }

private:
    static MutNode mut(const AstPtr& p) { return std::const_pointer_cast<AstNode>(p); }

    bool sees_targets() const {
        return ctx_ == Context::Evaluate || ctx_ == Context::ValidTarget ||
               ctx_ == Context::Filter;
    }
    bool sees_queries() const {
        return ctx_ == Context::Evaluate || ctx_ == Context::ValidQuery;
    }

    RefKind global_kind(const std::string& name, std::size_t* index = nullptr) const {
        for (std::size_t i = 0; i < spec_.constants.size(); ++i)
            if (spec_.constants[i].name == name) {
                if (index)
                    *index = i;
                return RefKind::Constant;
            }
        if (sees_targets())
            for (std::size_t i = 0; i < spec_.target_decls.size(); ++i)
                if (spec_.target_decls[i].name == name) {
                    if (index)
                        *index = i;
                    return RefKind::Target;
                }
        if (sees_queries())
            for (std::size_t i = 0; i < spec_.query_decls.size(); ++i)
                if (spec_.query_decls[i].name == name) {
                    if (index)
                        *index = i;
                    return RefKind::Query;
                }
        return RefKind::Unresolved;
    }

    // Static length of a global array, if the name refers to one.
    std::optional<std::size_t> global_array_size(const AstNode& n) const {
        switch (n.ref) {
        case RefKind::Constant:
            if (spec_.constants[n.slot].is_array)
                return spec_.constants[n.slot].values.size();
            return std::nullopt;
        case RefKind::Target:
            if (spec_.target_decls[n.slot].is_array)
                return spec_.target_decls[n.slot].dim();
            return std::nullopt;
        case RefKind::Query:
            if (spec_.query_decls[n.slot].is_array)
                return spec_.query_decls[n.slot].dim();
            return std::nullopt;
        default:
            return std::nullopt;
        }
    }

    void resolve_name(AstNode& n) {
        if (auto it = locals_.find(n.name); it != locals_.end()) {
            n.ref = RefKind::Local;
            n.slot = it->second;
            return;
        }
        std::size_t idx = 0;
        const RefKind k = global_kind(n.name, &idx);
        if (k == RefKind::Unresolved)
            throw SemanticError("undeclared identifier '" + n.name + "'" + where(n));
        n.ref = k;
        n.slot = idx;
    }

    void declare_local(AstNode& n) {
        if (global_kind(n.name) != RefKind::Unresolved)
            throw SemanticError("cannot assign to read-only '" + n.name + "'" + where(n));
        if (reserved_words.contains(n.name))
            throw SemanticError("reserved word '" + n.name + "'" + where(n));
        auto [it, fresh] = locals_.try_emplace(n.name, locals_.size());
        n.ref = RefKind::Local;
        n.slot = it->second;
    }

    void expr(AstNode& n) {
        switch (n.kind) {
        case AstKind::VarRef:
        case AstKind::Length:
            resolve_name(n);
            return;
        case AstKind::ArrayAccess: {
            resolve_name(n);
            expr(*mut(n.kids[0]));
            const auto& idx = *n.kids[0];
            if (auto size = global_array_size(n); size && idx.kind == AstKind::IntConst &&
                                                  (idx.value < 0 ||
                                                   static_cast<std::size_t>(idx.value) >= *size))
                throw SemanticError("index " + std::to_string(idx.value) + " out of bounds for '" +
                                    n.name + "' of length " + std::to_string(*size) + where(n));
            if (n.ref != RefKind::Local && !global_array_size(n))
                throw SemanticError("'" + n.name + "' is not an array" + where(n));
            return;
        }
        case AstKind::FunctionCall: {
            auto it = fn_index_.find(n.name);
            if (it == fn_index_.end())
                throw SemanticError("call to unknown function '" + n.name + "'" + where(n));
            const auto& callee = spec_.functions[it->second];
            if (callee.params.size() != n.kids.size())
                throw SemanticError("function '" + n.name + "' expects " +
                                    std::to_string(callee.params.size()) + " arguments, got " +
                                    std::to_string(n.kids.size()) + where(n));
            n.ref = RefKind::Unresolved;
            n.slot = it->second;
            calls_.insert(it->second);
            for (auto& k : n.kids)
                expr(*mut(k));
            return;
        }
        case AstKind::IntConst:
        case AstKind::BoolConst:
            return;
        case AstKind::And:
        case AstKind::Or:
        case AstKind::Not:
        case AstKind::Less:
        case AstKind::Equal:
        case AstKind::Plus:
        case AstKind::Times:
            for (auto& k : n.kids)
                expr(*mut(k));
            return;
        default:
            throw SemanticError(std::string(to_string(n.kind)) + " used as expression" + where(n));
        }
    }

    void stmt(AstNode& n) {
        switch (n.kind) {
        case AstKind::StatementList:
            for (auto& k : n.kids)
                stmt(*mut(k));
            return;
        case AstKind::If:
        case AstKind::While:
            expr(*mut(n.kids[0]));
            stmt(*mut(n.kids[1]));
            return;
        case AstKind::IfElse:
            expr(*mut(n.kids[0]));
            stmt(*mut(n.kids[1]));
            stmt(*mut(n.kids[2]));
            return;
        case AstKind::Assign:
            for (auto& k : n.kids)
                expr(*mut(k));
            declare_local(n);
            return;
        case AstKind::ArrayDeclare:
            expr(*mut(n.kids[0]));
            declare_local(n);
            return;
        case AstKind::ArrayStore: {
            auto it = locals_.find(n.name);
            if (it == locals_.end()) {
                if (global_kind(n.name) != RefKind::Unresolved)
                    throw SemanticError("cannot assign to read-only '" + n.name + "'" + where(n));
                throw SemanticError("undeclared array '" + n.name + "'" + where(n));
            }
            n.ref = RefKind::Local;
            n.slot = it->second;
            expr(*mut(n.kids[0]));
            expr(*mut(n.kids[1]));
            return;
        }
        case AstKind::Return:
            if (ctx_ == Context::Evaluate) {
                if (!n.outcome_label)
                    throw SemanticError("evaluate must return an outcome label" + where(n));
                auto idx = spec_.outcome_index(n.name);
                if (!idx)
                    throw SemanticError("undeclared outcome label \"" + n.name + "\"" + where(n));
                n.slot = *idx;
            } else {
                if (n.outcome_label)
                    throw SemanticError("outcome label returned outside evaluate" + where(n));
                expr(*mut(n.kids[0]));
            }
            return;
        default:
            throw SemanticError(std::string(to_string(n.kind)) + " used as statement" + where(n));
        }
    }

    const SearchSpec& spec_;
    Context ctx_ = Context::Evaluate;
    std::unordered_map<std::string, std::size_t> locals_;
    std::map<std::string, std::size_t, std::less<>> fn_index_;
    std::set<std::size_t> calls_;
};

FunctionDef to_def(RawFunction f) {
    FunctionDef d;
    d.name = std::move(f.name);
    d.params = std::move(f.params);
    d.node = std::move(f.define);
    return d;
}

void check_decls(const SearchSpec& s) {
    std::set<std::string> names;
    auto claim = [&](const std::string& n) {
        if (!names.insert(n).second)
            throw SemanticError("duplicate name '" + n + "'");
    };
    if (s.target_decls.empty())
        throw SemanticError("no targets declared");
    if (s.query_decls.empty())
        throw SemanticError("no queries declared");
    for (const auto* list : {&s.target_decls, &s.query_decls})
        for (const auto& d : *list) {
            claim(d.name);
            for (const auto& iv : d.bounds)
                if (iv.lo > iv.hi)
                    throw SemanticError("empty interval " + std::to_string(iv.lo) + ".." +
                                        std::to_string(iv.hi) + " in '" + d.name + "'");
        }
    for (const auto& c : s.constants)
        claim(c.name);
    for (const auto& f : s.functions)
        claim(f.name);
    if (s.outcomes.empty())
        throw SemanticError("no outcomes declared");
    std::set<std::string> labels;
    for (const auto& o : s.outcomes)
        if (!labels.insert(o).second)
            throw SemanticError("duplicate outcome label \"" + o + "\"");
    if (s.loop_bound == 0)
        throw SemanticError("loop_bound must be positive");
}

void check_recursion(const std::vector<std::set<std::size_t>>& calls,
                     const std::vector<FunctionDef>& fns) {
    std::vector<int> state(calls.size(), 0);  // 0 new, 1 on stack, 2 done
    std::function<void(std::size_t)> visit = [&](std::size_t f) {
        state[f] = 1;
        for (auto g : calls[f]) {
            if (state[g] == 1)
                throw SemanticError("recursive call involving '" + fns[g].name + "'");
            if (state[g] == 0)
                visit(g);
        }
        state[f] = 2;
    };
    for (std::size_t f = 0; f < calls.size(); ++f)
        if (state[f] == 0)
            visit(f);
}

void assign_offsets(std::vector<VarDecl>& decls) {
    std::size_t off = 0;
    for (auto& d : decls) {
        d.offset = off;
        off += d.dim();
    }
}

} // namespace

// ---------------------------------------------------------------------------

std::size_t SearchSpec::target_dim() const {
    std::size_t n = 0;
    for (const auto& d : target_decls)
        n += d.dim();
    return n;
}

std::size_t SearchSpec::query_dim() const {
    std::size_t n = 0;
    for (const auto& d : query_decls)
        n += d.dim();
    return n;
}

static std::vector<Interval> flatten(const std::vector<VarDecl>& decls) {
    std::vector<Interval> out;
    for (const auto& d : decls)
        out.insert(out.end(), d.bounds.begin(), d.bounds.end());
    return out;
}

std::vector<Interval> SearchSpec::target_box() const { return flatten(target_decls); }
std::vector<Interval> SearchSpec::query_box() const { return flatten(query_decls); }

std::optional<std::size_t> SearchSpec::outcome_index(std::string_view label) const {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i] == label)
            return i;
    return std::nullopt;
}

std::size_t SearchSpec::require_outcome(std::string_view label) const {
    auto idx = outcome_index(label);
    if (!idx)
        throw InvalidOutcome("undeclared outcome label \"" + std::string(label) + "\"");
    return *idx;
}

std::uint64_t box_size(const std::vector<Interval>& box) {
    std::uint64_t n = 1;
    for (const auto& iv : box) {
        const auto w = static_cast<std::uint64_t>(iv.hi - iv.lo) + 1;
        if (__builtin_mul_overflow(n, w, &n))
            return std::numeric_limits<std::uint64_t>::max();
    }
    return n;
}

SearchSpec parse_spec(std::string_view source, std::string name) {
    RawSpec raw = Parser(source).parse_file();

    SearchSpec spec;
    spec.name = std::move(name);
    spec.target_decls = std::move(raw.targets);
    spec.query_decls = std::move(raw.queries);
    spec.outcomes = std::move(raw.outcomes);
    spec.constants = std::move(raw.constants);
    spec.loop_bound = raw.loop_bound;
    assign_offsets(spec.target_decls);
    assign_offsets(spec.query_decls);
    for (auto& f : raw.functions)
        spec.functions.push_back(to_def(std::move(f)));
    check_decls(spec);
    if (!raw.evaluate)
        throw SemanticError("missing evaluate block");
    spec.evaluate = to_def(std::move(*raw.evaluate));
    if (raw.valid_target)
        spec.target_validity = to_def(std::move(*raw.valid_target));
    if (raw.valid_query)
        spec.query_validity = to_def(std::move(*raw.valid_query));

    Analyzer an(spec);
    std::vector<std::set<std::size_t>> calls(spec.functions.size());
    for (std::size_t i = 0; i < spec.functions.size(); ++i)
        calls[i] = an.resolve(spec.functions[i], Context::Aux);
    check_recursion(calls, spec.functions);
    an.resolve(spec.evaluate, Context::Evaluate);
    if (spec.target_validity)
        an.resolve(*spec.target_validity, Context::ValidTarget);
    if (spec.query_validity)
        an.resolve(*spec.query_validity, Context::ValidQuery);
    return spec;
}

SearchSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos)
        name = name.substr(slash + 1);
    if (auto dot = name.rfind(".search"); dot != std::string::npos && dot + 7 == name.size())
        name = name.substr(0, dot);
    return parse_spec(buf.str(), name);
}

FunctionDef parse_target_filter(const SearchSpec& spec, std::string_view text) {
    AstPtr e = Parser(text).parse_lone_expression();
    auto ret = node(AstKind::Return, e->pos, {e});
    auto body = node(AstKind::StatementList, e->pos, {ret});
    FunctionDef def;
    def.name = "where";
    def.node = node(AstKind::FunctionDefine, e->pos, {body});
    Analyzer(spec).resolve(def, Context::Filter);
    return def;
}

} // namespace searchsynth
