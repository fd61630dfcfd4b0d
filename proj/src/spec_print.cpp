#include "searchsynth/spec.hpp"
#include "searchsynth/spec_json.hpp"

#include <algorithm>
#include <sstream>

namespace searchsynth {

namespace {

void print_expr(std::ostream& out, const AstNode& n);

void print_binary(std::ostream& out, const AstNode& n, const char* op, bool wrap = true) {
    if (wrap)
        out << '(';
    print_expr(out, *n.kids[0]);
    out << ' ' << op << ' ';
    print_expr(out, *n.kids[1]);
    if (wrap)
        out << ')';
}

const char* binary_op(AstKind k) {
    switch (k) {
    case AstKind::And: return "&&";
    case AstKind::Or: return "||";
    case AstKind::Less: return "<";
    case AstKind::Equal: return "==";
    case AstKind::Plus: return "+";
    case AstKind::Times: return "*";
    default: return nullptr;
    }
}

// condition inside if/while parentheses, without a redundant outer pair
void print_cond(std::ostream& out, const AstNode& n) {
    if (const char* op = binary_op(n.kind))
        print_binary(out, n, op, false);
    else
        print_expr(out, n);
}

void print_expr(std::ostream& out, const AstNode& n) {
    switch (n.kind) {
    case AstKind::IntConst:
        out << n.value;
        return;
    case AstKind::BoolConst:
        out << (n.value ? "true" : "false");
        return;
    case AstKind::VarRef:
        out << n.name;
        return;
    case AstKind::Length:
        out << "len(" << n.name << ')';
        return;
    case AstKind::ArrayAccess:
        out << n.name << '[';
        print_expr(out, *n.kids[0]);
        out << ']';
        return;
    case AstKind::FunctionCall:
        out << n.name << '(';
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
            if (i)
                out << ", ";
            print_expr(out, *n.kids[i]);
        }
        out << ')';
        return;
    case AstKind::Not:
        out << '!';
        print_expr(out, *n.kids[0]);
        return;
    case AstKind::And: print_binary(out, n, "&&"); return;
    case AstKind::Or: print_binary(out, n, "||"); return;
    case AstKind::Less: print_binary(out, n, "<"); return;
    case AstKind::Equal: print_binary(out, n, "=="); return;
    case AstKind::Plus: print_binary(out, n, "+"); return;
    case AstKind::Times: print_binary(out, n, "*"); return;
    default:
        out << "<" << to_string(n.kind) << ">";
    }
}

void indent(std::ostream& out, int depth) {
    for (int i = 0; i < depth; ++i)
        out << "    ";
}

void print_block(std::ostream& out, const AstNode& list, int depth);

void print_if_chain(std::ostream& out, const AstNode& n, int depth) {
    out << "if (";
    print_cond(out, *n.kids[0]);
    out << ") ";
    print_block(out, *n.kids[1], depth);
    if (n.kind == AstKind::IfElse) {
        out << " else ";
        const auto& other = *n.kids[2];
        if (other.kind == AstKind::If || other.kind == AstKind::IfElse)
            print_if_chain(out, other, depth);
        else
            print_block(out, other, depth);
    }
}

void print_stmt(std::ostream& out, const AstNode& n, int depth) {
    indent(out, depth);
    switch (n.kind) {
    case AstKind::StatementList:
        print_block(out, n, depth);
        break;
    case AstKind::If:
    case AstKind::IfElse:
        print_if_chain(out, n, depth);
        break;
    case AstKind::While:
        out << "while (";
        print_cond(out, *n.kids[0]);
        out << ") ";
        print_block(out, *n.kids[1], depth);
        break;
    case AstKind::Assign:
        out << n.name << " = ";
        if (n.array_literal) {
            out << '[';
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i)
                    out << ", ";
                print_expr(out, *n.kids[i]);
            }
            out << ']';
        } else {
            print_expr(out, *n.kids[0]);
        }
        break;
    case AstKind::ArrayStore:
        out << n.name << '[';
        print_expr(out, *n.kids[0]);
        out << "] = ";
        print_expr(out, *n.kids[1]);
        break;
    case AstKind::ArrayDeclare:
        out << "array " << n.name << '[';
        print_expr(out, *n.kids[0]);
        out << ']';
        break;
    case AstKind::Return:
        out << "return ";
        if (n.outcome_label)
            out << '"' << n.name << '"';
        else
            print_expr(out, *n.kids[0]);
        break;
    default:
        out << "<" << to_string(n.kind) << ">";
    }
    out << '\n';
}

void print_block(std::ostream& out, const AstNode& list, int depth) {
    out << "{\n";
    for (const auto& k : list.kids)
        print_stmt(out, *k, depth + 1);
    indent(out, depth);
    out << '}';
}

void print_decl(std::ostream& out, const char* kw, const VarDecl& d) {
    out << kw << ' ' << d.name;
    const bool uniform = std::all_of(d.bounds.begin(), d.bounds.end(),
                                     [&](const Interval& iv) { return iv == d.bounds.front(); });
    if (d.is_array && uniform) {
        out << '[' << d.dim() << "] in " << d.bounds.front().lo << ".." << d.bounds.front().hi;
    } else if (d.is_array) {
        out << " in [";
        for (std::size_t i = 0; i < d.bounds.size(); ++i) {
            if (i)
                out << ", ";
            out << d.bounds[i].lo << ".." << d.bounds[i].hi;
        }
        out << ']';
    } else {
        out << " in " << d.bounds.front().lo << ".." << d.bounds.front().hi;
    }
    out << '\n';
}

nlohmann::json decl_json(const VarDecl& d) {
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& iv : d.bounds)
        bounds.push_back({iv.lo, iv.hi});
    return {{"name", d.name}, {"array", d.is_array}, {"bounds", bounds}};
}

} // namespace

std::string print_spec(const SearchSpec& s) {
    std::ostringstream out;
    for (const auto& d : s.target_decls)
        print_decl(out, "targets", d);
    for (const auto& d : s.query_decls)
        print_decl(out, "queries", d);
    out << "outcomes ";
    for (std::size_t i = 0; i < s.outcomes.size(); ++i)
        out << (i ? ", " : "") << '"' << s.outcomes[i] << '"';
    out << '\n';
    for (const auto& c : s.constants) {
        out << "constant " << c.name << " = ";
        if (c.is_array) {
            out << '[';
            for (std::size_t i = 0; i < c.values.size(); ++i)
                out << (i ? ", " : "") << c.values[i];
            out << ']';
        } else {
            out << c.values.front();
        }
        out << '\n';
    }
    if (s.loop_bound != default_loop_bound)
        out << "loop_bound " << s.loop_bound << '\n';
    for (const auto& f : s.functions) {
        out << "\nfunction " << f.name << '(';
        for (std::size_t i = 0; i < f.params.size(); ++i)
            out << (i ? ", " : "") << f.params[i];
        out << ") ";
        print_block(out, f.body(), 0);
        out << '\n';
    }
    if (s.target_validity) {
        out << "\nvalid_target ";
        print_block(out, s.target_validity->body(), 0);
        out << '\n';
    }
    if (s.query_validity) {
        out << "\nvalid_query ";
        print_block(out, s.query_validity->body(), 0);
        out << '\n';
    }
    out << "\nevaluate ";
    print_block(out, s.evaluate.body(), 0);
    out << '\n';
    return out.str();
}

nlohmann::json ast_to_json(const AstNode& n) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(n.kind));
    switch (n.kind) {
    case AstKind::IntConst:
        j["value"] = n.value;
        break;
    case AstKind::BoolConst:
        j["value"] = n.value != 0;
        break;
    case AstKind::Return:
        if (n.outcome_label)
            j["label"] = n.name;
        break;
    case AstKind::Assign:
        j["name"] = n.name;
        if (n.array_literal)
            j["list"] = true;
        break;
    case AstKind::FunctionDefine:
        j["name"] = n.name;
        j["params"] = n.params;
        break;
    case AstKind::ArrayStore:
    case AstKind::ArrayDeclare:
    case AstKind::ArrayAccess:
    case AstKind::FunctionCall:
    case AstKind::Length:
    case AstKind::VarRef:
        j["name"] = n.name;
        break;
    default:
        break;
    }
    if (!n.kids.empty()) {
        auto& kids = j["children"] = nlohmann::json::array();
        for (const auto& k : n.kids)
            kids.push_back(ast_to_json(*k));
    }
    return j;
}

nlohmann::json spec_to_json(const SearchSpec& s) {
    nlohmann::json j;
    j["targets"] = nlohmann::json::array();
    for (const auto& d : s.target_decls)
        j["targets"].push_back(decl_json(d));
    j["queries"] = nlohmann::json::array();
    for (const auto& d : s.query_decls)
        j["queries"].push_back(decl_json(d));
    j["outcomes"] = s.outcomes;
    j["constants"] = nlohmann::json::array();
    for (const auto& c : s.constants)
        j["constants"].push_back({{"name", c.name}, {"array", c.is_array}, {"values", c.values}});
    j["loop_bound"] = s.loop_bound;
    nlohmann::json program;
    program["kind"] = "Program";
    auto& kids = program["children"] = nlohmann::json::array();
    for (const auto& f : s.functions)
        kids.push_back(ast_to_json(*f.node));
    if (s.target_validity)
        kids.push_back(ast_to_json(*s.target_validity->node));
    if (s.query_validity)
        kids.push_back(ast_to_json(*s.query_validity->node));
    kids.push_back(ast_to_json(*s.evaluate.node));
    j["program"] = std::move(program);
    return j;
}

} // namespace searchsynth
