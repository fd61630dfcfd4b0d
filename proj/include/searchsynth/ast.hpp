#pragma once

#include "searchsynth/errors.hpp"
#include "searchsynth/formula.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace searchsynth {

/// Node kinds of the search-problem language. The set is closed: every
/// surface construct desugars into one of these.
enum class AstKind : std::uint8_t {
    Program,
    StatementList,
    If,
    IfElse,
    While,
    Assign,
    ArrayStore,
    Return,
    FunctionDefine,
    FunctionCall,
    ArrayDeclare,
    ArrayAccess,
    Length,
    And,
    Or,
    Not,
    Less,
    Equal,
    Plus,
    Times,
    IntConst,
    BoolConst,
    VarRef,
};

std::string_view to_string(AstKind kind);

/// Where an identifier was resolved to by semantic analysis.
enum class RefKind : std::uint8_t { Unresolved, Local, Target, Query, Constant };

struct AstNode;
using AstPtr = std::shared_ptr<const AstNode>;

/// Children by kind:
///   StatementList/Program: statements
///   If: cond, then;  IfElse: cond, then, else;  While: cond, body
///   Assign: value, or the elements of an array literal when `array_literal`
///   ArrayStore: index, value;  ArrayAccess: index;  ArrayDeclare: size
///   Return: value, or none when `outcome_label` (label in `name`)
///   FunctionDefine: body (a StatementList);  FunctionCall: arguments
///   And/Or/Less/Equal/Plus/Times: lhs, rhs;  Not: operand
struct AstNode {
    AstKind kind = AstKind::StatementList;
    SourcePos pos;
    std::string name;
    Int value = 0;
    bool array_literal = false;
    bool outcome_label = false;
    std::vector<AstPtr> kids;
    std::vector<std::string> params;

    // filled in by semantic analysis
    RefKind ref = RefKind::Unresolved;
    std::size_t slot = 0;
};

} // namespace searchsynth
