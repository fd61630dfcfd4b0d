#pragma once

#include "searchsynth/ast.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace searchsynth {

struct Interval {
    Int lo = 0;
    Int hi = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// `targets t[3] in 0..5` or `queries q in 1..27`.
struct VarDecl {
    std::string name;
    bool is_array = false;
    std::vector<Interval> bounds;  // one per coordinate
    std::size_t offset = 0;        // first coordinate in the flattened vector

    std::size_t dim() const { return bounds.size(); }
};

struct Constant {
    std::string name;
    bool is_array = false;
    std::vector<Int> values;
};

/// A top-level function or block (`evaluate`, `valid_target`, `valid_query`
/// are stored as parameterless functions).
struct FunctionDef {
    std::string name;
    std::vector<std::string> params;
    AstPtr node;  // FunctionDefine
    std::size_t num_slots = 0;

    const AstNode& body() const { return *node->kids.front(); }
};

/// Parsed and checked search problem: domains, outcomes and the evaluate
/// program. Immutable after parse_spec returns.
struct SearchSpec {
    std::string name;
    std::vector<VarDecl> target_decls;
    std::vector<VarDecl> query_decls;
    std::vector<std::string> outcomes;
    std::vector<Constant> constants;
    std::optional<FunctionDef> target_validity;
    std::optional<FunctionDef> query_validity;
    FunctionDef evaluate;
    std::vector<FunctionDef> functions;
    std::size_t loop_bound = 64;

    std::size_t target_dim() const;
    std::size_t query_dim() const;
    std::vector<Interval> target_box() const;
    std::vector<Interval> query_box() const;
    std::optional<std::size_t> outcome_index(std::string_view label) const;
    /// Throws InvalidOutcome for undeclared labels.
    std::size_t require_outcome(std::string_view label) const;
};

inline constexpr std::size_t default_loop_bound = 64;

SearchSpec parse_spec(std::string_view source, std::string name = "");
SearchSpec load_spec_file(const std::string& path);

/// Parses a boolean expression over the target variables of `spec`, usable
/// as an extra target filter (e.g. `t >= 10 && t <= 18`).
FunctionDef parse_target_filter(const SearchSpec& spec, std::string_view expr);

/// Canonical source text; parse_spec(print_spec(s)) reproduces the AST.
std::string print_spec(const SearchSpec& spec);

/// Product of interval widths, saturating at UINT64_MAX.
std::uint64_t box_size(const std::vector<Interval>& box);

} // namespace searchsynth
