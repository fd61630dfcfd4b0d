#pragma once

#include "searchsynth/spec.hpp"

#include <json.hpp>

namespace searchsynth {

/// Machine-readable AST dump: `{"kind": ..., "children": [...]}` per node.
nlohmann::json ast_to_json(const AstNode& node);

/// Whole-spec dump (declarations plus every function body).
nlohmann::json spec_to_json(const SearchSpec& spec);

} // namespace searchsynth
