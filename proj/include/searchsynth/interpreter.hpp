#pragma once

#include "searchsynth/spec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace searchsynth {

inline constexpr std::uint64_t default_enumeration_cap = 4'000'000;

/// Concrete tree-walking interpreter over a checked SearchSpec. Stateless and
/// safe to share between threads.
class Interpreter {
public:
    explicit Interpreter(const SearchSpec& spec)
        : spec_(&spec), target_box_(spec.target_box()), query_box_(spec.query_box()) {}

    /// Index into spec.outcomes reached by running evaluate on (query, target).
    std::size_t evaluate(PointView query, PointView target) const;

    /// True when no valid_target block exists.
    bool target_valid(PointView target) const;
    bool query_valid(PointView query) const;

    /// Runs a boolean predicate (validity block or target filter).
    bool holds(const FunctionDef& pred, PointView target, PointView query) const;

    const SearchSpec& spec() const { return *spec_; }

private:
    const SearchSpec* spec_;
    std::vector<Interval> target_box_;
    std::vector<Interval> query_box_;
};

/// Outcome label of E(query, target).
std::string evaluate_concrete(const SearchSpec& spec, PointView query, PointView target);

/// Every target in the declared box that passes valid_target, in
/// lexicographic order. Throws CapacityError when the box exceeds `cap`.
std::vector<Point> enumerate_targets(const SearchSpec& spec,
                                     std::uint64_t cap = default_enumeration_cap);
std::vector<Point> enumerate_queries(const SearchSpec& spec,
                                     std::uint64_t cap = default_enumeration_cap);

/// Advances `p` to the next point of `box` in lexicographic order; false when
/// `p` was the last one.
bool next_in_box(Point& p, const std::vector<Interval>& box);

} // namespace searchsynth
