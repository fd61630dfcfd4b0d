#pragma once

#include "searchsynth/interpreter.hpp"
#include "searchsynth/knowledge.hpp"
#include "searchsynth/symexec.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace searchsynth {

/// p(o | q) over the current candidates, kept as exact counts.
struct OutcomeDistribution {
    Point query;
    std::vector<std::uint64_t> counts;  // per declared outcome
    std::uint64_t total = 0;

    std::vector<double> probs() const;
    /// Outcomes with a nonzero count.
    std::size_t support() const;
};

/// Number of candidates t with phi(t, q) true.
std::uint64_t count_models(const Formula& phi, const Knowledge& k, PointView query);

/// Counts for every outcome. Throws EvalError if some candidate satisfies no
/// outcome constraint (Phi does not cover the domain).
OutcomeDistribution outcome_distribution(const OutcomeConstraintMap& phi, const Knowledge& k,
                                         PointView query);

/// Cross-check backend: runs the interpreter on every candidate and tallies
/// the label with index `outcome`.
std::uint64_t count_models_by_constraint_eval(const Interpreter& interp, std::size_t outcome,
                                              const Knowledge& k, PointView query);

/// Whole distribution through the interpreter.
OutcomeDistribution interpreter_distribution(const Interpreter& interp, const Knowledge& k,
                                             PointView query);

/// Memo of distributions for one knowledge state. Entries from an older
/// generation are dropped on first access with a newer one. Thread-safe.
class DistributionCache {
public:
    std::optional<OutcomeDistribution> find(std::uint64_t generation, const Point& query);
    void insert(std::uint64_t generation, const OutcomeDistribution& dist);
    std::size_t size() const;

private:
    void roll(std::uint64_t generation);

    mutable std::mutex mu_;
    std::uint64_t generation_ = 0;
    std::map<Point, OutcomeDistribution> entries_;
};

} // namespace searchsynth
