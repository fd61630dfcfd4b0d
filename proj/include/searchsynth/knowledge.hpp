#pragma once

#include "searchsynth/formula.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace searchsynth {

/// What is known about the hidden target: the accumulated constraint and the
/// targets that still satisfy it.
class Knowledge {
public:
    Knowledge() = default;
    /// `candidates` must already be exactly the models of `formula` in T.
    Knowledge(Formula formula, std::vector<Point> candidates, std::uint64_t generation = 0)
        : formula_(std::move(formula)), candidates_(std::move(candidates)),
          generation_(generation) {}

    const Formula& formula() const { return formula_; }
    const std::vector<Point>& candidates() const { return candidates_; }
    std::size_t size() const { return candidates_.size(); }
    bool empty() const { return candidates_.empty(); }

    /// Bumped on every refinement; used to key per-knowledge caches.
    std::uint64_t generation() const { return generation_; }

private:
    Formula formula_;
    std::vector<Point> candidates_;
    std::uint64_t generation_ = 0;
};

/// kappa <- kappa /\ obs, filtering the candidate set. `obs` must mention
/// target variables only. Throws EmptyKnowledge when nothing survives.
Knowledge conjoin_and_filter(const Knowledge& k, const Formula& obs);

/// Existential check: does some candidate satisfy f[q := query]?
bool is_satisfiable_over(const Formula& f, std::span<const Point> candidates, PointView query);

/// Pluggable existential-check backend. Only exact enumeration over the
/// materialized candidate set ships today.
class SatBackend {
public:
    virtual ~SatBackend() = default;
    virtual bool exists(const Formula& f, std::span<const Point> candidates,
                        PointView query) const = 0;
};

class EnumerationBackend final : public SatBackend {
public:
    bool exists(const Formula& f, std::span<const Point> candidates,
                PointView query) const override {
        return is_satisfiable_over(f, candidates, query);
    }
};

} // namespace searchsynth
