#pragma once

#include "searchsynth/formula.hpp"
#include "searchsynth/spec.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace searchsynth {

/// One explored execution path of `evaluate`: the conjunction of branch
/// conditions along it and the outcome it returns.
struct PathConstraint {
    Formula psi;
    std::size_t outcome = 0;
};

/// phi_o for every declared outcome, in declaration order. Unreachable
/// outcomes map to `false`.
struct OutcomeConstraintMap {
    std::vector<Formula> phi;

    std::size_t size() const { return phi.size(); }
    const Formula& operator[](std::size_t o) const { return phi[o]; }
    /// Number of outcomes whose constraint is not syntactically false.
    std::size_t reachable() const;
};

struct SymexecConfig {
    std::size_t path_cap = 100'000;
    /// Domains with at most this many (target, query) pairs get exact
    /// feasibility checks by enumeration.
    std::uint64_t exhaustive_cap = 2'000'000;
    /// Random (target, query) pairs probed on larger domains.
    std::size_t sample_size = 4096;
    std::uint64_t seed = 0x5eed;
};

struct SymexecStats {
    std::size_t paths = 0;     // |Psi|
    std::size_t outcomes = 0;  // |Phi|, non-false entries
    std::size_t pruned = 0;    // branches proven infeasible
    std::size_t unproven = 0;  // branches kept without a witness
    double seconds = 0.0;
};

struct SymexecResult {
    std::vector<PathConstraint> paths;
    OutcomeConstraintMap phi;
    SymexecStats stats;
};

/// Explores every feasible path of `evaluate` with symbolic target and query
/// coordinates. Feasibility is judged against the valid domains `targets` x
/// `queries`. Throws PathExplosion past `path_cap` and EvalError for runtime
/// faults reachable on a feasible path (including loops still running at the
/// unroll bound).
SymexecResult symbolic_execute(const SearchSpec& spec, std::span<const Point> targets,
                               std::span<const Point> queries, const SymexecConfig& config = {});

/// Convenience overload that enumerates both domains first.
SymexecResult symbolic_execute(const SearchSpec& spec, const SymexecConfig& config = {});

} // namespace searchsynth
