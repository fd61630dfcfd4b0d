#include "searchsynth/counting.hpp"

#include "searchsynth/errors.hpp"

namespace searchsynth {

namespace {

// Substitution pays off once there are enough candidates to amortize it.
constexpr std::size_t substitute_threshold = 32;

} // namespace

std::vector<double> OutcomeDistribution::probs() const {
    std::vector<double> p(counts.size(), 0.0);
    if (total == 0)
        return p;
    for (std::size_t i = 0; i < counts.size(); ++i)
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return p;
}

std::size_t OutcomeDistribution::support() const {
    std::size_t n = 0;
    for (auto c : counts)
        n += c != 0;
    return n;
}

std::uint64_t count_models(const Formula& phi, const Knowledge& k, PointView query) {
    const Formula g = substitute_query(phi, query);
    if (g.is_false())
        return 0;
    if (g.is_true())
        return k.size();
    std::uint64_t n = 0;
    for (const auto& t : k.candidates())
        n += eval_formula(g, t, query);
    return n;
}

OutcomeDistribution outcome_distribution(const OutcomeConstraintMap& phi, const Knowledge& k,
                                         PointView query) {
    OutcomeDistribution d;
    d.query.assign(query.begin(), query.end());
    d.counts.assign(phi.size(), 0);
    d.total = k.size();

    std::vector<Formula> local;
    const bool substitute = k.size() >= substitute_threshold;
    local.reserve(phi.size());
    for (const auto& f : phi.phi)
        local.push_back(substitute ? substitute_query(f, query) : f);

    // Phi partitions the domain, so the first satisfied outcome is the only one.
    for (const auto& t : k.candidates()) {
        bool hit = false;
        for (std::size_t o = 0; o < local.size() && !hit; ++o) {
            if (local[o].is_false())
                continue;
            if (local[o].is_true() || eval_formula(local[o], t, query)) {
                ++d.counts[o];
                hit = true;
            }
        }
        if (!hit)
            throw EvalError("no outcome constraint holds for a candidate target");
    }
    return d;
}

std::uint64_t count_models_by_constraint_eval(const Interpreter& interp, std::size_t outcome,
                                              const Knowledge& k, PointView query) {
    std::uint64_t n = 0;
    for (const auto& t : k.candidates())
        n += interp.evaluate(query, t) == outcome;
    return n;
}

OutcomeDistribution interpreter_distribution(const Interpreter& interp, const Knowledge& k,
                                             PointView query) {
    OutcomeDistribution d;
    d.query.assign(query.begin(), query.end());
    d.counts.assign(interp.spec().outcomes.size(), 0);
    d.total = k.size();
    for (const auto& t : k.candidates())
        ++d.counts[interp.evaluate(query, t)];
    return d;
}

void DistributionCache::roll(std::uint64_t generation) {
    if (generation != generation_) {
        entries_.clear();
        generation_ = generation;
    }
}

std::optional<OutcomeDistribution> DistributionCache::find(std::uint64_t generation,
                                                           const Point& query) {
    std::lock_guard lock(mu_);
    roll(generation);
    auto it = entries_.find(query);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void DistributionCache::insert(std::uint64_t generation, const OutcomeDistribution& dist) {
    std::lock_guard lock(mu_);
    roll(generation);
    entries_.emplace(dist.query, dist);
}

std::size_t DistributionCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

} // namespace searchsynth
