#include "searchsynth/knowledge.hpp"

#include "searchsynth/errors.hpp"

namespace searchsynth {

Knowledge conjoin_and_filter(const Knowledge& k, const Formula& obs) {
    if (mentions(obs, Role::Query))
        throw EvalError("observation constraint still mentions query variables");
    if (obs.is_true())
        return k;
    std::vector<Point> kept;
    kept.reserve(k.size());
    const Point no_query;
    for (const auto& t : k.candidates())
        if (eval_formula(obs, t, no_query))
            kept.push_back(t);
    if (kept.empty())
        throw EmptyKnowledge("no candidate target is consistent with " + to_sexpr(obs));
    return Knowledge(k.formula() && obs, std::move(kept), k.generation() + 1);
}

bool is_satisfiable_over(const Formula& f, std::span<const Point> candidates, PointView query) {
    const Formula g = substitute_query(f, query);
    if (g.is_false())
        return false;
    if (g.is_true())
        return !candidates.empty();
    for (const auto& t : candidates)
        if (eval_formula(g, t, query))
            return true;
    return false;
}

} // namespace searchsynth
