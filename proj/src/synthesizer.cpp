#include "searchsynth/synthesizer.hpp"

#include "searchsynth/errors.hpp"
#include "searchsynth/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_set>

namespace searchsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Point> sample_valid_queries(const SearchSpec& spec, std::size_t want,
                                        std::uint64_t seed) {
    const Interpreter interp(spec);
    const auto box = spec.query_box();
    std::mt19937_64 rng(seed);
    std::set<Point> seen;
    std::vector<Point> out;
    Point q(box.size());
    for (std::size_t tries = 0; tries < want * 64 && out.size() < want; ++tries) {
        for (std::size_t i = 0; i < box.size(); ++i)
            q[i] = std::uniform_int_distribution<Int>(box[i].lo, box[i].hi)(rng);
        if (seen.count(q) || !interp.query_valid(q))
            continue;
        seen.insert(q);
        out.push_back(q);
    }
    return out;
}

bool better(const QueryScore& a, const QueryScore& b) {
    if (a.entropy != b.entropy)
        return a.entropy > b.entropy;
    return a.query < b.query;
}

std::optional<QueryScore> best_in_range(const OutcomeConstraintMap& phi, const Knowledge& k,
                                        std::span<const Point> queries,
                                        const std::set<Point>* exclude,
                                        DistributionCache* cache) {
    std::optional<QueryScore> best;
    for (const auto& q : queries) {
        if (exclude && exclude->count(q))
            continue;
        std::optional<OutcomeDistribution> dist;
        if (cache)
            dist = cache->find(k.generation(), q);
        if (!dist) {
            dist = outcome_distribution(phi, k, q);
            if (cache)
                cache->insert(k.generation(), *dist);
        }
        if (dist->support() < 2)
            continue;
        QueryScore s{q, std::move(*dist), 0.0};
        s.entropy = entropy(s.dist);
        if (!best || better(s, *best))
            best = std::move(s);
    }
    return best;
}

} // namespace

std::shared_ptr<const Problem> analyze(SearchSpec spec, const AnalyzeConfig& config) {
    auto p = std::make_shared<Problem>();
    p->spec = std::move(spec);
    const auto start = Clock::now();
    p->targets = enumerate_targets(p->spec, config.enumeration_cap);
    if (config.target_filter) {
        const Interpreter interp(p->spec);
        const Point no_query;
        std::erase_if(p->targets, [&](const Point& t) {
            return !interp.holds(*config.target_filter, t, no_query);
        });
    }
    if (p->targets.empty())
        throw SemanticError("no valid target in '" + p->spec.name + "'");
    if (box_size(p->spec.query_box()) <= config.enumeration_cap) {
        p->queries = enumerate_queries(p->spec, config.enumeration_cap);
    } else {
        p->queries = sample_valid_queries(p->spec, config.symexec.sample_size,
                                          config.symexec.seed);
        p->queries_complete = false;
    }
    if (p->queries.empty())
        throw SemanticError("no valid query in '" + p->spec.name + "'");
    p->enumerate_seconds = seconds_since(start);
    p->analysis = symbolic_execute(p->spec, p->targets, p->queries, config.symexec);
    return p;
}

double entropy(std::span<const double> probs) {
    std::vector<double> p(probs.begin(), probs.end());
    std::sort(p.begin(), p.end());
    double h = 0.0;
    for (double x : p)
        if (x > 0.0)
            h -= x * std::log2(x);
    return h;
}

double entropy(const OutcomeDistribution& dist) {
    if (dist.total == 0)
        return 0.0;
    // Sorting first makes equal count multisets give bit-identical results.
    std::vector<std::uint64_t> c(dist.counts);
    std::sort(c.begin(), c.end());
    const double n = static_cast<double>(dist.total);
    double h = 0.0;
    for (auto x : c)
        if (x != 0 && x != dist.total)
            h += static_cast<double>(x) / n * std::log2(n / static_cast<double>(x));
    return h;
}

bool is_worthwhile(const OutcomeConstraintMap& phi, const Knowledge& k, PointView query) {
    if (k.size() < 2)
        return false;
    std::optional<std::size_t> first;
    for (const auto& t : k.candidates()) {
        std::size_t o = 0;
        while (o < phi.size() && !eval_formula(phi[o], t, query))
            ++o;
        if (o == phi.size())
            throw EvalError("no outcome constraint holds for a candidate target");
        if (!first)
            first = o;
        else if (*first != o)
            return true;
    }
    return false;
}

bool is_worthwhile_formula(const OutcomeConstraintMap& phi, const Knowledge& k,
                           PointView query) {
    for (const auto& f : phi.phi)
        if (is_satisfiable_over(f, k.candidates(), query) &&
            is_satisfiable_over(!f, k.candidates(), query))
            return true;
    return false;
}

std::vector<Point> worthwhile_queries(const OutcomeConstraintMap& phi, const Knowledge& k,
                                      std::span<const Point> queries) {
    std::vector<Point> out;
    for (const auto& q : queries)
        if (is_worthwhile(phi, k, q))
            out.push_back(q);
    return out;
}

std::optional<QueryScore> best_query(const OutcomeConstraintMap& phi, const Knowledge& k,
                                     std::span<const Point> queries,
                                     const std::set<Point>* exclude, unsigned threads,
                                     DistributionCache* cache) {
    if (k.size() < 2)
        return std::nullopt;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(queries.size() / 64 + 1)));
    if (threads == 1)
        return best_in_range(phi, k, queries, exclude, cache);

    std::vector<std::optional<QueryScore>> partial(threads);
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
        const std::size_t lo = std::min(queries.size(), i * chunk);
        const std::size_t hi = std::min(queries.size(), lo + chunk);
        pool.emplace_back([&, i, lo, hi] {
            try {
                partial[i] = best_in_range(phi, k, queries.subspan(lo, hi - lo), exclude, cache);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::optional<QueryScore> best;
    for (auto& p : partial)
        if (p && (!best || better(*p, *best)))
            best = std::move(p);
    return best;
}

QueryScore select_query(const OutcomeConstraintMap& phi, const Knowledge& k,
                        std::span<const Point> queries) {
    auto best = best_query(phi, k, queries);
    if (!best)
        throw NoWorthwhileQuery("no worthwhile query remains");
    return std::move(*best);
}

std::string to_string(Status s) {
    return s == Status::Running ? "running" : "converged";
}

std::string to_string(SearchMode m) {
    return m == SearchMode::Scan ? "scan" : "sample";
}

std::uint64_t SessionState::max_rounds() const {
    return config.max_rounds ? *config.max_rounds : 10 * problem->targets.size();
}

namespace {

SearchMode mode_for(const Problem& problem, const SynthConfig& config) {
    return problem.queries_complete && problem.queries.size() <= config.scan_cap
               ? SearchMode::Scan
               : SearchMode::Sample;
}

// Selects the next query or marks the session converged.
void advance(SessionState& s) {
    const auto start = Clock::now();
    s.pending = propose(*s.problem, s.knowledge, s.config, s.transcript.size() + 1, s.asked);
    s.synth_seconds += seconds_since(start);
    if (!s.pending) {
        s.status = Status::Converged;
        return;
    }
    s.status = Status::Running;
    if (s.transcript.size() >= s.max_rounds())
        throw RoundLimitExceeded("worthwhile query left after " +
                                 std::to_string(s.transcript.size()) + " rounds (limit " +
                                 std::to_string(s.max_rounds()) + ")");
}

} // namespace

std::optional<QueryScore> propose(const Problem& problem, const Knowledge& k,
                                  const SynthConfig& config, std::size_t round,
                                  const std::set<Point>& asked) {
    if (k.size() < 2)
        return std::nullopt;
    if (mode_for(problem, config) == SearchMode::Scan)
        return best_query(problem.phi(), k, problem.queries, &asked, config.threads);

    const Interpreter interp(problem.spec);
    const auto box = problem.spec.query_box();
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(round)};
    std::mt19937_64 rng(seq);
    std::set<Point> seen;
    std::vector<Point> sample;
    Point q(box.size());
    for (std::uint64_t i = 0; i < config.sample_budget; ++i) {
        for (std::size_t d = 0; d < box.size(); ++d)
            q[d] = std::uniform_int_distribution<Int>(box[d].lo, box[d].hi)(rng);
        if (asked.count(q) || seen.count(q) || !interp.query_valid(q))
            continue;
        seen.insert(q);
        sample.push_back(q);
    }
    return best_query(problem.phi(), k, sample, nullptr, config.threads);
}

SessionState start_session(std::shared_ptr<const Problem> problem, const SynthConfig& config) {
    SessionState s;
    s.problem = std::move(problem);
    s.config = config;
    s.mode = mode_for(*s.problem, config);
    s.knowledge = Knowledge(Formula::top(), s.problem->targets, 0);
    advance(s);
    return s;
}

SessionState observe(const SessionState& state, std::size_t outcome) {
    if (state.status != Status::Running || !state.pending)
        throw Error("session has no pending query");
    if (outcome >= state.spec().outcomes.size())
        throw InvalidOutcome("outcome index " + std::to_string(outcome) + " out of range");

    SessionState next = state;
    const QueryScore& q = *state.pending;
    const Formula obs = substitute_query(state.problem->phi()[outcome], q.query);

    Round r;
    r.index = state.transcript.size() + 1;
    r.query = q.query;
    r.dist = q.dist;
    r.entropy = q.entropy;
    r.outcome = outcome;
    next.asked.insert(q.query);
    next.pending.reset();
    try {
        next.knowledge = conjoin_and_filter(state.knowledge, obs);
    } catch (const EmptyKnowledge& e) {
        next.knowledge = Knowledge(state.knowledge.formula() && obs, {},
                                   state.knowledge.generation() + 1);
        r.candidates_after = 0;
        next.transcript.push_back(std::move(r));
        throw InconsistentAnswers(std::string("answers are inconsistent: ") + e.what(),
                                  std::move(next));
    }
    r.candidates_after = next.knowledge.size();
    next.transcript.push_back(std::move(r));
    advance(next);
    return next;
}

SessionState observe(const SessionState& state, const std::string& label) {
    return observe(state, state.spec().require_outcome(label));
}

SessionState step(const SessionState& state, Oracle& oracle) {
    if (state.status != Status::Running || !state.pending)
        throw Error("session already converged");
    const std::string label = oracle.answer(state.spec(), state.pending->query);
    return observe(state, label);
}

SessionState run_session(std::shared_ptr<const Problem> problem, Oracle& oracle,
                         const SynthConfig& config) {
    SessionState s = start_session(std::move(problem), config);
    while (s.status == Status::Running)
        s = step(s, oracle);
    return s;
}

} // namespace searchsynth
