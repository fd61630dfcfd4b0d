#include "searchsynth/errors.hpp"
#include "searchsynth/oracle.hpp"
#include "searchsynth/synthesizer.hpp"
#include "support/tables.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace searchsynth;

namespace {

const char* ci_corpus[] = {"lowhigh10", "lowhigh100", "lmh9", "lmh27", "simplemm1", "simplemm2",
                           "simplemm3", "mastermind1", "mastermind2", "battleship4",
                           "battleship8", "movierank3", "movierank4", "coins5", "horserace",
                           "password2", "repaired1", "repaired2", "sorted8", "sorted16",
                           "unsorted8", "pinpoint10", "bbox2d5", "bbox3d3"};

// Targets with the same answer row as `t`.
std::vector<Point> twins(const Problem& p, const Point& t) {
    const Interpreter interp(p.spec);
    std::vector<Point> out;
    for (const auto& u : p.targets) {
        bool same = true;
        for (std::size_t i = 0; same && i < p.queries.size(); ++i)
            same = interp.evaluate(p.queries[i], u) == interp.evaluate(p.queries[i], t);
        if (same)
            out.push_back(u);
    }
    return out;
}

} // namespace

TEST_CASE("random tables: constraints reproduce the table") {
    std::mt19937_64 rng(2024);
    for (int instance = 0; instance < 500; ++instance) {
        const std::size_t nt = 2 + rng() % 7;
        const std::size_t nq = 1 + rng() % 6;
        const int labels = 2 + static_cast<int>(rng() % 3);
        const auto table = brute::random_table(rng, nt, nq, labels);
        CAPTURE(instance);
        const auto p = analyze(parse_spec(brute::table_source(table, labels)));
        std::set<int> used;
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t q = 0; q < nq; ++q) {
                used.insert(table[t][q]);
                for (int k = 0; k < labels; ++k)
                    REQUIRE(eval_formula(p->phi()[k], Point{Int(t)}, Point{Int(q)}) ==
                            (table[t][q] == k));
            }
        CHECK(p->analysis.stats.outcomes == used.size());
    }
}

TEST_CASE("random tables: greedy choice and convergence") {
    std::mt19937_64 rng(99);
    for (int instance = 0; instance < 300; ++instance) {
        const std::size_t nt = 2 + rng() % 8;
        const std::size_t nq = 1 + rng() % 6;
        const int labels = 2 + static_cast<int>(rng() % 2);
        const auto table = brute::random_table(rng, nt, nq, labels);
        CAPTURE(instance);
        const auto p = analyze(parse_spec(brute::table_source(table, labels)));
        std::vector<std::size_t> all(nt);
        std::iota(all.begin(), all.end(), 0);
        const auto want = brute::greedy_choice(table, all);
        const auto got = best_query(p->phi(), Knowledge(Formula::top(), p->targets), p->queries);
        REQUIRE(want.has_value() == got.has_value());
        if (want)
            REQUIRE(got->query == Point{Int(*want)});

        for (std::size_t t = 0; t < nt; ++t) {
            HiddenTargetOracle oracle({Int(t)});
            const auto s = run_session(p, oracle);
            REQUIRE(s.status == Status::Converged);
            // what is left is exactly the set of targets sharing t's row
            std::vector<Point> same;
            for (std::size_t u = 0; u < nt; ++u)
                if (table[u] == table[t])
                    same.push_back({Int(u)});
            REQUIRE(s.knowledge.candidates() == same);
        }
    }
}

TEST_CASE("corpus: every session converges to the target's class") {
    for (const char* name : ci_corpus) {
        CAPTURE(name);
        const auto p = analyze(load_spec_file(brute::problem(name)));
        std::mt19937_64 rng(1);
        const std::size_t runs = std::min<std::size_t>(p->targets.size(), 12);
        for (std::size_t i = 0; i < runs; ++i) {
            const auto& t = p->targets[rng() % p->targets.size()];
            HiddenTargetOracle oracle(t);
            SessionState s;
            REQUIRE_NOTHROW(s = run_session(p, oracle));
            REQUIRE(s.status == Status::Converged);
            REQUIRE(s.knowledge.candidates() == twins(*p, t));
            // a truthful oracle never empties the knowledge
            for (const auto& r : s.transcript)
                REQUIRE(r.candidates_after >= 1);
            for (std::size_t j = 0; j < s.transcript.size(); ++j)
                REQUIRE(s.transcript[j].entropy > 0.0);
        }
    }
}

TEST_CASE("entropy is bounded by log2 of the outcome count") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        OutcomeDistribution d;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t k = 0; k < n; ++k) {
            d.counts.push_back(rng() % 50);
            d.total += d.counts.back();
        }
        const double h = entropy(d);
        REQUIRE(h >= 0.0);
        REQUIRE(h <= std::log2(double(n)) + 1e-12);
        if (d.total)
            REQUIRE(h == doctest::Approx(brute::entropy_bits(d.counts)));
    }
}

TEST_CASE("random tables: worthwhile exactly when entropy is positive") {
    std::mt19937_64 rng(7);
    for (int instance = 0; instance < 500; ++instance) {
        const std::size_t nt = 2 + rng() % 7;
        const std::size_t nq = 1 + rng() % 6;
        const int labels = 2 + static_cast<int>(rng() % 3);
        const auto table = brute::random_table(rng, nt, nq, labels);
        const auto p = analyze(parse_spec(brute::table_source(table, labels)));
        std::vector<Point> subset;
        for (const auto& t : p->targets)
            if (rng() % 2)
                subset.push_back(t);
        if (subset.empty())
            subset.push_back(p->targets.back());
        for (const auto& k :
             {Knowledge(Formula::top(), p->targets), Knowledge(Formula::top(), subset)})
            for (const auto& q : p->queries) {
                const double h = entropy(outcome_distribution(p->phi(), k, q));
                REQUIRE(is_worthwhile_formula(p->phi(), k, q) == (h > 0.0));
                REQUIRE(is_worthwhile(p->phi(), k, q) == (h > 0.0));
            }
    }
}
