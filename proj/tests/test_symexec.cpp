#include "searchsynth/errors.hpp"
#include "searchsynth/interpreter.hpp"
#include "searchsynth/symexec.hpp"
#include "support/brute.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace searchsynth;

namespace {

struct Domain {
    SearchSpec spec;
    std::vector<Point> targets;
    std::vector<Point> queries;
    SymexecResult result;
};

Domain run(const std::string& name) {
    Domain d;
    d.spec = load_spec_file(brute::problem(name));
    d.targets = enumerate_targets(d.spec);
    d.queries = enumerate_queries(d.spec);
    d.result = symbolic_execute(d.spec, d.targets, d.queries);
    return d;
}

// Every (t, q) pair, or a random subset of `limit` pairs on larger domains.
template <class F>
void for_pairs(const Domain& d, std::size_t limit, F&& f) {
    if (d.targets.size() * d.queries.size() <= limit) {
        for (const auto& t : d.targets)
            for (const auto& q : d.queries)
                f(t, q);
        return;
    }
    std::mt19937_64 rng(17);
    for (std::size_t i = 0; i < limit; ++i)
        f(d.targets[rng() % d.targets.size()], d.queries[rng() % d.queries.size()]);
}

const char* ci_corpus[] = {"lowhigh10", "lowhigh100", "lmh9", "lmh27", "simplemm1", "simplemm2",
                           "simplemm3", "mastermind1", "mastermind2", "battleship4",
                           "battleship8", "movierank3", "movierank4", "coins5", "coins9",
                           "horserace", "password2", "repaired1", "repaired2", "sorted8",
                           "sorted16", "unsorted8", "pinpoint10", "split10", "bbox2d5",
                           "bbox3d3"};

} // namespace

TEST_CASE("LMH yields one constraint per outcome") {
    const auto d = run("lmh27");
    CHECK(d.result.stats.outcomes == 3);
    CHECK(d.result.phi.size() == 3);
    CHECK(d.result.paths.size() == 3);
    CHECK(to_sexpr(d.result.phi[0]) == "(lt t0 q0)");
}

TEST_CASE("single-return program") {
    const auto spec = parse_spec("targets t in 1..5\nqueries q in 1..5\noutcomes \"Only\", \"Never\"\n"
                                 "evaluate {\nreturn \"Only\"\n}\n");
    const auto r = symbolic_execute(spec);
    REQUIRE(r.paths.size() == 1);
    CHECK(r.paths[0].psi.is_true());
    CHECK(r.phi[0].is_true());
    CHECK(r.phi[1].is_false());
    CHECK(r.stats.outcomes == 1);
    CHECK(r.phi.reachable() == 1);
}

TEST_CASE("infeasible branches are pruned") {
    const auto spec = parse_spec("targets t in 1..5\nqueries q in 1..5\noutcomes \"A\", \"B\"\n"
                                 "evaluate {\nif (t > 10) {\nreturn \"B\"\n}\nreturn \"A\"\n}\n");
    const auto r = symbolic_execute(spec);
    CHECK(r.paths.size() == 1);
    CHECK(r.phi[1].is_false());
    CHECK(r.stats.pruned >= 1);
}

TEST_CASE("simplemm2 has three outcomes over four paths") {
    const auto d = run("simplemm2");
    CHECK(d.result.paths.size() == 4);
    CHECK(d.result.stats.outcomes == 3);
}

TEST_CASE("empty domains are rejected") {
    const auto spec = load_spec_file(brute::problem("lmh9"));
    const std::vector<Point> none;
    const auto qs = enumerate_queries(spec);
    CHECK_THROWS_AS(symbolic_execute(spec, none, qs), SemanticError);
}

TEST_CASE("path cap") {
    const auto spec = load_spec_file(brute::problem("mastermind2"));
    SymexecConfig cfg;
    cfg.path_cap = 3;
    CHECK_THROWS_AS(symbolic_execute(spec, cfg), PathExplosion);
}

TEST_CASE("reachable loop overrun is an EvalError") {
    const auto spec = parse_spec("loop_bound 5\ntargets t in 1..9\nqueries q in 1..9\n"
                                 "outcomes \"A\"\nevaluate {\ni = 0\nwhile (i < t) {\n"
                                 "i = i + 1\n}\nreturn \"A\"\n}\n");
    CHECK_THROWS_AS(symbolic_execute(spec), EvalError);
    // the same loop is fine when the domain keeps it short
    const auto ok = parse_spec("loop_bound 5\ntargets t in 1..4\nqueries q in 1..9\n"
                               "outcomes \"A\"\nevaluate {\ni = 0\nwhile (i < t) {\n"
                               "i = i + 1\n}\nreturn \"A\"\n}\n");
    const auto r = symbolic_execute(ok);
    CHECK(r.paths.size() == 4);
    for (Int t = 1; t <= 4; ++t)
        CHECK(eval_formula(r.phi[0], Point{t}, Point{1}));
}

TEST_CASE("corpus: constraints agree with the interpreter") {
    for (const char* name : ci_corpus) {
        CAPTURE(name);
        const auto d = run(name);
        const Interpreter interp(d.spec);
        const auto& phi = d.result.phi;
        std::set<std::size_t> labels;
        for_pairs(d, 100'000, [&](const Point& t, const Point& q) {
            const std::size_t o = interp.evaluate(q, t);
            labels.insert(o);
            // exactly phi_o holds
            for (std::size_t k = 0; k < phi.size(); ++k)
                REQUIRE(eval_formula(phi[k], t, q) == (k == o));
            // exactly one path holds and it returns o
            std::size_t hits = 0;
            for (const auto& p : d.result.paths)
                if (eval_formula(p.psi, t, q)) {
                    ++hits;
                    REQUIRE(p.outcome == o);
                }
            REQUIRE(hits == 1);
        });
        if (d.targets.size() * d.queries.size() <= 100'000)
            CHECK(d.result.stats.outcomes == labels.size());
        CHECK(d.result.stats.paths == d.result.paths.size());
    }
}

TEST_CASE("path and outcome counts on known families") {
    const std::pair<const char*, std::pair<std::size_t, std::size_t>> expected[] = {
        {"simplemm1", {2, 2}}, {"simplemm2", {4, 3}},   {"simplemm3", {8, 4}},
        {"mastermind1", {2, 2}}, {"mastermind2", {7, 5}}, {"sorted8", {22, 3}},
        {"unsorted8", {16, 2}},  {"password2", {3, 3}},   {"battleship4", {4, 2}},
        {"pinpoint10", {9, 9}},  {"split10", {27, 27}},   {"lowhigh10", {3, 3}},
    };
    for (const auto& [name, counts] : expected) {
        CAPTURE(name);
        const auto d = run(name);
        CHECK(d.result.paths.size() == counts.first);
        CHECK(d.result.stats.outcomes == counts.second);
    }
}
