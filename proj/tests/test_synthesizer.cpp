#include "searchsynth/errors.hpp"
#include "searchsynth/oracle.hpp"
#include "searchsynth/synthesizer.hpp"
#include "support/brute.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace searchsynth;

namespace {

std::shared_ptr<const Problem> load(const std::string& name) {
    return analyze(load_spec_file(brute::problem(name)));
}

// Low-High on 1..n with queries 1..n.
std::shared_ptr<const Problem> lowhigh(int n) {
    const std::string src = "targets t in 1.." + std::to_string(n) + "\nqueries q in 1.." +
                            std::to_string(n) +
                            "\noutcomes \"Low\", \"Equal\", \"High\"\nevaluate {\n"
                            "if (t < q) {\nreturn \"Low\"\n}\nif (t == q) {\nreturn \"Equal\"\n}\n"
                            "return \"High\"\n}\n";
    return analyze(parse_spec(src, "lowhigh" + std::to_string(n)));
}

OutcomeDistribution dist(std::vector<std::uint64_t> counts) {
    OutcomeDistribution d;
    d.counts = std::move(counts);
    for (auto c : d.counts)
        d.total += c;
    return d;
}

} // namespace

TEST_CASE("entropy examples") {
    CHECK(entropy(dist({9, 9, 9})) == doctest::Approx(std::log2(3.0)));
    CHECK(entropy(dist({4, 0, 0})) == 0.0);
    CHECK(entropy(dist({1, 1})) == doctest::Approx(1.0));
    CHECK(entropy(dist({0, 0})) == 0.0);
    CHECK(entropy(dist({1, 3})) == doctest::Approx(brute::entropy_bits({1, 3})));
    const std::vector<double> p{0.5, 0.25, 0.25};
    CHECK(entropy(p) == doctest::Approx(1.5));
    // permutations give identical bits
    CHECK(entropy(dist({2, 3, 7})) == entropy(dist({7, 2, 3})));
}

TEST_CASE("worthwhile queries on LMH") {
    const auto p = load("lmh27");
    const Knowledge all(Formula::top(), p->targets);
    CHECK(is_worthwhile(p->phi(), all, Point{10, 18}));
    CHECK_FALSE(is_worthwhile(p->phi(), all, Point{1, 27}));  // always Middle
    const Knowledge one(Formula::top(), {Point{5}});
    CHECK_FALSE(is_worthwhile(p->phi(), one, Point{10, 18}));
    for (const auto& q : p->queries)
        REQUIRE(is_worthwhile(p->phi(), all, q) == is_worthwhile_formula(p->phi(), all, q));
}

TEST_CASE("Low-High 1..10 worthwhile set matches brute force") {
    const auto p = lowhigh(10);
    const Knowledge all(Formula::top(), p->targets);
    std::vector<Point> expect;
    for (Int q = 1; q <= 10; ++q) {
        std::set<int> seen;
        for (Int t = 1; t <= 10; ++t)
            seen.insert(brute::lowhigh(t, q));
        if (seen.size() >= 2)
            expect.push_back({q});
    }
    CHECK(worthwhile_queries(p->phi(), all, p->queries) == expect);
}

TEST_CASE("Low-High 1..3 asks the middle") {
    const auto p = lowhigh(3);
    const Knowledge all(Formula::top(), p->targets);
    const auto s = select_query(p->phi(), all, p->queries);
    CHECK(s.query == Point{2});
    CHECK(s.entropy == doctest::Approx(std::log2(3.0)));
    const Knowledge one(Formula::top(), {Point{2}});
    CHECK_THROWS_AS(select_query(p->phi(), one, p->queries), NoWorthwhileQuery);
}

TEST_CASE("selection matches the brute-force greedy rule") {
    for (const char* name : {"lmh9", "simplemm2", "movierank4", "coins5", "battleship4"}) {
        CAPTURE(name);
        const auto p = load(name);
        const Interpreter interp(p->spec);
        brute::Table table(p->targets.size(), std::vector<int>(p->queries.size()));
        for (std::size_t t = 0; t < p->targets.size(); ++t)
            for (std::size_t q = 0; q < p->queries.size(); ++q)
                table[t][q] = static_cast<int>(interp.evaluate(p->queries[q], p->targets[t]));
        std::vector<std::size_t> idx(p->targets.size());
        std::iota(idx.begin(), idx.end(), 0);
        const auto want = brute::greedy_choice(table, idx);
        const auto got = best_query(p->phi(), Knowledge(Formula::top(), p->targets), p->queries);
        REQUIRE(want.has_value() == got.has_value());
        if (want)
            CHECK(p->queries[*want] == got->query);
    }
}

TEST_CASE("golden LMH session") {
    const auto p = load("lmh27");
    auto s = start_session(p);
    REQUIRE(s.pending);
    CHECK(s.pending->query == Point{10, 18});
    CHECK(s.pending->entropy == doctest::Approx(std::log2(3.0)));
    CHECK(s.mode == SearchMode::Scan);
    s = observe(s, "Low");
    CHECK(s.knowledge.size() == 9);
    REQUIRE(s.pending);
    CHECK(s.pending->query == Point{4, 6});
    s = observe(s, "Middle");
    CHECK(s.knowledge.size() == 3);
    s = observe(s, std::size_t{1});
    CHECK(s.transcript.size() == 3);
    CHECK(s.transcript[0].index == 1);
    CHECK(s.transcript[1].candidates_after == 3);
    // finish against t = 5
    HiddenTargetOracle oracle({5});
    while (s.status == Status::Running)
        s = step(s, oracle);
    CHECK(s.knowledge.candidates() == std::vector<Point>{{5}});
    CHECK_THROWS_AS(observe(s, "Low"), Error);
    CHECK_THROWS_AS(step(s, oracle), Error);
}

TEST_CASE("observe rejects bad labels") {
    const auto s = start_session(load("lmh27"));
    CHECK_THROWS_AS(observe(s, "Banana"), InvalidOutcome);
    CHECK_THROWS_AS(observe(s, std::size_t{7}), InvalidOutcome);
}

TEST_CASE("inconsistent answers keep the failed state") {
    // two targets and three labels: some label always has no candidate
    const auto s = start_session(lowhigh(2));
    REQUIRE(s.pending);
    const auto q = s.pending->query;
    std::optional<std::size_t> bad;
    for (std::size_t o = 0; o < 3; ++o)
        if (s.pending->dist.counts[o] == 0)
            bad = o;
    REQUIRE(bad);
    try {
        observe(s, *bad);
        FAIL("expected InconsistentAnswers");
    } catch (const InconsistentAnswers& e) {
        CHECK(e.state().knowledge.empty());
        CHECK(e.state().transcript.size() == 1);
        CHECK(e.state().transcript.back().query == q);
        CHECK(e.state().transcript.back().candidates_after == 0);
    }
}

TEST_CASE("single target needs no rounds") {
    const auto p = analyze(parse_spec("targets t in 3..3\nqueries q in 1..5\noutcomes \"A\", \"B\"\n"
                                      "evaluate {\nif (t < q) {\nreturn \"A\"\n}\nreturn \"B\"\n}\n"));
    HiddenTargetOracle oracle({3});
    const auto s = run_session(p, oracle);
    CHECK(s.status == Status::Converged);
    CHECK(s.transcript.empty());
}

TEST_CASE("every target of small problems is identified") {
    for (const char* name : {"lowhigh10", "lmh10", "simplemm2", "movierank3", "battleship4",
                             "pinpoint10", "sorted8", "unsorted8"}) {
        CAPTURE(name);
        const auto p = load(name);
        for (const auto& t : p->targets) {
            HiddenTargetOracle oracle(t);
            const auto s = run_session(p, oracle);
            REQUIRE(s.status == Status::Converged);
            REQUIRE(s.knowledge.candidates() == std::vector<Point>{t});
            for (std::size_t i = 1; i < s.transcript.size(); ++i)
                REQUIRE(s.transcript[i].candidates_after < s.transcript[i - 1].candidates_after);
        }
    }
}

TEST_CASE("round limit") {
    const auto p = load("lmh27");
    SynthConfig cfg;
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(start_session(p, cfg), RoundLimitExceeded);
    cfg.max_rounds = 1;
    HiddenTargetOracle oracle({5});
    CHECK_THROWS_AS(run_session(p, oracle, cfg), RoundLimitExceeded);
    cfg.max_rounds = 3;
    CHECK(run_session(p, oracle, cfg).status == Status::Converged);
}

TEST_CASE("threads do not change the outcome") {
    const auto p = load("lmh50");
    for (Int t : {1, 17, 33, 50}) {
        HiddenTargetOracle o1({t}), o4({t});
        SynthConfig one, four;
        four.threads = 4;
        const auto a = run_session(p, o1, one);
        const auto b = run_session(p, o4, four);
        REQUIRE(a.transcript.size() == b.transcript.size());
        for (std::size_t i = 0; i < a.transcript.size(); ++i) {
            CHECK(a.transcript[i].query == b.transcript[i].query);
            CHECK(a.transcript[i].entropy == b.transcript[i].entropy);
        }
    }
}

TEST_CASE("sampling mode") {
    const auto p = load("lmh27");
    SynthConfig cfg;
    cfg.scan_cap = 10;
    cfg.sample_budget = 300;
    for (Int t = 1; t <= 27; ++t) {
        HiddenTargetOracle oracle({t});
        const auto s = run_session(p, oracle, cfg);
        CHECK(s.mode == SearchMode::Sample);
        REQUIRE(s.knowledge.candidates() == std::vector<Point>{{t}});
    }
    // same seed, same queries
    HiddenTargetOracle a({9}), b({9});
    const auto x = run_session(p, a, cfg);
    const auto y = run_session(p, b, cfg);
    REQUIRE(x.transcript.size() == y.transcript.size());
    for (std::size_t i = 0; i < x.transcript.size(); ++i)
        CHECK(x.transcript[i].query == y.transcript[i].query);
}

TEST_CASE("to_string") {
    CHECK(to_string(Status::Running) == "running");
    CHECK(to_string(Status::Converged) == "converged");
    CHECK(to_string(SearchMode::Scan) == "scan");
    CHECK(to_string(SearchMode::Sample) == "sample");
}

TEST_CASE("target filter narrows the domain") {
    auto spec = load_spec_file(brute::problem("lmh27"));
    AnalyzeConfig cfg;
    cfg.target_filter = parse_target_filter(spec, "t >= 10 && t <= 18");
    const auto p = analyze(spec, cfg);
    CHECK(p->targets.size() == 9);
    cfg.target_filter = parse_target_filter(spec, "t > 100");
    CHECK_THROWS_AS(analyze(spec, cfg), SemanticError);
}
