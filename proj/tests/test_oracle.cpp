#include "searchsynth/errors.hpp"
#include "searchsynth/oracle.hpp"
#include "searchsynth/transcript.hpp"
#include "support/brute.hpp"

#include <doctest.h>

#include <atomic>
#include <functional>
#include <thread>

using namespace searchsynth;

namespace {

std::shared_ptr<const Problem> load(const std::string& name) {
    return analyze(load_spec_file(brute::problem(name)));
}

// First session state (depth-first over answers) whose pending query has a
// label no candidate produces.
std::optional<std::pair<SessionState, std::size_t>> find_contradiction(const SessionState& s) {
    if (!s.pending)
        return std::nullopt;
    for (std::size_t o = 0; o < s.pending->dist.counts.size(); ++o)
        if (s.pending->dist.counts[o] == 0)
            return std::make_pair(s, o);
    for (std::size_t o = 0; o < s.pending->dist.counts.size(); ++o)
        if (auto r = find_contradiction(observe(s, o)))
            return r;
    return std::nullopt;
}

} // namespace

TEST_CASE("hidden target oracle") {
    const auto p = load("lmh27");
    HiddenTargetOracle o({5});
    CHECK(o.answer(p->spec, Point{10, 18}) == "Low");
    CHECK(o.answer(p->spec, Point{4, 6}) == "Middle");
    CHECK(o.target() == Point{5});
}

TEST_CASE("replay oracle") {
    const auto p = load("lmh27");
    ReplayOracle o({"Low", "Middle"});
    CHECK(o.answer(p->spec, Point{10, 18}) == "Low");
    CHECK(o.answer(p->spec, Point{4, 6}) == "Middle");
    CHECK(o.used() == 2);
    CHECK_THROWS_AS(o.answer(p->spec, Point{5, 5}), OracleExhausted);

    ReplayOracle short_run({"Low"});
    CHECK_THROWS_AS(run_session(p, short_run), OracleExhausted);
}

TEST_CASE("replaying a transcript reproduces the session") {
    const auto p = load("mastermind2");
    HiddenTargetOracle hidden({3, 1});
    const auto a = run_session(p, hidden);
    const auto j = transcript_json(a);
    auto replay = ReplayOracle::from_transcript(j);
    const auto b = run_session(p, replay);
    CHECK(replay.used() == a.transcript.size());
    CHECK(transcript_json(b, {.timing = false}) == transcript_json(a, {.timing = false}));
}

TEST_CASE("external oracle") {
    const auto p = load("lmh27");
    ExternalOracle o(std::chrono::milliseconds(2000));
    CHECK_FALSE(o.waiting());
    CHECK_THROWS_AS(o.submit("Low"), Error);

    std::string got;
    std::thread asker([&] { got = o.answer(p->spec, Point{10, 18}); });
    while (!o.waiting())
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    CHECK(*o.waiting() == Point{10, 18});
    CHECK_THROWS_AS(o.submit("Banana"), InvalidOutcome);
    o.submit("High");
    asker.join();
    CHECK(got == "High");
    CHECK_FALSE(o.waiting());

    ExternalOracle quick(std::chrono::milliseconds(20));
    CHECK_THROWS_AS(quick.answer(p->spec, Point{1, 1}), OracleTimeout);
}

TEST_CASE("external oracle drives a session") {
    const auto p = load("lmh27");
    ExternalOracle o(std::chrono::milliseconds(5000));
    SessionState result;
    std::atomic<bool> done{false};
    std::thread runner([&] {
        result = run_session(p, o);
        done = true;
    });
    std::optional<Point> last;
    while (!done) {
        const auto q = o.waiting();
        if (q && q != last) {
            o.submit(evaluate_concrete(p->spec, *q, Point{20}));
            last = q;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    runner.join();
    CHECK(result.knowledge.candidates() == std::vector<Point>{{20}});
}

TEST_CASE("no report while candidates remain") {
    const auto s = start_session(load("lmh27"));
    CHECK_FALSE(detect_inconsistency(s));
}

TEST_CASE("inconsistency report matches brute force") {
    for (const char* name : {"lmh10", "lowhigh10", "lmh9"}) {
        CAPTURE(name);
        const auto p = load(name);
        const auto found = find_contradiction(start_session(p));
        if (!found)
            continue;
        const auto& [before, bad] = *found;
        SessionState failed;
        try {
            observe(before, bad);
            FAIL("expected InconsistentAnswers");
        } catch (const InconsistentAnswers& e) {
            failed = e.state();
        }
        const auto report = detect_inconsistency(failed);
        REQUIRE(report);

        // brute force: answers as (query, label), alternatives by direct evaluation
        const Interpreter interp(p->spec);
        const auto& rounds = failed.transcript;
        std::optional<std::size_t> want_round;
        std::vector<std::pair<std::string, std::size_t>> want;
        for (std::size_t r = 0; r < rounds.size() && !want_round; ++r) {
            for (std::size_t alt = 0; alt < p->spec.outcomes.size(); ++alt) {
                if (alt == rounds[r].outcome)
                    continue;
                std::size_t n = 0;
                for (const auto& t : p->targets) {
                    bool ok = interp.evaluate(rounds[r].query, t) == alt;
                    for (std::size_t j = 0; ok && j < rounds.size(); ++j)
                        if (j != r)
                            ok = interp.evaluate(rounds[j].query, t) == rounds[j].outcome;
                    n += ok;
                }
                if (n)
                    want.emplace_back(p->spec.outcomes[alt], n);
            }
            if (!want.empty())
                want_round = r + 1;
        }
        CHECK(report->round == want_round);
        REQUIRE(report->alternatives.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(report->alternatives[i].label == want[i].first);
            CHECK(report->alternatives[i].candidates == want[i].second);
        }
        const auto j = to_json(*report);
        CHECK(j["alternatives"].size() == want.size());
    }
}

TEST_CASE("LMH contradiction fixture") {
    // Low at (10,18), High at (4,6) leaves {7,8,9}; Low at (7,9) then
    // contradicts. Changing round 2 fixes it.
    const auto p = load("lmh27");
    auto s = start_session(p);
    s = observe(s, "Low");
    REQUIRE(s.pending->query == Point{4, 6});
    s = observe(s, "High");
    SessionState failed = s;
    Round r;
    r.index = 3;
    r.query = {7, 9};
    r.outcome = 0;
    failed.transcript.push_back(r);
    failed.knowledge = Knowledge(Formula::bottom(), {}, 9);
    const auto report = detect_inconsistency(failed);
    REQUIRE(report);
    CHECK(report->round == 2);
    REQUIRE(report->alternatives.size() == 2);
    CHECK(report->alternatives[0].label == "Low");
    CHECK(report->alternatives[0].candidates == 3);
    CHECK(report->alternatives[1].label == "Middle");
    CHECK(report->alternatives[1].candidates == 3);
}

TEST_CASE("EmptyKnowledge catches inconsistency too") {
    const auto p = load("lowhigh10");
    const auto found = find_contradiction(start_session(p));
    REQUIRE(found);
    CHECK_THROWS_AS(observe(found->first, found->second), EmptyKnowledge);
}
