#include "searchsynth/corpus.hpp"
#include "searchsynth/errors.hpp"
#include "searchsynth/interpreter.hpp"
#include "support/brute.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace searchsynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("searchsynth_corpus_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

const char* tiny_spec = "targets t in 1..4\nqueries q in 1..4\noutcomes \"Low\", \"High\"\n"
                        "evaluate {\nif (t < q) {\nreturn \"Low\"\n}\nreturn \"High\"\n}\n";

} // namespace

TEST_CASE("manifest lists the shipped problems") {
    const auto entries = read_manifest(SEARCHSYNTH_PROBLEMS_DIR);
    CHECK(entries.size() >= 30);
    std::set<std::string> names;
    for (const auto& e : entries) {
        CHECK(names.insert(e.name).second);
        CHECK(fs::exists(e.path));
        CHECK_FALSE(e.family.empty());
    }
    for (const char* n : {"lowhigh10", "lmh27", "simplemm2", "mastermind2", "battleship4",
                          "movierank3", "coins5"})
        CHECK(names.count(n));
}

TEST_CASE("load_corpus checks every CI entry") {
    const auto loaded = load_corpus(SEARCHSYNTH_PROBLEMS_DIR);
    for (const auto& l : loaded)
        CHECK_FALSE(l.entry.slow);
    CHECK(loaded.size() + 3 == read_manifest(SEARCHSYNTH_PROBLEMS_DIR).size());
}

TEST_CASE("entry examples") {
    const auto lh = load_entry(SEARCHSYNTH_PROBLEMS_DIR, "lowhigh10");
    CHECK(lh.entry.expected_targets == 10);
    CHECK(lh.spec.outcomes.size() == 3);
    const auto mr = load_entry(SEARCHSYNTH_PROBLEMS_DIR, "movierank3");
    CHECK(enumerate_targets(mr.spec).size() == 6);
    CHECK(enumerate_queries(mr.spec).size() == 9);
    const auto bs = load_entry(SEARCHSYNTH_PROBLEMS_DIR, "battleship4");
    CHECK(enumerate_targets(bs.spec).size() == 16);
    CHECK_THROWS_AS(load_entry(SEARCHSYNTH_PROBLEMS_DIR, "nope"), CorpusError);
}

TEST_CASE("identifiable entries separate every pair of targets") {
    for (const auto& e : read_manifest(SEARCHSYNTH_PROBLEMS_DIR)) {
        if (e.slow || e.expected_targets * e.expected_queries > 2'000'000)
            continue;
        CAPTURE(e.name);
        const auto spec = load_spec_file(e.path);
        const Interpreter interp(spec);
        const auto ts = enumerate_targets(spec);
        const auto qs = enumerate_queries(spec);
        // targets are separable iff their answer rows differ
        std::set<std::vector<std::size_t>> rows;
        for (const auto& t : ts) {
            std::vector<std::size_t> row;
            row.reserve(qs.size());
            for (const auto& q : qs)
                row.push_back(interp.evaluate(q, t));
            rows.insert(std::move(row));
        }
        CHECK((rows.size() == ts.size()) == e.identifiable);
    }
}

TEST_CASE("bad manifests") {
    {
        const auto dir = scratch("missing");
        CHECK_THROWS_AS(read_manifest(dir.string()), CorpusError);
    }
    {
        const auto dir = scratch("garbage");
        write(dir / "manifest.json", "{not json");
        CHECK_THROWS_AS(read_manifest(dir.string()), CorpusError);
    }
    {
        const auto dir = scratch("counts");
        write(dir / "tiny.search", tiny_spec);
        write(dir / "manifest.json",
              R"({"entries":[{"name":"tiny","file":"tiny.search","family":"x","params":"",
                 "targets":5,"queries":4,"identifiable":true,"slow":false}]})");
        try {
            load_corpus(dir.string());
            FAIL("expected CorpusError");
        } catch (const CorpusError& e) {
            CHECK(std::string(e.what()).rfind("tiny:", 0) == 0);
        }
    }
    {
        const auto dir = scratch("partial");
        write(dir / "tiny.search",
              "targets t in 1..4\nqueries q in 0..4\noutcomes \"A\"\nevaluate {\n"
              "x = 30 * t\ni = 0\nwhile (i < x) {\ni = i + 1\n}\nreturn \"A\"\n}\n");
        write(dir / "manifest.json",
              R"({"entries":[{"name":"tiny","file":"tiny.search","family":"x","params":"",
                 "targets":4,"queries":5,"identifiable":false,"slow":false}]})");
        CHECK_THROWS_AS(load_corpus(dir.string()), CorpusError);
    }
    {
        const auto dir = scratch("ok");
        write(dir / "tiny.search", tiny_spec);
        write(dir / "manifest.json",
              R"({"entries":[{"name":"tiny","file":"tiny.search","family":"x","params":"",
                 "targets":4,"queries":4,"identifiable":false,"slow":false}]})");
        CHECK(load_corpus(dir.string()).size() == 1);
    }
}
