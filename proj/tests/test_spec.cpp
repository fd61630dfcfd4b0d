#include "searchsynth/errors.hpp"
#include "searchsynth/spec.hpp"
#include "searchsynth/spec_json.hpp"
#include "support/brute.hpp"

#include <doctest.h>

#include <filesystem>

using namespace searchsynth;

namespace {

const char* lmh_source = R"(
targets t in 1..27
queries q[2] in 1..27
outcomes "Low", "Middle", "High"
evaluate {
    if (t < q[0]) {
        return "Low"
    }
    if (q[0] <= t && t <= q[1]) {
        return "Middle"
    }
    return "High"
}
)";

std::string with_evaluate(const std::string& body) {
    return "targets t in 1..27\nqueries q[2] in 1..27\noutcomes \"Low\", \"Middle\", \"High\"\n"
           "evaluate {\n" + body + "\n}\n";
}

std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(SEARCHSYNTH_PROBLEMS_DIR))
        if (e.path().extension() == ".search")
            out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("LMH parses") {
    const auto s = parse_spec(lmh_source, "lmh");
    CHECK(s.name == "lmh");
    CHECK(s.target_dim() == 1);
    CHECK(s.query_dim() == 2);
    CHECK(s.outcomes == std::vector<std::string>{"Low", "Middle", "High"});
    CHECK(s.query_box() == std::vector<Interval>{{1, 27}, {1, 27}});
    CHECK(s.outcome_index("Middle") == 1);
    CHECK_FALSE(s.outcome_index("Banana"));
    CHECK_THROWS_AS(s.require_outcome("Banana"), InvalidOutcome);
    CHECK(box_size(s.query_box()) == 729);
}

TEST_CASE("AST JSON") {
    const auto j = spec_to_json(parse_spec(lmh_source));
    CHECK(j["outcomes"].size() == 3);
    CHECK(j["queries"].size() == 1);
    CHECK(j["program"]["kind"] == "Program");
    const auto& eval = j["program"]["children"].back();
    CHECK(eval["kind"] == "FunctionDefine");
    CHECK(eval["name"] == "evaluate");
    const auto& body = eval["children"][0];
    CHECK(body["kind"] == "StatementList");
    REQUIRE(body["children"].size() == 3);
    CHECK(body["children"][0]["kind"] == "If");
    CHECK(body["children"][0]["children"][0]["kind"] == "Less");
    CHECK(body["children"][2]["kind"] == "Return");
    CHECK(body["children"][2]["label"] == "High");
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_spec(with_evaluate("if t < 3 { return \"Low\" }\nreturn \"High\""));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.pos().line == 5);
    }
    CHECK_THROWS_AS(parse_spec(with_evaluate("return \"High")), ParseError);
    CHECK_THROWS_AS(parse_spec(with_evaluate("x = 99999999999999999999999\nreturn \"High\"")),
                    ParseError);
}

TEST_CASE("semantic errors") {
    // no return at all
    CHECK_THROWS_AS(parse_spec(with_evaluate("")), SemanticError);
    // q has two coordinates
    CHECK_THROWS_AS(parse_spec(with_evaluate("if (q[2] < t) {\nreturn \"Low\"\n}\nreturn \"High\"")),
                    SemanticError);
    CHECK_THROWS_AS(parse_spec(with_evaluate("return \"Banana\"")), SemanticError);
    CHECK_THROWS_AS(parse_spec(with_evaluate("t = 3\nreturn \"Low\"")), SemanticError);
    CHECK_THROWS_AS(parse_spec(with_evaluate("return \"Low\"\n") + "evaluate {\nreturn \"Low\"\n}\n"),
                    SemanticError);
    CHECK_THROWS_AS(parse_spec(with_evaluate("if (z < 1) {\nreturn \"Low\"\n}\nreturn \"High\"")),
                    SemanticError);
    CHECK_THROWS_AS(parse_spec("targets t in 5..1\nqueries q in 1..2\noutcomes \"A\"\n"
                               "evaluate {\nreturn \"A\"\n}\n"),
                    SemanticError);
    CHECK_THROWS_AS(parse_spec("targets t in 1..5\nqueries q in 1..2\noutcomes \"A\", \"A\"\n"
                               "evaluate {\nreturn \"A\"\n}\n"),
                    SemanticError);
    CHECK_THROWS_AS(parse_spec("function f(a) {\nreturn f(a)\n}\n" + with_evaluate(
                                   "if (f(t) < 1) {\nreturn \"Low\"\n}\nreturn \"High\"")),
                    SemanticError);
}

TEST_CASE("print_spec round-trips every corpus spec") {
    const auto files = corpus_files();
    REQUIRE(files.size() >= 30);
    for (const auto& f : files) {
        CAPTURE(f);
        const auto a = load_spec_file(f);
        const auto text = print_spec(a);
        const auto b = parse_spec(text, a.name);
        CHECK(spec_to_json(a) == spec_to_json(b));
        CHECK(print_spec(b) == text);
    }
}

TEST_CASE("target filter") {
    const auto s = parse_spec(lmh_source);
    CHECK_NOTHROW(parse_target_filter(s, "t >= 10 && t <= 18"));
    CHECK_THROWS_AS(parse_target_filter(s, "q[0] < 3"), SemanticError);
    CHECK_THROWS_AS(parse_target_filter(s, "t <"), ParseError);
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_spec_file("/nonexistent/x.search"), Error);
}
