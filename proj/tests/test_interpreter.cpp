#include "searchsynth/errors.hpp"
#include "searchsynth/interpreter.hpp"
#include "support/brute.hpp"

#include <doctest.h>

using namespace searchsynth;

namespace {

SearchSpec lmh() { return load_spec_file(brute::problem("lmh27")); }

SearchSpec tiny(const std::string& decls, const std::string& body) {
    return parse_spec(decls + "\noutcomes \"A\", \"B\"\nevaluate {\n" + body + "\n}\n");
}

} // namespace

TEST_CASE("evaluate_concrete on LMH") {
    const auto s = lmh();
    CHECK(evaluate_concrete(s, Point{10, 18}, Point{5}) == "Low");
    CHECK(evaluate_concrete(s, Point{10, 18}, Point{10}) == "Middle");
    CHECK(evaluate_concrete(s, Point{10, 18}, Point{18}) == "Middle");
    CHECK(evaluate_concrete(s, Point{10, 18}, Point{19}) == "High");
    // empty interval never answers Middle
    CHECK(evaluate_concrete(s, Point{18, 10}, Point{20}) == "High");
    CHECK(evaluate_concrete(s, Point{18, 10}, Point{12}) == "Low");
}

TEST_CASE("interpreter agrees with the reference LMH everywhere") {
    const auto s = lmh();
    const Interpreter interp(s);
    for (Int t = 1; t <= 27; ++t)
        for (Int a = 1; a <= 27; ++a)
            for (Int b = 1; b <= 27; ++b)
                REQUIRE(interp.evaluate(Point{a, b}, Point{t}) ==
                        static_cast<std::size_t>(brute::lmh(t, a, b)));
}

TEST_CASE("enumeration") {
    const auto one = tiny("targets t in 4..4\nqueries q in 0..0", "return \"A\"");
    CHECK(enumerate_targets(one) == std::vector<Point>{{4}});
    CHECK(enumerate_queries(one) == std::vector<Point>{{0}});

    const auto movie = load_spec_file(brute::problem("movierank3"));
    const auto ts = enumerate_targets(movie);
    CHECK(ts.size() == 6);
    CHECK(std::is_sorted(ts.begin(), ts.end()));
    for (const auto& t : ts) {
        Point sorted = t;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == Point{0, 1, 2});
    }
    CHECK(enumerate_targets(lmh()).size() == 27);
    CHECK(enumerate_queries(lmh()).size() == 729);
    CHECK_THROWS_AS(enumerate_queries(lmh(), 100), CapacityError);
}

TEST_CASE("next_in_box walks lexicographically") {
    const std::vector<Interval> box{{0, 1}, {5, 7}};
    Point p{0, 5};
    std::vector<Point> seen{p};
    while (next_in_box(p, box))
        seen.push_back(p);
    CHECK(seen.size() == 6);
    CHECK(seen[1] == Point{0, 6});
    CHECK(seen.back() == Point{1, 7});
}

TEST_CASE("runtime faults") {
    const auto loop = tiny("targets t in 1..3\nqueries q in 1..3",
                           "i = 0\nwhile (i < 100) {\ni = i + 1\n}\nreturn \"A\"");
    CHECK_THROWS_AS(evaluate_concrete(loop, Point{1}, Point{1}), EvalError);

    const auto bounded = parse_spec("loop_bound 200\ntargets t in 1..3\nqueries q in 1..3\n"
                                    "outcomes \"A\"\nevaluate {\ni = 0\nwhile (i < 100) {\n"
                                    "i = i + 1\n}\nreturn \"A\"\n}\n");
    CHECK(evaluate_concrete(bounded, Point{1}, Point{1}) == "A");

    const auto index = tiny("targets t in 0..3\nqueries q in 0..3",
                            "array a[2]\nif (a[t] == 0) {\nreturn \"A\"\n}\nreturn \"B\"");
    CHECK(evaluate_concrete(index, Point{0}, Point{1}) == "A");
    CHECK_THROWS_AS(evaluate_concrete(index, Point{0}, Point{3}), EvalError);

    const auto big = tiny("targets t in 0..3\nqueries q in 0..3",
                          "x = 4611686018427387904\nx = x + x\nreturn \"A\"");
    CHECK_THROWS_AS(evaluate_concrete(big, Point{0}, Point{1}), EvalError);

    CHECK_THROWS_AS(evaluate_concrete(lmh(), Point{10, 18}, Point{28}), EvalError);
}

TEST_CASE("functions, arrays and constants") {
    const auto s = parse_spec(R"(
constant K = [3, 1, 4, 1, 5]
targets t in 0..4
queries q in 0..4
outcomes "A", "B"
function pick(i) {
    return K[i]
}
evaluate {
    array m[len(K)]
    m[q] = pick(t)
    if (m[q] > 2 || !(t != q)) {
        return "A"
    }
    return "B"
}
)");
    CHECK(evaluate_concrete(s, Point{1}, Point{0}) == "A");  // K[0]=3
    CHECK(evaluate_concrete(s, Point{1}, Point{1}) == "A");  // t == q
    CHECK(evaluate_concrete(s, Point{0}, Point{3}) == "B");
}

TEST_CASE("validity") {
    const auto coins = load_spec_file(brute::problem("coins5"));
    const Interpreter interp(coins);
    const auto qs = enumerate_queries(coins);
    CHECK(qs.size() == 50);
    for (const auto& q : qs)
        CHECK(interp.query_valid(q));
}
