#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hanflab/error.hpp"
#include "hanflab/lab.hpp"
#include "hanflab/structure.hpp"
#include "hanflab/structure_io.hpp"
#include "support/oracles.hpp"

#include <algorithm>

using namespace hanflab;

namespace {

Structure triangle() { return make_cycle(3); }

std::vector<std::string> problems_of(Structure s) {
    s.normalize();
    return s.problems();
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("validation accepts a well-formed triangle") {
    Structure t = triangle();
    CHECK(t.problems().empty());
    CHECK_NOTHROW(validated(t));
}

TEST_CASE("validation reports out-of-range elements") {
    Structure s = triangle();
    s.tables[0].push_back({0, 3});
    auto problems = problems_of(s);
    CHECK(mentions(problems, "element 3 out of range"));
}

TEST_CASE("validation reports arity mismatches") {
    Structure s = triangle();
    s.tables[0].push_back({0, 1, 2});
    CHECK(mentions(problems_of(s), "arity"));
}

TEST_CASE("validation reports duplicate symbol names") {
    Structure s = triangle();
    s.signature.constants.push_back("E");
    s.constant_values.push_back(0);
    CHECK(mentions(problems_of(s), "duplicate"));
}

TEST_CASE("empty universe is legal only without constants") {
    Structure empty;
    empty.signature = graph_signature();
    empty.tables.resize(1);
    CHECK(empty.problems().empty());

    Structure with_const;
    with_const.signature.constants.push_back("c");
    with_const.constant_values.push_back(0);
    CHECK(mentions(with_const.problems(), "empty universe"));
}

TEST_CASE("gaifman graph of a path") {
    auto g = gaifman(make_path(3));
    CHECK(g.edges() == std::vector<std::pair<Element, Element>>{{0, 1}, {1, 2}});
}

TEST_CASE("gaifman graph joins all pairs of a ternary tuple") {
    Structure s;
    s.signature.relations = {{"R", 3}};
    s.universe_size = 3;
    s.tables = {{{0, 1, 2}}};
    auto g = gaifman(s);
    CHECK(g.edges() == std::vector<std::pair<Element, Element>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("gaifman graph of empty relations has no edges") {
    auto g = gaifman(make_edgeless(4));
    CHECK(g.edges().empty());
}

TEST_CASE("balls on the six-cycle") {
    Structure c6 = make_cycle(6);
    CHECK(ball(c6, 0, Radius::finite(1)) == std::vector<Element>{0, 1, 5});
    CHECK(ball(c6, 0, Radius::finite(0)) == std::vector<Element>{0});
}

TEST_CASE("infinite radius saturates at the component") {
    Structure two = disjoint_union(make_cycle(3), make_cycle(3));
    CHECK(ball(two, 0, Radius::infinite()) == std::vector<Element>{0, 1, 2});
    CHECK(ball(two, 4, Radius::infinite()) == std::vector<Element>{3, 4, 5});
}

TEST_CASE("ball agrees with the brute-force BFS oracle") {
    for (const Structure& g : all_graphs_up_to(5)) {
        auto gg = gaifman(g);
        for (Element a = 0; a < g.universe_size; ++a) {
            auto dist = oracle::bfs_distances(g, a);
            for (int r = 0; r <= 3; ++r) {
                auto b = ball(gg, a, Radius::finite(r));
                for (Element e = 0; e < g.universe_size; ++e) {
                    bool in = std::binary_search(b.begin(), b.end(), e);
                    bool expected = dist[static_cast<std::size_t>(e)] >= 0 &&
                                    dist[static_cast<std::size_t>(e)] <= r;
                    CHECK(in == expected);
                }
            }
        }
    }
}

TEST_CASE("ball monotonicity and the r=0 point") {
    for (const Structure& g : all_graphs_up_to(4)) {
        auto gg = gaifman(g);
        for (Element a = 0; a < g.universe_size; ++a) {
            CHECK(ball(gg, a, Radius::finite(0)) == std::vector<Element>{a});
            for (int r = 0; r < 3; ++r) {
                auto small = ball(gg, a, Radius::finite(r));
                auto large = ball(gg, a, Radius::finite(r + 1));
                CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
            }
        }
    }
}

TEST_CASE("pointed neighborhood of a cycle vertex is a pointed path") {
    auto nb = pointed_neighborhood(make_cycle(6), 0, Radius::finite(1));
    CHECK(nb.pointed.structure.universe_size == 3);
    CHECK(nb.pointed.points.size() == 1);
    // The point is the middle of the induced path: degree two.
    auto g = gaifman(nb.pointed.structure);
    CHECK(g.degree(nb.pointed.points[0]) == 2);
    CHECK(g.edges().size() == 2);
}

TEST_CASE("pointed neighborhood at radius one of a triangle is the whole triangle") {
    auto nb = pointed_neighborhood(make_cycle(3), 0, Radius::finite(1));
    CHECK(nb.pointed.structure == make_cycle(3));
    CHECK(nb.pointed.points == std::vector<Element>{0});
}

TEST_CASE("radius-zero neighborhood keeps loops and unary facts") {
    Structure s;
    s.signature.relations = {{"P", 1}, {"E", 2}};
    s.universe_size = 2;
    s.tables = {{{1}}, {{1, 1}, {0, 1}, {1, 0}}};
    s.normalize();
    auto nb = pointed_neighborhood(s, 1, Radius::finite(0));
    CHECK(nb.pointed.structure.universe_size == 1);
    CHECK(nb.pointed.structure.tables[0] == Table{{0}});
    CHECK(nb.pointed.structure.tables[1] == Table{{0, 0}});
}

TEST_CASE("infinite neighborhoods equal the saturated finite ones") {
    for (const Structure& g : all_graphs_up_to(4)) {
        for (Element a = 0; a < g.universe_size; ++a) {
            auto inf = pointed_neighborhood(g, a, Radius::infinite());
            auto sat = pointed_neighborhood(g, a, Radius::finite(g.universe_size));
            CHECK(inf.pointed == sat.pointed);
            CHECK(inf.kept == sat.kept);
        }
    }
}

TEST_CASE("degree profiles") {
    CHECK(degree_profile(make_cycle(6)).max_degree == 2);
    CHECK(degree_profile(make_star(3)).max_degree == 3);
    CHECK(degree_profile(make_edgeless(5)).max_degree == 0);
    CHECK(degree_profile(make_edgeless(0)).max_degree == 0);
}

TEST_CASE("components: blocks ordered by least element") {
    auto two = disjoint_union(make_cycle(3), make_cycle(3));
    auto blocks = components(two);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0] == std::vector<Element>{0, 1, 2});
    CHECK(blocks[1] == std::vector<Element>{3, 4, 5});
    CHECK(components(make_cycle(6)).size() == 1);
    CHECK(components(make_edgeless(3)).size() == 3);
}

TEST_CASE("components agree with the union-find oracle") {
    for (const Structure& g : all_graphs_up_to(5)) {
        CHECK(components(g) == oracle::components(g));
    }
}

TEST_CASE("restriction of a cycle to three consecutive vertices is a path") {
    std::vector<Element> kept{0, 1, 2};
    auto induced = restrict_to(make_cycle(6), kept);
    CHECK(induced.structure == make_path(3));
    CHECK(induced.kept == kept);
    CHECK(induced.dropped_constants.empty());
}

TEST_CASE("restriction to the whole universe is the identity") {
    Structure c5 = make_cycle(5);
    std::vector<Element> all{0, 1, 2, 3, 4};
    CHECK(restrict_to(c5, all).structure == c5);
}

TEST_CASE("nested restrictions compose") {
    Structure c6 = make_cycle(6);
    std::vector<Element> x{0, 1, 2, 3, 4};
    auto first = restrict_to(c6, x);
    std::vector<Element> y_new{0, 2, 3};
    auto second = restrict_to(first.structure, y_new);
    std::vector<Element> direct;
    for (Element e : y_new) direct.push_back(first.kept[static_cast<std::size_t>(e)]);
    CHECK(second.structure == restrict_to(c6, direct).structure);
}

TEST_CASE("restriction drops constants outside the window") {
    Structure s = make_path(3);
    s.signature.constants = {"c0", "c1"};
    s.constant_values = {0, 2};
    std::vector<Element> kept{0, 1};
    auto induced = restrict_to(s, kept);
    CHECK(induced.structure.signature.constants == std::vector<std::string>{"c0"});
    CHECK(induced.structure.constant_values == std::vector<Element>{0});
    CHECK(induced.dropped_constants == std::vector<std::string>{"c1"});
}

TEST_CASE("disjoint union shifts the right structure") {
    auto two = disjoint_union(make_cycle(3), make_cycle(3));
    CHECK(two.universe_size == 6);
    CHECK(components(two).size() == 2);
}

TEST_CASE("gaifman distributes over disjoint union") {
    for (const Structure& a : all_graphs_up_to(3)) {
        for (const Structure& b : all_graphs_up_to(3)) {
            auto u = disjoint_union(a, b);
            auto gu = gaifman(u);
            auto ga = gaifman(a);
            auto gb = gaifman(b);
            for (Element x = 0; x < a.universe_size; ++x)
                CHECK(gu.adjacency[static_cast<std::size_t>(x)] == ga.adjacency[static_cast<std::size_t>(x)]);
            for (Element x = 0; x < b.universe_size; ++x) {
                auto shifted = gb.adjacency[static_cast<std::size_t>(x)];
                for (Element& e : shifted) e += a.universe_size;
                CHECK(gu.adjacency[static_cast<std::size_t>(x + a.universe_size)] == shifted);
            }
        }
    }
}

TEST_CASE("disjoint union rejects signatures with constants") {
    Structure s = make_path(2);
    s.signature.constants = {"c"};
    s.constant_values = {0};
    CHECK_THROWS_AS(disjoint_union(s, s), Error);
}

TEST_CASE("structure json round-trips the documented format") {
    std::string text = R"({"signature":{"relations":[["E",2]],"constants":["c0"]},"universe":6,)"
                       R"("relations":{"E":[[0,1],[1,0]]},"constants":{"c0":3}})";
    Structure s = structure_from_json(Json::parse(text));
    CHECK(s.universe_size == 6);
    CHECK(s.constant_values == std::vector<Element>{3});
    CHECK(structure_to_json(s).dump() == text);
}

TEST_CASE("structure json output sorts relation tables") {
    Structure s = make_path(2);
    std::string dumped = structure_to_json(s).dump();
    CHECK(dumped.find("[[0,1],[1,0]]") != std::string::npos);
}

TEST_CASE("structure json rejects malformed input") {
    CHECK_THROWS_AS(structure_from_json(Json::parse(R"({"universe":2})")), Error);
    CHECK_THROWS_AS(structure_from_json(Json::parse(
                        R"({"signature":{"relations":[["E",2]],"constants":[]},"universe":2,"relations":{"F":[]}})")),
                    Error);
    CHECK_THROWS_AS(structure_from_json(Json::parse(
                        R"({"signature":{"relations":[],"constants":["c"]},"universe":2,"relations":{}})")),
                    Error);
}

TEST_CASE("radius json uses the distinguished infinity token") {
    CHECK(radius_to_json(Radius::infinite()) == Json("infinity"));
    CHECK(radius_to_json(Radius::finite(2)) == Json(2));
    CHECK(radius_from_json(Json("infinity")).is_infinite());
    CHECK(radius_from_json(Json(0)) == Radius::finite(0));
    CHECK_THROWS_AS(radius_from_json(Json("inf")), Error);
    CHECK_THROWS_AS(Radius::finite(-1), Error);
}
