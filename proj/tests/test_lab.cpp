#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hanflab/error.hpp"
#include "hanflab/lab.hpp"
#include "support/oracles.hpp"

#include <set>

using namespace hanflab;

TEST_CASE("graph factories") {
    CHECK(make_path(1).universe_size == 1);
    CHECK(gaifman(make_cycle(4)).edges().size() == 4);
    CHECK(gaifman(make_complete(4)).edges().size() == 6);
    CHECK(degree_profile(make_star(4)).max_degree == 4);
    CHECK_THROWS_AS(make_cycle(2), Error);
}

TEST_CASE("graph enumeration matches the known counts") {
    CHECK(all_graphs(1).size() == 1);
    CHECK(all_graphs(2).size() == 2);
    CHECK(all_graphs(3).size() == 4);
    CHECK(all_graphs(4).size() == 11);
    CHECK(all_graphs(5).size() == 34);
}

TEST_CASE("enumerated graphs are pairwise non-isomorphic") {
    auto graphs = all_graphs(4);
    for (std::size_t i = 0; i < graphs.size(); ++i)
        for (std::size_t j = i + 1; j < graphs.size(); ++j)
            CHECK_FALSE(oracle::iso_bruteforce(graphs[i], graphs[j]));
}

TEST_CASE("bounded-degree enumeration stays bounded and complete") {
    auto bounded = all_graphs_max_degree(5, 2);
    std::set<std::string> keys;
    for (const Structure& g : bounded) {
        CHECK(degree_profile(g).max_degree <= 2);
        keys.insert(canonical_bytes(g, {}));
    }
    std::size_t expected = 0;
    for (const Structure& g : all_graphs(5))
        if (degree_profile(g).max_degree <= 2) ++expected;
    CHECK(keys.size() == bounded.size());
    CHECK(bounded.size() == expected);
}

TEST_CASE("random corpora are seed-deterministic and respect the degree cap") {
    CorpusSpec spec = CorpusSpec::parse("random:d=3,n=10,count=5,seed=1");
    Corpus a = generate_corpus(spec);
    Corpus b = generate_corpus(spec);
    REQUIRE(a.structures.size() == 5);
    CHECK(a.seed == 1);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.structures[i] == b.structures[i]);
        CHECK(degree_profile(a.structures[i]).max_degree <= 3);
    }
    Corpus other = generate_corpus(CorpusSpec::parse("random:d=3,n=10,count=5,seed=2"));
    bool any_different = false;
    for (std::size_t i = 0; i < 5; ++i) any_different = any_different || !(a.structures[i] == other.structures[i]);
    CHECK(any_different);
}

TEST_CASE("corpus spec parsing round-trips") {
    for (const char* text : {"all:4", "random:d=3,n=10,count=5,seed=1"}) {
        CHECK(CorpusSpec::parse(text).to_string() == text);
    }
    CHECK_THROWS_AS(CorpusSpec::parse("bogus:1"), Error);
    CHECK_THROWS_AS(CorpusSpec::parse("random:d=3"), Error);
}

TEST_CASE("default locality radius") {
    CHECK(hanf_radius_default(0) == 0);
    CHECK(hanf_radius_default(1) == 1);
    CHECK(hanf_radius_default(2) == 4);
    CHECK(hanf_radius_default(3) == 13);
}

TEST_CASE("triangle existence is (1,1)-local on small graphs") {
    Corpus corpus;
    corpus.spec = CorpusSpec::parse("all:5");
    corpus.structures = all_graphs_up_to(5);
    Formula triangle =
        parse_formula("exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))", graph_signature());
    auto report = locality_search(triangle, corpus, Radius::finite(1), Threshold::finite(1));
    CHECK(report.pairs_examined > 0);
    CHECK(report.violations.empty());
}

TEST_CASE("a single-structure corpus has no violations") {
    Corpus corpus;
    corpus.structures = {make_cycle(5)};
    Formula f = parse_formula("exists x. exists y. E(x,y)", graph_signature());
    CHECK(locality_search(f, corpus, Radius::finite(0), Threshold::finite(1)).violations.empty());
}

TEST_CASE("the connectivity query needs large parameters: a violation at (1,7)") {
    Corpus corpus;
    corpus.structures = {make_cycle(7), disjoint_union(make_cycle(4), make_cycle(4))};
    auto scheme = scheme_by_name("traversal");
    InvariantQuery conn{scheme,
                        parse_formula("forall x. ((forall y. (x=y | L(x,y))) | exists y. (L(y,x) & E(y,x)))",
                                      scheme->expanded(graph_signature())),
                        std::nullopt};
    auto report = locality_search(conn, corpus, Radius::finite(1), Threshold::finite(7));
    REQUIRE(report.violations.size() == 1);
    const auto& v = report.violations[0];
    CHECK(v.equivalence.equivalent);
    CHECK(v.value_a != v.value_b);
    // Self-audit: re-validate the recorded pair.
    CHECK(hanf_equivalent(corpus.structures[v.index_a], corpus.structures[v.index_b], Radius::finite(1),
                          Threshold::finite(7))
              .equivalent);
}

TEST_CASE("violations persist when radius or threshold grow, for fixed equivalent pairs") {
    // Monotonicity: growing r or t only shrinks the set of equivalent pairs,
    // so a violation-free report stays violation-free.
    Corpus corpus;
    corpus.structures = all_graphs_up_to(4);
    corpus.spec = CorpusSpec::parse("all:4");
    Formula f = parse_formula("exists x. exists y. E(x,y)", graph_signature());
    auto base = locality_search(f, corpus, Radius::finite(1), Threshold::finite(1));
    CHECK(base.violations.empty());
    CHECK(locality_search(f, corpus, Radius::finite(2), Threshold::finite(1)).violations.empty());
    CHECK(locality_search(f, corpus, Radius::finite(1), Threshold::finite(2)).violations.empty());
    CHECK(locality_search(f, corpus, Radius::finite(1), Threshold::omega()).violations.empty());
}

TEST_CASE("minimal locality parameters for edge existence") {
    Corpus corpus;
    corpus.structures = all_graphs_up_to(5);
    Formula edge = parse_formula("exists x. exists y. E(x,y)", graph_signature());
    auto found = minimal_locality_parameters(edge, corpus, 3, 8);
    REQUIRE(found.has_value());
    CHECK(found->first == 1);
    CHECK(found->second == 1);
}

TEST_CASE("constant queries are (0,1)-local") {
    Corpus corpus;
    corpus.structures = all_graphs_up_to(4);
    Formula t = parse_formula("true", graph_signature());
    auto found = minimal_locality_parameters(t, corpus, 2, 4);
    REQUIRE(found.has_value());
    CHECK(*found == std::make_pair<std::uint64_t, std::uint64_t>(0, 1));
}

TEST_CASE("the distinguishing radius grows with the cycle length") {
    // Queries separating C_2m from C_m + C_m need censuses that see far
    // enough; the first telling radius grows with m.
    auto least_separating_radius = [](int m) {
        auto [a, b] = cycle_pair(m);
        for (std::int64_t r = 0;; ++r) {
            if (!hanf_equivalent(a, b, Radius::finite(r), Threshold::omega()).equivalent) return r;
        }
    };
    // The r-ball of a cycle vertex stays a path until it wraps, so the first
    // telling radius is floor(m/2), when the small cycle closes up.
    CHECK(least_separating_radius(3) == 1);
    CHECK(least_separating_radius(5) == 2);
    CHECK(least_separating_radius(7) == 3);
    CHECK(least_separating_radius(3) < least_separating_radius(7));
}

TEST_CASE("minimal parameters report absence within bounds") {
    Corpus corpus;
    corpus.structures = {make_cycle(7), disjoint_union(make_cycle(4), make_cycle(4))};
    auto scheme = scheme_by_name("traversal");
    InvariantQuery conn{scheme,
                        parse_formula("forall x. ((forall y. (x=y | L(x,y))) | exists y. (L(y,x) & E(y,x)))",
                                      scheme->expanded(graph_signature())),
                        std::nullopt};
    // At radius <= 1 the pair stays equivalent up to threshold 7, so only
    // t = 8 works; bounding t below that yields nothing.
    auto found = minimal_locality_parameters(conn, corpus, 1, 7);
    CHECK_FALSE(found.has_value());
    auto wide = minimal_locality_parameters(conn, corpus, 1, 8);
    REQUIRE(wide.has_value());
    CHECK(*wide == std::make_pair<std::uint64_t, std::uint64_t>(0, 8));
}

TEST_CASE("one round never separates double cycles") {
    auto result = ef_indistinguishability_demo([](int m) { return cycle_pair(m); }, 1, 3, 6);
    REQUIRE(result.least_m.has_value());
    CHECK(*result.least_m == 3);
}

TEST_CASE("a constant family reports the range minimum") {
    auto result = ef_indistinguishability_demo(
        [](int) { return std::pair<Structure, Structure>(make_path(2), make_path(2)); }, 2, 4, 6);
    REQUIRE(result.least_m.has_value());
    CHECK(*result.least_m == 4);
}

TEST_CASE("two rounds lock at the smallest double cycle") {
    // Regression value from the first verified run: two rounds cannot pin a
    // triangle, so the scan stops immediately.
    auto result = ef_indistinguishability_demo([](int m) { return cycle_pair(m); }, 2, 3, 6);
    REQUIRE(result.least_m.has_value());
    CHECK(*result.least_m == 3);
}

TEST_CASE("three rounds separate small double cycles") {
    // Spoiler pins a triangle in C_3 + C_3; C_6 has none.
    auto result = ef_indistinguishability_demo([](int m) { return cycle_pair(m); }, 3, 3, 4);
    CHECK_FALSE(result.least_m.has_value());
    CHECK(result.scan.size() == 2);
}

TEST_CASE("scattered checks on the ten-cycle") {
    Structure c10 = make_cycle(10);
    CHECK(scattered_check(c10, {0, 3, 6}, Radius::finite(1), {}));
    CHECK_FALSE(scattered_check(c10, {0, 2}, Radius::finite(1), {}));
    CHECK(scattered_check(c10, {4}, Radius::finite(1), {}));
    CHECK_FALSE(scattered_check(c10, {0, 5}, Radius::finite(1), {4}));
    CHECK(scattered_check(c10, {0}, Radius::finite(1), {5}));
}

TEST_CASE("greedy scatter on the ten-cycle picks every third vertex") {
    Structure c10 = make_cycle(10);
    std::vector<Element> all;
    for (Element e = 0; e < 10; ++e) all.push_back(e);
    CHECK(greedy_scatter(c10, all, Radius::finite(1), {}) == std::vector<Element>{0, 3, 6});
    CHECK(greedy_scatter(c10, all, Radius::finite(1), all).empty());
    std::vector<Element> five{0, 1, 2, 3, 4};
    CHECK(greedy_scatter(make_edgeless(5), five, Radius::finite(2), {}) == five);
}

TEST_CASE("greedy output is scattered and at least the coverage bound") {
    for (const Structure& g : {make_cycle(8), make_path(9), make_star(4), make_complete(5)}) {
        std::vector<Element> all;
        for (Element e = 0; e < g.universe_size; ++e) all.push_back(e);
        for (int r = 1; r <= 2; ++r) {
            auto chosen = greedy_scatter(g, all, Radius::finite(r), {});
            CHECK(scattered_check(g, chosen, Radius::finite(r), {}));
            std::size_t max_ball_r = 0, max_ball_2r = 0;
            auto gg = gaifman(g);
            for (Element e = 0; e < g.universe_size; ++e) {
                max_ball_r = std::max(max_ball_r, ball(gg, e, Radius::finite(r)).size());
                max_ball_2r = std::max(max_ball_2r, ball(gg, e, Radius::finite(2 * r)).size());
            }
            CHECK(chosen.size() * max_ball_r * max_ball_2r >= all.size());
        }
    }
}

TEST_CASE("exact maximum scatter matches the subset-enumeration oracle") {
    for (const Structure& g : {make_cycle(10), make_path(8), make_star(5)}) {
        std::vector<Element> all;
        for (Element e = 0; e < g.universe_size; ++e) all.push_back(e);
        for (int r = 1; r <= 2; ++r) {
            auto exact = max_scattered_subset(g, all, Radius::finite(r), {});
            CHECK(scattered_check(g, exact, Radius::finite(r), {}));
            CHECK(exact.size() == oracle::max_scatter_bruteforce(g, all, r, {}));
            auto greedy = greedy_scatter(g, all, Radius::finite(r), {});
            CHECK(exact.size() >= greedy.size());
        }
    }
}

TEST_CASE("wideness of an edgeless corpus is the identity") {
    Corpus corpus;
    corpus.structures = {make_edgeless(6)};
    auto table = wideness_estimate(corpus, Radius::finite(1), 1, 0, 4);
    for (auto [m, zeta] : table.zeta) CHECK(zeta == static_cast<std::uint64_t>(m));
}

TEST_CASE("wideness on the bounded-degree corpus is monotone and linear-ish") {
    Corpus corpus;
    for (int n = 3; n <= 10; ++n) corpus.structures.push_back(make_cycle(n));
    for (int n = 1; n <= 10; ++n) corpus.structures.push_back(make_path(n));
    auto table = wideness_estimate(corpus, Radius::finite(1), 1, 0, 4);
    std::uint64_t previous = 0;
    for (auto [m, zeta] : table.zeta) {
        CHECK(zeta >= previous);
        CHECK(zeta <= static_cast<std::uint64_t>(3 * m + 1));
        previous = zeta;
    }
}

TEST_CASE("excluded sets shift the wideness table by at most a ball per point") {
    Corpus corpus;
    corpus.structures = {make_cycle(8), make_path(8)};
    auto base = wideness_estimate(corpus, Radius::finite(1), 1, 0, 3);
    auto shifted = wideness_estimate(corpus, Radius::finite(1), 1, 1, 3);
    std::size_t max_ball = 0;
    for (const Structure& g : corpus.structures) {
        auto gg = gaifman(g);
        for (Element e = 0; e < g.universe_size; ++e)
            max_ball = std::max(max_ball, ball(gg, e, Radius::finite(1)).size());
    }
    for (std::size_t i = 0; i < base.zeta.size(); ++i) {
        CHECK(shifted.zeta[i].second >= base.zeta[i].second);
        CHECK(shifted.zeta[i].second <= base.zeta[i].second + max_ball * 2);
    }
}

TEST_CASE("shipped batteries have the advertised shape") {
    auto sentences = battery_sentences();
    REQUIRE(sentences.size() == 10);
    for (const Formula& f : sentences) {
        CHECK(f.rank() <= 3);
        CHECK(f.free_variables().empty());
    }
    auto pointed = battery_pointed_formulas();
    REQUIRE(pointed.size() == 10);
    for (const Formula& f : pointed) {
        CHECK(f.free_variables() == std::vector<std::string>{"x"});
    }
}

TEST_CASE("evaluate_query handles both query kinds") {
    Formula edge = parse_formula("exists x. exists y. E(x,y)", graph_signature());
    CHECK(evaluate_query(edge, make_path(2), 1000));
    auto scheme = scheme_by_name("linear");
    InvariantQuery q{scheme, parse_formula("exists x. exists y. E(x,y)", scheme->expanded(graph_signature())),
                     std::nullopt};
    CHECK(evaluate_query(q, make_path(2), 1000));
    CHECK(query_rank(edge) == 2);
    CHECK(query_rank(q) == 2);
}
