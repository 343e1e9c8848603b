// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries a wall-clock budget that is enforced.

#include "hanflab/census.hpp"
#include "hanflab/ef.hpp"
#include "hanflab/error.hpp"
#include "hanflab/formula.hpp"
#include "hanflab/invariance.hpp"
#include "hanflab/lab.hpp"
#include "hanflab/locality.hpp"
#include "hanflab/presentation.hpp"
#include "hanflab/structure_io.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace hanflab;

namespace {

int failures = 0;

struct Criterion {
    int number;
    const char* title;
    double budget_seconds;
};

void run_criterion(const Criterion& c, const std::function<bool(std::string&)>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.budget_seconds) {
        ok = false;
        detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("criterion %2d [%s]: %s (%.2fs, budget %.0fs)%s%s\n", c.number, c.title, ok ? "PASS" : "FAIL",
                elapsed, c.budget_seconds, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

bool expect(bool condition, const std::string& message, std::string& detail) {
    if (!condition && detail.empty()) detail = message;
    return condition;
}

const int kWorkers = 2;

// --- 1: census/Hanf thresholds ------------------------------------------------

bool criterion1(std::string& detail) {
    Structure c7 = make_cycle(7);
    Structure c44 = disjoint_union(make_cycle(4), make_cycle(4));
    Structure c6 = make_cycle(6);
    Structure c33 = disjoint_union(make_cycle(3), make_cycle(3));
    bool ok = expect(hanf_equivalent(c7, c44, Radius::finite(1), Threshold::finite(7)).equivalent,
                     "C7 vs C4+C4 should be (1,7)-equivalent", detail);
    ok &= expect(!hanf_equivalent(c7, c44, Radius::finite(1), Threshold::finite(8)).equivalent,
                 "C7 vs C4+C4 should separate at t=8", detail);
    for (std::uint64_t t = 1; t <= 6; ++t)
        ok &= expect(!hanf_equivalent(c6, c33, Radius::finite(1), Threshold::finite(t)).equivalent,
                     "C6 vs C3+C3 should separate at t=" + std::to_string(t), detail);
    ok &= expect(!hanf_equivalent(c6, c33, Radius::finite(1), Threshold::omega()).equivalent,
                 "C6 vs C3+C3 should separate at omega", detail);
    return ok;
}

// --- 2: full equivalence = isomorphism ----------------------------------------

bool criterion2(std::string& detail) {
    auto four = all_graphs(4);
    auto five = all_graphs(5);
    if (!expect(four.size() == 11, "expected 11 graphs on 4 vertices", detail)) return false;
    if (!expect(five.size() == 34, "expected 34 graphs on 5 vertices", detail)) return false;
    std::vector<Structure> graphs = four;
    graphs.insert(graphs.end(), five.begin(), five.end());
    bool ok = true;
    for (std::size_t i = 0; i < graphs.size() && ok; ++i) {
        for (std::size_t j = i; j < graphs.size() && ok; ++j) {
            bool full = fully_hanf_equivalent(graphs[i], graphs[j], kWorkers).equivalent;
            bool iso = oracle::iso_bruteforce(graphs[i], graphs[j]);
            ok = expect(full == iso,
                        "full-equivalence verdict diverged from the isomorphism oracle at pair (" +
                            std::to_string(i) + "," + std::to_string(j) + ")",
                        detail);
        }
    }
    return ok;
}

// --- 3: canonization against the all-bijections oracle ------------------------

bool criterion3(std::string& detail) {
    if (!expect(all_graphs(6).size() == 156, "expected 156 graphs on 6 vertices", detail)) return false;
    if (!expect(all_graphs(7).size() == 1044, "expected 1044 graphs on 7 vertices", detail)) return false;

    struct Invariants {
        Element n;
        std::size_t edges;
        std::vector<std::size_t> degrees;
        std::size_t point_degree;
    };
    std::map<std::string, std::vector<PointedStructure>> groups;
    for (int n = 1; n <= 7; ++n) {
        for (const Structure& g : all_graphs(n)) {
            for (Element a = 0; a < g.universe_size; ++a) {
                PointedStructure p{g, {a}};
                groups[canonical_bytes(p.structure, p.points)].push_back(std::move(p));
            }
        }
    }
    bool ok = true;
    std::vector<std::pair<Invariants, const PointedStructure*>> heads;
    for (const auto& [key, members] : groups) {
        for (std::size_t i = 1; i < members.size() && ok; ++i)
            ok = expect(oracle::pointed_iso_bruteforce(members[0], members[i]),
                        "equal keys on non-isomorphic pointed structures", detail);
        auto profile = degree_profile(members[0].structure);
        std::vector<std::size_t> degrees = profile.degrees;
        std::sort(degrees.begin(), degrees.end());
        heads.push_back({Invariants{members[0].structure.universe_size,
                                    members[0].structure.tables[0].size(), std::move(degrees),
                                    profile.degrees[static_cast<std::size_t>(members[0].points[0])]},
                         &members[0]});
    }
    // Different keys must mean non-isomorphic. Pairs differing in an exact
    // invariant need no bijection search.
    for (std::size_t i = 0; i < heads.size() && ok; ++i) {
        for (std::size_t j = i + 1; j < heads.size() && ok; ++j) {
            const auto& a = heads[i];
            const auto& b = heads[j];
            if (a.first.n != b.first.n || a.first.edges != b.first.edges ||
                a.first.degrees != b.first.degrees || a.first.point_degree != b.first.point_degree)
                continue;
            ok = expect(!oracle::pointed_iso_bruteforce(*a.second, *b.second),
                        "distinct keys on isomorphic pointed structures", detail);
        }
    }
    if (ok) detail = std::to_string(groups.size()) + " pointed classes";
    return ok;
}

// --- 4: localization semantics ------------------------------------------------

bool criterion4(std::string& detail) {
    auto battery = battery_pointed_formulas();
    if (!expect(battery.size() == 10, "battery must have ten formulas", detail)) return false;
    bool ok = true;
    for (int n = 1; n <= 6 && ok; ++n) {
        for (const Structure& g : all_graphs(n)) {
            auto gg = gaifman(g);
            for (int r = 1; r <= 2 && ok; ++r) {
                std::vector<LocalizeResult> localized;
                for (const Formula& f : battery) localized.push_back(localize(f, r, {"x"}));
                for (Element a = 0; a < g.universe_size && ok; ++a) {
                    auto kept = ball(gg, a, Radius::finite(r));
                    auto induced = restrict_to(g, kept);
                    Element image = -1;
                    for (std::size_t i = 0; i < induced.kept.size(); ++i)
                        if (induced.kept[i] == a) image = static_cast<Element>(i);
                    for (std::size_t f = 0; f < battery.size() && ok; ++f) {
                        bool via_localized = eval(g, localized[f].formula, {{"x", a}});
                        bool via_restriction = eval(induced.structure, battery[f], {{"x", image}});
                        ok = expect(via_localized == via_restriction,
                                    "localized evaluation diverged (n=" + std::to_string(n) +
                                        ", r=" + std::to_string(r) + ", formula " + std::to_string(f) + ")",
                                    detail);
                    }
                }
            }
            if (!ok) break;
        }
    }
    return ok;
}

// --- 5: presentation counts and neighborhood bounds ---------------------------

bool criterion5(std::string& detail) {
    bool ok = expect(scheme_by_name("linear")->enumerate(make_path(4))->size() == 24,
                     "linear presentations of a 4-element structure must count 24", detail);
    ok &= expect(scheme_by_name("local-order")->enumerate(make_path(3))->size() == 2,
                 "local orders of P3 must count 2", detail);
    ok &= expect(scheme_by_name("traversal")->enumerate(make_path(3))->size() == 4,
                 "traversals of P3 must count 4", detail);

    auto corpus = all_graphs_up_to(5);
    auto nb = check_neighborhood_bound(*scheme_by_name("local-order"), corpus, 2, kWorkers);
    ok &= expect(nb.pass, "local orders must be neighborhood bounded with factor 2 on graphs <= 5", detail);

    std::vector<Structure> path{make_path(4)};
    auto linear_fail = check_neighborhood_bound(*scheme_by_name("linear"), path, 2, kWorkers);
    ok &= expect(!linear_fail.pass && linear_fail.witness.has_value(),
                 "linear orders must produce a concrete neighborhood-bound failure", detail);
    if (linear_fail.witness) {
        auto dist = oracle::bfs_distances(linear_fail.witness->base, linear_fail.witness->element);
        ok &= expect(dist[static_cast<std::size_t>(linear_fail.witness->neighbor)] > 2,
                     "the linear witness must relate vertices at base distance over 2", detail);
    }
    return ok;
}

// --- 6: the locality-property matrix ------------------------------------------

bool criterion6(std::string& detail) {
    auto corpus = all_graphs_up_to(5);
    struct Row {
        const char* scheme;
        bool localization;
        bool amalgamation;
    };
    const Row expected[] = {
        {"linear", true, true},
        {"local-order", true, true},
        {"traversal", false, false},
        {"component-coloring", true, false},
        {"circular-successor", false, true},
    };
    bool ok = true;
    std::ostringstream cells;
    for (const Row& row : expected) {
        auto scheme = scheme_by_name(row.scheme);
        auto loc = check_localization(*scheme, corpus, kWorkers);
        ok &= expect(loc.pass == row.localization,
                     std::string(row.scheme) + ": localization verdict should be " +
                         (row.localization ? "pass" : "fail"),
                     detail);
        if (!row.localization) {
            ok &= expect(loc.witness.has_value(), std::string(row.scheme) + ": missing localization witness",
                         detail);
            if (loc.witness) {
                // Re-validate the witness end to end.
                const auto& w = *loc.witness;
                auto restricted = restrict_to(w.base, w.subset);
                std::vector<Element> old_to_new(static_cast<std::size_t>(w.base.universe_size), -1);
                for (std::size_t i = 0; i < restricted.kept.size(); ++i)
                    old_to_new[static_cast<std::size_t>(restricted.kept[i])] = static_cast<Element>(i);
                Table filtered;
                for (const auto& t : w.expansion.tables.back()) {
                    Tuple image;
                    bool inside = true;
                    for (Element e : t) {
                        if (old_to_new[static_cast<std::size_t>(e)] < 0) {
                            inside = false;
                            break;
                        }
                        image.push_back(old_to_new[static_cast<std::size_t>(e)]);
                    }
                    if (inside) filtered.push_back(image);
                }
                std::sort(filtered.begin(), filtered.end());
                ok &= expect(!scheme->valid_table(restricted.structure, gaifman(restricted.structure), filtered),
                             std::string(row.scheme) + ": localization witness does not re-validate", detail);
            }
        }
        auto ama = check_disjoint_amalgamation(*scheme, corpus);
        ok &= expect(ama.pass == row.amalgamation,
                     std::string(row.scheme) + ": amalgamation verdict should be " +
                         (row.amalgamation ? "pass" : "fail"),
                     detail);
        if (!row.amalgamation) {
            ok &= expect(ama.witness.has_value(), std::string(row.scheme) + ": missing amalgamation witness",
                         detail);
            if (ama.witness) {
                const auto& w = *ama.witness;
                ok &= expect(scheme->validate_presentation(w.b_presentation) &&
                                 scheme->validate_presentation(w.c_presentation),
                             std::string(row.scheme) + ": amalgamation witness parts must validate", detail);
            }
        }
        cells << row.scheme << "=(" << (loc.pass ? "Y" : "N") << "," << (ama.pass ? "Y" : "N") << ") ";
    }
    if (ok) detail = cells.str();
    return ok;
}

// --- 7: invariance suite --------------------------------------------------------

bool criterion7(std::string& detail) {
    auto traversal = scheme_by_name("traversal");
    Formula conn = parse_formula("forall x. ((forall y. (x=y | L(x,y))) | exists y. (L(y,x) & E(y,x)))",
                                 traversal->expanded(graph_signature()));
    auto corpus = all_graphs_up_to(5);
    bool ok = expect(is_invariant(conn, *traversal, corpus, kDefaultEnumerationBudget, kWorkers).invariant,
                     "connectivity must be traversal-invariant on graphs <= 5", detail);
    InvariantQuery query{traversal, conn, std::nullopt};
    for (const Structure& g : corpus) {
        if (!ok) break;
        ok = expect(eval_invariant(query, g) == oracle::connected(g),
                    "invariant evaluation diverged from the union-find oracle", detail);
    }

    auto linear = scheme_by_name("linear");
    Formula mm = parse_formula("exists x. exists y. ((forall z. (x=z | L(x,z))) & (forall z. (z=y | L(z,y))) & "
                               "E(x,y))",
                               linear->expanded(graph_signature()));
    std::vector<Structure> p3{make_path(3)};
    auto verdict = is_invariant(mm, *linear, p3);
    ok &= expect(!verdict.invariant && verdict.counterexample.has_value(),
                 "min-adjacent-max must yield a linear-invariance counterexample on P3", detail);
    if (verdict.counterexample) {
        ok &= expect(eval(verdict.counterexample->first_expansion, mm) !=
                         eval(verdict.counterexample->second_expansion, mm),
                     "the counterexample pair must disagree on the sentence", detail);
    }
    return ok;
}

// --- 8: the empirical locality echo ---------------------------------------------

bool criterion8(std::string& detail) {
    auto battery = battery_sentences();
    if (!expect(battery.size() == 10, "battery must have ten sentences", detail)) return false;
    Corpus corpus;
    corpus.spec = CorpusSpec::parse("all:6");
    corpus.structures = all_graphs_up_to(6);
    bool ok = true;
    for (std::size_t i = 0; i < battery.size() && ok; ++i) {
        ok = expect(battery[i].rank() <= 3, "battery sentences must have rank <= 3", detail);
        if (!ok) break;
        auto r = hanf_radius_default(static_cast<std::uint64_t>(battery[i].rank()));
        auto report = locality_search(battery[i], corpus, Radius::finite(static_cast<std::int64_t>(r)),
                                      Threshold::omega(), kDefaultEnumerationBudget, kWorkers);
        ok = expect(report.violations.empty(),
                    "sentence " + std::to_string(i) + " produced violations at the default radius", detail);
    }
    return ok;
}

// --- 9: scatter and wideness ------------------------------------------------------

bool criterion9(std::string& detail) {
    Structure c10 = make_cycle(10);
    std::vector<Element> all;
    for (Element e = 0; e < 10; ++e) all.push_back(e);
    auto greedy = greedy_scatter(c10, all, Radius::finite(1), {});
    bool ok = expect(greedy.size() == 3, "greedy scatter on C10 must have size 3", detail);
    ok &= expect(max_scattered_subset(c10, all, Radius::finite(1), {}).size() == 3,
                 "the exhaustive maximum on C10 must be 3", detail);
    ok &= expect(oracle::max_scatter_bruteforce(c10, all, 1, {}) == 3,
                 "the subset-enumeration oracle must agree", detail);

    Corpus corpus;
    for (int n = 3; n <= 12; ++n) corpus.structures.push_back(make_cycle(n));
    for (int n = 1; n <= 12; ++n) corpus.structures.push_back(make_path(n));
    auto table = wideness_estimate(corpus, Radius::finite(1), 1, 0, 4);
    // Regression lock from the first verified run: the small cycles pin
    // zeta(m) = 3m (C5 has no scattered pair, C8 no triple, C11 no quadruple).
    const std::vector<std::pair<int, std::uint64_t>> locked{{1, 1}, {2, 6}, {3, 9}, {4, 12}};
    ok &= expect(table.zeta == locked, "the wideness table moved off its locked values", detail);
    std::uint64_t previous = 0;
    for (auto [m, zeta] : table.zeta) {
        ok &= expect(zeta >= previous, "the wideness table must be monotone", detail);
        previous = zeta;
    }
    return ok;
}

// --- 10: byte-identical json output ------------------------------------------------

struct CliRun {
    int exit_code = -1;
    std::string output;
};

CliRun run_cli(const std::string& cli, const std::string& args) {
    CliRun result;
    std::string command = cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return result;
    char buffer[4096];
    std::size_t got;
    while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

bool criterion10(std::string& detail) {
    const char* cli = std::getenv("HANFLAB_CLI");
    if (!expect(cli != nullptr, "HANFLAB_CLI must point at the built binary", detail)) return false;

    auto dir = std::filesystem::temp_directory_path() / "hanflab_acceptance";
    std::filesystem::create_directories(dir);
    std::string c44 = (dir / "c44.json").string();
    save_structure_file(disjoint_union(make_cycle(4), make_cycle(4)), c44);
    std::string c7 = (dir / "c7.json").string();
    save_structure_file(make_cycle(7), c7);

    std::vector<std::string> invocations = {
        "structure census " + c44 + " --r 2 --json",
        "structure census " + c44 + " --r infinity --json",
        "hanf compare " + c7 + " " + c44 + " --r 1 --t 7 --json",
        "fo eval " + c7 + " --formula \"forall x. exists y. E(x,y)\" --json",
        "lab locality --corpus all:4 --formula \"exists x. exists y. E(x,y)\" --r 1 --t 1 --json",
        "lab gen --spec random:d=3,n=8,count=4,seed=99 --json",
        "present check --what localization --scheme traversal --corpus all:4 --json",
    };
    bool ok = true;
    for (const auto& args : invocations) {
        if (!ok) break;
        auto first = run_cli(cli, args);
        auto second = run_cli(cli, args);
        auto w1 = run_cli(cli, args + " --workers 1");
        auto w4 = run_cli(cli, args + " --workers 4");
        ok = expect(!first.output.empty() && first.output.back() == '\n',
                    "json output must be newline-terminated: " + args, detail);
        ok &= expect(first.output == second.output, "reruns must be byte-identical: " + args, detail);
        ok &= expect(w1.output == w4.output, "worker counts must not change bytes: " + args, detail);
        ok &= expect(first.output == w1.output, "default and explicit workers must agree: " + args, detail);
        ok &= expect(first.exit_code == second.exit_code && w1.exit_code == w4.exit_code &&
                         first.exit_code == w1.exit_code,
                     "exit codes must be stable: " + args, detail);
    }
    std::filesystem::remove_all(dir);
    return ok;
}

} // namespace

int main() {
    run_criterion({1, "census/Hanf thresholds", 1}, criterion1);
    run_criterion({2, "full equivalence = isomorphism", 60}, criterion2);
    run_criterion({3, "canonization vs all bijections", 300}, criterion3);
    run_criterion({4, "localization semantics", 300}, criterion4);
    run_criterion({5, "presentation counts and bounds", 120}, criterion5);
    run_criterion({6, "locality-property matrix", 600}, criterion6);
    run_criterion({7, "invariance suite", 300}, criterion7);
    run_criterion({8, "empirical locality echo", 600}, criterion8);
    run_criterion({9, "scatter and wideness", 120}, criterion9);
    run_criterion({10, "deterministic json output", 300}, criterion10);

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", failures);
    return 1;
}
