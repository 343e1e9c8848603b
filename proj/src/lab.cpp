#include "hanflab/lab.hpp"

#include "hanflab/ef.hpp"
#include "hanflab/error.hpp"
#include "hanflab/parallel.hpp"
#include "hanflab/structure_io.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace hanflab {

namespace {

Structure graph_from_edges(int n, const std::vector<std::pair<Element, Element>>& edges) {
    Structure g;
    g.signature = graph_signature();
    g.universe_size = n;
    g.tables.resize(1);
    for (auto [a, b] : edges) {
        g.tables[0].push_back({a, b});
        g.tables[0].push_back({b, a});
    }
    g.normalize();
    return g;
}

} // namespace

Structure make_edgeless(int n) { return graph_from_edges(n, {}); }

Structure make_path(int n) {
    if (n < 1) throw input_error("a path needs at least one vertex");
    std::vector<std::pair<Element, Element>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return graph_from_edges(n, edges);
}

Structure make_cycle(int n) {
    if (n < 3) throw input_error("a cycle needs at least three vertices");
    std::vector<std::pair<Element, Element>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return graph_from_edges(n, edges);
}

Structure make_complete(int n) {
    std::vector<std::pair<Element, Element>> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    return graph_from_edges(n, edges);
}

Structure make_star(int leaves) {
    std::vector<std::pair<Element, Element>> edges;
    for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return graph_from_edges(leaves + 1, edges);
}

// --- corpora ----------------------------------------------------------------

CorpusSpec CorpusSpec::parse(const std::string& text) {
    CorpusSpec spec;
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "all") {
        spec.kind = Kind::AllGraphsUpTo;
        try {
            spec.max_n = std::stoi(rest);
        } catch (...) {
            throw usage_error("corpus spec 'all:<n>' needs an integer, got '" + rest + "'");
        }
        return spec;
    }
    if (head == "random") {
        spec.kind = Kind::RandomBoundedDegree;
        bool have_d = false, have_n = false, have_count = false, have_seed = false;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) throw usage_error("random corpus items look like key=value");
            std::string key = item.substr(0, eq), value = item.substr(eq + 1);
            try {
                if (key == "d") { spec.degree = std::stoi(value); have_d = true; }
                else if (key == "n") { spec.n = std::stoi(value); have_n = true; }
                else if (key == "count") { spec.count = std::stoi(value); have_count = true; }
                else if (key == "seed") { spec.seed = std::stoull(value); have_seed = true; }
                else throw usage_error("unknown random corpus key '" + key + "'");
            } catch (const Error&) {
                throw;
            } catch (...) {
                throw usage_error("bad value for random corpus key '" + key + "'");
            }
        }
        if (!have_d || !have_n || !have_count || !have_seed)
            throw usage_error("random corpus needs d=, n=, count=, seed=");
        return spec;
    }
    if (head == "files") {
        spec.kind = Kind::Files;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) spec.files.push_back(item);
        if (spec.files.empty()) throw usage_error("files corpus needs at least one path");
        return spec;
    }
    throw usage_error("unknown corpus spec '" + text + "' (expected all:, random:, files:)");
}

std::string CorpusSpec::to_string() const {
    switch (kind) {
        case Kind::AllGraphsUpTo: return "all:" + std::to_string(max_n);
        case Kind::RandomBoundedDegree:
            return "random:d=" + std::to_string(degree) + ",n=" + std::to_string(n) +
                   ",count=" + std::to_string(count) + ",seed=" + std::to_string(seed);
        case Kind::Files: {
            std::string out = "files:";
            for (std::size_t i = 0; i < files.size(); ++i) {
                if (i) out += ",";
                out += files[i];
            }
            return out;
        }
    }
    return "";
}

namespace {

std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        std::uint64_t v = rng();
        if (v < limit) return v % bound;
    }
}

/// One augmentation level: every graph on n-1 vertices extended by a new
/// vertex joined to every subset of the old ones, deduplicated by canonical
/// key. Every isomorphism class on n vertices arises this way.
std::vector<Structure> augment_level(const std::vector<Structure>& previous, int n,
                                     const std::function<bool(const Structure&)>& keep) {
    std::map<std::string, Structure> classes;
    for (const Structure& g : previous) {
        const Element fresh = n - 1;
        std::uint32_t subsets = 1u << (n - 1);
        for (std::uint32_t mask = 0; mask < subsets; ++mask) {
            Structure h = g;
            h.universe_size = n;
            for (Element v = 0; v < fresh; ++v) {
                if (mask & (1u << v)) {
                    h.tables[0].push_back({fresh, v});
                    h.tables[0].push_back({v, fresh});
                }
            }
            h.normalize();
            if (keep && !keep(h)) continue;
            std::string key = canonical_bytes(h, {});
            classes.emplace(std::move(key), std::move(h));
        }
    }
    std::vector<Structure> out;
    out.reserve(classes.size());
    for (auto& [key, g] : classes) out.push_back(std::move(g));
    return out;
}

std::vector<Structure> graphs_by_augmentation(int n, const std::function<bool(const Structure&)>& keep) {
    std::vector<Structure> level{make_edgeless(1)};
    if (keep && !keep(level[0])) level.clear();
    for (int k = 2; k <= n; ++k) level = augment_level(level, k, keep);
    return level;
}

} // namespace

std::vector<Structure> all_graphs(int n) {
    if (n < 0) throw input_error("vertex count must be >= 0");
    if (n == 0) return {make_edgeless(0)};
    if (n > 8) throw budget_exceeded("unrestricted graph enumeration is capped at 8 vertices");
    return graphs_by_augmentation(n, nullptr);
}

std::vector<Structure> all_graphs_up_to(int n) {
    std::vector<Structure> out;
    for (int k = 1; k <= n; ++k) {
        auto level = all_graphs(k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

std::vector<Structure> all_graphs_max_degree(int n, int d) {
    if (n < 1) return {};
    if (n > 12) throw budget_exceeded("bounded-degree graph enumeration is capped at 12 vertices");
    auto keep = [d](const Structure& g) { return degree_profile(g).max_degree <= static_cast<std::size_t>(d); };
    return graphs_by_augmentation(n, keep);
}

Corpus generate_corpus(const CorpusSpec& spec) {
    Corpus corpus;
    corpus.spec = spec;
    switch (spec.kind) {
        case CorpusSpec::Kind::AllGraphsUpTo: {
            if (spec.max_n < 1) throw input_error("all-graphs corpus needs n >= 1");
            corpus.structures = all_graphs_up_to(spec.max_n);
            break;
        }
        case CorpusSpec::Kind::RandomBoundedDegree: {
            if (spec.n < 0 || spec.count < 0 || spec.degree < 0)
                throw input_error("random corpus parameters must be >= 0");
            corpus.seed = spec.seed;
            // One mt19937_64 stream drives all draws; candidate edges are
            // shuffled, then each is kept on a fair coin when degrees allow.
            std::mt19937_64 rng(spec.seed);
            for (int i = 0; i < spec.count; ++i) {
                std::vector<std::pair<Element, Element>> candidates;
                for (Element a = 0; a < spec.n; ++a)
                    for (Element b = a + 1; b < spec.n; ++b) candidates.emplace_back(a, b);
                for (std::size_t k = candidates.size(); k > 1; --k)
                    std::swap(candidates[k - 1], candidates[rand_below(rng, k)]);
                std::vector<int> degree(static_cast<std::size_t>(spec.n), 0);
                std::vector<std::pair<Element, Element>> edges;
                for (auto [a, b] : candidates) {
                    if (degree[static_cast<std::size_t>(a)] >= spec.degree ||
                        degree[static_cast<std::size_t>(b)] >= spec.degree)
                        continue;
                    if (rng() & 1ull) {
                        edges.emplace_back(a, b);
                        ++degree[static_cast<std::size_t>(a)];
                        ++degree[static_cast<std::size_t>(b)];
                    }
                }
                corpus.structures.push_back(graph_from_edges(spec.n, edges));
            }
            break;
        }
        case CorpusSpec::Kind::Files: {
            for (const auto& path : spec.files) corpus.structures.push_back(load_structure_file(path));
            break;
        }
    }
    return corpus;
}

// --- locality experiments -----------------------------------------------------

std::uint64_t hanf_radius_default(std::uint64_t q) {
    std::uint64_t power = 1;
    for (std::uint64_t i = 0; i < q; ++i) power *= 3;
    return (power - 1) / 2;
}

bool evaluate_query(const LocalityQuery& query, const Structure& s, std::uint64_t budget) {
    if (const auto* sentence = std::get_if<Formula>(&query)) return eval(s, *sentence);
    return eval_invariant(std::get<InvariantQuery>(query), s, budget);
}

int query_rank(const LocalityQuery& query) {
    if (const auto* sentence = std::get_if<Formula>(&query)) return sentence->rank();
    return std::get<InvariantQuery>(query).sentence.rank();
}

namespace {

HanfVerdict verdict_from_censuses(const CensusReport& ca, const CensusReport& cb, const Radius& r,
                                  const Threshold& t) {
    HanfVerdict verdict;
    verdict.radius = r;
    verdict.threshold = t;
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged;
    std::map<std::string, Element> sizes;
    for (const auto& e : ca.entries) {
        merged[e.type.key].first = e.count;
        sizes[e.type.key] = e.type.size;
    }
    for (const auto& e : cb.entries) {
        merged[e.type.key].second = e.count;
        sizes[e.type.key] = e.type.size;
    }
    for (const auto& [key, counts] : merged) {
        if (!equipollent(counts.first, counts.second, t)) {
            HanfWitness w;
            w.type.key = key;
            w.type.size = sizes[key];
            w.type.radius = r;
            w.count_a = counts.first;
            w.count_b = counts.second;
            verdict.witnesses.push_back(std::move(w));
        }
    }
    verdict.equivalent = verdict.witnesses.empty();
    return verdict;
}

} // namespace

LocalityReport locality_search(const LocalityQuery& query, const Corpus& corpus, const Radius& r,
                               const Threshold& t, std::uint64_t budget, int workers) {
    LocalityReport report;
    report.radius = r;
    report.threshold = t;
    const std::size_t n = corpus.structures.size();

    std::vector<CensusReport> censuses;
    std::vector<char> values;
    censuses.reserve(n);
    values.reserve(n);
    for (const auto& s : corpus.structures) {
        censuses.push_back(census(s, r, workers));
        values.push_back(evaluate_query(query, s, budget) ? 1 : 0);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    report.pairs_examined = pairs.size();

    auto chunks = run_chunked<std::vector<LocalityViolation>>(
        pairs.size(), workers, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<LocalityViolation> found;
            for (std::uint64_t k = begin; k < end; ++k) {
                auto [i, j] = pairs[k];
                if (values[i] == values[j]) continue;
                auto verdict = verdict_from_censuses(censuses[i], censuses[j], r, t);
                if (verdict.equivalent)
                    found.push_back(LocalityViolation{i, j, values[i] != 0, values[j] != 0, std::move(verdict)});
            }
            return found;
        });
    for (auto& c : chunks)
        report.violations.insert(report.violations.end(), std::make_move_iterator(c.begin()),
                                 std::make_move_iterator(c.end()));
    return report;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> minimal_locality_parameters(const LocalityQuery& query,
                                                                                   const Corpus& corpus,
                                                                                   std::uint64_t r_max,
                                                                                   std::uint64_t t_max,
                                                                                   std::uint64_t budget) {
    const std::size_t n = corpus.structures.size();
    std::vector<char> values;
    values.reserve(n);
    for (const auto& s : corpus.structures) values.push_back(evaluate_query(query, s, budget) ? 1 : 0);

    for (std::uint64_t r = 0; r <= r_max; ++r) {
        std::vector<CensusReport> censuses;
        censuses.reserve(n);
        for (const auto& s : corpus.structures) censuses.push_back(census(s, Radius::finite(static_cast<std::int64_t>(r))));

        // A differing pair violates exactly the thresholds t <= cap, where
        // cap is the least min-count over types with unequal counts (and no
        // finite t once all counts are equal). The least workable t at this
        // radius is therefore 1 + max cap over differing pairs.
        std::uint64_t needed = 1;
        bool workable = true;
        for (std::size_t i = 0; i < n && workable; ++i) {
            for (std::size_t j = i + 1; j < n && workable; ++j) {
                if (values[i] == values[j]) continue;
                std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged;
                for (const auto& e : censuses[i].entries) merged[e.type.key].first = e.count;
                for (const auto& e : censuses[j].entries) merged[e.type.key].second = e.count;
                std::uint64_t cap = UINT64_MAX; // equivalent iff t <= cap
                bool all_equal = true;
                for (const auto& [key, counts] : merged) {
                    if (counts.first == counts.second) continue;
                    all_equal = false;
                    cap = std::min(cap, std::min(counts.first, counts.second));
                }
                if (all_equal) {
                    workable = false; // equivalent at every t; no finite t works
                } else if (cap >= needed) {
                    needed = cap + 1;
                }
            }
        }
        if (workable && needed <= t_max) return std::make_pair(r, needed);
    }
    return std::nullopt;
}

EfDemoResult ef_indistinguishability_demo(const std::function<std::pair<Structure, Structure>(int)>& family,
                                          int q, int m_min, int m_max) {
    EfDemoResult out;
    for (int m = m_min; m <= m_max; ++m) {
        auto [a, b] = family(m);
        bool eq = ef_equivalent(a, b, q);
        out.scan.emplace_back(m, eq);
        if (eq && !out.least_m) {
            out.least_m = m;
            break;
        }
    }
    return out;
}

std::pair<Structure, Structure> cycle_pair(int m) {
    return {make_cycle(2 * m), disjoint_union(make_cycle(m), make_cycle(m))};
}

// --- scattered sets -------------------------------------------------------------

namespace {

std::vector<std::vector<Element>> all_balls(const Structure& s, const Radius& r) {
    auto g = gaifman(s);
    std::vector<std::vector<Element>> balls;
    balls.reserve(static_cast<std::size_t>(s.universe_size));
    for (Element e = 0; e < s.universe_size; ++e) balls.push_back(ball(g, e, r));
    return balls;
}

bool balls_disjoint_from(const std::vector<Element>& ball_a, const std::vector<char>& covered) {
    for (Element e : ball_a)
        if (covered[static_cast<std::size_t>(e)]) return false;
    return true;
}

void cover(const std::vector<Element>& ball_a, std::vector<char>& covered) {
    for (Element e : ball_a) covered[static_cast<std::size_t>(e)] = 1;
}

void uncover(const std::vector<Element>& ball_a, std::vector<char>& covered) {
    for (Element e : ball_a) covered[static_cast<std::size_t>(e)] = 0;
}

void check_in_range(const Structure& s, const std::vector<Element>& xs, const char* what) {
    for (Element e : xs)
        if (e < 0 || e >= s.universe_size)
            throw input_error(std::string(what) + " element " + std::to_string(e) + " out of range");
}

} // namespace

bool scattered_check(const Structure& s, const std::vector<Element>& x, const Radius& r,
                     const std::vector<Element>& y) {
    check_in_range(s, x, "scattered-set");
    check_in_range(s, y, "away-set");
    auto balls = all_balls(s, r);
    std::vector<char> covered(static_cast<std::size_t>(s.universe_size), 0);
    for (Element a : y) cover(balls[static_cast<std::size_t>(a)], covered);
    for (Element a : x) {
        if (!balls_disjoint_from(balls[static_cast<std::size_t>(a)], covered)) return false;
        cover(balls[static_cast<std::size_t>(a)], covered);
    }
    return true;
}

std::vector<Element> greedy_scatter(const Structure& s, const std::vector<Element>& candidates, const Radius& r,
                                    const std::vector<Element>& away_from) {
    check_in_range(s, candidates, "candidate");
    check_in_range(s, away_from, "away-set");
    auto balls = all_balls(s, r);
    std::vector<char> covered(static_cast<std::size_t>(s.universe_size), 0);
    for (Element a : away_from) cover(balls[static_cast<std::size_t>(a)], covered);
    std::vector<Element> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<Element> chosen;
    for (Element c : sorted) {
        if (balls_disjoint_from(balls[static_cast<std::size_t>(c)], covered)) {
            chosen.push_back(c);
            cover(balls[static_cast<std::size_t>(c)], covered);
        }
    }
    return chosen;
}

namespace {

void max_scatter_search(const std::vector<Element>& candidates, std::size_t index,
                        const std::vector<std::vector<Element>>& balls, std::vector<char>& covered,
                        std::vector<Element>& current, std::vector<Element>& best) {
    if (current.size() + (candidates.size() - index) <= best.size()) return; // bound
    if (index == candidates.size()) {
        if (current.size() > best.size()) best = current;
        return;
    }
    Element c = candidates[index];
    if (balls_disjoint_from(balls[static_cast<std::size_t>(c)], covered)) {
        cover(balls[static_cast<std::size_t>(c)], covered);
        current.push_back(c);
        max_scatter_search(candidates, index + 1, balls, covered, current, best);
        current.pop_back();
        uncover(balls[static_cast<std::size_t>(c)], covered);
        // Elements covered by an earlier choice must stay covered; undoing
        // only this ball is safe because balls of chosen elements are
        // pairwise disjoint.
    }
    max_scatter_search(candidates, index + 1, balls, covered, current, best);
}

} // namespace

std::vector<Element> max_scattered_subset(const Structure& s, const std::vector<Element>& candidates,
                                          const Radius& r, const std::vector<Element>& away_from) {
    check_in_range(s, candidates, "candidate");
    check_in_range(s, away_from, "away-set");
    auto balls = all_balls(s, r);
    std::vector<char> covered(static_cast<std::size_t>(s.universe_size), 0);
    for (Element a : away_from) cover(balls[static_cast<std::size_t>(a)], covered);
    std::vector<Element> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<Element> current, best;
    max_scatter_search(sorted, 0, balls, covered, current, best);
    return best;
}

WidenessTable wideness_estimate(const Corpus& corpus, const Radius& r, int p, int q, int m_max) {
    if (p < 1) throw usage_error("wideness estimation needs p >= 1");
    if (q < 0 || m_max < 1) throw usage_error("wideness estimation needs q >= 0 and m_max >= 1");
    WidenessTable table;
    table.radius = r;
    table.p = p;
    table.q = q;

    // best[m] = largest candidate-set size that failed to contain p*m
    // scattered elements avoiding some excluded q-set.
    std::vector<std::uint64_t> best(static_cast<std::size_t>(m_max) + 1, 0);

    for (const Structure& s : corpus.structures) {
        if (s.universe_size > 16)
            throw budget_exceeded("wideness estimation scans all subsets; structures are capped at 16 elements");
        const Element n = s.universe_size;
        auto balls = all_balls(s, r);

        std::vector<std::vector<Element>> excluded_sets;
        if (q == 0) {
            excluded_sets.push_back({});
        } else {
            // All q-element subsets (smaller Z are dominated by larger ones).
            std::vector<Element> z;
            std::function<void(Element)> pick = [&](Element from) {
                if (static_cast<int>(z.size()) == q) {
                    excluded_sets.push_back(z);
                    return;
                }
                for (Element e = from; e < n; ++e) {
                    z.push_back(e);
                    pick(e + 1);
                    z.pop_back();
                }
            };
            pick(0);
            if (excluded_sets.empty()) excluded_sets.push_back({});
        }

        for (const auto& z : excluded_sets) {
            std::vector<char> z_covered(static_cast<std::size_t>(n), 0);
            for (Element e : z) cover(balls[static_cast<std::size_t>(e)], z_covered);
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                std::vector<Element> x;
                for (Element e = 0; e < n; ++e)
                    if (mask & (1u << e)) x.push_back(e);
                std::vector<char> covered = z_covered;
                std::vector<Element> current, found;
                max_scatter_search(x, 0, balls, covered, current, found);
                std::uint64_t scattered = found.size();
                // X fails for every m with p*m > scattered.
                for (int m = static_cast<int>(scattered / static_cast<std::uint64_t>(p)) + 1; m <= m_max; ++m)
                    best[static_cast<std::size_t>(m)] = std::max(best[static_cast<std::size_t>(m)],
                                                                 static_cast<std::uint64_t>(x.size()));
            }
        }
    }
    for (int m = 1; m <= m_max; ++m)
        table.zeta.emplace_back(m, best[static_cast<std::size_t>(m)] + 1);
    return table;
}

// --- batteries -------------------------------------------------------------------

namespace {

std::vector<Formula> parse_battery(const std::vector<std::string>& texts) {
    std::vector<Formula> out;
    Signature sig = graph_signature();
    for (const auto& text : texts) out.push_back(parse_formula(text, sig));
    return out;
}

} // namespace

std::vector<Formula> battery_sentences() {
    return parse_battery({
        "exists x. exists y. E(x,y)",
        "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
        "forall x. exists y. E(x,y)",
        "exists x. forall y. !E(x,y)",
        "exists x. exists y. exists z. (!(y=z) & E(x,y) & E(x,z))",
        "forall x. forall y. (E(x,y) -> exists z. (E(x,z) & E(z,y)))",
        "exists x. exists y. (!(x=y) & !E(x,y))",
        "forall x. forall y. (!(x=y) -> E(x,y))",
        "exists x. forall y. (E(x,y) | x=y)",
        "forall x. exists y. exists z. (!(y=z) & E(x,y) & E(x,z))",
    });
}

std::vector<Formula> battery_pointed_formulas() {
    return parse_battery({
        "exists y. E(x,y)",
        "forall y. !E(x,y)",
        "exists y. exists z. (!(y=z) & E(x,y) & E(x,z))",
        "exists y. (E(x,y) & exists z. (E(y,z) & !(z=x)))",
        "forall y. (E(x,y) -> exists z. (E(y,z) & E(x,z)))",
        "exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
        "forall y. (E(x,y) -> forall z. (E(y,z) -> (z=x | E(x,z))))",
        "exists y. (E(x,y) & forall z. (E(y,z) -> z=x))",
        "exists y. (!(x=y) & !E(x,y))",
        "forall y. (!(x=y) -> E(x,y))",
    });
}

} // namespace hanflab
