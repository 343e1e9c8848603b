#pragma once

#include "hanflab/census.hpp"
#include "hanflab/formula.hpp"
#include "hanflab/invariance.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hanflab {

// --- graph factories ------------------------------------------------------

Structure make_edgeless(int n);
Structure make_path(int n);          // n >= 1
Structure make_cycle(int n);         // n >= 3
Structure make_complete(int n);
Structure make_star(int leaves);     // center 0

// --- corpora ----------------------------------------------------------------

struct CorpusSpec {
    enum class Kind { AllGraphsUpTo, RandomBoundedDegree, Files };

    Kind kind = Kind::AllGraphsUpTo;
    int max_n = 0;                                    // all-graphs mode
    int degree = 0, n = 0, count = 0;                 // random mode
    std::uint64_t seed = 0;                           // random mode (mt19937_64)
    std::vector<std::string> files;                   // files mode

    /// "all:<n>" | "random:d=<d>,n=<n>,count=<c>,seed=<s>" | "files:p1,p2,..."
    static CorpusSpec parse(const std::string& text);
    std::string to_string() const;
};

struct Corpus {
    CorpusSpec spec;
    std::vector<Structure> structures;
    std::optional<std::uint64_t> seed; // present for seeded generators
};

Corpus generate_corpus(const CorpusSpec& spec);

/// All simple graphs on exactly n vertices up to isomorphism, built by
/// vertex augmentation with canonical-key deduplication. Guarded to n <= 8.
std::vector<Structure> all_graphs(int n);
std::vector<Structure> all_graphs_up_to(int n);
/// Same construction restricted to maximum degree <= d (usable further out).
std::vector<Structure> all_graphs_max_degree(int n, int d);

// --- locality experiments -----------------------------------------------------

/// Default locality radius for quantifier rank q: (3^q - 1) / 2. This is a
/// configurable convention from the standard literature, not a derived value.
std::uint64_t hanf_radius_default(std::uint64_t q);

using LocalityQuery = std::variant<Formula, InvariantQuery>;

bool evaluate_query(const LocalityQuery& query, const Structure& s, std::uint64_t budget);
int query_rank(const LocalityQuery& query);

struct LocalityViolation {
    std::size_t index_a = 0, index_b = 0;
    bool value_a = false, value_b = false;
    HanfVerdict equivalence; // equivalent == true by construction
};

struct LocalityReport {
    Radius radius = Radius::finite(0);
    Threshold threshold = Threshold::omega();
    std::uint64_t pairs_examined = 0;
    std::vector<LocalityViolation> violations; // ordered by (index_a, index_b)
};

/// Scans every unordered corpus pair; records pairs that are Hanf
/// (r,t)-equivalent yet disagree on the query. Empty violations mean the
/// query looked local on this corpus.
LocalityReport locality_search(const LocalityQuery& query, const Corpus& corpus, const Radius& r,
                               const Threshold& t, std::uint64_t budget = kDefaultEnumerationBudget,
                               int workers = 1);

/// Least (r, t) in lexicographic order (t in 1..t_max) with no violations.
std::optional<std::pair<std::uint64_t, std::uint64_t>> minimal_locality_parameters(
    const LocalityQuery& query, const Corpus& corpus, std::uint64_t r_max, std::uint64_t t_max,
    std::uint64_t budget = kDefaultEnumerationBudget);

struct EfDemoResult {
    std::optional<int> least_m;
    std::vector<std::pair<int, bool>> scan; // (m, equivalent)
};

/// Scans m over [m_min, m_max] and reports the least m whose pair of
/// structures is EF-equivalent at q rounds.
EfDemoResult ef_indistinguishability_demo(const std::function<std::pair<Structure, Structure>(int)>& family,
                                          int q, int m_min, int m_max);

/// The classic family: (C_2m, C_m + C_m); m >= 3.
std::pair<Structure, Structure> cycle_pair(int m);

// --- scattered sets and wideness ------------------------------------------------

/// r-balls of X pairwise disjoint, and disjoint from every r-ball of Y.
bool scattered_check(const Structure& s, const std::vector<Element>& x, const Radius& r,
                     const std::vector<Element>& y);

/// Greedy maximal-by-inclusion r-scattered subset of the candidates, taken
/// in element order, avoiding the away set's balls.
std::vector<Element> greedy_scatter(const Structure& s, const std::vector<Element>& candidates, const Radius& r,
                                    const std::vector<Element>& away_from);

/// Exact maximum r-scattered subset of the candidates (branch and bound).
std::vector<Element> max_scattered_subset(const Structure& s, const std::vector<Element>& candidates,
                                          const Radius& r, const std::vector<Element>& away_from);

struct WidenessTable {
    Radius radius = Radius::finite(0);
    int p = 1, q = 0;
    std::vector<std::pair<int, std::uint64_t>> zeta; // m -> observed bound
};

/// Empirical width growth: for each m, the least s such that every scanned
/// candidate set of size >= s contained p disjoint m-element groups forming
/// an r-scattered set avoiding every excluded q-set. Exhaustive over
/// subsets; corpus structures are capped at 16 elements.
WidenessTable wideness_estimate(const Corpus& corpus, const Radius& r, int p, int q, int m_max);

// --- shipped formula batteries ---------------------------------------------------

/// Ten graph sentences of quantifier rank <= 3.
std::vector<Formula> battery_sentences();
/// Ten graph formulas with one free variable x.
std::vector<Formula> battery_pointed_formulas();

} // namespace hanflab
