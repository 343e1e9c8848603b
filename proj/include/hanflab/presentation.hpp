#pragma once

#include "hanflab/formula.hpp"
#include "hanflab/structure.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hanflab {

/// An expansion of a base structure by one presentation relation.
struct Presentation {
    Structure base;
    Structure expansion;

    const Table& presentation_table() const { return expansion.tables.back(); }
};

/// Deterministic, restartable enumeration of all presentations of one
/// structure, ordered lexicographically by the serialized presentation
/// table. `at` returns a reference into an internal buffer that stays valid
/// until the next call; callers keep copies of what they need.
class PresentationStream {
public:
    virtual ~PresentationStream() = default;
    virtual std::uint64_t size() = 0;
    virtual const Presentation& at(std::uint64_t index) = 0;
};

class PresentationScheme {
public:
    virtual ~PresentationScheme() = default;

    const std::string& name() const { return name_; }
    const RelationDecl& symbol() const { return symbol_; }
    std::optional<int> declared_nu() const { return nu_; }

    virtual bool in_class(const Structure& a) const = 0;

    /// Core predicate: is `table` a valid presentation relation for `base`?
    /// `table` must be sorted (the Structure invariant) and in range; the
    /// adjacency `g` is the base's Gaifman graph.
    virtual bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const = 0;

    /// Same predicate over a flattened fixed-arity tuple buffer; the hot
    /// path for the corpus checkers. The default materializes a table.
    virtual bool valid_flat(const Structure& base, const GaifmanGraph& g, std::span<const Element> flat) const;

    /// The defining first-order sentence over the expanded signature.
    virtual Formula validity_sentence(const Signature& base_signature) const = 0;

    virtual std::unique_ptr<PresentationStream> enumerate(const Structure& a) const = 0;

    /// Optional constructive amalgamation: a presentation table for `a`
    /// whose restrictions to the two disjoint element sets reproduce the
    /// given local tables (which use local indices of the restricted
    /// structures). Callers verify the result; absent means "search".
    virtual std::optional<Table> amalgamate_table(const Structure& a, const GaifmanGraph& g,
                                                  std::span<const Element> b_set, const Table& b_table,
                                                  std::span<const Element> c_set, const Table& c_table) const;

    Signature expanded(const Signature& base) const { return expanded_signature(base, symbol_); }

    Presentation make_presentation(const Structure& base, Table table) const;

    /// Reduct check plus the scheme predicate; throws on malformed input
    /// (wrong signature, reduct mismatch, base outside the class).
    bool validate_presentation(const Presentation& p) const;

protected:
    PresentationScheme(std::string name, RelationDecl symbol, std::optional<int> nu)
        : name_(std::move(name)), symbol_(std::move(symbol)), nu_(nu) {}

    std::string name_;
    RelationDecl symbol_;
    std::optional<int> nu_;
};

/// Registry: "linear", "traversal", "local-order", "circular-successor",
/// "component-coloring", and "gaifman-lift:<name>".
std::shared_ptr<const PresentationScheme> scheme_by_name(const std::string& name);
std::vector<std::string> core_scheme_names();

/// Exactly one binary relation, no constants, symmetric irreflexive table.
bool is_simple_graph(const Structure& a);

/// The Gaifman graph of a structure as a simple-graph structure over {E:2}.
Structure gaifman_as_graph(const Structure& a);

// --- empirical tameness checkers ---------------------------------------
//
// All checkers are corpus-bounded verifiers: a pass is a statement about the
// corpus that was scanned (recorded in corpus_note), not a proof over the
// scheme's whole class.

struct ElementaryDisagreement {
    Structure expansion;
    bool checker_value = false;
    bool sentence_value = false;
};

struct ElementaryReport {
    bool agree = true;
    std::optional<ElementaryDisagreement> witness;
    std::uint64_t expansions_checked = 0;
    bool exhaustive = true; // whole expansion space covered for every structure
    std::string corpus_note;
};

ElementaryReport check_elementary(const PresentationScheme& s, std::span<const Structure> corpus,
                                  std::uint64_t exhaustive_cap = (1ull << 20),
                                  std::uint64_t samples_per_structure = 512,
                                  std::uint64_t seed = 0x48414e46ull);

struct NeighborhoodBoundWitness {
    Structure base;
    Structure expansion;
    Element element = 0;
    Element neighbor = 0;
    int distance = -1; // base distance; -1 means disconnected
};

struct NeighborhoodBoundReport {
    bool pass = true;
    std::optional<NeighborhoodBoundWitness> witness;
    std::uint64_t presentations_checked = 0;
    std::string corpus_note;
};

NeighborhoodBoundReport check_neighborhood_bound(const PresentationScheme& s, std::span<const Structure> corpus,
                                                 int nu, int workers = 1);

struct DegreeBoundWitness {
    Structure base;
    Structure expansion;
    Element element = 0;
    std::uint64_t degree = 0;
    std::uint64_t bound = 0;
};

struct DegreeBoundReport {
    bool pass = true;
    std::optional<DegreeBoundWitness> witness;
    std::uint64_t presentations_checked = 0;
    std::string corpus_note;
};

DegreeBoundReport check_degree_bound(const PresentationScheme& s, std::span<const Structure> corpus,
                                     const std::function<std::uint64_t(std::uint64_t)>& bound_for_degree,
                                     int workers = 1);
/// Default bound d -> d^nu from the scheme's declared expansion factor.
DegreeBoundReport check_degree_bound(const PresentationScheme& s, std::span<const Structure> corpus,
                                     int workers = 1);

struct LocalizationWitness {
    Structure base;
    Structure expansion;
    std::vector<Element> subset;
};

struct LocalizationReport {
    bool pass = true;
    std::optional<LocalizationWitness> witness;
    std::uint64_t cases_checked = 0;
    std::string corpus_note;
};

/// Restriction of every enumerated presentation to every subset must again
/// validate (exhaustive over subsets; corpus structures stay small).
LocalizationReport check_localization(const PresentationScheme& s, std::span<const Structure> corpus,
                                      int workers = 1);

struct AmalgamationWitness {
    Structure base;
    std::vector<Element> b_set, c_set;
    Presentation b_presentation, c_presentation;
};

struct AmalgamationReport {
    bool pass = true;
    std::optional<AmalgamationWitness> witness;
    std::uint64_t cases_checked = 0;
    std::string corpus_note;
};

/// For all disjoint subset pairs and all presentations of the two induced
/// substructures, some presentation of the whole structure must restrict to
/// both. Constructive amalgamators are tried first and their output is
/// verified; otherwise the enumeration is searched within `search_budget`.
AmalgamationReport check_disjoint_amalgamation(const PresentationScheme& s, std::span<const Structure> corpus,
                                               std::uint64_t search_budget = UINT64_MAX);

} // namespace hanflab
