#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hanflab {

/// Elements of a finite structure are dense naturals 0..n-1.
using Element = std::int32_t;
using Tuple = std::vector<Element>;
using Table = std::vector<Tuple>;

/// A hop radius: either a finite count or the whole-component token.
/// The infinite case is a distinct state, never a sentinel integer.
class Radius {
public:
    static Radius finite(std::int64_t r);
    static Radius infinite() { return Radius(true, 0); }

    bool is_infinite() const { return infinite_; }
    std::int64_t value() const; // finite radii only

    std::string to_string() const;
    friend bool operator==(const Radius& a, const Radius& b) = default;

private:
    Radius(bool inf, std::int64_t v) : infinite_(inf), value_(v) {}
    bool infinite_;
    std::int64_t value_;
};

struct RelationDecl {
    std::string name;
    int arity = 0;
    friend bool operator==(const RelationDecl&, const RelationDecl&) = default;
};

struct Signature {
    std::vector<RelationDecl> relations;
    std::vector<std::string> constants;

    std::optional<std::size_t> relation_index(std::string_view name) const;
    std::optional<std::size_t> constant_index(std::string_view name) const;

    /// Violations of the signature invariants (duplicate names, arity < 1).
    std::vector<std::string> problems() const;

    friend bool operator==(const Signature&, const Signature&) = default;
};

/// Signature of finite simple graphs: one binary relation E, no constants.
Signature graph_signature();

/// Extend a signature with one more relation symbol (used by presentations).
Signature expanded_signature(const Signature& base, const RelationDecl& extra);

struct Structure {
    Signature signature;
    Element universe_size = 0;
    std::vector<Table> tables;            // aligned with signature.relations; sorted, duplicate-free
    std::vector<Element> constant_values; // aligned with signature.constants

    /// Sorts and deduplicates all relation tables.
    void normalize();

    /// Complete list of invariant violations; empty means valid.
    std::vector<std::string> problems() const;

    const Table& table(std::size_t relation) const { return tables[relation]; }

    friend bool operator==(const Structure&, const Structure&) = default;
};

/// Normalizes, then either returns the structure or throws an input error
/// carrying every violation.
Structure validated(Structure s);

/// A structure with a tuple of distinguished points (one point for element
/// neighborhoods, several for tuple-local types).
struct PointedStructure {
    Structure structure;
    std::vector<Element> points;

    friend bool operator==(const PointedStructure&, const PointedStructure&) = default;
};

struct GaifmanGraph {
    Element n = 0;
    std::vector<std::vector<Element>> adjacency; // sorted neighbor lists; symmetric, irreflexive

    std::size_t degree(Element a) const { return adjacency[static_cast<std::size_t>(a)].size(); }
    bool adjacent(Element a, Element b) const;
    std::vector<std::pair<Element, Element>> edges() const; // each edge once, (a,b) with a < b
};

GaifmanGraph gaifman(const Structure& s);

/// BFS distances from `source`; -1 marks unreachable elements.
std::vector<int> bfs_distances(const GaifmanGraph& g, Element source);

/// Elements at distance <= r from `a`, sorted ascending.
std::vector<Element> ball(const GaifmanGraph& g, Element a, const Radius& r);
std::vector<Element> ball(const Structure& s, Element a, const Radius& r);

/// Union of the r-balls around each point, sorted ascending.
std::vector<Element> ball_union(const GaifmanGraph& g, std::span<const Element> points, const Radius& r);

struct DegreeProfile {
    std::size_t max_degree = 0;
    std::vector<std::size_t> degrees;
};
DegreeProfile degree_profile(const Structure& s);

/// Gaifman connected components, each sorted, ordered by least element.
std::vector<std::vector<Element>> components(const Structure& s);
std::vector<std::vector<Element>> components(const GaifmanGraph& g);

struct InducedSubstructure {
    Structure structure;
    std::vector<Element> kept;                  // new index -> original element
    std::vector<std::string> dropped_constants; // constants whose value fell outside
};

/// Induced substructure on `kept` (sorted ascending, in range, duplicate-free),
/// re-indexed to 0..k-1. Constants with values outside `kept` are removed from
/// the induced signature and recorded.
InducedSubstructure restrict_to(const Structure& s, std::span<const Element> kept);

struct PointedNeighborhood {
    PointedStructure pointed;
    std::vector<Element> kept;
    std::vector<std::string> dropped_constants;
};

PointedNeighborhood pointed_neighborhood(const Structure& s, Element a, const Radius& r);
PointedNeighborhood pointed_neighborhood(const Structure& s, std::span<const Element> points, const Radius& r);

/// Disjoint union; B's elements are shifted by |A|. Requires equal signatures
/// without constants (a union cannot assign one value to a shared constant).
Structure disjoint_union(const Structure& a, const Structure& b);

} // namespace hanflab
