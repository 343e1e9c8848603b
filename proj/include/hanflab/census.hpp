#pragma once

#include "hanflab/structure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hanflab {

/// A multiplicity threshold: a finite count or the omega token.
class Threshold {
public:
    static Threshold finite(std::uint64_t t) { return Threshold(false, t); }
    static Threshold omega() { return Threshold(true, 0); }

    bool is_omega() const { return omega_; }
    std::uint64_t value() const;

    std::string to_string() const;
    friend bool operator==(const Threshold& a, const Threshold& b) = default;

private:
    Threshold(bool o, std::uint64_t v) : omega_(o), value_(v) {}
    bool omega_;
    std::uint64_t value_;
};

/// Equal cardinalities, or both at least t. Over finite counts the omega
/// threshold reduces to plain equality.
bool equipollent(std::uint64_t x, std::uint64_t y, const Threshold& t);

/// Canonical identifier of a pointed structure up to point- and
/// constant-preserving isomorphism. Keys are raw byte strings; equal keys
/// hold exactly for isomorphic pointed structures.
struct NeighborhoodType {
    std::string key;
    Element size = 0;
    Radius radius = Radius::infinite();

    friend bool operator==(const NeighborhoodType& a, const NeighborhoodType& b) { return a.key == b.key; }
    friend bool operator<(const NeighborhoodType& a, const NeighborhoodType& b) { return a.key < b.key; }
};

std::string to_hex(const std::string& bytes);

/// Canonical byte form of a pointed structure: lexicographically least
/// serialization over the individualization-refinement search. Point-free
/// structures are handled by passing an empty point tuple.
std::string canonical_bytes(const Structure& s, std::span<const Element> points);

NeighborhoodType canonical_key(const PointedStructure& p);
NeighborhoodType canonical_key(const PointedStructure& p, const Radius& radius_used);

struct IsoWitness {
    bool isomorphic = false;
    std::vector<Element> mapping; // element of P -> element of Q when isomorphic
};

/// Point-, relation-, and constant-preserving isomorphism via backtracking
/// with color-refinement pruning; a found witness is re-verified by a direct
/// tuple check before being returned.
IsoWitness isomorphic(const PointedStructure& p, const PointedStructure& q);

struct CensusEntry {
    NeighborhoodType type;
    std::uint64_t count = 0;
};

/// Multiset of pointed r-neighborhood types; entries sorted by key bytes.
struct CensusReport {
    Radius radius = Radius::finite(0);
    std::vector<CensusEntry> entries;
    std::uint64_t total = 0;

    std::uint64_t count_for(const std::string& key) const;
};

CensusReport census(const Structure& s, const Radius& r, int workers = 1);

struct HanfWitness {
    NeighborhoodType type;
    std::uint64_t count_a = 0;
    std::uint64_t count_b = 0;
};

struct HanfVerdict {
    bool equivalent = false;
    Radius radius = Radius::finite(0);
    Threshold threshold = Threshold::omega();
    std::vector<HanfWitness> witnesses; // empty exactly when equivalent
};

/// Hanf threshold (r,t)-equivalence: each realized neighborhood type is
/// counted equipollently up to t in both structures. Types absent from one
/// side count as zero; only realized types can violate equipollence.
HanfVerdict hanf_equivalent(const Structure& a, const Structure& b, const Radius& r, const Threshold& t,
                            int workers = 1);

struct FullHanfVerdict {
    bool equivalent = false;
    std::optional<std::int64_t> failing_radius;
    std::optional<HanfVerdict> detail;
};

/// Hanf equivalence at every radius; over finite structures the censuses
/// stabilize once r reaches the universe size, so radii 0..max(|A|,|B|)
/// decide the full relation.
FullHanfVerdict fully_hanf_equivalent(const Structure& a, const Structure& b, int workers = 1);

} // namespace hanflab
