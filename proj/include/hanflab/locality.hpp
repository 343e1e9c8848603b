#pragma once

#include "hanflab/census.hpp"
#include "hanflab/formula.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hanflab {

/// Gaifman adjacency as a formula: the two terms co-occur in some tuple of
/// some relation (at distinct coordinates). `skip_relation` leaves one symbol
/// out, which presentation machinery uses to talk about base adjacency only.
Formula adjacency_formula(const Signature& sig, const std::string& u, const std::string& v,
                          const std::string& skip_relation = "");

/// The distance formula: free variables x and y, true exactly when the
/// Gaifman distance is at most r. Built as a chain of r+1 bound steps, each
/// "adjacent or equal", so its quantifier rank over graph signatures is r+1.
/// Internal variables carry the reserved `_v` prefix.
Formula distance_formula(const Signature& sig, std::int64_t r, const std::string& x = "x",
                         const std::string& y = "y");

struct LocalizeResult {
    Formula formula;
    std::vector<std::pair<std::string, std::string>> renamed; // bound variables renamed to avoid capture
};

/// Relativizes every quantifier of `f` to the union of the r-balls around
/// the center variables: exists y B becomes exists y (guard & B), forall y B
/// becomes forall y (guard -> B). Bound variables that collide with a center
/// are renamed with the `_v` prefix and reported.
LocalizeResult localize(const Formula& f, std::int64_t r, const std::vector<std::string>& centers);

/// Fast evaluation path for localized queries: restricts the structure to
/// the union of r-balls around the assigned centers and evaluates the plain
/// formula there. Extensionally equal to evaluating localize()'s output.
bool eval_in_neighborhood(const Structure& s, const Formula& f, std::int64_t r,
                          const std::vector<std::string>& centers, const Assignment& assignment);

/// Canonical type of the pointed induced structure on the union of r-balls
/// around the tuple; equal keys hold exactly for isomorphic pointed
/// neighborhoods.
NeighborhoodType local_type(const Structure& s, const std::vector<Element>& tuple, const Radius& r);

} // namespace hanflab
