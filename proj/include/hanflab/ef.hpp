#pragma once

#include "hanflab/structure.hpp"

namespace hanflab {

/// Whether Duplicator wins the q-round Ehrenfeucht-Fraisse game between the
/// two structures (standard back-and-forth search, memoized on positions).
/// Constants are pinned into the starting position. Agreement at rank q means
/// the structures satisfy the same sentences of quantifier rank <= q.
bool ef_equivalent(const Structure& a, const Structure& b, int rounds);

} // namespace hanflab
