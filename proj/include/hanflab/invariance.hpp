#pragma once

#include "hanflab/formula.hpp"
#include "hanflab/presentation.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace hanflab {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000;

/// A boolean query given by a scheme plus a sentence over the expanded
/// signature: the query holds when some (equivalently, every) presentation
/// of the input satisfies the sentence.
struct InvariantQuery {
    std::shared_ptr<const PresentationScheme> scheme;
    Formula sentence;
    std::optional<std::string> class_filter; // named predicate on inputs
};

/// Named class filters: "all", "graphs", "connected", "max-degree:<d>".
bool class_filter_accepts(const std::string& name, const Structure& s);

/// Query bundle files are JSON objects {"scheme": name, "sentence": formula
/// text, "class": optional filter name}; the sentence is parsed over the
/// base signature expanded by the scheme's symbol.
InvariantQuery parse_query_bundle(const std::string& json_text, const Signature& base_signature);

struct InvarianceCounterexample {
    Structure base;
    Structure first_expansion;  // satisfies the sentence one way
    Structure second_expansion; // ... and this one the other way
};

struct InvarianceVerdict {
    bool invariant = true;
    std::optional<std::size_t> corpus_index;
    std::optional<InvarianceCounterexample> counterexample;
    std::uint64_t presentations_examined = 0;
};

/// Evaluates the sentence on every presentation of every corpus structure;
/// invariant when each structure's presentations agree. The first
/// disagreeing pair (in enumeration order) is returned. Exceeding the
/// enumeration budget is an error, never a silent truncation.
InvarianceVerdict is_invariant(const Formula& sentence, const PresentationScheme& scheme,
                               std::span<const Structure> corpus,
                               std::uint64_t budget = kDefaultEnumerationBudget, int workers = 1);

/// The query value on one input. By default certifies invariance at this
/// input (full enumeration) before answering; `certify = false` skips the
/// certificate and trusts the first presentation.
bool eval_invariant(const InvariantQuery& q, const Structure& input,
                    std::uint64_t budget = kDefaultEnumerationBudget, bool certify = true);

bool queries_agree(const InvariantQuery& q, const Structure& a, const Structure& b,
                   std::uint64_t budget = kDefaultEnumerationBudget);

} // namespace hanflab
