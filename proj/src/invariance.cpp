#include "hanflab/invariance.hpp"

#include "hanflab/error.hpp"
#include "hanflab/parallel.hpp"

#include <json.hpp>

#include <algorithm>

namespace hanflab {

bool class_filter_accepts(const std::string& name, const Structure& s) {
    if (name == "all") return true;
    if (name == "graphs") return is_simple_graph(s);
    if (name == "connected") return components(s).size() <= 1;
    const std::string prefix = "max-degree:";
    if (name.rfind(prefix, 0) == 0) {
        int d = std::stoi(name.substr(prefix.size()));
        return degree_profile(s).max_degree <= static_cast<std::size_t>(d);
    }
    throw usage_error("unknown class filter '" + name + "'");
}

InvariantQuery parse_query_bundle(const std::string& json_text, const Signature& base_signature) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("cannot parse query bundle: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scheme") || !j["scheme"].is_string() || !j.contains("sentence") ||
        !j["sentence"].is_string())
        throw input_error("a query bundle needs string fields 'scheme' and 'sentence'");
    InvariantQuery q;
    q.scheme = scheme_by_name(j["scheme"].get<std::string>());
    q.sentence = parse_formula(j["sentence"].get<std::string>(), q.scheme->expanded(base_signature));
    if (j.contains("class")) {
        if (!j["class"].is_string()) throw input_error("the 'class' field must be a filter name");
        q.class_filter = j["class"].get<std::string>();
    }
    return q;
}

namespace {

struct AgreementScan {
    bool first_value = false;
    std::optional<std::uint64_t> first_disagreement;
    std::uint64_t examined = 0;
};

/// Evaluates the sentence along the enumeration; reports the least index
/// whose value differs from presentation 0's.
AgreementScan scan_presentations(const Formula& sentence, const PresentationScheme& scheme, const Structure& a,
                                 std::uint64_t budget, int workers) {
    auto probe = scheme.enumerate(a);
    const std::uint64_t total = probe->size();
    if (total > budget)
        throw budget_exceeded("structure has " + std::to_string(total) + " presentations, budget is " +
                              std::to_string(budget));
    AgreementScan scan;
    scan.examined = total;
    if (total == 0) throw Error("internal", "presentation scheme produced no presentations");
    scan.first_value = eval(probe->at(0).expansion, sentence);

    auto chunks = run_chunked<std::optional<std::uint64_t>>(
        total, workers, [&](std::uint64_t begin, std::uint64_t end) -> std::optional<std::uint64_t> {
            auto stream = scheme.enumerate(a);
            for (std::uint64_t i = begin; i < end; ++i) {
                if (eval(stream->at(i).expansion, sentence) != scan.first_value) return i;
            }
            return std::nullopt;
        });
    for (const auto& c : chunks) {
        if (c && (!scan.first_disagreement || *c < *scan.first_disagreement)) scan.first_disagreement = *c;
    }
    return scan;
}

} // namespace

InvarianceVerdict is_invariant(const Formula& sentence, const PresentationScheme& scheme,
                               std::span<const Structure> corpus, std::uint64_t budget, int workers) {
    InvarianceVerdict verdict;
    for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
        const Structure& a = corpus[ci];
        if (sentence.signature != scheme.expanded(a.signature))
            throw signature_mismatch("sentence signature does not match the expanded corpus signature");
        auto scan = scan_presentations(sentence, scheme, a, budget, workers);
        verdict.presentations_examined += scan.examined;
        if (scan.first_disagreement) {
            verdict.invariant = false;
            verdict.corpus_index = ci;
            auto stream = scheme.enumerate(a);
            InvarianceCounterexample ce;
            ce.base = a;
            ce.first_expansion = stream->at(0).expansion;
            ce.second_expansion = stream->at(*scan.first_disagreement).expansion;
            verdict.counterexample = std::move(ce);
            return verdict;
        }
    }
    return verdict;
}

bool eval_invariant(const InvariantQuery& q, const Structure& input, std::uint64_t budget, bool certify) {
    if (q.class_filter && !class_filter_accepts(*q.class_filter, input))
        throw out_of_class("input rejected by class filter '" + *q.class_filter + "'");
    if (!q.scheme->in_class(input))
        throw out_of_class("input outside the class of scheme '" + q.scheme->name() + "'");
    if (q.sentence.signature != q.scheme->expanded(input.signature))
        throw signature_mismatch("sentence signature does not match the expanded input signature");
    if (!certify) {
        auto stream = q.scheme->enumerate(input);
        return eval(stream->at(0).expansion, q.sentence);
    }
    auto scan = scan_presentations(q.sentence, *q.scheme, input, budget, 1);
    if (scan.first_disagreement)
        throw not_invariant("the sentence is not presentation-invariant at this input (presentations 0 and " +
                            std::to_string(*scan.first_disagreement) + " disagree)");
    return scan.first_value;
}

bool queries_agree(const InvariantQuery& q, const Structure& a, const Structure& b, std::uint64_t budget) {
    return eval_invariant(q, a, budget) == eval_invariant(q, b, budget);
}

} // namespace hanflab
