#include "hanflab/census.hpp"
#include "hanflab/ef.hpp"
#include "hanflab/error.hpp"
#include "hanflab/formula.hpp"
#include "hanflab/invariance.hpp"
#include "hanflab/lab.hpp"
#include "hanflab/locality.hpp"
#include "hanflab/presentation.hpp"
#include "hanflab/structure_io.hpp"
#include "hanflab/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace hanflab;

// Exit codes: 0 success / true verdict, 1 false verdict or counterexample,
// 2 usage or input error.
constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitError = 2;

struct Options {
    bool json = false;
    int workers = 1;
    std::uint64_t budget = kDefaultEnumerationBudget;
    std::optional<std::uint64_t> seed; // overrides the seed of random corpora
    std::optional<std::string> report_path;
};

void emit(const Options& opt, const Json& payload, const std::string& human) {
    if (opt.json) {
        std::cout << payload.dump() << "\n";
    } else {
        std::cout << human;
        if (!human.empty() && human.back() != '\n') std::cout << "\n";
    }
    if (opt.report_path) {
        std::filesystem::path path(*opt.report_path);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path);
        if (!out) throw input_error("cannot write report file '" + *opt.report_path + "'");
        out << payload.dump() << "\n";
    }
}

Json base_payload(const std::string& command) {
    Json j;
    j["version"] = kVersion;
    j["command"] = command;
    return j;
}

Radius parse_radius(const std::string& text) {
    if (text == "infinity") return Radius::infinite();
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return Radius::finite(v);
    } catch (const Error&) {
        throw;
    } catch (...) {
        throw usage_error("radius must be a non-negative integer or 'infinity', got '" + text + "'");
    }
}

Threshold parse_threshold(const std::string& text) {
    if (text == "omega") return Threshold::omega();
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return Threshold::finite(v);
    } catch (...) {
        throw usage_error("threshold must be a non-negative integer or 'omega', got '" + text + "'");
    }
}

std::string read_formula_text(const std::string& inline_text, const std::string& file) {
    if (!inline_text.empty() && !file.empty())
        throw usage_error("give a formula inline or as a file, not both");
    if (!inline_text.empty()) return inline_text;
    if (file.empty()) throw usage_error("a formula is required (--formula or --formula-file)");
    std::ifstream in(file);
    if (!in) throw input_error("cannot open formula file '" + file + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

Assignment parse_assignment(const std::string& text) {
    Assignment out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw usage_error("assignments look like x=0,y=2");
        try {
            out[item.substr(0, eq)] = static_cast<Element>(std::stol(item.substr(eq + 1)));
        } catch (...) {
            throw usage_error("bad assignment value in '" + item + "'");
        }
    }
    return out;
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Element> parse_elements(const std::string& text) {
    std::vector<Element> out;
    for (const auto& name : split_names(text)) {
        try {
            out.push_back(static_cast<Element>(std::stol(name)));
        } catch (...) {
            throw usage_error("element lists are comma-separated integers, got '" + name + "'");
        }
    }
    return out;
}

Corpus load_corpus(const std::string& spec_text, const Options& opt) {
    CorpusSpec spec = CorpusSpec::parse(spec_text);
    if (opt.seed) {
        if (spec.kind != CorpusSpec::Kind::RandomBoundedDegree)
            throw usage_error("--seed only applies to random corpora");
        spec.seed = *opt.seed;
    }
    Corpus corpus = generate_corpus(spec);
    for (std::size_t i = 1; i < corpus.structures.size(); ++i) {
        if (!(corpus.structures[i].signature == corpus.structures[0].signature))
            throw input_error("corpus structures must share one signature");
    }
    return corpus;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

Json radius_json(const Radius& r) { return radius_to_json(r); }

Json threshold_json(const Threshold& t) {
    if (t.is_omega()) return Json("omega");
    return Json(t.value());
}

Json census_json(const CensusReport& report) {
    Json j;
    j["radius"] = radius_json(report.radius);
    j["total"] = report.total;
    j["types"] = Json::array();
    for (const auto& entry : report.entries) {
        Json e;
        e["key"] = to_hex(entry.type.key);
        e["size"] = entry.type.size;
        e["count"] = entry.count;
        j["types"].push_back(std::move(e));
    }
    return j;
}

Json hanf_json(const HanfVerdict& v) {
    Json j;
    j["equivalent"] = v.equivalent;
    j["radius"] = radius_json(v.radius);
    j["threshold"] = threshold_json(v.threshold);
    j["witnesses"] = Json::array();
    for (const auto& w : v.witnesses) {
        Json e;
        e["key"] = to_hex(w.type.key);
        e["size"] = w.type.size;
        e["count_a"] = w.count_a;
        e["count_b"] = w.count_b;
        j["witnesses"].push_back(std::move(e));
    }
    return j;
}

LocalityQuery build_query(const std::string& scheme_name, const std::string& formula_text,
                          const std::string& formula_file, const std::string& query_file,
                          const Signature& corpus_signature) {
    if (!query_file.empty()) {
        if (!scheme_name.empty() || !formula_text.empty() || !formula_file.empty())
            throw usage_error("give a query bundle or scheme/formula flags, not both");
        return parse_query_bundle(read_text_file(query_file), corpus_signature);
    }
    std::string text = read_formula_text(formula_text, formula_file);
    if (scheme_name.empty()) {
        return parse_formula(text, corpus_signature);
    }
    auto scheme = scheme_by_name(scheme_name);
    Formula sentence = parse_formula(text, scheme->expanded(corpus_signature));
    return InvariantQuery{std::move(scheme), std::move(sentence), std::nullopt};
}

Json locality_report_json(const LocalityReport& report, const Corpus& corpus) {
    Json j;
    j["radius"] = radius_json(report.radius);
    j["threshold"] = threshold_json(report.threshold);
    j["corpus"] = corpus.spec.to_string();
    if (corpus.seed) j["seed"] = *corpus.seed;
    j["pairs_examined"] = report.pairs_examined;
    j["violations"] = Json::array();
    for (const auto& v : report.violations) {
        Json e;
        e["index_a"] = v.index_a;
        e["index_b"] = v.index_b;
        e["value_a"] = v.value_a;
        e["value_b"] = v.value_b;
        e["structure_a"] = structure_to_json(corpus.structures[v.index_a]);
        e["structure_b"] = structure_to_json(corpus.structures[v.index_b]);
        e["equivalence"] = hanf_json(v.equivalence);
        j["violations"].push_back(std::move(e));
    }
    return j;
}

// ---------------------------------------------------------------------------

int run_structure_validate(const Options& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open structure file '" + path + "'");
    Json raw;
    try {
        in >> raw;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("cannot parse '" + path + "': " + e.what());
    }
    Json payload = base_payload("structure.validate");
    try {
        Structure s = structure_from_json(raw);
        payload["valid"] = true;
        payload["structure"] = structure_to_json(s);
        emit(opt, payload, "valid");
        return kExitTrue;
    } catch (const Error& e) {
        if (e.code() != "input") throw;
        payload["valid"] = false;
        payload["errors"] = Json::array();
        std::stringstream ss(e.what());
        std::string item;
        while (std::getline(ss, item, ';')) {
            while (!item.empty() && item.front() == ' ') item.erase(item.begin());
            payload["errors"].push_back(item);
        }
        emit(opt, payload, std::string("invalid: ") + e.what());
        return kExitFalse;
    }
}

int run_structure_gaifman(const Options& opt, const std::string& path) {
    Structure s = load_structure_file(path);
    auto g = gaifman(s);
    Json payload = base_payload("structure.gaifman");
    payload["universe"] = s.universe_size;
    payload["edges"] = Json::array();
    std::ostringstream human;
    for (auto [a, b] : g.edges()) {
        payload["edges"].push_back(Json::array({a, b}));
        human << a << " -- " << b << "\n";
    }
    emit(opt, payload, human.str());
    return kExitTrue;
}

int run_structure_census(const Options& opt, const std::string& path, const std::string& r_text) {
    Structure s = load_structure_file(path);
    auto report = census(s, parse_radius(r_text), opt.workers);
    Json payload = base_payload("structure.census");
    payload["census"] = census_json(report);
    std::ostringstream human;
    human << report.entries.size() << " neighborhood types, " << report.total << " elements\n";
    for (const auto& e : report.entries)
        human << "  " << to_hex(e.type.key).substr(0, 16) << "... size " << e.type.size << " count " << e.count
              << "\n";
    emit(opt, payload, human.str());
    return kExitTrue;
}

int run_fo_parse(const Options& opt, const std::string& path, const std::string& formula_text,
                 const std::string& formula_file) {
    Structure s = load_structure_file(path);
    Formula f = parse_formula(read_formula_text(formula_text, formula_file), s.signature);
    Json payload = base_payload("fo.parse");
    payload["formula"] = render_formula(f);
    payload["rank"] = f.rank();
    payload["free"] = f.free_variables();
    emit(opt, payload, render_formula(f));
    return kExitTrue;
}

int run_fo_eval(const Options& opt, const std::string& path, const std::string& formula_text,
                const std::string& formula_file, const std::string& assign_text) {
    Structure s = load_structure_file(path);
    Formula f = parse_formula(read_formula_text(formula_text, formula_file), s.signature);
    bool value = eval(s, f, parse_assignment(assign_text));
    Json payload = base_payload("fo.eval");
    payload["value"] = value;
    emit(opt, payload, value ? "true" : "false");
    return value ? kExitTrue : kExitFalse;
}

int run_fo_rank(const Options& opt, const std::string& path, const std::string& formula_text,
                const std::string& formula_file) {
    Structure s = load_structure_file(path);
    Formula f = parse_formula(read_formula_text(formula_text, formula_file), s.signature);
    Json payload = base_payload("fo.rank");
    payload["rank"] = f.rank();
    emit(opt, payload, std::to_string(f.rank()));
    return kExitTrue;
}

int run_fo_localize(const Options& opt, const std::string& path, const std::string& formula_text,
                    const std::string& formula_file, const std::string& r_text, const std::string& centers_text) {
    Structure s = load_structure_file(path);
    Formula f = parse_formula(read_formula_text(formula_text, formula_file), s.signature);
    Radius r = parse_radius(r_text);
    if (r.is_infinite()) throw usage_error("localization needs a finite radius");
    auto centers = split_names(centers_text);
    auto result = localize(f, r.value(), centers);
    Json payload = base_payload("fo.localize");
    payload["formula"] = render_formula(result.formula);
    payload["rank"] = result.formula.rank();
    payload["renamed"] = Json::array();
    for (const auto& [from, to] : result.renamed) payload["renamed"].push_back(Json::array({from, to}));
    emit(opt, payload, render_formula(result.formula));
    return kExitTrue;
}

int run_ef_compare(const Options& opt, const std::string& path_a, const std::string& path_b, int q) {
    Structure a = load_structure_file(path_a);
    Structure b = load_structure_file(path_b);
    bool eq = ef_equivalent(a, b, q);
    Json payload = base_payload("ef.compare");
    payload["rounds"] = q;
    payload["equivalent"] = eq;
    emit(opt, payload, eq ? "equivalent" : "distinguishable");
    return eq ? kExitTrue : kExitFalse;
}

int run_hanf_compare(const Options& opt, const std::string& path_a, const std::string& path_b,
                     const std::string& r_text, const std::string& t_text, bool full) {
    Structure a = load_structure_file(path_a);
    Structure b = load_structure_file(path_b);
    Json payload = base_payload("hanf.compare");
    if (full) {
        auto verdict = fully_hanf_equivalent(a, b, opt.workers);
        payload["full"] = true;
        payload["equivalent"] = verdict.equivalent;
        if (verdict.failing_radius) payload["failing_radius"] = *verdict.failing_radius;
        if (verdict.detail) payload["detail"] = hanf_json(*verdict.detail);
        emit(opt, payload, verdict.equivalent ? "equivalent at every radius" : "not equivalent");
        return verdict.equivalent ? kExitTrue : kExitFalse;
    }
    auto verdict = hanf_equivalent(a, b, parse_radius(r_text), parse_threshold(t_text), opt.workers);
    payload["verdict"] = hanf_json(verdict);
    std::ostringstream human;
    human << (verdict.equivalent ? "equivalent" : "not equivalent") << " (r=" << verdict.radius.to_string()
          << ", t=" << verdict.threshold.to_string() << ")";
    emit(opt, payload, human.str());
    return verdict.equivalent ? kExitTrue : kExitFalse;
}

int run_present_enumerate(const Options& opt, const std::string& path, const std::string& scheme_name,
                          std::uint64_t limit, bool count_only) {
    Structure s = load_structure_file(path);
    auto scheme = scheme_by_name(scheme_name);
    auto stream = scheme->enumerate(s);
    Json payload = base_payload("present.enumerate");
    payload["scheme"] = scheme->name();
    payload["count"] = stream->size();
    std::ostringstream human;
    human << stream->size() << " presentations\n";
    if (!count_only) {
        payload["presentations"] = Json::array();
        std::uint64_t take = std::min<std::uint64_t>(stream->size(), limit);
        payload["limit"] = limit;
        for (std::uint64_t i = 0; i < take; ++i)
            payload["presentations"].push_back(structure_to_json(stream->at(i).expansion));
    }
    emit(opt, payload, human.str());
    return kExitTrue;
}

int run_present_validate(const Options& opt, const std::string& base_path, const std::string& expansion_path,
                         const std::string& scheme_name) {
    auto scheme = scheme_by_name(scheme_name);
    Presentation p;
    p.base = load_structure_file(base_path);
    p.expansion = load_structure_file(expansion_path);
    bool valid = scheme->validate_presentation(p);
    Json payload = base_payload("present.validate");
    payload["scheme"] = scheme->name();
    payload["valid"] = valid;
    emit(opt, payload, valid ? "valid" : "invalid");
    return valid ? kExitTrue : kExitFalse;
}

int run_present_check(const Options& opt, const std::string& what, const std::string& scheme_name,
                      const std::string& corpus_spec, int nu) {
    auto scheme = scheme_by_name(scheme_name);
    Corpus corpus = load_corpus(corpus_spec, opt);
    Json payload = base_payload("present.check");
    payload["check"] = what;
    payload["scheme"] = scheme->name();
    payload["corpus"] = corpus.spec.to_string();
    bool pass = false;
    std::ostringstream human;

    if (what == "elementary") {
        auto report = check_elementary(*scheme, corpus.structures);
        pass = report.agree;
        payload["pass"] = pass;
        payload["expansions_checked"] = report.expansions_checked;
        payload["exhaustive"] = report.exhaustive;
        payload["corpus_note"] = report.corpus_note;
        if (report.witness) {
            Json w;
            w["expansion"] = structure_to_json(report.witness->expansion);
            w["checker_value"] = report.witness->checker_value;
            w["sentence_value"] = report.witness->sentence_value;
            payload["witness"] = std::move(w);
        }
    } else if (what == "nbbound") {
        auto report = check_neighborhood_bound(*scheme, corpus.structures, nu, opt.workers);
        pass = report.pass;
        payload["pass"] = pass;
        payload["nu"] = nu;
        payload["presentations_checked"] = report.presentations_checked;
        payload["corpus_note"] = report.corpus_note;
        if (report.witness) {
            Json w;
            w["base"] = structure_to_json(report.witness->base);
            w["expansion"] = structure_to_json(report.witness->expansion);
            w["element"] = report.witness->element;
            w["neighbor"] = report.witness->neighbor;
            w["distance"] = report.witness->distance;
            payload["witness"] = std::move(w);
        }
    } else if (what == "degbound") {
        auto report = check_degree_bound(*scheme, corpus.structures, opt.workers);
        pass = report.pass;
        payload["pass"] = pass;
        payload["presentations_checked"] = report.presentations_checked;
        payload["corpus_note"] = report.corpus_note;
        if (report.witness) {
            Json w;
            w["base"] = structure_to_json(report.witness->base);
            w["expansion"] = structure_to_json(report.witness->expansion);
            w["element"] = report.witness->element;
            w["degree"] = report.witness->degree;
            w["bound"] = report.witness->bound;
            payload["witness"] = std::move(w);
        }
    } else if (what == "localization") {
        auto report = check_localization(*scheme, corpus.structures, opt.workers);
        pass = report.pass;
        payload["pass"] = pass;
        payload["cases_checked"] = report.cases_checked;
        payload["corpus_note"] = report.corpus_note;
        if (report.witness) {
            Json w;
            w["base"] = structure_to_json(report.witness->base);
            w["expansion"] = structure_to_json(report.witness->expansion);
            w["subset"] = report.witness->subset;
            payload["witness"] = std::move(w);
        }
    } else if (what == "amalgamation") {
        auto report = check_disjoint_amalgamation(*scheme, corpus.structures, opt.budget);
        pass = report.pass;
        payload["pass"] = pass;
        payload["cases_checked"] = report.cases_checked;
        payload["corpus_note"] = report.corpus_note;
        if (report.witness) {
            Json w;
            w["base"] = structure_to_json(report.witness->base);
            w["b_set"] = report.witness->b_set;
            w["c_set"] = report.witness->c_set;
            w["b_presentation"] = structure_to_json(report.witness->b_presentation.expansion);
            w["c_presentation"] = structure_to_json(report.witness->c_presentation.expansion);
            payload["witness"] = std::move(w);
        }
    } else {
        throw usage_error("unknown check '" + what +
                          "' (elementary|nbbound|degbound|localization|amalgamation)");
    }
    human << (pass ? "pass" : "fail") << " (" << what << ", " << scheme->name() << ")";
    emit(opt, payload, human.str());
    return pass ? kExitTrue : kExitFalse;
}

int run_invariance_check(const Options& opt, const std::string& scheme_name, const std::string& formula_text,
                         const std::string& formula_file, const std::string& query_file,
                         const std::string& corpus_spec) {
    Corpus corpus = load_corpus(corpus_spec, opt);
    if (corpus.structures.empty()) throw input_error("empty corpus");
    const Signature& base_sig = corpus.structures[0].signature;
    InvariantQuery query;
    if (!query_file.empty()) {
        if (!scheme_name.empty() || !formula_text.empty() || !formula_file.empty())
            throw usage_error("give a query bundle or scheme/formula flags, not both");
        query = parse_query_bundle(read_text_file(query_file), base_sig);
    } else {
        if (scheme_name.empty()) throw usage_error("a scheme is required (--scheme or --query-file)");
        query.scheme = scheme_by_name(scheme_name);
        query.sentence = parse_formula(read_formula_text(formula_text, formula_file),
                                       query.scheme->expanded(base_sig));
    }
    std::vector<Structure> members;
    for (const Structure& s : corpus.structures) {
        if (!query.class_filter || class_filter_accepts(*query.class_filter, s)) members.push_back(s);
    }
    auto verdict = is_invariant(query.sentence, *query.scheme, members, opt.budget, opt.workers);
    const auto& scheme = query.scheme;
    Json payload = base_payload("invariance.check");
    payload["scheme"] = scheme->name();
    payload["corpus"] = corpus.spec.to_string();
    payload["invariant"] = verdict.invariant;
    payload["presentations_examined"] = verdict.presentations_examined;
    if (verdict.counterexample) {
        Json ce;
        ce["corpus_index"] = *verdict.corpus_index;
        ce["base"] = structure_to_json(verdict.counterexample->base);
        ce["first_expansion"] = structure_to_json(verdict.counterexample->first_expansion);
        ce["second_expansion"] = structure_to_json(verdict.counterexample->second_expansion);
        payload["counterexample"] = std::move(ce);
    }
    emit(opt, payload, verdict.invariant ? "invariant on corpus" : "not invariant (counterexample found)");
    return verdict.invariant ? kExitTrue : kExitFalse;
}

int run_invariance_eval(const Options& opt, const std::string& path, const std::string& scheme_name,
                        const std::string& formula_text, const std::string& formula_file,
                        const std::string& query_file, bool unsafe_fast) {
    Structure s = load_structure_file(path);
    InvariantQuery q;
    if (!query_file.empty()) {
        if (!scheme_name.empty() || !formula_text.empty() || !formula_file.empty())
            throw usage_error("give a query bundle or scheme/formula flags, not both");
        q = parse_query_bundle(read_text_file(query_file), s.signature);
    } else {
        if (scheme_name.empty()) throw usage_error("a scheme is required (--scheme or --query-file)");
        q.scheme = scheme_by_name(scheme_name);
        q.sentence = parse_formula(read_formula_text(formula_text, formula_file),
                                   q.scheme->expanded(s.signature));
    }
    bool value = eval_invariant(q, s, opt.budget, !unsafe_fast);
    Json payload = base_payload("invariance.eval");
    payload["scheme"] = q.scheme->name();
    payload["certified"] = !unsafe_fast;
    payload["value"] = value;
    emit(opt, payload, value ? "true" : "false");
    return value ? kExitTrue : kExitFalse;
}

int run_lab_locality(const Options& opt, const std::string& corpus_spec, const std::string& scheme_name,
                     const std::string& formula_text, const std::string& formula_file,
                     const std::string& query_file, const std::string& r_text, const std::string& t_text) {
    Corpus corpus = load_corpus(corpus_spec, opt);
    if (corpus.structures.empty()) throw input_error("empty corpus");
    auto query = build_query(scheme_name, formula_text, formula_file, query_file,
                             corpus.structures[0].signature);
    auto report =
        locality_search(query, corpus, parse_radius(r_text), parse_threshold(t_text), opt.budget, opt.workers);
    Json payload = base_payload("lab.locality");
    payload["report"] = locality_report_json(report, corpus);
    std::ostringstream human;
    human << report.violations.size() << " violations over " << report.pairs_examined << " pairs";
    emit(opt, payload, human.str());
    return report.violations.empty() ? kExitTrue : kExitFalse;
}

int run_lab_minimal(const Options& opt, const std::string& corpus_spec, const std::string& scheme_name,
                    const std::string& formula_text, const std::string& formula_file,
                    const std::string& query_file, std::uint64_t r_max, std::uint64_t t_max) {
    Corpus corpus = load_corpus(corpus_spec, opt);
    if (corpus.structures.empty()) throw input_error("empty corpus");
    auto query = build_query(scheme_name, formula_text, formula_file, query_file,
                             corpus.structures[0].signature);
    auto found = minimal_locality_parameters(query, corpus, r_max, t_max, opt.budget);
    Json payload = base_payload("lab.minimal");
    payload["corpus"] = corpus.spec.to_string();
    payload["r_max"] = r_max;
    payload["t_max"] = t_max;
    payload["found"] = found.has_value();
    if (found) {
        payload["r"] = found->first;
        payload["t"] = found->second;
        emit(opt, payload, "least (r,t) = (" + std::to_string(found->first) + "," + std::to_string(found->second) + ")");
        return kExitTrue;
    }
    emit(opt, payload, "no (r,t) within bounds");
    return kExitFalse;
}

int run_lab_scatter(const Options& opt, const std::string& path, const std::string& r_text,
                    const std::string& candidates_text, const std::string& away_text, bool exact) {
    Structure s = load_structure_file(path);
    Radius r = parse_radius(r_text);
    std::vector<Element> candidates;
    if (candidates_text.empty()) {
        for (Element e = 0; e < s.universe_size; ++e) candidates.push_back(e);
    } else {
        candidates = parse_elements(candidates_text);
    }
    auto away = parse_elements(away_text);
    auto chosen = exact ? max_scattered_subset(s, candidates, r, away) : greedy_scatter(s, candidates, r, away);
    Json payload = base_payload("lab.scatter");
    payload["radius"] = radius_json(r);
    payload["mode"] = exact ? "exact" : "greedy";
    payload["chosen"] = chosen;
    payload["size"] = chosen.size();
    std::ostringstream human;
    human << "size " << chosen.size() << ":";
    for (Element e : chosen) human << " " << e;
    emit(opt, payload, human.str());
    return kExitTrue;
}

int run_lab_wideness(const Options& opt, const std::string& corpus_spec, const std::string& r_text, int p, int q,
                     int m_max) {
    Corpus corpus = load_corpus(corpus_spec, opt);
    auto table = wideness_estimate(corpus, parse_radius(r_text), p, q, m_max);
    Json payload = base_payload("lab.wideness");
    payload["corpus"] = corpus.spec.to_string();
    if (corpus.seed) payload["seed"] = *corpus.seed;
    payload["radius"] = radius_json(table.radius);
    payload["p"] = table.p;
    payload["q"] = table.q;
    payload["zeta"] = Json::array();
    std::ostringstream human;
    for (auto [m, z] : table.zeta) {
        payload["zeta"].push_back(Json::array({m, z}));
        human << "m=" << m << " zeta=" << z << "\n";
    }
    emit(opt, payload, human.str());
    return kExitTrue;
}

int run_lab_gen(const Options& opt, const std::string& corpus_spec, const std::string& out_dir) {
    Corpus corpus = load_corpus(corpus_spec, opt);
    Json payload = base_payload("lab.gen");
    payload["corpus"] = corpus.spec.to_string();
    if (corpus.seed) payload["seed"] = *corpus.seed;
    payload["count"] = corpus.structures.size();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (std::size_t i = 0; i < corpus.structures.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "structure-%05zu.json", i);
            save_structure_file(corpus.structures[i], (std::filesystem::path(out_dir) / name).string());
        }
        payload["out_dir"] = out_dir;
    } else {
        payload["structures"] = Json::array();
        for (const auto& s : corpus.structures) payload["structures"].push_back(structure_to_json(s));
    }
    emit(opt, payload, std::to_string(corpus.structures.size()) + " structures");
    return kExitTrue;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hanflab: finite-structure locality workbench"};
    app.require_subcommand(1);

    Options opt;
    if (const char* env = std::getenv("HANFLAB_BUDGET")) {
        try {
            opt.budget = std::stoull(env);
        } catch (...) {
            std::cerr << "bad HANFLAB_BUDGET value\n";
            return kExitError;
        }
    }
    app.add_flag("--json", opt.json, "machine-readable output");
    app.add_option("--workers", opt.workers, "worker threads (output is worker-count independent)");
    app.add_option("--budget", opt.budget, "enumeration budget per structure");
    std::string report_path;
    app.add_option("--report", report_path, "also write the json payload to this file");
    std::int64_t seed_flag = -1;
    app.add_option("--seed", seed_flag, "override the seed of a random corpus");

    // structure
    auto* structure = app.add_subcommand("structure", "finite structures");
    std::string file_a, file_b, r_text = "1", t_text = "omega";
    auto* sv = structure->add_subcommand("validate", "validate a structure file");
    sv->add_option("file", file_a)->required();
    auto* sg = structure->add_subcommand("gaifman", "Gaifman graph edges");
    sg->add_option("file", file_a)->required();
    auto* sc = structure->add_subcommand("census", "neighborhood census");
    sc->add_option("file", file_a)->required();
    sc->add_option("--r", r_text, "radius (integer or 'infinity')");

    // fo
    auto* fo = app.add_subcommand("fo", "first-order formulas");
    std::string formula_text, formula_file, assign_text, centers_text = "x";
    auto* fp = fo->add_subcommand("parse", "parse and normalize");
    fp->add_option("file", file_a)->required();
    fp->add_option("--formula", formula_text);
    fp->add_option("--formula-file", formula_file);
    auto* fe = fo->add_subcommand("eval", "evaluate on a structure");
    fe->add_option("file", file_a)->required();
    fe->add_option("--formula", formula_text);
    fe->add_option("--formula-file", formula_file);
    fe->add_option("--assign", assign_text, "free-variable assignment x=0,y=2");
    auto* fr = fo->add_subcommand("rank", "quantifier rank");
    fr->add_option("file", file_a)->required();
    fr->add_option("--formula", formula_text);
    fr->add_option("--formula-file", formula_file);
    auto* fl = fo->add_subcommand("localize", "relativize quantifiers to r-balls");
    fl->add_option("file", file_a)->required();
    fl->add_option("--formula", formula_text);
    fl->add_option("--formula-file", formula_file);
    fl->add_option("--r", r_text);
    fl->add_option("--centers", centers_text, "comma-separated center variables");

    // ef
    auto* ef = app.add_subcommand("ef", "Ehrenfeucht-Fraisse games");
    int q_rounds = 1;
    auto* ec = ef->add_subcommand("compare", "q-round game equivalence");
    ec->add_option("file_a", file_a)->required();
    ec->add_option("file_b", file_b)->required();
    ec->add_option("--q", q_rounds, "rounds");

    // hanf
    auto* hanf = app.add_subcommand("hanf", "Hanf equivalence");
    bool full = false;
    auto* hc = hanf->add_subcommand("compare", "census comparison");
    hc->add_option("file_a", file_a)->required();
    hc->add_option("file_b", file_b)->required();
    hc->add_option("--r", r_text, "radius (integer or 'infinity')");
    hc->add_option("--t", t_text, "threshold (integer or 'omega')");
    hc->add_flag("--full", full, "check every radius up to the universe size");

    // present
    auto* present = app.add_subcommand("present", "presentation schemes");
    std::string scheme_name, what, corpus_spec;
    std::uint64_t limit = 1000;
    bool count_only = false;
    int nu = 1;
    auto* pe = present->add_subcommand("enumerate", "enumerate presentations");
    pe->add_option("file", file_a)->required();
    pe->add_option("--scheme", scheme_name)->required();
    pe->add_option("--limit", limit, "presentations to include in the output");
    pe->add_flag("--count-only", count_only);
    auto* pv = present->add_subcommand("validate", "validate an expansion");
    pv->add_option("base", file_a)->required();
    pv->add_option("expansion", file_b)->required();
    pv->add_option("--scheme", scheme_name)->required();
    auto* pc = present->add_subcommand("check", "tameness checkers");
    pc->add_option("--what", what, "elementary|nbbound|degbound|localization|amalgamation")->required();
    pc->add_option("--scheme", scheme_name)->required();
    pc->add_option("--corpus", corpus_spec, "all:<n> | random:d=..,n=..,count=..,seed=.. | files:a,b")->required();
    pc->add_option("--nu", nu, "neighborhood expansion factor for nbbound");

    // invariance
    auto* invariance = app.add_subcommand("invariance", "presentation-invariant queries");
    bool unsafe_fast = false;
    std::string query_file;
    auto* ic = invariance->add_subcommand("check", "invariance over a corpus");
    ic->add_option("--scheme", scheme_name);
    ic->add_option("--formula", formula_text);
    ic->add_option("--formula-file", formula_file);
    ic->add_option("--query-file", query_file, "json bundle {scheme, sentence, class}");
    ic->add_option("--corpus", corpus_spec)->required();
    auto* ie = invariance->add_subcommand("eval", "evaluate an invariant query");
    ie->add_option("file", file_a)->required();
    ie->add_option("--scheme", scheme_name);
    ie->add_option("--formula", formula_text);
    ie->add_option("--formula-file", formula_file);
    ie->add_option("--query-file", query_file, "json bundle {scheme, sentence, class}");
    ie->add_flag("--unsafe-fast", unsafe_fast, "skip the per-input invariance certificate");

    // lab
    auto* lab = app.add_subcommand("lab", "locality experiments");
    std::uint64_t r_max = 4, t_max = 16;
    std::string candidates_text, away_text, out_dir;
    bool exact = false;
    int p_sets = 1, q_excl = 0, m_max = 4;
    auto* ll = lab->add_subcommand("locality", "search for locality violations");
    ll->add_option("--corpus", corpus_spec)->required();
    ll->add_option("--scheme", scheme_name, "treat the formula as an invariant query of this scheme");
    ll->add_option("--formula", formula_text);
    ll->add_option("--formula-file", formula_file);
    ll->add_option("--query-file", query_file, "json bundle {scheme, sentence, class}");
    ll->add_option("--r", r_text);
    ll->add_option("--t", t_text);
    auto* lm = lab->add_subcommand("minimal", "least (r,t) without violations");
    lm->add_option("--corpus", corpus_spec)->required();
    lm->add_option("--scheme", scheme_name);
    lm->add_option("--formula", formula_text);
    lm->add_option("--formula-file", formula_file);
    lm->add_option("--query-file", query_file, "json bundle {scheme, sentence, class}");
    lm->add_option("--r-max", r_max);
    lm->add_option("--t-max", t_max);
    auto* ls = lab->add_subcommand("scatter", "scattered subsets");
    ls->add_option("file", file_a)->required();
    ls->add_option("--r", r_text);
    ls->add_option("--candidates", candidates_text, "default: the whole universe");
    ls->add_option("--away", away_text);
    ls->add_flag("--exact", exact, "exact maximum instead of greedy");
    auto* lw = lab->add_subcommand("wideness", "empirical width growth");
    lw->add_option("--corpus", corpus_spec)->required();
    lw->add_option("--r", r_text);
    lw->add_option("--p", p_sets);
    lw->add_option("--q", q_excl);
    lw->add_option("--m-max", m_max);
    auto* lg = lab->add_subcommand("gen", "generate a corpus");
    lg->add_option("--spec", corpus_spec)->required();
    lg->add_option("--out-dir", out_dir, "write one structure file per entry");

    // Let global flags (--json, --workers, ...) appear after subcommands.
    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* node) {
        node->fallthrough(true);
        for (CLI::App* sub : node->get_subcommands({})) enable_fallthrough(sub);
    };
    for (CLI::App* sub : app.get_subcommands({})) enable_fallthrough(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    if (!report_path.empty()) opt.report_path = report_path;
    if (seed_flag >= 0) opt.seed = static_cast<std::uint64_t>(seed_flag);
    if (opt.workers < 1) {
        std::cerr << "workers must be >= 1\n";
        return kExitError;
    }

    try {
        if (sv->parsed()) return run_structure_validate(opt, file_a);
        if (sg->parsed()) return run_structure_gaifman(opt, file_a);
        if (sc->parsed()) return run_structure_census(opt, file_a, r_text);
        if (fp->parsed()) return run_fo_parse(opt, file_a, formula_text, formula_file);
        if (fe->parsed()) return run_fo_eval(opt, file_a, formula_text, formula_file, assign_text);
        if (fr->parsed()) return run_fo_rank(opt, file_a, formula_text, formula_file);
        if (fl->parsed()) return run_fo_localize(opt, file_a, formula_text, formula_file, r_text, centers_text);
        if (ec->parsed()) return run_ef_compare(opt, file_a, file_b, q_rounds);
        if (hc->parsed()) return run_hanf_compare(opt, file_a, file_b, r_text, t_text, full);
        if (pe->parsed()) return run_present_enumerate(opt, file_a, scheme_name, limit, count_only);
        if (pv->parsed()) return run_present_validate(opt, file_a, file_b, scheme_name);
        if (pc->parsed()) return run_present_check(opt, what, scheme_name, corpus_spec, nu);
        if (ic->parsed()) return run_invariance_check(opt, scheme_name, formula_text, formula_file, query_file, corpus_spec);
        if (ie->parsed()) return run_invariance_eval(opt, file_a, scheme_name, formula_text, formula_file, query_file, unsafe_fast);
        if (ll->parsed()) return run_lab_locality(opt, corpus_spec, scheme_name, formula_text, formula_file, query_file, r_text, t_text);
        if (lm->parsed()) return run_lab_minimal(opt, corpus_spec, scheme_name, formula_text, formula_file, query_file, r_max, t_max);
        if (ls->parsed()) return run_lab_scatter(opt, file_a, r_text, candidates_text, away_text, exact);
        if (lw->parsed()) return run_lab_wideness(opt, corpus_spec, r_text, p_sets, q_excl, m_max);
        if (lg->parsed()) return run_lab_gen(opt, corpus_spec, out_dir);
        std::cerr << "no subcommand\n";
        return kExitError;
    } catch (const Error& e) {
        Json payload = base_payload("error");
        payload["error"] = {{"code", e.code()}, {"message", e.what()}};
        int rc = (e.code() == "not-invariant") ? kExitFalse : kExitError;
        if (opt.json) {
            std::cout << payload.dump() << "\n";
        } else {
            std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        }
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
