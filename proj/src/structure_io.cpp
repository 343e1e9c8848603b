#include "hanflab/structure_io.hpp"

#include "hanflab/error.hpp"

#include <fstream>
#include <sstream>

namespace hanflab {

Json structure_to_json(const Structure& s) {
    Json sig;
    sig["relations"] = Json::array();
    for (const auto& r : s.signature.relations) sig["relations"].push_back(Json::array({r.name, r.arity}));
    sig["constants"] = Json::array();
    for (const auto& c : s.signature.constants) sig["constants"].push_back(c);

    Json rels = Json::object();
    for (std::size_t r = 0; r < s.signature.relations.size(); ++r) {
        Json table = Json::array();
        for (const auto& tuple : s.tables[r]) table.push_back(tuple);
        rels[s.signature.relations[r].name] = std::move(table);
    }
    Json consts = Json::object();
    for (std::size_t c = 0; c < s.signature.constants.size(); ++c)
        consts[s.signature.constants[c]] = s.constant_values[c];

    Json out;
    out["signature"] = std::move(sig);
    out["universe"] = s.universe_size;
    out["relations"] = std::move(rels);
    out["constants"] = std::move(consts);
    return out;
}

Structure structure_from_json(const Json& j) {
    if (!j.is_object()) throw input_error("structure file must be a JSON object");
    Structure s;
    if (!j.contains("signature") || !j["signature"].is_object())
        throw input_error("missing 'signature' object");
    const Json& sig = j["signature"];
    if (sig.contains("relations")) {
        for (const auto& entry : sig["relations"]) {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_number_integer())
                throw input_error("signature relations must be [name, arity] pairs");
            s.signature.relations.push_back({entry[0].get<std::string>(), entry[1].get<int>()});
        }
    }
    if (sig.contains("constants")) {
        for (const auto& entry : sig["constants"]) {
            if (!entry.is_string()) throw input_error("signature constants must be names");
            s.signature.constants.push_back(entry.get<std::string>());
        }
    }
    if (!j.contains("universe") || !j["universe"].is_number_integer())
        throw input_error("missing integer 'universe'");
    s.universe_size = j["universe"].get<Element>();

    s.tables.resize(s.signature.relations.size());
    if (j.contains("relations")) {
        for (const auto& [name, table] : j["relations"].items()) {
            auto idx = s.signature.relation_index(name);
            if (!idx) throw input_error("unknown relation name '" + name + "'");
            if (!table.is_array()) throw input_error("relation '" + name + "' table must be an array");
            for (const auto& tuple : table) {
                if (!tuple.is_array()) throw input_error("tuples must be arrays of element indices");
                Tuple t;
                for (const auto& e : tuple) {
                    if (!e.is_number_integer()) throw input_error("tuple entries must be integers");
                    t.push_back(e.get<Element>());
                }
                s.tables[*idx].push_back(std::move(t));
            }
        }
    }
    if (j.contains("constants")) {
        for (const auto& [name, value] : j["constants"].items()) {
            auto idx = s.signature.constant_index(name);
            if (!idx) throw input_error("unknown constant name '" + name + "'");
            if (!value.is_number_integer()) throw input_error("constant '" + name + "' must be an integer");
            s.constant_values.resize(s.signature.constants.size(), -1);
            s.constant_values[*idx] = value.get<Element>();
        }
    }
    if (s.constant_values.empty()) s.constant_values.resize(s.signature.constants.size(), -1);
    for (std::size_t c = 0; c < s.signature.constants.size(); ++c) {
        if (c < s.constant_values.size() && s.constant_values[c] == -1)
            throw input_error("constant '" + s.signature.constants[c] + "' has no value");
    }
    return validated(std::move(s));
}

Structure load_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open structure file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("cannot parse '" + path + "': " + e.what());
    }
    return structure_from_json(j);
}

void save_structure_file(const Structure& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write structure file '" + path + "'");
    out << structure_to_json(s).dump() << "\n";
}

Json radius_to_json(const Radius& r) {
    if (r.is_infinite()) return Json("infinity");
    return Json(r.value());
}

Radius radius_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "infinity") return Radius::infinite();
        throw input_error("radius must be an integer or \"infinity\"");
    }
    if (j.is_number_integer()) return Radius::finite(j.get<std::int64_t>());
    throw input_error("radius must be an integer or \"infinity\"");
}

} // namespace hanflab
