#include "hanflab/structure.hpp"

#include "hanflab/error.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_set>

namespace hanflab {

Radius Radius::finite(std::int64_t r) {
    if (r < 0) throw input_error("radius must be >= 0, got " + std::to_string(r));
    return Radius(false, r);
}

std::int64_t Radius::value() const {
    if (infinite_) throw Error("internal", "value() called on the infinite radius");
    return value_;
}

std::string Radius::to_string() const {
    return infinite_ ? std::string("infinity") : std::to_string(value_);
}

std::optional<std::size_t> Signature::relation_index(std::string_view name) const {
    for (std::size_t i = 0; i < relations.size(); ++i)
        if (relations[i].name == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> Signature::constant_index(std::string_view name) const {
    for (std::size_t i = 0; i < constants.size(); ++i)
        if (constants[i] == name) return i;
    return std::nullopt;
}

std::vector<std::string> Signature::problems() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : relations) {
        if (r.arity < 1)
            out.push_back("relation '" + r.name + "' has arity " + std::to_string(r.arity) + ", must be >= 1");
        if (!seen.insert(r.name).second)
            out.push_back("duplicate symbol name '" + r.name + "'");
    }
    for (const auto& c : constants) {
        if (!seen.insert(c).second)
            out.push_back("duplicate symbol name '" + c + "'");
    }
    return out;
}

Signature graph_signature() {
    return Signature{{RelationDecl{"E", 2}}, {}};
}

Signature expanded_signature(const Signature& base, const RelationDecl& extra) {
    if (base.relation_index(extra.name) || base.constant_index(extra.name))
        throw input_error("presentation symbol '" + extra.name + "' collides with the base signature");
    Signature out = base;
    out.relations.push_back(extra);
    return out;
}

void Structure::normalize() {
    for (auto& table : tables) {
        std::sort(table.begin(), table.end());
        table.erase(std::unique(table.begin(), table.end()), table.end());
    }
}

std::vector<std::string> Structure::problems() const {
    std::vector<std::string> out = signature.problems();
    if (universe_size < 0) out.push_back("universe size must be >= 0");
    if (universe_size == 0 && !signature.constants.empty())
        out.push_back("empty universe is only legal for constant-free signatures");
    if (tables.size() != signature.relations.size())
        out.push_back("expected " + std::to_string(signature.relations.size()) + " relation tables, got " +
                      std::to_string(tables.size()));
    for (std::size_t r = 0; r < tables.size() && r < signature.relations.size(); ++r) {
        const auto& decl = signature.relations[r];
        for (const auto& tuple : tables[r]) {
            if (static_cast<int>(tuple.size()) != decl.arity) {
                out.push_back("relation '" + decl.name + "' expects arity " + std::to_string(decl.arity) +
                              ", got a tuple of length " + std::to_string(tuple.size()));
                continue;
            }
            for (Element e : tuple) {
                if (e < 0 || e >= universe_size)
                    out.push_back("element " + std::to_string(e) + " out of range in relation '" + decl.name + "'");
            }
        }
    }
    if (constant_values.size() != signature.constants.size())
        out.push_back("expected " + std::to_string(signature.constants.size()) + " constant values, got " +
                      std::to_string(constant_values.size()));
    for (std::size_t c = 0; c < constant_values.size() && c < signature.constants.size(); ++c) {
        if (constant_values[c] < 0 || constant_values[c] >= universe_size)
            out.push_back("constant '" + signature.constants[c] + "' value " + std::to_string(constant_values[c]) +
                          " out of range");
    }
    return out;
}

Structure validated(Structure s) {
    s.normalize();
    auto problems = s.problems();
    if (!problems.empty()) {
        std::ostringstream msg;
        for (std::size_t i = 0; i < problems.size(); ++i) {
            if (i) msg << "; ";
            msg << problems[i];
        }
        throw input_error(msg.str());
    }
    return s;
}

bool GaifmanGraph::adjacent(Element a, Element b) const {
    const auto& row = adjacency[static_cast<std::size_t>(a)];
    return std::binary_search(row.begin(), row.end(), b);
}

std::vector<std::pair<Element, Element>> GaifmanGraph::edges() const {
    std::vector<std::pair<Element, Element>> out;
    for (Element a = 0; a < n; ++a)
        for (Element b : adjacency[static_cast<std::size_t>(a)])
            if (a < b) out.emplace_back(a, b);
    return out;
}

GaifmanGraph gaifman(const Structure& s) {
    GaifmanGraph g;
    g.n = s.universe_size;
    g.adjacency.assign(static_cast<std::size_t>(g.n), {});
    std::vector<std::set<Element>> neighbors(static_cast<std::size_t>(g.n));
    for (const auto& table : s.tables) {
        for (const auto& tuple : table) {
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                for (std::size_t j = i + 1; j < tuple.size(); ++j) {
                    Element a = tuple[i], b = tuple[j];
                    if (a == b) continue;
                    neighbors[static_cast<std::size_t>(a)].insert(b);
                    neighbors[static_cast<std::size_t>(b)].insert(a);
                }
            }
        }
    }
    for (Element a = 0; a < g.n; ++a)
        g.adjacency[static_cast<std::size_t>(a)].assign(neighbors[static_cast<std::size_t>(a)].begin(),
                                                        neighbors[static_cast<std::size_t>(a)].end());
    return g;
}

std::vector<int> bfs_distances(const GaifmanGraph& g, Element source) {
    if (source < 0 || source >= g.n)
        throw input_error("element " + std::to_string(source) + " out of range");
    std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
    std::deque<Element> queue;
    dist[static_cast<std::size_t>(source)] = 0;
    queue.push_back(source);
    while (!queue.empty()) {
        Element a = queue.front();
        queue.pop_front();
        for (Element b : g.adjacency[static_cast<std::size_t>(a)]) {
            if (dist[static_cast<std::size_t>(b)] < 0) {
                dist[static_cast<std::size_t>(b)] = dist[static_cast<std::size_t>(a)] + 1;
                queue.push_back(b);
            }
        }
    }
    return dist;
}

std::vector<Element> ball(const GaifmanGraph& g, Element a, const Radius& r) {
    auto dist = bfs_distances(g, a);
    std::vector<Element> out;
    for (Element e = 0; e < g.n; ++e) {
        int d = dist[static_cast<std::size_t>(e)];
        if (d < 0) continue;
        if (r.is_infinite() || d <= r.value()) out.push_back(e);
    }
    return out;
}

std::vector<Element> ball(const Structure& s, Element a, const Radius& r) {
    return ball(gaifman(s), a, r);
}

std::vector<Element> ball_union(const GaifmanGraph& g, std::span<const Element> points, const Radius& r) {
    std::vector<char> in(static_cast<std::size_t>(g.n), 0);
    for (Element p : points)
        for (Element e : ball(g, p, r)) in[static_cast<std::size_t>(e)] = 1;
    std::vector<Element> out;
    for (Element e = 0; e < g.n; ++e)
        if (in[static_cast<std::size_t>(e)]) out.push_back(e);
    return out;
}

DegreeProfile degree_profile(const Structure& s) {
    auto g = gaifman(s);
    DegreeProfile profile;
    profile.degrees.resize(static_cast<std::size_t>(g.n));
    for (Element a = 0; a < g.n; ++a) {
        profile.degrees[static_cast<std::size_t>(a)] = g.degree(a);
        profile.max_degree = std::max(profile.max_degree, g.degree(a));
    }
    return profile;
}

std::vector<std::vector<Element>> components(const GaifmanGraph& g) {
    std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
    std::vector<std::vector<Element>> out;
    for (Element a = 0; a < g.n; ++a) {
        if (seen[static_cast<std::size_t>(a)]) continue;
        std::vector<Element> block;
        std::deque<Element> queue{a};
        seen[static_cast<std::size_t>(a)] = 1;
        while (!queue.empty()) {
            Element x = queue.front();
            queue.pop_front();
            block.push_back(x);
            for (Element y : g.adjacency[static_cast<std::size_t>(x)]) {
                if (!seen[static_cast<std::size_t>(y)]) {
                    seen[static_cast<std::size_t>(y)] = 1;
                    queue.push_back(y);
                }
            }
        }
        std::sort(block.begin(), block.end());
        out.push_back(std::move(block));
    }
    return out;
}

std::vector<std::vector<Element>> components(const Structure& s) {
    return components(gaifman(s));
}

InducedSubstructure restrict_to(const Structure& s, std::span<const Element> kept) {
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] < 0 || kept[i] >= s.universe_size)
            throw input_error("element " + std::to_string(kept[i]) + " out of range in restriction");
        if (i > 0 && kept[i] <= kept[i - 1])
            throw input_error("restriction set must be strictly increasing");
    }
    std::vector<Element> old_to_new(static_cast<std::size_t>(s.universe_size), -1);
    for (std::size_t i = 0; i < kept.size(); ++i)
        old_to_new[static_cast<std::size_t>(kept[i])] = static_cast<Element>(i);

    InducedSubstructure out;
    out.kept.assign(kept.begin(), kept.end());
    out.structure.universe_size = static_cast<Element>(kept.size());
    out.structure.signature.relations = s.signature.relations;
    out.structure.tables.resize(s.tables.size());
    for (std::size_t r = 0; r < s.tables.size(); ++r) {
        for (const auto& tuple : s.tables[r]) {
            Tuple image;
            image.reserve(tuple.size());
            bool inside = true;
            for (Element e : tuple) {
                Element m = old_to_new[static_cast<std::size_t>(e)];
                if (m < 0) {
                    inside = false;
                    break;
                }
                image.push_back(m);
            }
            if (inside) out.structure.tables[r].push_back(std::move(image));
        }
    }
    for (std::size_t c = 0; c < s.signature.constants.size(); ++c) {
        Element m = old_to_new[static_cast<std::size_t>(s.constant_values[c])];
        if (m < 0) {
            out.dropped_constants.push_back(s.signature.constants[c]);
        } else {
            out.structure.signature.constants.push_back(s.signature.constants[c]);
            out.structure.constant_values.push_back(m);
        }
    }
    out.structure.normalize();
    return out;
}

PointedNeighborhood pointed_neighborhood(const Structure& s, Element a, const Radius& r) {
    std::vector<Element> pts{a};
    return pointed_neighborhood(s, pts, r);
}

PointedNeighborhood pointed_neighborhood(const Structure& s, std::span<const Element> points, const Radius& r) {
    auto g = gaifman(s);
    auto kept = ball_union(g, points, r);
    auto induced = restrict_to(s, kept);
    std::vector<Element> old_to_new(static_cast<std::size_t>(s.universe_size), -1);
    for (std::size_t i = 0; i < induced.kept.size(); ++i)
        old_to_new[static_cast<std::size_t>(induced.kept[i])] = static_cast<Element>(i);

    PointedNeighborhood out;
    out.kept = std::move(induced.kept);
    out.dropped_constants = std::move(induced.dropped_constants);
    out.pointed.structure = std::move(induced.structure);
    for (Element p : points)
        out.pointed.points.push_back(old_to_new[static_cast<std::size_t>(p)]);
    return out;
}

Structure disjoint_union(const Structure& a, const Structure& b) {
    if (a.signature != b.signature)
        throw signature_mismatch("disjoint union requires equal signatures");
    if (!a.signature.constants.empty())
        throw input_error("disjoint union is not defined for signatures with constants");
    Structure out = a;
    out.universe_size = a.universe_size + b.universe_size;
    for (std::size_t r = 0; r < b.tables.size(); ++r) {
        for (const auto& tuple : b.tables[r]) {
            Tuple shifted = tuple;
            for (Element& e : shifted) e += a.universe_size;
            out.tables[r].push_back(std::move(shifted));
        }
    }
    out.normalize();
    return out;
}

} // namespace hanflab
