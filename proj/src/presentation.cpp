#include "hanflab/presentation.hpp"

#include "hanflab/error.hpp"
#include "hanflab/locality.hpp"
#include "hanflab/parallel.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace hanflab {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > UINT64_MAX / b) return UINT64_MAX;
    return a * b;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t out = 1;
    for (std::uint64_t i = 0; i < exp; ++i) out = saturating_mul(out, base);
    return out;
}

// Largest per-vertex arrangement we will enumerate (8! alternatives).
constexpr std::size_t kMaxLocalDegree = 8;
constexpr Element kMaxLinearUniverse = 8;

/// Positions of a strict total order given as a pair table, or nullopt if
/// the table is not one. Positions equal in-degrees; together with the
/// table size check this pins the table exactly.
std::optional<std::vector<int>> order_positions(Element n, const Table& table) {
    const std::size_t expected = static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2;
    if (n >= 0 && table.size() != expected) return std::nullopt;
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (const auto& t : table) {
        if (t.size() != 2 || t[0] == t[1]) return std::nullopt;
        ++indeg[static_cast<std::size_t>(t[1])];
    }
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (int d : indeg) {
        if (d < 0 || d >= n) return std::nullopt;
        if (seen[static_cast<std::size_t>(d)]++) return std::nullopt;
    }
    for (const auto& t : table)
        if (indeg[static_cast<std::size_t>(t[0])] >= indeg[static_cast<std::size_t>(t[1])]) return std::nullopt;
    return indeg;
}

int neighbor_slot(const std::vector<Element>& sorted_neighbors, Element e) {
    auto it = std::lower_bound(sorted_neighbors.begin(), sorted_neighbors.end(), e);
    if (it == sorted_neighbors.end() || *it != e) return -1;
    return static_cast<int>(it - sorted_neighbors.begin());
}

// --- flat-table hot path -------------------------------------------------

void flatten(const Table& table, std::vector<Element>& out) {
    out.clear();
    for (const auto& t : table) out.insert(out.end(), t.begin(), t.end());
}

/// Filters flat tuples to the kept elements and re-indexes. The index map is
/// monotone on kept elements, so sortedness is preserved.
void restrict_flat(std::span<const Element> flat, int arity, const std::vector<Element>& old_to_new,
                   std::vector<Element>& out) {
    out.clear();
    const std::size_t count = flat.size() / static_cast<std::size_t>(arity);
    for (std::size_t t = 0; t < count; ++t) {
        const Element* tuple = flat.data() + t * static_cast<std::size_t>(arity);
        bool inside = true;
        for (int i = 0; i < arity; ++i) {
            if (old_to_new[static_cast<std::size_t>(tuple[i])] < 0) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        for (int i = 0; i < arity; ++i) out.push_back(old_to_new[static_cast<std::size_t>(tuple[i])]);
    }
}

Table unflatten(std::span<const Element> flat, int arity) {
    Table out;
    const std::size_t count = flat.size() / static_cast<std::size_t>(arity);
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(t * static_cast<std::size_t>(arity)),
                         flat.begin() + static_cast<std::ptrdiff_t>((t + 1) * static_cast<std::size_t>(arity)));
    }
    return out;
}

// --- streams -------------------------------------------------------------

Presentation make_buffer(const PresentationScheme& scheme, const Structure& base) {
    Presentation p;
    p.base = base;
    p.expansion = base;
    p.expansion.signature = scheme.expanded(base.signature);
    p.expansion.tables.emplace_back();
    return p;
}

void assign_table_reusing(Table& out, const Table& src) {
    if (out.size() != src.size()) out.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i];
}

class TableListStream final : public PresentationStream {
public:
    TableListStream(const PresentationScheme& scheme, const Structure& base,
                    std::function<std::vector<Table>()> generate)
        : generate_(std::move(generate)), buffer_(make_buffer(scheme, base)) {}

    std::uint64_t size() override {
        ensure();
        return tables_.size();
    }

    const Presentation& at(std::uint64_t index) override {
        ensure();
        assign_table_reusing(buffer_.expansion.tables.back(), tables_[index]);
        return buffer_;
    }

private:
    void ensure() {
        if (ready_) return;
        tables_ = generate_();
        std::sort(tables_.begin(), tables_.end());
        ready_ = true;
    }

    std::function<std::vector<Table>()> generate_;
    std::vector<Table> tables_;
    bool ready_ = false;
    Presentation buffer_;
};

/// Product over per-vertex alternative blocks; vertex 0 is the most
/// significant digit, so streaming order is lexicographic on the assembled
/// table (every block's tuples start with its vertex).
class PerVertexProductStream final : public PresentationStream {
public:
    PerVertexProductStream(const PresentationScheme& scheme, const Structure& base,
                           std::vector<std::vector<Table>> blocks)
        : blocks_(std::move(blocks)), buffer_(make_buffer(scheme, base)) {
        size_ = 1;
        for (const auto& b : blocks_) size_ = saturating_mul(size_, b.size());
    }

    std::uint64_t size() override { return size_; }

    const Presentation& at(std::uint64_t index) override {
        digits_.resize(blocks_.size());
        std::uint64_t rem = index;
        for (std::size_t v = blocks_.size(); v-- > 0;) {
            std::uint64_t radix = blocks_[v].size();
            digits_[v] = rem % radix;
            rem /= radix;
        }
        Table& out = buffer_.expansion.tables.back();
        std::size_t pos = 0;
        for (std::size_t v = 0; v < blocks_.size(); ++v) {
            for (const auto& tuple : blocks_[v][digits_[v]]) {
                if (pos < out.size()) {
                    out[pos] = tuple;
                } else {
                    out.push_back(tuple);
                }
                ++pos;
            }
        }
        out.resize(pos);
        return buffer_;
    }

private:
    std::vector<std::vector<Table>> blocks_;
    std::vector<std::uint64_t> digits_;
    std::uint64_t size_ = 0;
    Presentation buffer_;
};

class GaifmanLiftStream final : public PresentationStream {
public:
    GaifmanLiftStream(const PresentationScheme& scheme, const Structure& base,
                      std::unique_ptr<PresentationStream> inner)
        : inner_(std::move(inner)), buffer_(make_buffer(scheme, base)) {}

    std::uint64_t size() override { return inner_->size(); }

    const Presentation& at(std::uint64_t index) override {
        const Presentation& p = inner_->at(index);
        assign_table_reusing(buffer_.expansion.tables.back(), p.expansion.tables.back());
        return buffer_;
    }

private:
    std::unique_ptr<PresentationStream> inner_;
    Presentation buffer_;
};

std::vector<std::vector<int>> all_permutations(int k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::vector<std::vector<int>> out;
    do {
        out.push_back(idx);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

} // namespace

std::optional<Table> PresentationScheme::amalgamate_table(const Structure&, const GaifmanGraph&,
                                                          std::span<const Element>, const Table&,
                                                          std::span<const Element>, const Table&) const {
    return std::nullopt;
}

bool PresentationScheme::valid_flat(const Structure& base, const GaifmanGraph& g,
                                    std::span<const Element> flat) const {
    return valid_table(base, g, unflatten(flat, symbol_.arity));
}

Presentation PresentationScheme::make_presentation(const Structure& base, Table table) const {
    Presentation p;
    p.base = base;
    p.expansion = base;
    p.expansion.signature = expanded(base.signature);
    std::sort(table.begin(), table.end());
    table.erase(std::unique(table.begin(), table.end()), table.end());
    p.expansion.tables.push_back(std::move(table));
    return p;
}

bool PresentationScheme::validate_presentation(const Presentation& p) const {
    if (!in_class(p.base))
        throw out_of_class("structure outside the class of scheme '" + name_ + "'");
    if (p.expansion.signature != expanded(p.base.signature))
        throw input_error("expansion signature does not extend the base by '" + symbol_.name + "'");
    if (p.expansion.universe_size != p.base.universe_size)
        throw input_error("expansion universe differs from the base");
    for (std::size_t r = 0; r < p.base.tables.size(); ++r)
        if (p.expansion.tables[r] != p.base.tables[r])
            throw input_error("expansion disagrees with the base on relation '" +
                              p.base.signature.relations[r].name + "'");
    if (p.expansion.constant_values != p.base.constant_values)
        throw input_error("expansion disagrees with the base on constants");
    return valid_table(p.base, gaifman(p.base), p.expansion.tables.back());
}

bool is_simple_graph(const Structure& a) {
    if (a.signature.relations.size() != 1 || a.signature.relations[0].arity != 2) return false;
    if (!a.signature.constants.empty()) return false;
    const Table& t = a.tables[0];
    for (const auto& e : t) {
        if (e[0] == e[1]) return false;
        Tuple flipped{e[1], e[0]};
        if (!std::binary_search(t.begin(), t.end(), flipped)) return false;
    }
    return true;
}

Structure gaifman_as_graph(const Structure& a) {
    Structure g;
    g.signature = graph_signature();
    g.universe_size = a.universe_size;
    g.tables.resize(1);
    for (const auto& [x, y] : gaifman(a).edges()) {
        g.tables[0].push_back({x, y});
        g.tables[0].push_back({y, x});
    }
    g.normalize();
    return g;
}

namespace {

// --- linear ---------------------------------------------------------------

std::vector<Table> permutation_order_tables(Element n, const std::function<bool(const std::vector<int>&)>& keep) {
    // pos[a] = rank of element a; the table is {(a,b) : pos[a] < pos[b]}.
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (Element i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = i;
    std::vector<Table> out;
    std::sort(pos.begin(), pos.end());
    do {
        if (keep && !keep(pos)) continue;
        Table table;
        for (Element a = 0; a < n; ++a)
            for (Element b = 0; b < n; ++b)
                if (a != b && pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)])
                    table.push_back({a, b});
        std::sort(table.begin(), table.end());
        out.push_back(std::move(table));
    } while (std::next_permutation(pos.begin(), pos.end()));
    return out;
}

class LinearScheme final : public PresentationScheme {
public:
    LinearScheme() : PresentationScheme("linear", {"L", 2}, std::nullopt) {}

    bool in_class(const Structure&) const override { return true; }

    bool valid_table(const Structure& base, const GaifmanGraph&, const Table& table) const override {
        return order_positions(base.universe_size, table).has_value();
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        Formula irr = f_forall("x", f_not(f_atom(sig, "L", {"x", "x"})));
        Formula trans = f_forall(
            "x", f_forall("y", f_forall("z", f_implies(f_and(f_atom(sig, "L", {"x", "y"}),
                                                             f_atom(sig, "L", {"y", "z"})),
                                                       f_atom(sig, "L", {"x", "z"})))));
        Formula total = f_forall(
            "x", f_forall("y", f_or_all(sig, {f_equal(sig, "x", "y"), f_atom(sig, "L", {"x", "y"}),
                                              f_atom(sig, "L", {"y", "x"})})));
        return f_and_all(sig, {std::move(irr), std::move(trans), std::move(total)});
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        if (a.universe_size > kMaxLinearUniverse)
            throw budget_exceeded("linear presentations of a " + std::to_string(a.universe_size) +
                                  "-element structure exceed the enumeration cap");
        Element n = a.universe_size;
        return std::make_unique<TableListStream>(*this, a,
                                                 [n]() { return permutation_order_tables(n, nullptr); });
    }

    std::optional<Table> amalgamate_table(const Structure& a, const GaifmanGraph&,
                                          std::span<const Element> b_set, const Table& b_table,
                                          std::span<const Element> c_set, const Table& c_table) const override {
        // Concatenate: B in its own order, then C, then everything else.
        auto pos_b = order_positions(static_cast<Element>(b_set.size()), b_table);
        auto pos_c = order_positions(static_cast<Element>(c_set.size()), c_table);
        if (!pos_b || !pos_c) return std::nullopt;
        std::vector<Element> sequence(b_set.size());
        for (std::size_t i = 0; i < b_set.size(); ++i)
            sequence[static_cast<std::size_t>((*pos_b)[i])] = b_set[i];
        std::vector<Element> seq_c(c_set.size());
        for (std::size_t i = 0; i < c_set.size(); ++i)
            seq_c[static_cast<std::size_t>((*pos_c)[i])] = c_set[i];
        sequence.insert(sequence.end(), seq_c.begin(), seq_c.end());
        std::vector<char> placed(static_cast<std::size_t>(a.universe_size), 0);
        for (Element e : sequence) placed[static_cast<std::size_t>(e)] = 1;
        for (Element e = 0; e < a.universe_size; ++e)
            if (!placed[static_cast<std::size_t>(e)]) sequence.push_back(e);
        std::vector<int> pos(static_cast<std::size_t>(a.universe_size));
        for (std::size_t i = 0; i < sequence.size(); ++i) pos[static_cast<std::size_t>(sequence[i])] = static_cast<int>(i);
        Table table;
        for (Element x = 0; x < a.universe_size; ++x)
            for (Element y = 0; y < a.universe_size; ++y)
                if (x != y && pos[static_cast<std::size_t>(x)] < pos[static_cast<std::size_t>(y)])
                    table.push_back({x, y});
        return table;
    }
};

// --- traversal -------------------------------------------------------------

class TraversalScheme final : public PresentationScheme {
public:
    TraversalScheme() : PresentationScheme("traversal", {"L", 2}, std::nullopt) {}

    bool in_class(const Structure& a) const override { return is_simple_graph(a); }

    bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const override {
        auto pos = order_positions(base.universe_size, table);
        if (!pos) return false;
        return traversal_positions_ok(g, *pos);
    }

    static bool traversal_positions_ok(const GaifmanGraph& g, const std::vector<int>& pos) {
        // Components occupy contiguous intervals and every non-first vertex
        // of a component has an earlier neighbor.
        for (const auto& comp : components(g)) {
            int lo = static_cast<int>(g.n), hi = -1;
            for (Element v : comp) {
                lo = std::min(lo, pos[static_cast<std::size_t>(v)]);
                hi = std::max(hi, pos[static_cast<std::size_t>(v)]);
            }
            if (hi - lo + 1 != static_cast<int>(comp.size())) return false;
            for (Element v : comp) {
                if (pos[static_cast<std::size_t>(v)] == lo) continue;
                bool earlier = false;
                for (Element u : g.adjacency[static_cast<std::size_t>(v)]) {
                    if (pos[static_cast<std::size_t>(u)] < pos[static_cast<std::size_t>(v)]) {
                        earlier = true;
                        break;
                    }
                }
                if (!earlier) return false;
            }
        }
        return true;
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        Formula order = LinearScheme().validity_sentence(base);
        Formula adj_ac = adjacency_formula(sig, "a", "c", "L");
        Formula adj_db = adjacency_formula(sig, "d", "b", "L");
        Formula cond = f_forall(
            "a",
            f_forall("b", f_forall("c", f_implies(f_and_all(sig, {f_atom(sig, "L", {"a", "b"}),
                                                                  f_atom(sig, "L", {"b", "c"}), std::move(adj_ac)}),
                                                  f_exists("d", f_and(f_atom(sig, "L", {"d", "b"}),
                                                                      std::move(adj_db)))))));
        return f_and(std::move(order), std::move(cond));
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        if (!in_class(a)) throw out_of_class("traversal presentations require a simple graph");
        if (a.universe_size > kMaxLinearUniverse)
            throw budget_exceeded("traversal presentations of a " + std::to_string(a.universe_size) +
                                  "-element graph exceed the enumeration cap");
        Element n = a.universe_size;
        GaifmanGraph g = gaifman(a);
        return std::make_unique<TableListStream>(*this, a, [n, g = std::move(g)]() {
            return permutation_order_tables(
                n, [&g](const std::vector<int>& pos) { return traversal_positions_ok(g, pos); });
        });
    }
};

// --- local order ------------------------------------------------------------

class LocalOrderScheme final : public PresentationScheme {
public:
    LocalOrderScheme() : PresentationScheme("local-order", {"O", 3}, 2) {}

    bool in_class(const Structure& a) const override { return is_simple_graph(a); }

    bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const override {
        std::vector<Element> flat;
        flatten(table, flat);
        return valid_flat(base, g, flat);
    }

    bool valid_flat(const Structure& base, const GaifmanGraph& g, std::span<const Element> flat) const override {
        const Element n = base.universe_size;
        const std::size_t count = flat.size() / 3;
        std::size_t t = 0;
        std::vector<int> indeg;
        std::vector<int> seen;
        std::vector<std::size_t> per_vertex(static_cast<std::size_t>(n), 0);
        while (t < count) {
            Element a = flat[3 * t];
            std::size_t begin = t;
            while (t < count && flat[3 * t] == a) ++t;
            const auto& nbrs = g.adjacency[static_cast<std::size_t>(a)];
            const int d = static_cast<int>(nbrs.size());
            per_vertex[static_cast<std::size_t>(a)] = t - begin;
            if (t - begin != static_cast<std::size_t>(d) * (static_cast<std::size_t>(d) - 1) / 2) return false;
            indeg.assign(static_cast<std::size_t>(d), 0);
            for (std::size_t k = begin; k < t; ++k) {
                Element b = flat[3 * k + 1], c = flat[3 * k + 2];
                if (b == c) return false;
                int bi = neighbor_slot(nbrs, b), ci = neighbor_slot(nbrs, c);
                if (bi < 0 || ci < 0) return false;
                ++indeg[static_cast<std::size_t>(ci)];
            }
            seen.assign(static_cast<std::size_t>(d), 0);
            for (int x : indeg) {
                if (x < 0 || x >= d) return false;
                if (seen[static_cast<std::size_t>(x)]++) return false;
            }
            for (std::size_t k = begin; k < t; ++k) {
                int bi = neighbor_slot(nbrs, flat[3 * k + 1]), ci = neighbor_slot(nbrs, flat[3 * k + 2]);
                if (indeg[static_cast<std::size_t>(bi)] >= indeg[static_cast<std::size_t>(ci)]) return false;
            }
        }
        for (Element a = 0; a < n; ++a) {
            std::size_t d = g.degree(a);
            if (per_vertex[static_cast<std::size_t>(a)] != d * (d - 1) / 2) return false;
        }
        return true;
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        auto adj = [&](const char* u, const char* v) { return adjacency_formula(sig, u, v, "O"); };
        Formula into = f_forall(
            "a", f_forall("b", f_forall("c", f_implies(f_atom(sig, "O", {"a", "b", "c"}),
                                                       f_and(adj("a", "b"), adj("a", "c"))))));
        Formula irr = f_forall("a", f_forall("b", f_not(f_atom(sig, "O", {"a", "b", "b"}))));
        Formula trans = f_forall(
            "a", f_forall("b", f_forall("c", f_forall("d", f_implies(f_and(f_atom(sig, "O", {"a", "b", "c"}),
                                                                           f_atom(sig, "O", {"a", "c", "d"})),
                                                                     f_atom(sig, "O", {"a", "b", "d"}))))));
        Formula total = f_forall(
            "a", f_forall("b", f_forall("c", f_implies(f_and_all(sig, {adj("a", "b"), adj("a", "c"),
                                                                       f_not(f_equal(sig, "b", "c"))}),
                                                       f_or(f_atom(sig, "O", {"a", "b", "c"}),
                                                            f_atom(sig, "O", {"a", "c", "b"}))))));
        return f_and_all(sig, {std::move(into), std::move(irr), std::move(trans), std::move(total)});
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        if (!in_class(a)) throw out_of_class("local orders require a simple graph");
        GaifmanGraph g = gaifman(a);
        std::vector<std::vector<Table>> blocks(static_cast<std::size_t>(a.universe_size));
        for (Element v = 0; v < a.universe_size; ++v) {
            const auto& nbrs = g.adjacency[static_cast<std::size_t>(v)];
            if (nbrs.size() > kMaxLocalDegree)
                throw budget_exceeded("local orders at degree " + std::to_string(nbrs.size()) +
                                      " exceed the enumeration cap");
            std::vector<Table>& alts = blocks[static_cast<std::size_t>(v)];
            for (const auto& perm : all_permutations(static_cast<int>(nbrs.size()))) {
                Table block;
                for (std::size_t i = 0; i < perm.size(); ++i)
                    for (std::size_t j = i + 1; j < perm.size(); ++j)
                        block.push_back({v, nbrs[static_cast<std::size_t>(perm[i])],
                                         nbrs[static_cast<std::size_t>(perm[j])]});
                std::sort(block.begin(), block.end());
                alts.push_back(std::move(block));
            }
            std::sort(alts.begin(), alts.end());
        }
        return std::make_unique<PerVertexProductStream>(*this, a, std::move(blocks));
    }

    std::optional<Table> amalgamate_table(const Structure& a, const GaifmanGraph& g,
                                          std::span<const Element> b_set, const Table& b_table,
                                          std::span<const Element> c_set, const Table& c_table) const override {
        std::vector<std::vector<Element>> ordered(static_cast<std::size_t>(a.universe_size));
        if (!constrained_orders(g, b_set, b_table, ordered)) return std::nullopt;
        if (!constrained_orders(g, c_set, c_table, ordered)) return std::nullopt;
        Table table;
        for (Element v = 0; v < a.universe_size; ++v) {
            std::vector<Element> seq = ordered[static_cast<std::size_t>(v)];
            std::vector<char> used(static_cast<std::size_t>(a.universe_size), 0);
            for (Element e : seq) used[static_cast<std::size_t>(e)] = 1;
            for (Element u : g.adjacency[static_cast<std::size_t>(v)])
                if (!used[static_cast<std::size_t>(u)]) seq.push_back(u);
            for (std::size_t i = 0; i < seq.size(); ++i)
                for (std::size_t j = i + 1; j < seq.size(); ++j) table.push_back({v, seq[i], seq[j]});
        }
        return table;
    }

private:
    /// Recovers the per-vertex neighbor order demanded by a local table
    /// (local indices) and writes it in global element ids.
    static bool constrained_orders(const GaifmanGraph& g, std::span<const Element> set, const Table& table,
                                   std::vector<std::vector<Element>>& ordered) {
        for (std::size_t lv = 0; lv < set.size(); ++lv) {
            Element v = set[lv];
            std::vector<Element> local_nbrs;
            for (Element u : set)
                if (u != v && g.adjacent(v, u)) local_nbrs.push_back(u);
            std::vector<int> indeg(local_nbrs.size(), 0);
            for (const auto& t : table) {
                if (t[0] != static_cast<Element>(lv)) continue;
                Element y_global = set[static_cast<std::size_t>(t[2])];
                int slot = neighbor_slot(local_nbrs, y_global);
                if (slot < 0) return false;
                ++indeg[static_cast<std::size_t>(slot)];
            }
            std::vector<Element>& seq = ordered[static_cast<std::size_t>(v)];
            seq.assign(local_nbrs.size(), -1);
            for (std::size_t i = 0; i < local_nbrs.size(); ++i) {
                if (indeg[i] < 0 || static_cast<std::size_t>(indeg[i]) >= seq.size()) return false;
                seq[static_cast<std::size_t>(indeg[i])] = local_nbrs[i];
            }
            for (Element e : seq)
                if (e < 0) return false;
        }
        return true;
    }
};

// --- circular successor ------------------------------------------------------

class CircularSuccessorScheme final : public PresentationScheme {
public:
    CircularSuccessorScheme() : PresentationScheme("circular-successor", {"S", 3}, 2) {}

    bool in_class(const Structure& a) const override { return is_simple_graph(a); }

    bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const override {
        std::vector<Element> flat;
        flatten(table, flat);
        return valid_flat(base, g, flat);
    }

    /// S names, at each vertex, a successor permutation of its neighbors
    /// (a union of circular runs; single full cycles are not required).
    bool valid_flat(const Structure& base, const GaifmanGraph& g, std::span<const Element> flat) const override {
        const Element n = base.universe_size;
        const std::size_t count = flat.size() / 3;
        std::size_t t = 0;
        std::vector<int> out_seen, in_seen;
        std::vector<std::size_t> per_vertex(static_cast<std::size_t>(n), 0);
        while (t < count) {
            Element a = flat[3 * t];
            std::size_t begin = t;
            while (t < count && flat[3 * t] == a) ++t;
            const auto& nbrs = g.adjacency[static_cast<std::size_t>(a)];
            const int d = static_cast<int>(nbrs.size());
            per_vertex[static_cast<std::size_t>(a)] = t - begin;
            if (t - begin != static_cast<std::size_t>(d)) return false;
            out_seen.assign(static_cast<std::size_t>(d), 0);
            in_seen.assign(static_cast<std::size_t>(d), 0);
            for (std::size_t k = begin; k < t; ++k) {
                int bi = neighbor_slot(nbrs, flat[3 * k + 1]), ci = neighbor_slot(nbrs, flat[3 * k + 2]);
                if (bi < 0 || ci < 0) return false;
                if (out_seen[static_cast<std::size_t>(bi)]++) return false;
                if (in_seen[static_cast<std::size_t>(ci)]++) return false;
            }
        }
        for (Element a = 0; a < n; ++a)
            if (per_vertex[static_cast<std::size_t>(a)] != g.degree(a)) return false;
        return true;
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        auto adj = [&](const char* u, const char* v) { return adjacency_formula(sig, u, v, "S"); };
        Formula into = f_forall(
            "a", f_forall("b", f_forall("c", f_implies(f_atom(sig, "S", {"a", "b", "c"}),
                                                       f_and(adj("a", "b"), adj("a", "c"))))));
        Formula total =
            f_forall("a", f_forall("b", f_implies(adj("a", "b"), f_exists("c", f_atom(sig, "S", {"a", "b", "c"})))));
        Formula functional = f_forall(
            "a", f_forall("b", f_forall("c", f_forall("d", f_implies(f_and(f_atom(sig, "S", {"a", "b", "c"}),
                                                                           f_atom(sig, "S", {"a", "b", "d"})),
                                                                     f_equal(sig, "c", "d"))))));
        Formula injective = f_forall(
            "a", f_forall("b", f_forall("c", f_forall("d", f_implies(f_and(f_atom(sig, "S", {"a", "c", "b"}),
                                                                           f_atom(sig, "S", {"a", "d", "b"})),
                                                                     f_equal(sig, "c", "d"))))));
        Formula onto =
            f_forall("a", f_forall("b", f_implies(adj("a", "b"), f_exists("c", f_atom(sig, "S", {"a", "c", "b"})))));
        return f_and_all(sig, {std::move(into), std::move(total), std::move(functional), std::move(injective),
                               std::move(onto)});
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        if (!in_class(a)) throw out_of_class("circular successors require a simple graph");
        GaifmanGraph g = gaifman(a);
        std::vector<std::vector<Table>> blocks(static_cast<std::size_t>(a.universe_size));
        for (Element v = 0; v < a.universe_size; ++v) {
            const auto& nbrs = g.adjacency[static_cast<std::size_t>(v)];
            if (nbrs.size() > kMaxLocalDegree)
                throw budget_exceeded("circular successors at degree " + std::to_string(nbrs.size()) +
                                      " exceed the enumeration cap");
            std::vector<Table>& alts = blocks[static_cast<std::size_t>(v)];
            for (const auto& perm : all_permutations(static_cast<int>(nbrs.size()))) {
                Table block;
                for (std::size_t i = 0; i < perm.size(); ++i)
                    block.push_back({v, nbrs[i], nbrs[static_cast<std::size_t>(perm[i])]});
                std::sort(block.begin(), block.end());
                alts.push_back(std::move(block));
            }
            std::sort(alts.begin(), alts.end());
            alts.erase(std::unique(alts.begin(), alts.end()), alts.end());
        }
        return std::make_unique<PerVertexProductStream>(*this, a, std::move(blocks));
    }

    std::optional<Table> amalgamate_table(const Structure& a, const GaifmanGraph& g,
                                          std::span<const Element> b_set, const Table& b_table,
                                          std::span<const Element> c_set, const Table& c_table) const override {
        // Successor maps: the constrained part comes from the local tables,
        // everything else is a fixed point.
        std::vector<std::map<Element, Element>> succ(static_cast<std::size_t>(a.universe_size));
        if (!constrained_successors(b_set, b_table, succ)) return std::nullopt;
        if (!constrained_successors(c_set, c_table, succ)) return std::nullopt;
        Table table;
        for (Element v = 0; v < a.universe_size; ++v) {
            auto& s = succ[static_cast<std::size_t>(v)];
            for (Element u : g.adjacency[static_cast<std::size_t>(v)])
                if (!s.count(u)) s[u] = u;
            for (const auto& [b, c] : s) table.push_back({v, b, c});
        }
        return table;
    }

private:
    static bool constrained_successors(std::span<const Element> set, const Table& table,
                                       std::vector<std::map<Element, Element>>& succ) {
        for (const auto& t : table) {
            Element v = set[static_cast<std::size_t>(t[0])];
            Element b = set[static_cast<std::size_t>(t[1])];
            Element c = set[static_cast<std::size_t>(t[2])];
            if (!succ[static_cast<std::size_t>(v)].emplace(b, c).second) return false;
        }
        return true;
    }
};

// --- component coloring ------------------------------------------------------

class ComponentColoringScheme final : public PresentationScheme {
public:
    ComponentColoringScheme() : PresentationScheme("component-coloring", {"P", 1}, 1) {}

    bool in_class(const Structure&) const override { return true; }

    bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const override {
        std::vector<char> in_p(static_cast<std::size_t>(base.universe_size), 0);
        for (const auto& t : table) in_p[static_cast<std::size_t>(t[0])] = 1;
        for (const auto& comp : components(g)) {
            std::size_t colored = 0;
            for (Element v : comp) colored += in_p[static_cast<std::size_t>(v)];
            if (colored != 0 && colored != comp.size()) return false;
        }
        return true;
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        Formula adj = adjacency_formula(sig, "x", "y", "P");
        return f_forall("x", f_forall("y", f_implies(std::move(adj),
                                                     f_iff(f_atom(sig, "P", {"x"}), f_atom(sig, "P", {"y"})))));
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        auto comps = components(a);
        if (comps.size() > 20)
            throw budget_exceeded("component colorings over " + std::to_string(comps.size()) +
                                  " components exceed the enumeration cap");
        return std::make_unique<TableListStream>(*this, a, [comps]() {
            std::vector<Table> out;
            for (std::uint64_t mask = 0; mask < (1ull << comps.size()); ++mask) {
                Table table;
                for (std::size_t k = 0; k < comps.size(); ++k)
                    if (mask & (1ull << k))
                        for (Element v : comps[k]) table.push_back({v});
                std::sort(table.begin(), table.end());
                out.push_back(std::move(table));
            }
            return out;
        });
    }
};

// --- gaifman lift -------------------------------------------------------------

class GaifmanLiftScheme final : public PresentationScheme {
public:
    explicit GaifmanLiftScheme(std::shared_ptr<const PresentationScheme> inner)
        : PresentationScheme("gaifman-lift:" + inner->name(), inner->symbol(), inner->declared_nu()),
          inner_(std::move(inner)) {}

    bool in_class(const Structure&) const override { return true; }

    bool valid_table(const Structure& base, const GaifmanGraph& g, const Table& table) const override {
        return inner_->valid_table(gaifman_as_graph(base), g, table);
    }

    bool valid_flat(const Structure& base, const GaifmanGraph& g, std::span<const Element> flat) const override {
        return inner_->valid_flat(gaifman_as_graph(base), g, flat);
    }

    Formula validity_sentence(const Signature& base) const override {
        Signature sig = expanded(base);
        Formula inner_sentence = inner_->validity_sentence(graph_signature());
        return lift(*inner_sentence.root, sig);
    }

    std::unique_ptr<PresentationStream> enumerate(const Structure& a) const override {
        return std::make_unique<GaifmanLiftStream>(*this, a, inner_->enumerate(gaifman_as_graph(a)));
    }

private:
    Formula lift(const FormulaNode& node, const Signature& target) const {
        using Kind = FormulaNode::Kind;
        switch (node.kind) {
            case Kind::True: return f_true(target);
            case Kind::False: return f_false(target);
            case Kind::Atom: {
                if (node.relation_name == "E")
                    return adjacency_formula(target, node.terms[0].name, node.terms[1].name, symbol_.name);
                std::vector<std::string> names;
                for (const auto& t : node.terms) names.push_back(t.name);
                return f_atom(target, node.relation_name, names);
            }
            case Kind::Equal: return f_equal(target, node.terms[0].name, node.terms[1].name);
            case Kind::Not: return f_not(lift(*node.left, target));
            case Kind::And: return f_and(lift(*node.left, target), lift(*node.right, target));
            case Kind::Or: return f_or(lift(*node.left, target), lift(*node.right, target));
            case Kind::Implies: return f_implies(lift(*node.left, target), lift(*node.right, target));
            case Kind::Iff: return f_iff(lift(*node.left, target), lift(*node.right, target));
            case Kind::Exists: return f_exists(node.variable, lift(*node.left, target));
            case Kind::Forall: return f_forall(node.variable, lift(*node.left, target));
        }
        throw Error("internal", "unreachable formula kind");
    }

    std::shared_ptr<const PresentationScheme> inner_;
};

} // namespace

std::shared_ptr<const PresentationScheme> scheme_by_name(const std::string& name) {
    if (name == "linear") return std::make_shared<LinearScheme>();
    if (name == "traversal") return std::make_shared<TraversalScheme>();
    if (name == "local-order") return std::make_shared<LocalOrderScheme>();
    if (name == "circular-successor") return std::make_shared<CircularSuccessorScheme>();
    if (name == "component-coloring") return std::make_shared<ComponentColoringScheme>();
    const std::string prefix = "gaifman-lift:";
    if (name.rfind(prefix, 0) == 0) return std::make_shared<GaifmanLiftScheme>(scheme_by_name(name.substr(prefix.size())));
    throw input_error("unknown presentation scheme '" + name + "'");
}

std::vector<std::string> core_scheme_names() {
    return {"linear", "traversal", "local-order", "circular-successor", "component-coloring"};
}

// --- checkers ------------------------------------------------------------

namespace {

std::string corpus_note(std::span<const Structure> corpus) {
    Element max_n = 0;
    for (const auto& s : corpus) max_n = std::max(max_n, s.universe_size);
    return std::to_string(corpus.size()) + " structures, max universe " + std::to_string(max_n);
}

std::vector<Element> mask_to_elements(std::uint32_t mask, Element n) {
    std::vector<Element> out;
    for (Element e = 0; e < n; ++e)
        if (mask & (1u << e)) out.push_back(e);
    return out;
}

std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        std::uint64_t v = rng();
        if (v < limit) return v % bound;
    }
}

/// All tuples over 0..n-1 of the given arity, in lexicographic order.
std::vector<Tuple> tuple_space(Element n, int arity) {
    std::vector<Tuple> out;
    Tuple current(static_cast<std::size_t>(arity), 0);
    std::uint64_t total = saturating_pow(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(arity));
    for (std::uint64_t i = 0; i < total; ++i) {
        out.push_back(current);
        for (int k = arity - 1; k >= 0; --k) {
            if (++current[static_cast<std::size_t>(k)] < n) break;
            current[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

} // namespace

ElementaryReport check_elementary(const PresentationScheme& s, std::span<const Structure> corpus,
                                  std::uint64_t exhaustive_cap, std::uint64_t samples_per_structure,
                                  std::uint64_t seed) {
    ElementaryReport report;
    report.corpus_note = corpus_note(corpus);
    for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
        const Structure& a = corpus[ci];
        if (!s.in_class(a)) throw out_of_class("corpus structure outside the class of scheme '" + s.name() + "'");
        GaifmanGraph g = gaifman(a);
        Formula theta = s.validity_sentence(a.signature);
        auto tuples = tuple_space(a.universe_size, s.symbol().arity);
        const std::size_t k = tuples.size();

        Presentation probe;
        probe.base = a;
        probe.expansion = a;
        probe.expansion.signature = s.expanded(a.signature);
        probe.expansion.tables.emplace_back();

        auto examine = [&](const Table& table) -> bool {
            probe.expansion.tables.back() = table;
            bool checker = s.valid_table(a, g, table);
            bool sentence = eval(probe.expansion, theta);
            ++report.expansions_checked;
            if (checker != sentence) {
                report.agree = false;
                report.witness = ElementaryDisagreement{probe.expansion, checker, sentence};
                return false;
            }
            return true;
        };

        bool exhaustive_here = k < 63 && (1ull << k) <= exhaustive_cap;
        if (exhaustive_here) {
            for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
                Table table;
                for (std::size_t t = 0; t < k; ++t)
                    if (mask & (1ull << t)) table.push_back(tuples[t]);
                if (!examine(table)) return report;
            }
        } else {
            report.exhaustive = false;
            // Every enumerated presentation (capped), single-tuple edits of a
            // few of them, and seeded random tables.
            auto stream = s.enumerate(a);
            std::uint64_t take = std::min<std::uint64_t>(stream->size(), samples_per_structure);
            std::vector<Table> bases;
            for (std::uint64_t i = 0; i < take; ++i) {
                Table table = stream->at(i).presentation_table();
                if (!examine(table)) return report;
                if (bases.size() < 8) bases.push_back(std::move(table));
            }
            for (const auto& base_table : bases) {
                for (std::size_t t = 0; t < k; ++t) {
                    Table mutated = base_table;
                    auto it = std::lower_bound(mutated.begin(), mutated.end(), tuples[t]);
                    if (it != mutated.end() && *it == tuples[t]) {
                        mutated.erase(it);
                    } else {
                        mutated.insert(it, tuples[t]);
                    }
                    if (!examine(mutated)) return report;
                }
            }
            std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (ci + 1)));
            for (std::uint64_t sample = 0; sample < samples_per_structure; ++sample) {
                std::uint64_t want = rand_below(rng, static_cast<std::uint64_t>(k) + 1);
                std::vector<std::size_t> picks(k);
                for (std::size_t t = 0; t < k; ++t) picks[t] = t;
                for (std::uint64_t i = 0; i < want; ++i) {
                    std::uint64_t j = i + rand_below(rng, k - i);
                    std::swap(picks[i], picks[j]);
                }
                Table table;
                for (std::uint64_t i = 0; i < want; ++i) table.push_back(tuples[picks[i]]);
                std::sort(table.begin(), table.end());
                if (!examine(table)) return report;
            }
        }
    }
    return report;
}

NeighborhoodBoundReport check_neighborhood_bound(const PresentationScheme& s, std::span<const Structure> corpus,
                                                 int nu, int workers) {
    if (nu < 1) throw usage_error("the neighborhood expansion factor must be >= 1");
    NeighborhoodBoundReport report;
    report.corpus_note = corpus_note(corpus);
    for (const Structure& a : corpus) {
        if (!s.in_class(a)) throw out_of_class("corpus structure outside the class of scheme '" + s.name() + "'");
        GaifmanGraph g = gaifman(a);
        std::vector<std::vector<int>> dist;
        for (Element e = 0; e < a.universe_size; ++e) dist.push_back(bfs_distances(g, e));

        auto probe = s.enumerate(a);
        const std::uint64_t total = probe->size();

        struct Hit {
            std::uint64_t index;
            Structure expansion;
            Element element, neighbor;
            int distance;
        };
        auto chunks = run_chunked<std::optional<Hit>>(total, workers, [&](std::uint64_t begin, std::uint64_t end) {
            auto stream = s.enumerate(a);
            for (std::uint64_t i = begin; i < end; ++i) {
                const Presentation& p = stream->at(i);
                // Base tuples only reach distance 1 <= nu; the presentation
                // relation is the only possible violator.
                for (const auto& tuple : p.presentation_table()) {
                    for (std::size_t x = 0; x < tuple.size(); ++x) {
                        for (std::size_t y = 0; y < tuple.size(); ++y) {
                            if (x == y || tuple[x] == tuple[y]) continue;
                            int d = dist[static_cast<std::size_t>(tuple[x])][static_cast<std::size_t>(tuple[y])];
                            if (d < 0 || d > nu)
                                return std::optional<Hit>(Hit{i, p.expansion, tuple[x], tuple[y], d});
                        }
                    }
                }
            }
            return std::optional<Hit>();
        });
        report.presentations_checked += total;
        std::optional<Hit> first;
        for (auto& c : chunks) {
            if (c && (!first || c->index < first->index)) first = std::move(c);
        }
        if (first) {
            report.pass = false;
            report.witness =
                NeighborhoodBoundWitness{a, std::move(first->expansion), first->element, first->neighbor,
                                         first->distance};
            return report;
        }
    }
    return report;
}

DegreeBoundReport check_degree_bound(const PresentationScheme& s, std::span<const Structure> corpus,
                                     const std::function<std::uint64_t(std::uint64_t)>& bound_for_degree,
                                     int workers) {
    DegreeBoundReport report;
    report.corpus_note = corpus_note(corpus);
    for (const Structure& a : corpus) {
        if (!s.in_class(a)) throw out_of_class("corpus structure outside the class of scheme '" + s.name() + "'");
        if (a.universe_size > 64) throw budget_exceeded("degree-bound checks are capped at 64 elements");
        GaifmanGraph g = gaifman(a);
        std::uint64_t base_degree = degree_profile(a).max_degree;
        std::uint64_t bound = bound_for_degree(base_degree);

        std::vector<std::uint64_t> base_rows(static_cast<std::size_t>(a.universe_size), 0);
        for (Element v = 0; v < a.universe_size; ++v)
            for (Element u : g.adjacency[static_cast<std::size_t>(v)])
                base_rows[static_cast<std::size_t>(v)] |= (1ull << u);

        auto probe = s.enumerate(a);
        const std::uint64_t total = probe->size();

        struct Hit {
            std::uint64_t index;
            Structure expansion;
            Element element;
            std::uint64_t degree;
        };
        auto chunks = run_chunked<std::optional<Hit>>(total, workers, [&](std::uint64_t begin, std::uint64_t end) {
            auto stream = s.enumerate(a);
            std::vector<std::uint64_t> rows;
            for (std::uint64_t i = begin; i < end; ++i) {
                const Presentation& p = stream->at(i);
                rows = base_rows;
                for (const auto& tuple : p.presentation_table()) {
                    for (std::size_t x = 0; x < tuple.size(); ++x)
                        for (std::size_t y = 0; y < tuple.size(); ++y)
                            if (tuple[x] != tuple[y]) rows[static_cast<std::size_t>(tuple[x])] |= (1ull << tuple[y]);
                }
                for (Element v = 0; v < a.universe_size; ++v) {
                    auto deg = static_cast<std::uint64_t>(__builtin_popcountll(rows[static_cast<std::size_t>(v)]));
                    if (deg > bound) return std::optional<Hit>(Hit{i, p.expansion, v, deg});
                }
            }
            return std::optional<Hit>();
        });
        report.presentations_checked += total;
        std::optional<Hit> first;
        for (auto& c : chunks) {
            if (c && (!first || c->index < first->index)) first = std::move(c);
        }
        if (first) {
            report.pass = false;
            report.witness = DegreeBoundWitness{a, std::move(first->expansion), first->element, first->degree, bound};
            return report;
        }
    }
    return report;
}

DegreeBoundReport check_degree_bound(const PresentationScheme& s, std::span<const Structure> corpus, int workers) {
    if (!s.declared_nu())
        throw usage_error("scheme '" + s.name() + "' declares no expansion factor; pass an explicit degree bound");
    int nu = *s.declared_nu();
    return check_degree_bound(
        s, corpus,
        [nu](std::uint64_t d) { return saturating_pow(d, static_cast<std::uint64_t>(nu)); }, workers);
}

LocalizationReport check_localization(const PresentationScheme& s, std::span<const Structure> corpus, int workers) {
    LocalizationReport report;
    report.corpus_note = corpus_note(corpus);
    const int arity = s.symbol().arity;
    for (const Structure& a : corpus) {
        if (!s.in_class(a)) throw out_of_class("corpus structure outside the class of scheme '" + s.name() + "'");
        if (a.universe_size > 12) throw budget_exceeded("localization checks are capped at 12 elements");
        const Element n = a.universe_size;
        const std::uint32_t subsets = 1u << n;

        struct SubsetContext {
            Structure restricted;
            GaifmanGraph g;
            std::vector<Element> old_to_new;
            std::vector<Element> kept;
        };
        std::vector<SubsetContext> contexts(subsets);
        for (std::uint32_t mask = 0; mask < subsets; ++mask) {
            auto kept = mask_to_elements(mask, n);
            auto induced = restrict_to(a, kept);
            SubsetContext ctx;
            ctx.old_to_new.assign(static_cast<std::size_t>(n), -1);
            for (std::size_t i = 0; i < induced.kept.size(); ++i)
                ctx.old_to_new[static_cast<std::size_t>(induced.kept[i])] = static_cast<Element>(i);
            ctx.g = gaifman(induced.structure);
            ctx.restricted = std::move(induced.structure);
            ctx.kept = std::move(induced.kept);
            contexts[mask] = std::move(ctx);
        }

        auto probe = s.enumerate(a);
        const std::uint64_t total = probe->size();

        struct Hit {
            std::uint64_t index;
            std::uint32_t mask;
            Structure expansion;
        };
        auto chunks = run_chunked<std::optional<Hit>>(total, workers, [&](std::uint64_t begin, std::uint64_t end) {
            auto stream = s.enumerate(a);
            std::vector<Element> flat, restricted_flat;
            for (std::uint64_t i = begin; i < end; ++i) {
                const Presentation& p = stream->at(i);
                flatten(p.presentation_table(), flat);
                for (std::uint32_t mask = 0; mask < subsets; ++mask) {
                    const SubsetContext& ctx = contexts[mask];
                    restrict_flat(flat, arity, ctx.old_to_new, restricted_flat);
                    if (!s.valid_flat(ctx.restricted, ctx.g, restricted_flat))
                        return std::optional<Hit>(Hit{i, mask, p.expansion});
                }
            }
            return std::optional<Hit>();
        });
        report.cases_checked += total * subsets;
        std::optional<Hit> first;
        for (auto& c : chunks) {
            if (c && (!first || std::make_pair(c->index, c->mask) < std::make_pair(first->index, first->mask)))
                first = std::move(c);
        }
        if (first) {
            report.pass = false;
            report.witness = LocalizationWitness{a, std::move(first->expansion), contexts[first->mask].kept};
            return report;
        }
    }
    return report;
}

AmalgamationReport check_disjoint_amalgamation(const PresentationScheme& s, std::span<const Structure> corpus,
                                               std::uint64_t search_budget) {
    AmalgamationReport report;
    report.corpus_note = corpus_note(corpus);
    const int arity = s.symbol().arity;
    for (const Structure& a : corpus) {
        if (!s.in_class(a)) throw out_of_class("corpus structure outside the class of scheme '" + s.name() + "'");
        if (a.universe_size > 12) throw budget_exceeded("amalgamation checks are capped at 12 elements");
        const Element n = a.universe_size;
        GaifmanGraph g = gaifman(a);

        for (std::uint32_t bmask = 0; bmask < (1u << n); ++bmask) {
            std::uint32_t complement = ((1u << n) - 1) & ~bmask;
            // Iterate unordered disjoint pairs once.
            for (std::uint32_t cmask = complement;; cmask = (cmask - 1) & complement) {
                if (bmask <= cmask) {
                    auto b_kept = mask_to_elements(bmask, n);
                    auto c_kept = mask_to_elements(cmask, n);
                    auto rb = restrict_to(a, b_kept);
                    auto rc = restrict_to(a, c_kept);
                    std::vector<Element> b_o2n(static_cast<std::size_t>(n), -1), c_o2n(static_cast<std::size_t>(n), -1);
                    for (std::size_t i = 0; i < b_kept.size(); ++i) b_o2n[static_cast<std::size_t>(b_kept[i])] = static_cast<Element>(i);
                    for (std::size_t i = 0; i < c_kept.size(); ++i) c_o2n[static_cast<std::size_t>(c_kept[i])] = static_cast<Element>(i);

                    auto sb = s.enumerate(rb.structure);
                    auto sc = s.enumerate(rc.structure);
                    const std::uint64_t nb = sb->size(), nc = sc->size();

                    // Achieved (restriction-to-B, restriction-to-C) pairs over
                    // the full enumeration; built only if a search is needed.
                    std::optional<std::set<std::pair<std::vector<Element>, std::vector<Element>>>> achieved;
                    auto ensure_achieved = [&]() {
                        if (achieved) return;
                        achieved.emplace();
                        auto sa = s.enumerate(a);
                        if (sa->size() > search_budget)
                            throw budget_exceeded("amalgamation search over " + std::to_string(sa->size()) +
                                                  " presentations exceeds the budget");
                        std::vector<Element> flat, fb, fc;
                        for (std::uint64_t i = 0; i < sa->size(); ++i) {
                            flatten(sa->at(i).presentation_table(), flat);
                            restrict_flat(flat, arity, b_o2n, fb);
                            restrict_flat(flat, arity, c_o2n, fc);
                            achieved->insert({fb, fc});
                        }
                    };

                    std::vector<Element> bflat, cflat;
                    for (std::uint64_t bi = 0; bi < nb; ++bi) {
                        Table btable = sb->at(bi).presentation_table();
                        flatten(btable, bflat);
                        for (std::uint64_t ci = 0; ci < nc; ++ci) {
                            Table ctable = sc->at(ci).presentation_table();
                            flatten(ctable, cflat);
                            ++report.cases_checked;

                            bool found = false;
                            if (auto candidate = s.amalgamate_table(a, g, b_kept, btable, c_kept, ctable)) {
                                std::sort(candidate->begin(), candidate->end());
                                candidate->erase(std::unique(candidate->begin(), candidate->end()),
                                                 candidate->end());
                                if (s.valid_table(a, g, *candidate)) {
                                    std::vector<Element> flat, fb, fc;
                                    flatten(*candidate, flat);
                                    restrict_flat(flat, arity, b_o2n, fb);
                                    restrict_flat(flat, arity, c_o2n, fc);
                                    found = (fb == bflat) && (fc == cflat);
                                }
                            }
                            if (!found) {
                                ensure_achieved();
                                found = achieved->count({bflat, cflat}) > 0;
                            }
                            if (!found) {
                                report.pass = false;
                                report.witness = AmalgamationWitness{a, b_kept, c_kept,
                                                                     s.make_presentation(rb.structure, btable),
                                                                     s.make_presentation(rc.structure, ctable)};
                                return report;
                            }
                        }
                    }
                }
                if (cmask == 0) break;
            }
        }
    }
    return report;
}

} // namespace hanflab
