#include "hanflab/census.hpp"

#include "hanflab/error.hpp"
#include "hanflab/parallel.hpp"

#include <algorithm>
#include <map>

namespace hanflab {

std::uint64_t Threshold::value() const {
    if (omega_) throw Error("internal", "value() called on the omega threshold");
    return value_;
}

std::string Threshold::to_string() const {
    return omega_ ? std::string("omega") : std::to_string(value_);
}

bool equipollent(std::uint64_t x, std::uint64_t y, const Threshold& t) {
    if (x == y) return true;
    return !t.is_omega() && x >= t.value() && y >= t.value();
}

std::string to_hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xF]);
    }
    return out;
}

namespace {

void push_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void push_name(std::string& out, const std::string& name) {
    push_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
}

// Element occurrences inside relation tuples, the refinement signal source.
struct Occurrence {
    int rel;
    int pos;
    const Tuple* tuple;
};

std::vector<std::vector<Occurrence>> collect_occurrences(const Structure& s) {
    std::vector<std::vector<Occurrence>> occ(static_cast<std::size_t>(s.universe_size));
    for (std::size_t r = 0; r < s.tables.size(); ++r) {
        for (const auto& tuple : s.tables[r]) {
            for (std::size_t i = 0; i < tuple.size(); ++i)
                occ[static_cast<std::size_t>(tuple[i])].push_back(
                    {static_cast<int>(r), static_cast<int>(i), &tuple});
        }
    }
    return occ;
}

// Colors are always rank-normalized, so they are isomorphism-invariant
// identifiers and comparing color vectors across structures is meaningful
// when the ranks were assigned over a shared tag pool.
using Tag = std::vector<int>;

Tag element_tag(const std::vector<Occurrence>& occ, const std::vector<int>& colors, int own_color) {
    std::vector<Tag> records;
    records.reserve(occ.size());
    for (const auto& o : occ) {
        Tag rec;
        rec.reserve(o.tuple->size() + 2);
        rec.push_back(o.rel);
        rec.push_back(o.pos);
        for (Element e : *o.tuple) rec.push_back(colors[static_cast<std::size_t>(e)]);
        records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end());
    Tag flat;
    flat.push_back(own_color);
    for (const auto& rec : records) {
        flat.push_back(static_cast<int>(rec.size()));
        flat.insert(flat.end(), rec.begin(), rec.end());
    }
    return flat;
}

// Assigns ranks to a batch of tags (one per element, possibly spanning two
// structures); returns the rank of each input tag in order.
std::vector<int> rank_tags(const std::vector<Tag>& tags) {
    std::vector<const Tag*> sorted;
    sorted.reserve(tags.size());
    for (const auto& t : tags) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(), [](const Tag* a, const Tag* b) { return *a < *b; });
    std::map<Tag, int> rank;
    int next = 0;
    for (const Tag* t : sorted) {
        if (!rank.count(*t)) rank[*t] = next++;
    }
    std::vector<int> out;
    out.reserve(tags.size());
    for (const auto& t : tags) out.push_back(rank[t]);
    return out;
}

std::vector<int> initial_colors(const Structure& s, std::span<const Element> points) {
    std::vector<Tag> tags(static_cast<std::size_t>(s.universe_size));
    for (Element e = 0; e < s.universe_size; ++e) {
        Tag t;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i] == e) t.push_back(static_cast<int>(i));
        t.push_back(-1);
        for (std::size_t c = 0; c < s.constant_values.size(); ++c)
            if (s.constant_values[c] == e) t.push_back(static_cast<int>(c));
        tags[static_cast<std::size_t>(e)] = std::move(t);
    }
    return rank_tags(tags);
}

std::vector<int> refine_to_fixpoint(const Structure& s, const std::vector<std::vector<Occurrence>>& occ,
                                    std::vector<int> colors) {
    const std::size_t n = static_cast<std::size_t>(s.universe_size);
    for (;;) {
        std::vector<Tag> tags(n);
        for (std::size_t e = 0; e < n; ++e)
            tags[e] = element_tag(occ[e], colors, colors[e]);
        auto next = rank_tags(tags);
        if (next == colors) return colors;
        colors = std::move(next);
    }
}

std::string serialize_relabeled(const Structure& s, std::span<const Element> points,
                                const std::vector<int>& label) {
    std::string out;
    push_u32(out, static_cast<std::uint32_t>(s.signature.relations.size()));
    for (const auto& r : s.signature.relations) {
        push_name(out, r.name);
        push_u32(out, static_cast<std::uint32_t>(r.arity));
    }
    push_u32(out, static_cast<std::uint32_t>(s.signature.constants.size()));
    for (const auto& c : s.signature.constants) push_name(out, c);

    push_u32(out, static_cast<std::uint32_t>(s.universe_size));
    push_u32(out, static_cast<std::uint32_t>(points.size()));
    for (Element p : points) push_u32(out, static_cast<std::uint32_t>(label[static_cast<std::size_t>(p)]));

    for (const auto& table : s.tables) {
        std::vector<Tuple> relabeled;
        relabeled.reserve(table.size());
        for (const auto& tuple : table) {
            Tuple t;
            t.reserve(tuple.size());
            for (Element e : tuple) t.push_back(static_cast<Element>(label[static_cast<std::size_t>(e)]));
            relabeled.push_back(std::move(t));
        }
        std::sort(relabeled.begin(), relabeled.end());
        push_u32(out, static_cast<std::uint32_t>(relabeled.size()));
        for (const auto& t : relabeled)
            for (Element e : t) push_u32(out, static_cast<std::uint32_t>(e));
    }
    for (Element v : s.constant_values) push_u32(out, static_cast<std::uint32_t>(label[static_cast<std::size_t>(v)]));
    return out;
}

struct CanonicalSearch {
    const Structure& s;
    std::span<const Element> points;
    const std::vector<std::vector<Occurrence>>& occ;
    std::string best;
    bool have_best = false;

    void visit(const std::vector<int>& colors) {
        const std::size_t n = static_cast<std::size_t>(s.universe_size);
        int cells = 0;
        for (int c : colors) cells = std::max(cells, c + 1);
        if (static_cast<std::size_t>(cells) == n) {
            std::string bytes = serialize_relabeled(s, points, colors);
            if (!have_best || bytes < best) {
                best = std::move(bytes);
                have_best = true;
            }
            return;
        }
        // First non-singleton cell in color order; individualize each member.
        int target = -1;
        for (int c = 0; c < cells && target < 0; ++c) {
            int count = 0;
            for (int col : colors)
                if (col == c) ++count;
            if (count >= 2) target = c;
        }
        for (std::size_t e = 0; e < n; ++e) {
            if (colors[e] != target) continue;
            std::vector<Tag> tags(n);
            for (std::size_t x = 0; x < n; ++x)
                tags[x] = Tag{colors[x], (x == e && colors[x] == target) ? 0 : 1};
            auto split = rank_tags(tags);
            visit(refine_to_fixpoint(s, occ, std::move(split)));
        }
    }
};

} // namespace

std::string canonical_bytes(const Structure& s, std::span<const Element> points) {
    for (Element p : points) {
        if (p < 0 || p >= s.universe_size)
            throw input_error("point " + std::to_string(p) + " out of range");
    }
    if (s.universe_size == 0) {
        std::vector<int> empty_label;
        return serialize_relabeled(s, points, empty_label);
    }
    auto occ = collect_occurrences(s);
    CanonicalSearch search{s, points, occ, {}, false};
    search.visit(refine_to_fixpoint(s, occ, initial_colors(s, points)));
    return search.best;
}

NeighborhoodType canonical_key(const PointedStructure& p) {
    return canonical_key(p, Radius::infinite());
}

NeighborhoodType canonical_key(const PointedStructure& p, const Radius& radius_used) {
    NeighborhoodType t;
    t.key = canonical_bytes(p.structure, p.points);
    t.size = p.structure.universe_size;
    t.radius = radius_used;
    return t;
}

namespace {

bool mapping_respects_tables(const Structure& a, const Structure& b, const std::vector<Element>& map) {
    for (std::size_t r = 0; r < a.tables.size(); ++r) {
        const auto& bt = b.tables[r];
        for (const auto& tuple : a.tables[r]) {
            Tuple image;
            image.reserve(tuple.size());
            for (Element e : tuple) image.push_back(map[static_cast<std::size_t>(e)]);
            if (!std::binary_search(bt.begin(), bt.end(), image)) return false;
        }
    }
    return true;
}

bool verify_witness(const PointedStructure& p, const PointedStructure& q, const std::vector<Element>& map) {
    const auto n = static_cast<std::size_t>(p.structure.universe_size);
    std::vector<char> hit(n, 0);
    for (Element m : map) {
        if (m < 0 || m >= q.structure.universe_size) return false;
        if (hit[static_cast<std::size_t>(m)]) return false;
        hit[static_cast<std::size_t>(m)] = 1;
    }
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (map[static_cast<std::size_t>(p.points[i])] != q.points[i]) return false;
    for (std::size_t c = 0; c < p.structure.constant_values.size(); ++c)
        if (map[static_cast<std::size_t>(p.structure.constant_values[c])] != q.structure.constant_values[c])
            return false;
    if (!mapping_respects_tables(p.structure, q.structure, map)) return false;
    // Inverse direction: table sizes are equal and the map is bijective, so
    // checking forward tuples both ways closes the equivalence.
    std::vector<Element> inverse(n, -1);
    for (std::size_t i = 0; i < map.size(); ++i) inverse[static_cast<std::size_t>(map[i])] = static_cast<Element>(i);
    return mapping_respects_tables(q.structure, p.structure, inverse);
}

// Joint color refinement: ranks are assigned over the combined tag pool so
// the two color vectors are directly comparable.
std::pair<std::vector<int>, std::vector<int>> joint_refine(const PointedStructure& p, const PointedStructure& q) {
    auto occ_p = collect_occurrences(p.structure);
    auto occ_q = collect_occurrences(q.structure);
    const std::size_t np = static_cast<std::size_t>(p.structure.universe_size);
    const std::size_t nq = static_cast<std::size_t>(q.structure.universe_size);

    auto make_initial = [](const PointedStructure& ps) {
        std::vector<Tag> tags(static_cast<std::size_t>(ps.structure.universe_size));
        for (Element e = 0; e < ps.structure.universe_size; ++e) {
            Tag t;
            for (std::size_t i = 0; i < ps.points.size(); ++i)
                if (ps.points[i] == e) t.push_back(static_cast<int>(i));
            t.push_back(-1);
            for (std::size_t c = 0; c < ps.structure.constant_values.size(); ++c)
                if (ps.structure.constant_values[c] == e) t.push_back(static_cast<int>(c));
            tags[static_cast<std::size_t>(e)] = std::move(t);
        }
        return tags;
    };

    std::vector<Tag> tags = make_initial(p);
    auto tq = make_initial(q);
    tags.insert(tags.end(), tq.begin(), tq.end());
    auto combined = rank_tags(tags);
    std::vector<int> cp(combined.begin(), combined.begin() + static_cast<std::ptrdiff_t>(np));
    std::vector<int> cq(combined.begin() + static_cast<std::ptrdiff_t>(np), combined.end());

    for (;;) {
        std::vector<Tag> next(np + nq);
        for (std::size_t e = 0; e < np; ++e) next[e] = element_tag(occ_p[e], cp, cp[e]);
        for (std::size_t e = 0; e < nq; ++e) next[np + e] = element_tag(occ_q[e], cq, cq[e]);
        auto ranked = rank_tags(next);
        std::vector<int> ncp(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(np));
        std::vector<int> ncq(ranked.begin() + static_cast<std::ptrdiff_t>(np), ranked.end());
        if (ncp == cp && ncq == cq) return {cp, cq};
        cp = std::move(ncp);
        cq = std::move(ncq);
    }
}

bool extend_mapping(const PointedStructure& p, const PointedStructure& q, const std::vector<int>& cp,
                    const std::vector<int>& cq, std::vector<Element>& map, std::vector<char>& used,
                    Element next) {
    const Element n = p.structure.universe_size;
    while (next < n && map[static_cast<std::size_t>(next)] >= 0) ++next;
    if (next == n) return verify_witness(p, q, map);
    for (Element cand = 0; cand < q.structure.universe_size; ++cand) {
        if (used[static_cast<std::size_t>(cand)]) continue;
        if (cq[static_cast<std::size_t>(cand)] != cp[static_cast<std::size_t>(next)]) continue;
        map[static_cast<std::size_t>(next)] = cand;
        used[static_cast<std::size_t>(cand)] = 1;
        // Check every tuple of either side that is now fully mapped.
        bool consistent = true;
        for (std::size_t r = 0; r < p.structure.tables.size() && consistent; ++r) {
            const auto& ta = p.structure.tables[r];
            const auto& tb = q.structure.tables[r];
            for (const auto& tuple : ta) {
                bool full = true, involves = false;
                Tuple image(tuple.size());
                for (std::size_t i = 0; i < tuple.size(); ++i) {
                    Element m = map[static_cast<std::size_t>(tuple[i])];
                    if (tuple[i] == next) involves = true;
                    if (m < 0) {
                        full = false;
                        break;
                    }
                    image[i] = m;
                }
                if (full && involves && !std::binary_search(tb.begin(), tb.end(), image)) {
                    consistent = false;
                    break;
                }
            }
            if (!consistent) break;
            for (const auto& tuple : tb) {
                bool involves = false;
                for (Element e : tuple)
                    if (e == cand) involves = true;
                if (!involves) continue;
                bool full = true;
                Tuple pre(tuple.size());
                for (std::size_t i = 0; i < tuple.size(); ++i) {
                    Element inv = -1;
                    for (Element x = 0; x < n; ++x)
                        if (map[static_cast<std::size_t>(x)] == tuple[i]) {
                            inv = x;
                            break;
                        }
                    if (inv < 0) {
                        full = false;
                        break;
                    }
                    pre[i] = inv;
                }
                if (full && !std::binary_search(ta.begin(), ta.end(), pre)) {
                    consistent = false;
                    break;
                }
            }
        }
        if (consistent && extend_mapping(p, q, cp, cq, map, used, next + 1)) return true;
        map[static_cast<std::size_t>(next)] = -1;
        used[static_cast<std::size_t>(cand)] = 0;
    }
    return false;
}

} // namespace

IsoWitness isomorphic(const PointedStructure& p, const PointedStructure& q) {
    if (p.structure.signature != q.structure.signature)
        throw signature_mismatch("isomorphism is defined between structures of the same signature");
    IsoWitness out;
    if (p.structure.universe_size != q.structure.universe_size) return out;
    if (p.points.size() != q.points.size()) return out;
    for (std::size_t r = 0; r < p.structure.tables.size(); ++r)
        if (p.structure.tables[r].size() != q.structure.tables[r].size()) return out;

    auto [cp, cq] = joint_refine(p, q);
    {
        auto sp = cp, sq = cq;
        std::sort(sp.begin(), sp.end());
        std::sort(sq.begin(), sq.end());
        if (sp != sq) return out;
    }

    const std::size_t n = static_cast<std::size_t>(p.structure.universe_size);
    std::vector<Element> map(n, -1);
    std::vector<char> used(n, 0);
    // Points and constants are forced.
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        Element a = p.points[i], b = q.points[i];
        Element prev = map[static_cast<std::size_t>(a)];
        if (prev >= 0 && prev != b) return out;
        if (prev < 0 && used[static_cast<std::size_t>(b)]) return out;
        map[static_cast<std::size_t>(a)] = b;
        used[static_cast<std::size_t>(b)] = 1;
    }
    for (std::size_t c = 0; c < p.structure.constant_values.size(); ++c) {
        Element a = p.structure.constant_values[c], b = q.structure.constant_values[c];
        Element prev = map[static_cast<std::size_t>(a)];
        if (prev >= 0 && prev != b) return out;
        if (prev < 0 && used[static_cast<std::size_t>(b)]) return out;
        map[static_cast<std::size_t>(a)] = b;
        used[static_cast<std::size_t>(b)] = 1;
    }
    if (n == 0) {
        out.isomorphic = true;
        return out;
    }
    if (extend_mapping(p, q, cp, cq, map, used, 0)) {
        out.isomorphic = true;
        out.mapping = std::move(map);
    }
    return out;
}

std::uint64_t CensusReport::count_for(const std::string& key) const {
    for (const auto& e : entries)
        if (e.type.key == key) return e.count;
    return 0;
}

CensusReport census(const Structure& s, const Radius& r, int workers) {
    CensusReport report;
    report.radius = r;
    report.total = static_cast<std::uint64_t>(s.universe_size);

    auto chunks = run_chunked<std::vector<std::pair<std::string, Element>>>(
        static_cast<std::uint64_t>(s.universe_size), workers,
        [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<std::pair<std::string, Element>> keys;
            keys.reserve(end - begin);
            for (std::uint64_t a = begin; a < end; ++a) {
                auto nb = pointed_neighborhood(s, static_cast<Element>(a), r);
                keys.emplace_back(canonical_bytes(nb.pointed.structure, nb.pointed.points),
                                  nb.pointed.structure.universe_size);
            }
            return keys;
        });

    std::map<std::string, std::pair<std::uint64_t, Element>> counts;
    for (const auto& chunk : chunks) {
        for (const auto& [key, size] : chunk) {
            auto& slot = counts[key];
            slot.first += 1;
            slot.second = size;
        }
    }
    for (auto& [key, slot] : counts) {
        CensusEntry entry;
        entry.type.key = key;
        entry.type.size = slot.second;
        entry.type.radius = r;
        entry.count = slot.first;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

HanfVerdict hanf_equivalent(const Structure& a, const Structure& b, const Radius& r, const Threshold& t,
                            int workers) {
    if (a.signature != b.signature)
        throw signature_mismatch("Hanf comparison requires equal signatures");
    HanfVerdict verdict;
    verdict.radius = r;
    verdict.threshold = t;

    auto ca = census(a, r, workers);
    auto cb = census(b, r, workers);

    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> merged;
    std::map<std::string, Element> sizes;
    for (const auto& e : ca.entries) {
        merged[e.type.key].first = e.count;
        sizes[e.type.key] = e.type.size;
    }
    for (const auto& e : cb.entries) {
        merged[e.type.key].second = e.count;
        sizes[e.type.key] = e.type.size;
    }
    for (const auto& [key, counts] : merged) {
        if (!equipollent(counts.first, counts.second, t)) {
            HanfWitness w;
            w.type.key = key;
            w.type.size = sizes[key];
            w.type.radius = r;
            w.count_a = counts.first;
            w.count_b = counts.second;
            verdict.witnesses.push_back(std::move(w));
        }
    }
    verdict.equivalent = verdict.witnesses.empty();
    return verdict;
}

FullHanfVerdict fully_hanf_equivalent(const Structure& a, const Structure& b, int workers) {
    FullHanfVerdict out;
    std::int64_t max_r = std::max(a.universe_size, b.universe_size);
    for (std::int64_t r = 0; r <= max_r; ++r) {
        auto verdict = hanf_equivalent(a, b, Radius::finite(r), Threshold::omega(), workers);
        if (!verdict.equivalent) {
            out.equivalent = false;
            out.failing_radius = r;
            out.detail = std::move(verdict);
            return out;
        }
    }
    out.equivalent = true;
    return out;
}

} // namespace hanflab
