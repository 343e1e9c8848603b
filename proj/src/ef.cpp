#include "hanflab/ef.hpp"

#include "hanflab/error.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace hanflab {

namespace {

using Pairing = std::vector<std::pair<Element, Element>>; // kept sorted by first component

// Partial-isomorphism test: the pairing must be functional and injective,
// and every tuple lying entirely inside the mapped domain (either side)
// must transfer.
bool partial_isomorphism(const Structure& a, const Structure& b, const Pairing& pairing) {
    for (std::size_t i = 0; i + 1 < pairing.size(); ++i) {
        if (pairing[i].first == pairing[i + 1].first && pairing[i].second != pairing[i + 1].second) return false;
    }
    std::vector<Element> images;
    for (const auto& [x, y] : pairing) images.push_back(y);
    std::sort(images.begin(), images.end());
    for (std::size_t i = 0; i + 1 < images.size(); ++i)
        if (images[i] == images[i + 1]) {
            // Injectivity may only fail when the duplicated image comes from
            // one domain element (handled above as functionality).
            Element img = images[i];
            std::vector<Element> sources;
            for (const auto& [x, y] : pairing)
                if (y == img) sources.push_back(x);
            std::sort(sources.begin(), sources.end());
            sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
            if (sources.size() > 1) return false;
        }

    auto forward = [&](Element x) -> Element {
        for (const auto& [u, v] : pairing)
            if (u == x) return v;
        return -1;
    };
    auto backward = [&](Element y) -> Element {
        for (const auto& [u, v] : pairing)
            if (v == y) return u;
        return -1;
    };

    for (std::size_t r = 0; r < a.tables.size(); ++r) {
        for (const auto& tuple : a.tables[r]) {
            Tuple image(tuple.size());
            bool full = true;
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                Element m = forward(tuple[i]);
                if (m < 0) {
                    full = false;
                    break;
                }
                image[i] = m;
            }
            if (full && !std::binary_search(b.tables[r].begin(), b.tables[r].end(), image)) return false;
        }
        for (const auto& tuple : b.tables[r]) {
            Tuple pre(tuple.size());
            bool full = true;
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                Element m = backward(tuple[i]);
                if (m < 0) {
                    full = false;
                    break;
                }
                pre[i] = m;
            }
            if (full && !std::binary_search(a.tables[r].begin(), a.tables[r].end(), pre)) return false;
        }
    }
    return true;
}

struct GameSearch {
    const Structure& a;
    const Structure& b;
    // Memoized game values per (position, rounds). Positions are canonical:
    // sorted, deduplicated pairings; the cache is an optimization only.
    std::map<std::pair<Pairing, int>, bool> memo;

    bool duplicator_wins(Pairing pairing, int rounds) {
        std::sort(pairing.begin(), pairing.end());
        pairing.erase(std::unique(pairing.begin(), pairing.end()), pairing.end());
        if (!partial_isomorphism(a, b, pairing)) return false;
        if (rounds == 0) return true;
        auto key = std::make_pair(pairing, rounds);
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        bool wins = true;
        // Spoiler plays in A; Duplicator answers in B.
        for (Element x = 0; x < a.universe_size && wins; ++x) {
            bool answered = false;
            for (Element y = 0; y < b.universe_size && !answered; ++y) {
                Pairing next = pairing;
                next.emplace_back(x, y);
                if (duplicator_wins(std::move(next), rounds - 1)) answered = true;
            }
            if (!answered) wins = false;
        }
        // Spoiler plays in B.
        for (Element y = 0; y < b.universe_size && wins; ++y) {
            bool answered = false;
            for (Element x = 0; x < a.universe_size && !answered; ++x) {
                Pairing next = pairing;
                next.emplace_back(x, y);
                if (duplicator_wins(std::move(next), rounds - 1)) answered = true;
            }
            if (!answered) wins = false;
        }
        memo[key] = wins;
        return wins;
    }
};

} // namespace

bool ef_equivalent(const Structure& a, const Structure& b, int rounds) {
    if (a.signature != b.signature)
        throw signature_mismatch("the game is played between structures of one signature");
    if (rounds < 0) throw input_error("round count must be >= 0");
    // Empty universes: with no elements, one empty and one inhabited
    // structure differ already at one round.
    Pairing start;
    for (std::size_t c = 0; c < a.constant_values.size(); ++c)
        start.emplace_back(a.constant_values[c], b.constant_values[c]);
    GameSearch search{a, b, {}};
    return search.duplicator_wins(std::move(start), rounds);
}

} // namespace hanflab
