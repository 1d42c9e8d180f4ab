#pragma once
// Ranking-based refinement of retrieved paths and triples (P -> P').
//
// Frequency scoring counts hops whose relation appears among the top-K
// retrieved relations; the normalized scheme divides by path length so
// long paths cannot dominate on raw counts. Triples keep the cosine score
// attached at retrieval. All orders are total and deterministic.

#include "kgrag/errors.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/vector_index.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>
#include <vector>

namespace kgrag {

enum class RankScheme { Frequency, Normalized, Similarity };

inline const char* to_string(RankScheme s) {
    switch (s) {
        case RankScheme::Frequency: return "frequency";
        case RankScheme::Normalized: return "normalized";
        case RankScheme::Similarity: return "similarity";
    }
    return "?";
}

inline RankScheme parse_rank_scheme(const std::string& s) {
    if (s == "frequency") return RankScheme::Frequency;
    if (s == "normalized") return RankScheme::Normalized;
    if (s == "similarity") return RankScheme::Similarity;
    throw ConfigError("unknown ranking scheme '" + s +
                      "' (expected frequency, normalized, similarity)");
}

struct RankedPath {
    Path path;
    double score = 0.0;
    RankScheme scheme = RankScheme::Frequency;
};

// Number of hops whose relation is among the top-K retrieved relations;
// a relation repeated on several hops counts once per hop.
inline int score_frequency(const Path& path, const std::vector<std::string>& top_relations) {
    std::unordered_set<std::string> top(top_relations.begin(), top_relations.end());
    int count = 0;
    for (const Hop& hop : path.hops)
        if (top.count(hop.relation)) ++count;
    return count;
}

inline double score_normalized(const Path& path, const std::vector<std::string>& top_relations) {
    if (path.hops.empty()) throw ConfigError("cannot length-normalize an empty path");
    return static_cast<double>(score_frequency(path, top_relations)) /
           static_cast<double>(path.hops.size());
}

namespace detail {

// Tie order below equal scores: fewer hops first, then the hop-id sequence.
inline bool path_tie_before(const Path& a, const Path& b) {
    if (a.hops.size() != b.hops.size()) return a.hops.size() < b.hops.size();
    return a.hops < b.hops;
}

}  // namespace detail

// Scores every path under the given scheme and sorts descending; the
// output is a permutation of the input. The similarity scheme applies to
// triples, not paths.
inline std::vector<RankedPath> rank_paths(const std::vector<Path>& paths,
                                          const std::vector<std::string>& top_relations,
                                          RankScheme scheme) {
    if (scheme == RankScheme::Similarity)
        throw ConfigError("similarity ranking applies to retrieved triples, not paths");
    std::vector<RankedPath> out;
    out.reserve(paths.size());
    for (const Path& p : paths) {
        double score = scheme == RankScheme::Frequency
                           ? static_cast<double>(score_frequency(p, top_relations))
                           : score_normalized(p, top_relations);
        out.push_back({p, score, scheme});
    }
    std::sort(out.begin(), out.end(), [](const RankedPath& a, const RankedPath& b) {
        if (a.score != b.score) return a.score > b.score;
        return detail::path_tie_before(a.path, b.path);
    });
    return out;
}

// Descending by attached cosine score, ties by item id.
inline std::vector<ScoredItem> rank_triples(std::vector<ScoredItem> triples) {
    std::sort(triples.begin(), triples.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    return triples;
}

// Top-n selection: 1, 2, or everything.
struct TopN {
    bool all = true;
    std::size_t n = 0;

    static TopN parse(const std::string& s) {
        if (s == "all") return {true, 0};
        if (s == "1") return {false, 1};
        if (s == "2") return {false, 2};
        throw ConfigError("top selection must be 1, 2, or all (got '" + s + "')");
    }

    std::string str() const { return all ? "all" : std::to_string(n); }
};

template <typename T>
std::vector<T> take_top(std::vector<T> ranked, TopN top) {
    if (top.all || ranked.size() <= top.n) return ranked;
    ranked.resize(top.n);
    return ranked;
}

}  // namespace kgrag
