#pragma once
// Subgraph retrieval: the four strategies that pull candidate knowledge
// out of the KG for one matching question.
//
//   triple_vec      top-K triples by cosine between question and triple text
//   entity_vec_bfs  top-K entities by cosine, then bounded BFS between pairs
//   entity_llm_bfs  entities proposed by an LLM and verified, then BFS
//   subgraph_llm    paths proposed by an LLM directly, parsed and verified
//
// BFS enumerates simple paths only, walking edges in either direction and
// recording the orientation of every hop. A per-pair cap bounds enumeration
// near high-degree nodes; when a cap is set, expansion work is bounded too.

#include "kgrag/chat_client.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/prompts.hpp"
#include "kgrag/vector_index.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace kgrag {

enum class Strategy { TripleVec, EntityVecBfs, EntityLlmBfs, SubgraphLlm };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::TripleVec: return "triple_vec";
        case Strategy::EntityVecBfs: return "entity_vec_bfs";
        case Strategy::EntityLlmBfs: return "entity_llm_bfs";
        case Strategy::SubgraphLlm: return "subgraph_llm";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& s) {
    if (s == "triple_vec") return Strategy::TripleVec;
    if (s == "entity_vec_bfs") return Strategy::EntityVecBfs;
    if (s == "entity_llm_bfs") return Strategy::EntityLlmBfs;
    if (s == "subgraph_llm") return Strategy::SubgraphLlm;
    throw ConfigError("unknown strategy '" + s +
                      "' (expected triple_vec, entity_vec_bfs, entity_llm_bfs, subgraph_llm)");
}

// One traversed edge: the stored triple plus the walk orientation.
struct Hop {
    std::string head;
    std::string relation;
    std::string tail;
    Direction direction = Direction::Outgoing;

    const std::string& from() const { return direction == Direction::Outgoing ? head : tail; }
    const std::string& to() const { return direction == Direction::Outgoing ? tail : head; }

    bool operator==(const Hop&) const = default;
    auto operator<=>(const Hop&) const = default;
};

struct Path {
    std::vector<Hop> hops;
    Strategy source = Strategy::EntityVecBfs;

    bool operator==(const Path& other) const { return hops == other.hops; }
    bool operator<(const Path& other) const { return hops < other.hops; }

    // 1 <= |hops| <= d_max, consecutive hops chain, no entity repeats.
    bool well_formed(std::size_t d_max) const {
        if (hops.empty() || hops.size() > d_max) return false;
        std::set<std::string> seen{hops.front().from()};
        for (std::size_t i = 0; i < hops.size(); ++i) {
            if (i > 0 && hops[i].from() != hops[i - 1].to()) return false;
            if (!seen.insert(hops[i].to()).second) return false;
        }
        return true;
    }
};

struct EntityPair {
    std::string es;
    std::string ed;
};

struct RetrievalConfig {
    std::size_t d_max = 3;
    std::size_t k_entities = 5;
    std::size_t k_relations = 5;
    std::size_t k_triples = 10;
    std::size_t path_cap = 100;  // per entity pair; 0 disables the cap

    void validate() const {
        if (d_max < 1 || k_entities < 1 || k_relations < 1 || k_triples < 1)
            throw ConfigError("retrieval config values must be >= 1");
    }
};

struct RetrievalOutcome {
    std::string question_id;
    Strategy strategy = Strategy::TripleVec;
    std::vector<std::string> entities;       // E
    std::vector<std::string> relations;      // R
    std::vector<Path> paths;                 // P
    std::vector<ScoredItem> triples;         // scored, for the triple pipeline
    double retrieval_time_s = 0.0;
    bool truncated = false;                  // some BFS hit its cap
    std::size_t dropped_candidates = 0;      // LLM proposals that failed verification
    bool parse_warning = false;              // LLM output yielded no usable candidates
};

// ── Entity pairs ───────────────────────────────────────────────────────

// All unordered 2-combinations, in first-seen order. Duplicate ids are
// collapsed first so es != ed always holds.
inline std::vector<EntityPair> entity_pairs(const std::vector<std::string>& entities) {
    std::vector<std::string> unique;
    for (const auto& e : entities)
        if (std::find(unique.begin(), unique.end(), e) == unique.end()) unique.push_back(e);
    std::vector<EntityPair> out;
    for (std::size_t i = 0; i < unique.size(); ++i)
        for (std::size_t j = i + 1; j < unique.size(); ++j)
            out.push_back({unique[i], unique[j]});
    return out;
}

// ── BFS path enumeration ───────────────────────────────────────────────

struct PathSet {
    std::vector<Path> paths;
    bool truncated = false;
};

namespace detail {

struct PartialPath {
    std::vector<AdjEdge> edges;
    std::vector<std::uint32_t> nodes;  // visited entities, starting node first
};

inline Hop make_hop(const KgStore& store, std::uint32_t from, const AdjEdge& e) {
    const std::string& rel = store.relation_at(e.relation).id;
    const std::string& a = store.entity_at(from).id;
    const std::string& b = store.entity_at(e.neighbor).id;
    if (e.direction == Direction::Outgoing) return {a, rel, b, Direction::Outgoing};
    return {b, rel, a, Direction::Incoming};
}

inline Path materialize(const KgStore& store, const PartialPath& p, Strategy source) {
    Path path;
    path.source = source;
    path.hops.reserve(p.edges.size());
    for (std::size_t i = 0; i < p.edges.size(); ++i)
        path.hops.push_back(make_hop(store, p.nodes[i], p.edges[i]));
    return path;
}

inline std::size_t expansion_budget(std::size_t path_cap) {
    if (path_cap == 0) return std::numeric_limits<std::size_t>::max();
    if (path_cap > std::numeric_limits<std::size_t>::max() / 10000)
        return std::numeric_limits<std::size_t>::max();
    return std::max<std::size_t>(path_cap * 10000, 1000000);
}

}  // namespace detail

// All simple paths from pair.es to pair.ed with at most d_max hops, found
// by breadth-first expansion (shortest paths surface first). With a cap,
// enumeration stops at path_cap results and flags truncation.
inline PathSet bfs_paths(const KgStore& store, const EntityPair& pair, std::size_t d_max,
                         std::size_t path_cap = 0, Strategy source = Strategy::EntityVecBfs) {
    PathSet result;
    if (d_max < 1) throw ConfigError("d_max must be >= 1");
    auto src = store.entity_index(pair.es);
    auto dst = store.entity_index(pair.ed);
    if (!src || !dst || *src == *dst) return result;

    std::size_t budget = detail::expansion_budget(path_cap);
    std::deque<detail::PartialPath> queue;
    queue.push_back({{}, {*src}});
    while (!queue.empty()) {
        if (budget-- == 0) {
            result.truncated = true;
            break;
        }
        detail::PartialPath p = std::move(queue.front());
        queue.pop_front();
        std::uint32_t cur = p.nodes.back();
        for (const AdjEdge& e : store.adjacency(cur)) {
            if (std::find(p.nodes.begin(), p.nodes.end(), e.neighbor) != p.nodes.end()) continue;
            if (e.neighbor == *dst) {
                detail::PartialPath done = p;
                done.edges.push_back(e);
                done.nodes.push_back(e.neighbor);
                result.paths.push_back(detail::materialize(store, done, source));
                if (path_cap != 0 && result.paths.size() >= path_cap) {
                    result.truncated = true;
                    return result;
                }
            } else if (p.edges.size() + 1 < d_max) {
                detail::PartialPath next = p;
                next.edges.push_back(e);
                next.nodes.push_back(e.neighbor);
                queue.push_back(std::move(next));
            }
        }
    }
    return result;
}

// Simple paths rooted at entity, breadth-first, up to d_max hops. Only
// frontier-maximal paths are returned: a path appears when it cannot be
// extended (depth bound or no unvisited neighbor), so no returned path is
// a strict prefix of another.
inline PathSet bfs_neighborhood(const KgStore& store, const std::string& entity, std::size_t d_max,
                                std::size_t path_cap = 0,
                                Strategy source = Strategy::EntityVecBfs) {
    PathSet result;
    if (d_max < 1) throw ConfigError("d_max must be >= 1");
    auto root = store.entity_index(entity);
    if (!root) return result;

    std::size_t budget = detail::expansion_budget(path_cap);
    std::deque<detail::PartialPath> queue;
    queue.push_back({{}, {*root}});
    while (!queue.empty()) {
        if (budget-- == 0) {
            result.truncated = true;
            break;
        }
        detail::PartialPath p = std::move(queue.front());
        queue.pop_front();
        bool extended = false;
        if (p.edges.size() < d_max) {
            std::uint32_t cur = p.nodes.back();
            for (const AdjEdge& e : store.adjacency(cur)) {
                if (std::find(p.nodes.begin(), p.nodes.end(), e.neighbor) != p.nodes.end())
                    continue;
                detail::PartialPath next = p;
                next.edges.push_back(e);
                next.nodes.push_back(e.neighbor);
                queue.push_back(std::move(next));
                extended = true;
            }
        }
        if (!extended && !p.edges.empty()) {
            result.paths.push_back(detail::materialize(store, p, source));
            if (path_cap != 0 && result.paths.size() >= path_cap) {
                result.truncated = true;
                return result;
            }
        }
    }
    return result;
}

// ── Vector-similarity retrieval ────────────────────────────────────────

inline std::vector<std::string> retrieve_entities_vector(const EmbeddingVector& question_vec,
                                                         const VectorIndex& entity_index,
                                                         std::size_t k) {
    std::vector<std::string> out;
    for (const auto& item : entity_index.search(question_vec, k)) out.push_back(item.item_id);
    return out;
}

inline std::vector<std::string> retrieve_entities_vector(const MatchQuestion& q,
                                                         const VectorIndex& entity_index,
                                                         std::size_t k,
                                                         EmbeddingProvider& provider) {
    return retrieve_entities_vector(embed(compose_text(q), provider), entity_index, k);
}

inline std::vector<std::string> retrieve_relations_vector(const EmbeddingVector& question_vec,
                                                          const VectorIndex& relation_index,
                                                          std::size_t k) {
    std::vector<std::string> out;
    for (const auto& item : relation_index.search(question_vec, k)) out.push_back(item.item_id);
    return out;
}

inline std::vector<std::string> retrieve_relations_vector(const MatchQuestion& q,
                                                          const VectorIndex& relation_index,
                                                          std::size_t k,
                                                          EmbeddingProvider& provider) {
    return retrieve_relations_vector(embed(compose_text(q), provider), relation_index, k);
}

inline std::vector<ScoredItem> retrieve_triples_vector(const EmbeddingVector& question_vec,
                                                       const VectorIndex& triple_index,
                                                       std::size_t k) {
    return triple_index.search(question_vec, k);
}

inline std::vector<ScoredItem> retrieve_triples_vector(const MatchQuestion& q,
                                                       const VectorIndex& triple_index,
                                                       std::size_t k,
                                                       EmbeddingProvider& provider) {
    return retrieve_triples_vector(embed(compose_text(q), provider), triple_index, k);
}

// Triple item ids pack the three ids with '|'; used when embedding triples
// and when mapping retrieved triple items back to hops.
inline std::string triple_item_id(const Triple& t) {
    return t.head + "|" + t.relation + "|" + t.tail;
}

inline std::optional<Triple> parse_triple_item_id(const std::string& id) {
    auto p1 = id.find('|');
    auto p2 = p1 == std::string::npos ? p1 : id.find('|', p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos) return std::nullopt;
    Triple t{id.substr(0, p1), id.substr(p1 + 1, p2 - p1 - 1), id.substr(p2 + 1)};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) return std::nullopt;
    return t;
}

// ── LLM-based retrieval ────────────────────────────────────────────────

// Everything an LLM retriever call needs.
struct LlmRetrieverContext {
    ChatClient* client = nullptr;
    const PromptSet* prompts = nullptr;
    std::string model;
    SamplingParams sampling;
};

struct LlmEntityResult {
    std::vector<std::string> entities;
    std::size_t dropped = 0;
    bool parse_warning = false;
};

namespace detail {

// "label (ID)" with an entity/property-style identifier.
inline const std::regex& labeled_id_pattern() {
    static const std::regex re(R"(([^,;\n()]*?)\s*\(\s*([QPqp]\d+)\s*\))");
    return re;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n.:-*");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n.:-*");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Parses candidate entities out of free-form LLM text and keeps only those
// that verify against the store, either by id lookup or by label
// resolution. Unverifiable candidates are counted, not errors.
inline LlmEntityResult verify_entity_candidates(const std::string& text, const KgStore& store) {
    LlmEntityResult result;
    std::set<std::string> seen;
    auto accept = [&](const std::string& id) {
        if (seen.insert(id).second) result.entities.push_back(id);
    };
    std::size_t candidates = 0;

    // Pass 1: "label (ID)" mentions.
    std::string remainder;
    std::size_t last = 0;
    auto begin = std::sregex_iterator(text.begin(), text.end(), detail::labeled_id_pattern());
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        ++candidates;
        remainder += text.substr(last, static_cast<std::size_t>(m.position()) - last) + "\n";
        last = static_cast<std::size_t>(m.position() + m.length());
        std::string id = m[2].str();
        id[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(id[0])));
        if (store.lookup_entity(id)) {
            accept(id);
            continue;
        }
        auto resolved = store.resolve_label(detail::trim(m[1].str()));
        if (resolved.empty()) {
            ++result.dropped;
            continue;
        }
        for (const auto& r : resolved) accept(r);
    }
    remainder += text.substr(last);

    // Pass 2: bare labels or bare ids in the unmatched text.
    std::string chunk;
    auto flush = [&] {
        std::string c = detail::trim(chunk);
        chunk.clear();
        if (c.empty()) return;
        ++candidates;
        if (store.lookup_entity(c)) {
            accept(c);
            return;
        }
        auto resolved = store.resolve_label(c);
        if (resolved.empty()) {
            ++result.dropped;
            return;
        }
        for (const auto& r : resolved) accept(r);
    };
    for (char c : remainder) {
        if (c == ',' || c == ';' || c == '\n')
            flush();
        else
            chunk += c;
    }
    flush();

    result.parse_warning = candidates == 0;
    return result;
}

inline LlmEntityResult retrieve_entities_llm(const MatchQuestion& q, LlmRetrieverContext& llm,
                                             const KgStore& store) {
    const PromptTemplate& tmpl = llm.prompts->get(PromptKind::EntityRetriever);
    ChatRequest req{llm.model, tmpl.system_text,
                    render_template(tmpl.user_template, {{"question", compose_text(q)}}),
                    llm.sampling};
    return verify_entity_candidates(llm.client->complete(req), store);
}

struct LlmPathResult {
    std::vector<Path> paths;
    std::size_t dropped_hops = 0;
    bool parse_warning = false;
};

namespace detail {

// One serialized hop: label (ID), label (ID), label (ID).
inline const std::regex& hop_pattern() {
    static const std::regex re(
        R"(\s*(.*?)\s*\(\s*([^()\s]+)\s*\)\s*,\s*(.*?)\s*\(\s*([^()\s]+)\s*\)\s*,\s*(.*?)\s*\(\s*([^()\s]+)\s*\)\s*)");
    return re;
}

inline std::optional<std::string> resolve_entity_ref(const KgStore& store, const std::string& id,
                                                     const std::string& label) {
    if (store.lookup_entity(id)) return id;
    auto resolved = store.resolve_label(trim(label));
    if (resolved.size() == 1) return resolved.front();
    return std::nullopt;
}

inline std::optional<std::string> resolve_relation_ref(const KgStore& store, const std::string& id,
                                                       const std::string& label) {
    if (store.lookup_relation(id)) return id;
    auto resolved = store.resolve_relation_label(trim(label));
    if (resolved.size() == 1) return resolved.front();
    return std::nullopt;
}

// A hop survives only if the store contains the triple, in either stored
// orientation.
inline std::optional<Hop> verify_hop(const KgStore& store, const std::string& h_label,
                                     const std::string& h_id, const std::string& r_label,
                                     const std::string& r_id, const std::string& t_label,
                                     const std::string& t_id) {
    auto h = resolve_entity_ref(store, h_id, h_label);
    auto r = resolve_relation_ref(store, r_id, r_label);
    auto t = resolve_entity_ref(store, t_id, t_label);
    if (!h || !r || !t) return std::nullopt;
    if (store.has_triple(*h, *r, *t)) return Hop{*h, *r, *t, Direction::Outgoing};
    if (store.has_triple(*t, *r, *h)) return Hop{*t, *r, *h, Direction::Incoming};
    return std::nullopt;
}

inline std::vector<std::string> split_any(const std::string& text,
                                          const std::vector<std::string>& seps) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t best = std::string::npos;
        std::size_t best_len = 0;
        for (const auto& sep : seps) {
            auto found = text.find(sep, pos);
            if (found != std::string::npos && (best == std::string::npos || found < best)) {
                best = found;
                best_len = sep.size();
            }
        }
        if (best == std::string::npos) {
            out.push_back(text.substr(pos));
            break;
        }
        out.push_back(text.substr(pos, best - pos));
        pos = best + best_len;
    }
    return out;
}

}  // namespace detail

// Parses arrow-separated path text. Hops that fail store verification are
// dropped; surviving hops are re-segmented into maximal chained simple
// runs, and empty paths are discarded.
inline LlmPathResult parse_path_text(const std::string& text, const KgStore& store,
                                     std::size_t d_max, Strategy source = Strategy::SubgraphLlm) {
    LlmPathResult result;
    std::size_t hop_candidates = 0;
    for (const std::string& line : detail::split_any(text, {"\n"})) {
        std::vector<std::optional<Hop>> hops;
        for (const std::string& hop_text : detail::split_any(line, {"\xE2\x86\x92", "->"})) {
            std::smatch m;
            if (!std::regex_match(hop_text, m, detail::hop_pattern())) continue;
            ++hop_candidates;
            auto hop = detail::verify_hop(store, m[1].str(), m[2].str(), m[3].str(), m[4].str(),
                                          m[5].str(), m[6].str());
            if (!hop) ++result.dropped_hops;
            hops.push_back(hop);
        }
        // Re-segment into maximal runs that chain and stay simple.
        Path current{.hops = {}, .source = source};
        std::set<std::string> visited;
        auto emit = [&] {
            if (!current.hops.empty()) result.paths.push_back(current);
            current.hops.clear();
            visited.clear();
        };
        for (const auto& hop : hops) {
            if (!hop) {
                emit();
                continue;
            }
            if (hop->from() == hop->to()) {  // self-loop can't sit on a simple path
                ++result.dropped_hops;
                emit();
                continue;
            }
            if (!current.hops.empty() &&
                (current.hops.back().to() != hop->from() || visited.count(hop->to()) ||
                 current.hops.size() >= d_max))
                emit();
            if (current.hops.empty()) visited = {hop->from()};
            visited.insert(hop->to());
            current.hops.push_back(*hop);
        }
        emit();
    }
    result.parse_warning = hop_candidates == 0;
    return result;
}

inline LlmPathResult retrieve_subgraphs_llm(const MatchQuestion& q, LlmRetrieverContext& llm,
                                            const KgStore& store, std::size_t d_max = 3) {
    const PromptTemplate& tmpl = llm.prompts->get(PromptKind::SubgraphRetriever);
    ChatRequest req{llm.model, tmpl.system_text,
                    render_template(tmpl.user_template, {{"question", compose_text(q)}}),
                    llm.sampling};
    return parse_path_text(llm.client->complete(req), store, d_max, Strategy::SubgraphLlm);
}

// ── Strategy driver ────────────────────────────────────────────────────

// Immutable dependencies a strategy may draw on; validation is per
// strategy, so e.g. triple_vec runs without any LLM configured.
struct StrategyContext {
    const KgStore* store = nullptr;
    const VectorIndex* entity_index = nullptr;
    const VectorIndex* relation_index = nullptr;
    const VectorIndex* triple_index = nullptr;
    EmbeddingProvider* embedder = nullptr;
    LlmRetrieverContext llm;
    RetrievalConfig config;
    const EmbeddingVector* question_embedding = nullptr;  // reused when the caller timed it
};

namespace detail {

inline const EmbeddingVector& question_vec(const MatchQuestion& q, const StrategyContext& ctx,
                                           std::optional<EmbeddingVector>& storage) {
    if (ctx.question_embedding) return *ctx.question_embedding;
    if (!ctx.embedder) throw ConfigError("strategy requires an embedding provider");
    storage = embed(compose_text(q), *ctx.embedder);
    return *storage;
}

inline void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("strategy dependency missing: ") + what);
}

inline void bfs_from_entities(const KgStore& store, const std::vector<std::string>& entities,
                              const RetrievalConfig& cfg, Strategy source,
                              RetrievalOutcome& outcome) {
    if (entities.empty()) return;  // no entities, no paths
    if (entities.size() == 1) {
        PathSet set = bfs_neighborhood(store, entities.front(), cfg.d_max, cfg.path_cap, source);
        outcome.paths = std::move(set.paths);
        outcome.truncated = set.truncated;
        return;
    }
    for (const EntityPair& pair : entity_pairs(entities)) {
        PathSet set = bfs_paths(store, pair, cfg.d_max, cfg.path_cap, source);
        outcome.truncated = outcome.truncated || set.truncated;
        for (auto& p : set.paths) outcome.paths.push_back(std::move(p));
    }
}

}  // namespace detail

// Runs one retrieval strategy end to end (through BFS for the entity
// strategies; ranking-based refinement happens downstream). Also fetches
// the top-K relations when more than one path came back, since the
// frequency ranking scheme needs them.
inline RetrievalOutcome run_strategy(const MatchQuestion& q, Strategy strategy,
                                     const StrategyContext& ctx) {
    ctx.config.validate();
    detail::require(ctx.store != nullptr, "kg store");
    RetrievalOutcome outcome;
    outcome.question_id = q.question_id;
    outcome.strategy = strategy;
    auto started = std::chrono::steady_clock::now();
    std::optional<EmbeddingVector> qvec_storage;

    switch (strategy) {
        case Strategy::TripleVec: {
            detail::require(ctx.triple_index != nullptr, "triple index (run `index` first)");
            const auto& qv = detail::question_vec(q, ctx, qvec_storage);
            outcome.triples = retrieve_triples_vector(qv, *ctx.triple_index, ctx.config.k_triples);
            break;
        }
        case Strategy::EntityVecBfs: {
            detail::require(ctx.entity_index != nullptr, "entity index (run `index` first)");
            const auto& qv = detail::question_vec(q, ctx, qvec_storage);
            outcome.entities = retrieve_entities_vector(qv, *ctx.entity_index, ctx.config.k_entities);
            detail::bfs_from_entities(*ctx.store, outcome.entities, ctx.config, strategy, outcome);
            break;
        }
        case Strategy::EntityLlmBfs: {
            detail::require(ctx.llm.client != nullptr && ctx.llm.prompts != nullptr,
                            "chat client and prompts");
            LlmRetrieverContext llm = ctx.llm;
            LlmEntityResult found = retrieve_entities_llm(q, llm, *ctx.store);
            outcome.entities = std::move(found.entities);
            outcome.dropped_candidates = found.dropped;
            outcome.parse_warning = found.parse_warning;
            detail::bfs_from_entities(*ctx.store, outcome.entities, ctx.config, strategy, outcome);
            break;
        }
        case Strategy::SubgraphLlm: {
            detail::require(ctx.llm.client != nullptr && ctx.llm.prompts != nullptr,
                            "chat client and prompts");
            LlmRetrieverContext llm = ctx.llm;
            LlmPathResult found = retrieve_subgraphs_llm(q, llm, *ctx.store, ctx.config.d_max);
            outcome.paths = std::move(found.paths);
            outcome.dropped_candidates = found.dropped_hops;
            outcome.parse_warning = found.parse_warning;
            break;
        }
    }

    if (outcome.paths.size() > 1 && ctx.relation_index) {
        const auto& qv = detail::question_vec(q, ctx, qvec_storage);
        outcome.relations =
            retrieve_relations_vector(qv, *ctx.relation_index, ctx.config.k_relations);
    }

    outcome.retrieval_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return outcome;
}

// ── Audit serialization ────────────────────────────────────────────────

inline nlohmann::json to_json(const Path& p) {
    nlohmann::json hops = nlohmann::json::array();
    for (const Hop& h : p.hops)
        hops.push_back({{"head", h.head},
                        {"relation", h.relation},
                        {"tail", h.tail},
                        {"direction", to_string(h.direction)}});
    return {{"hops", hops}, {"source", to_string(p.source)}};
}

inline nlohmann::json to_json(const RetrievalOutcome& o) {
    nlohmann::json paths = nlohmann::json::array();
    for (const Path& p : o.paths) paths.push_back(to_json(p));
    nlohmann::json triples = nlohmann::json::array();
    for (const ScoredItem& t : o.triples)
        triples.push_back({{"id", t.item_id}, {"score", t.score}});
    return {{"question_id", o.question_id},
            {"strategy", to_string(o.strategy)},
            {"entities", o.entities},
            {"relations", o.relations},
            {"paths", paths},
            {"triples", triples},
            {"retrieval_time_s", o.retrieval_time_s},
            {"truncated", o.truncated},
            {"dropped_candidates", o.dropped_candidates},
            {"parse_warning", o.parse_warning}};
}

}  // namespace kgrag
