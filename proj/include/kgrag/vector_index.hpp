#pragma once
// Top-K cosine search over embedding collections.
//
// Two interchangeable index types behind one interface:
// - ExactIndex: flat scan, the reference answer
// - HnswIndex: layered proximity graph for sublinear approximate search
//
// All stored vectors are unit-normalized, so cosine similarity is a plain
// dot product and the internal distance is its negation. Result order is a
// total order: score descending, then item_id ascending.
//
// Index file format (little-endian): versioned header, id/kind tables,
// raw float32 vectors, and (HNSW only) per-node adjacency per level.

#include "kgrag/embedding.hpp"
#include "kgrag/errors.hpp"
#include "kgrag/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace kgrag {

struct ScoredItem {
    std::string item_id;
    ItemKind kind = ItemKind::Entity;
    double score = 0.0;  // cosine similarity in [-1, 1]
};

struct HnswParams {
    std::size_t m = 16;
    std::size_t ef_construction = 200;
    std::size_t ef_search = 100;
    std::uint64_t seed = 42;
};

enum class IndexMode : std::uint8_t { Exact = 0, Hnsw = 1 };

// A · B / (|A| |B|).
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw ConfigError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class VectorIndex {
public:
    virtual ~VectorIndex() = default;
    virtual std::vector<ScoredItem> search(const EmbeddingVector& query, std::size_t k) const = 0;
    virtual std::size_t size() const = 0;
    virtual std::size_t dim() const = 0;
    virtual IndexMode mode() const = 0;
    virtual void save(const std::string& path) const = 0;
};

namespace detail {

constexpr std::uint32_t kIndexMagic = 0x5849474bu;  // "KGIX"
constexpr std::uint32_t kIndexVersion = 1;

// Shared flat storage: ids, kinds, row-major unit vectors.
struct ItemTable {
    std::vector<std::string> ids;
    std::vector<ItemKind> kinds;
    std::vector<float> vectors;  // size() == ids.size() * dim
    std::size_t dim = 0;

    std::size_t count() const { return ids.size(); }

    const float* row(std::size_t i) const { return vectors.data() + i * dim; }

    double dot_query(std::size_t i, const EmbeddingVector& q) const {
        const float* v = row(i);
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(q[d]) * v[d];
        return s;
    }

    double dot_rows(std::size_t i, std::size_t j) const {
        const float* a = row(i);
        const float* b = row(j);
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(a[d]) * b[d];
        return s;
    }

    void fill(const std::vector<EmbeddedItem>& items) {
        if (items.empty()) return;
        dim = items[0].vector.size();
        ids.reserve(items.size());
        kinds.reserve(items.size());
        vectors.reserve(items.size() * dim);
        for (const auto& item : items) {
            if (item.vector.size() != dim)
                throw ConfigError("index build: mixed vector dimensions (" +
                                  std::to_string(item.vector.size()) + " vs " +
                                  std::to_string(dim) + ")");
            double n = l2_norm(item.vector);
            if (std::abs(n - 1.0) > 1e-3)
                throw ConfigError("index build: vector for " + item.item_id +
                                  " is not unit-normalized");
            ids.push_back(item.item_id);
            kinds.push_back(item.kind);
            vectors.insert(vectors.end(), item.vector.begin(), item.vector.end());
        }
    }

    void check_query(const EmbeddingVector& q) const {
        if (count() > 0 && q.size() != dim)
            throw ConfigError("search: query dim " + std::to_string(q.size()) +
                              " does not match index dim " + std::to_string(dim));
    }

    ScoredItem scored(std::size_t i, double score) const { return {ids[i], kinds[i], score}; }

    // (score desc, id asc) total order over row indexes.
    bool better(std::size_t i, double si, std::size_t j, double sj) const {
        if (si != sj) return si > sj;
        return ids[i] < ids[j];
    }

    void save(std::ostream& out) const {
        write_pod(out, static_cast<std::uint32_t>(dim));
        write_pod(out, static_cast<std::uint64_t>(count()));
        for (std::size_t i = 0; i < count(); ++i) {
            write_pod(out, static_cast<std::uint16_t>(ids[i].size()));
            out.write(ids[i].data(), static_cast<std::streamsize>(ids[i].size()));
            write_pod(out, static_cast<std::uint8_t>(kinds[i]));
        }
        out.write(reinterpret_cast<const char*>(vectors.data()),
                  static_cast<std::streamsize>(vectors.size() * sizeof(float)));
    }

    void load(std::istream& in, const std::string& path) {
        std::uint32_t d = 0;
        std::uint64_t n = 0;
        if (!read_pod(in, d) || !read_pod(in, n))
            throw FormatError("index file truncated: " + path);
        dim = d;
        ids.resize(n);
        kinds.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint16_t len = 0;
            if (!read_pod(in, len)) throw FormatError("index file truncated: " + path);
            ids[i].resize(len);
            in.read(ids[i].data(), len);
            std::uint8_t kind = 0;
            if (!read_pod(in, kind) || kind > static_cast<std::uint8_t>(ItemKind::Question))
                throw FormatError("index file corrupt: " + path);
            kinds[i] = static_cast<ItemKind>(kind);
        }
        vectors.resize(n * dim);
        in.read(reinterpret_cast<char*>(vectors.data()),
                static_cast<std::streamsize>(vectors.size() * sizeof(float)));
        if (!in) throw FormatError("index file truncated: " + path);
    }
};

inline void write_index_header(std::ostream& out, IndexMode mode) {
    write_pod(out, kIndexMagic);
    write_pod(out, kIndexVersion);
    write_pod(out, static_cast<std::uint8_t>(mode));
}

}  // namespace detail

// ── Exact index ────────────────────────────────────────────────────────

class ExactIndex : public VectorIndex {
public:
    ExactIndex() = default;

    explicit ExactIndex(const std::vector<EmbeddedItem>& items) { table_.fill(items); }

    std::vector<ScoredItem> search(const EmbeddingVector& query, std::size_t k) const override {
        table_.check_query(query);
        std::vector<ScoredItem> out;
        if (k == 0 || table_.count() == 0) return out;
        std::vector<double> scores(table_.count());
        for (std::size_t i = 0; i < table_.count(); ++i) scores[i] = table_.dot_query(i, query);
        std::vector<std::size_t> order(table_.count());
        std::iota(order.begin(), order.end(), 0);
        std::size_t take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), [&](std::size_t a, std::size_t b) {
                              return table_.better(a, scores[a], b, scores[b]);
                          });
        out.reserve(take);
        for (std::size_t i = 0; i < take; ++i) out.push_back(table_.scored(order[i], scores[order[i]]));
        return out;
    }

    std::size_t size() const override { return table_.count(); }
    std::size_t dim() const override { return table_.dim; }
    IndexMode mode() const override { return IndexMode::Exact; }

    void save(const std::string& path) const override {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write index file: " + path);
        detail::write_index_header(out, IndexMode::Exact);
        table_.save(out);
        if (!out) throw IoError("short write to index file: " + path);
    }

    void load_body(std::istream& in, const std::string& path) { table_.load(in, path); }

private:
    detail::ItemTable table_;
};

// ── HNSW index ─────────────────────────────────────────────────────────

class HnswIndex : public VectorIndex {
public:
    HnswIndex() = default;

    HnswIndex(const std::vector<EmbeddedItem>& items, HnswParams params) : params_(params) {
        if (params_.m == 0 || params_.ef_construction == 0 || params_.ef_search == 0)
            throw ConfigError("hnsw params must be positive");
        table_.fill(items);
        levels_.reserve(table_.count());
        links_.reserve(table_.count());
        std::mt19937_64 rng(params_.seed);
        for (std::size_t i = 0; i < table_.count(); ++i) insert(i, rng);
    }

    std::vector<ScoredItem> search(const EmbeddingVector& query, std::size_t k) const override {
        table_.check_query(query);
        std::vector<ScoredItem> out;
        if (k == 0 || table_.count() == 0) return out;
        std::size_t ep = entry_point_;
        for (int lc = max_level_; lc > 0; --lc) ep = greedy_descend(query, ep, lc);
        auto found = search_layer(query, {ep}, std::max(params_.ef_search, k), 0);
        std::sort(found.begin(), found.end(), [&](const Candidate& a, const Candidate& b) {
            return table_.better(a.node, -a.dist, b.node, -b.dist);
        });
        std::size_t take = std::min(k, found.size());
        out.reserve(take);
        for (std::size_t i = 0; i < take; ++i)
            out.push_back(table_.scored(found[i].node, -found[i].dist));
        return out;
    }

    std::size_t size() const override { return table_.count(); }
    std::size_t dim() const override { return table_.dim; }
    IndexMode mode() const override { return IndexMode::Hnsw; }

    void save(const std::string& path) const override {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write index file: " + path);
        detail::write_index_header(out, IndexMode::Hnsw);
        detail::write_pod(out, static_cast<std::uint32_t>(params_.m));
        detail::write_pod(out, static_cast<std::uint32_t>(params_.ef_construction));
        detail::write_pod(out, static_cast<std::uint32_t>(params_.ef_search));
        detail::write_pod(out, params_.seed);
        detail::write_pod(out, static_cast<std::uint32_t>(entry_point_));
        detail::write_pod(out, static_cast<std::int32_t>(max_level_));
        table_.save(out);
        for (std::size_t i = 0; i < table_.count(); ++i) {
            detail::write_pod(out, static_cast<std::uint8_t>(levels_[i]));
            for (int lc = 0; lc <= levels_[i]; ++lc) {
                const auto& nbrs = links_[i][static_cast<std::size_t>(lc)];
                detail::write_pod(out, static_cast<std::uint32_t>(nbrs.size()));
                for (std::uint32_t n : nbrs) detail::write_pod(out, n);
            }
        }
        if (!out) throw IoError("short write to index file: " + path);
    }

    void load_body(std::istream& in, const std::string& path) {
        std::uint32_t m = 0, efc = 0, efs = 0, entry = 0;
        std::int32_t max_level = -1;
        if (!detail::read_pod(in, m) || !detail::read_pod(in, efc) || !detail::read_pod(in, efs) ||
            !detail::read_pod(in, params_.seed) || !detail::read_pod(in, entry) ||
            !detail::read_pod(in, max_level))
            throw FormatError("index file truncated: " + path);
        params_.m = m;
        params_.ef_construction = efc;
        params_.ef_search = efs;
        entry_point_ = entry;
        max_level_ = max_level;
        table_.load(in, path);
        levels_.resize(table_.count());
        links_.resize(table_.count());
        for (std::size_t i = 0; i < table_.count(); ++i) {
            std::uint8_t level = 0;
            if (!detail::read_pod(in, level)) throw FormatError("index file truncated: " + path);
            levels_[i] = level;
            links_[i].resize(static_cast<std::size_t>(level) + 1);
            for (int lc = 0; lc <= level; ++lc) {
                std::uint32_t n = 0;
                if (!detail::read_pod(in, n)) throw FormatError("index file truncated: " + path);
                auto& nbrs = links_[i][static_cast<std::size_t>(lc)];
                nbrs.resize(n);
                for (std::uint32_t j = 0; j < n; ++j)
                    if (!detail::read_pod(in, nbrs[j]))
                        throw FormatError("index file truncated: " + path);
            }
        }
    }

    const HnswParams& params() const { return params_; }

private:
    struct Candidate {
        double dist;  // -dot(query, node): smaller is closer
        std::size_t node;
    };

    struct Closer {  // min-heap on (dist, node)
        bool operator()(const Candidate& a, const Candidate& b) const {
            if (a.dist != b.dist) return a.dist > b.dist;
            return a.node > b.node;
        }
    };
    struct Farther {  // max-heap on (dist, node)
        bool operator()(const Candidate& a, const Candidate& b) const {
            if (a.dist != b.dist) return a.dist < b.dist;
            return a.node < b.node;
        }
    };

    std::size_t max_neighbors(int level) const { return level == 0 ? params_.m * 2 : params_.m; }

    int random_level(std::mt19937_64& rng) const {
        // u drawn from the top 53 bits keeps the draw platform-independent
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u <= 0.0) u = 0x1.0p-53;
        double mult = 1.0 / std::log(static_cast<double>(params_.m));
        int level = static_cast<int>(-std::log(u) * mult);
        return std::min(level, 15);
    }

    double dist_query(const EmbeddingVector& q, std::size_t node) const {
        return -table_.dot_query(node, q);
    }

    double dist_nodes(std::size_t a, std::size_t b) const { return -table_.dot_rows(a, b); }

    std::size_t greedy_descend(const EmbeddingVector& q, std::size_t ep, int level) const {
        double best = dist_query(q, ep);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t n : links_[ep][static_cast<std::size_t>(level)]) {
                double d = dist_query(q, n);
                if (d < best) {
                    best = d;
                    ep = n;
                    improved = true;
                }
            }
        }
        return ep;
    }

    std::vector<Candidate> search_layer(const EmbeddingVector& q,
                                        const std::vector<std::size_t>& entries, std::size_t ef,
                                        int level) const {
        std::vector<char> visited(table_.count(), 0);
        std::priority_queue<Candidate, std::vector<Candidate>, Closer> candidates;
        std::priority_queue<Candidate, std::vector<Candidate>, Farther> results;
        for (std::size_t ep : entries) {
            if (visited[ep]) continue;
            visited[ep] = 1;
            Candidate c{dist_query(q, ep), ep};
            candidates.push(c);
            results.push(c);
        }
        while (!candidates.empty()) {
            Candidate c = candidates.top();
            candidates.pop();
            if (results.size() >= ef && c.dist > results.top().dist) break;
            for (std::uint32_t n : links_[c.node][static_cast<std::size_t>(level)]) {
                if (visited[n]) continue;
                visited[n] = 1;
                double d = dist_query(q, n);
                if (results.size() < ef || d < results.top().dist) {
                    Candidate nc{d, n};
                    candidates.push(nc);
                    results.push(nc);
                    if (results.size() > ef) results.pop();
                }
            }
        }
        std::vector<Candidate> out;
        out.reserve(results.size());
        while (!results.empty()) {
            out.push_back(results.top());
            results.pop();
        }
        std::reverse(out.begin(), out.end());  // nearest first
        return out;
    }

    // Diversified neighbor selection: keep a candidate only if it is closer
    // to the query than to every neighbor already kept; backfill with the
    // nearest pruned candidates so nodes never end up under-connected.
    std::vector<std::size_t> select_neighbors(std::size_t for_node,
                                              std::vector<Candidate> candidates,
                                              std::size_t m) const {
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return a.node < b.node;
        });
        std::vector<std::size_t> kept;
        std::vector<std::size_t> pruned;
        for (const Candidate& c : candidates) {
            if (kept.size() >= m) break;
            if (c.node == for_node) continue;
            bool diverse = true;
            for (std::size_t r : kept) {
                if (dist_nodes(c.node, r) < c.dist) {
                    diverse = false;
                    break;
                }
            }
            if (diverse)
                kept.push_back(c.node);
            else
                pruned.push_back(c.node);
        }
        for (std::size_t n : pruned) {
            if (kept.size() >= m) break;
            kept.push_back(n);
        }
        return kept;
    }

    void insert(std::size_t node, std::mt19937_64& rng) {
        int level = random_level(rng);
        levels_.push_back(level);
        links_.emplace_back(static_cast<std::size_t>(level) + 1);
        if (node == 0) {
            entry_point_ = 0;
            max_level_ = level;
            return;
        }
        const float* raw = table_.row(node);
        EmbeddingVector q(raw, raw + table_.dim);

        std::size_t ep = entry_point_;
        for (int lc = max_level_; lc > level; --lc) ep = greedy_descend(q, ep, lc);
        for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
            auto found = search_layer(q, {ep}, params_.ef_construction, lc);
            auto selected = select_neighbors(node, found, params_.m);
            auto& own = links_[node][static_cast<std::size_t>(lc)];
            own = std::vector<std::uint32_t>(selected.begin(), selected.end());
            for (std::size_t s : selected) {
                auto& theirs = links_[s][static_cast<std::size_t>(lc)];
                theirs.push_back(static_cast<std::uint32_t>(node));
                std::size_t cap = max_neighbors(lc);
                if (theirs.size() > cap) {
                    std::vector<Candidate> cands;
                    cands.reserve(theirs.size());
                    for (std::uint32_t n : theirs) cands.push_back({dist_nodes(s, n), n});
                    auto trimmed = select_neighbors(s, std::move(cands), cap);
                    theirs.assign(trimmed.begin(), trimmed.end());
                }
            }
            if (!found.empty()) ep = found.front().node;
        }
        if (level > max_level_) {
            max_level_ = level;
            entry_point_ = node;
        }
    }

    detail::ItemTable table_;
    HnswParams params_;
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::size_t entry_point_ = 0;
    int max_level_ = -1;
};

// ── Factories ──────────────────────────────────────────────────────────

inline std::unique_ptr<VectorIndex> build_index(const std::vector<EmbeddedItem>& items,
                                                IndexMode mode, HnswParams params = {}) {
    if (mode == IndexMode::Exact) return std::make_unique<ExactIndex>(items);
    return std::make_unique<HnswIndex>(items, params);
}

inline std::unique_ptr<VectorIndex> load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index file: " + path);
    std::uint32_t magic = 0, version = 0;
    std::uint8_t mode = 0;
    if (!detail::read_pod(in, magic) || magic != detail::kIndexMagic)
        throw FormatError("not an index file: " + path);
    if (!detail::read_pod(in, version) || version != detail::kIndexVersion)
        throw FormatError("unsupported index file version in " + path);
    if (!detail::read_pod(in, mode) || mode > static_cast<std::uint8_t>(IndexMode::Hnsw))
        throw FormatError("index file corrupt: " + path);
    if (static_cast<IndexMode>(mode) == IndexMode::Exact) {
        auto idx = std::make_unique<ExactIndex>();
        idx->load_body(in, path);
        return idx;
    }
    auto idx = std::make_unique<HnswIndex>();
    idx->load_body(in, path);
    return idx;
}

}  // namespace kgrag
