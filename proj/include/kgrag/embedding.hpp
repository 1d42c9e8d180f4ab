#pragma once
// Text composition and dense-vector embedding for KG items and questions.
//
// Providers are pluggable: an HTTP client for hosted embedding APIs and a
// deterministic token-hashing embedder for offline runs and tests. Every
// vector handed out is unit-normalized.
//
// Collection file format (little-endian):
//   header:  magic "KGEM" (u32), version (u32), dim (u32)
//   record:  kind (u8), id_len (u16), id bytes, dim (u32), float32[dim]
// Appending new records keeps the file valid, which is what makes
// embed_corpus resumable.

#include "kgrag/errors.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/types.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kgrag {

using EmbeddingVector = std::vector<float>;

struct EmbeddedItem {
    std::string item_id;
    ItemKind kind = ItemKind::Entity;
    EmbeddingVector vector;
};

// ── Vector math ────────────────────────────────────────────────────────

inline double l2_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

inline bool all_finite(const EmbeddingVector& v) {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Scales to unit L2 norm. A zero (or non-finite) vector has no direction,
// so it is rejected rather than silently producing NaN.
inline void normalize(EmbeddingVector& v) {
    if (!all_finite(v)) throw Error("cannot normalize non-finite vector");
    double n = l2_norm(v);
    if (n == 0.0) throw Error("cannot normalize zero vector");
    for (float& x : v) x = static_cast<float>(x / n);
}

inline EmbeddingVector normalized(EmbeddingVector v) {
    normalize(v);
    return v;
}

// ── Canonical text composition ─────────────────────────────────────────

inline std::string compose_text(const Entity& e) {
    if (e.description.empty()) return e.label.empty() ? e.id : e.label;
    return (e.label.empty() ? e.id : e.label) + ". " + e.description;
}

inline std::string compose_text(const Relation& r) {
    if (r.description.empty()) return r.label.empty() ? r.id : r.label;
    return (r.label.empty() ? r.id : r.label) + ". " + r.description;
}

// "head_label head_desc. relation_label. tail_label tail_desc."
// Missing labels fall back to the raw ids.
inline std::string compose_text(const Triple& t, const KgStore& store) {
    auto entity_part = [&](const std::string& id) {
        const Entity* e = store.lookup_entity(id);
        if (!e || e->label.empty()) return id;
        return e->description.empty() ? e->label : e->label + " " + e->description;
    };
    const Relation* r = store.lookup_relation(t.relation);
    std::string rel = (r && !r->label.empty()) ? r->label : t.relation;
    return entity_part(t.head) + ". " + rel + ". " + entity_part(t.tail) + ".";
}

inline std::string compose_text(const MatchQuestion& q) {
    std::string out = "Attribute1: " + q.source_attr;
    if (!q.desc_source.empty()) out += ", Description: " + q.desc_source;
    out += "; Attribute2: " + q.target_attr;
    if (!q.desc_target.empty()) out += ", Description: " + q.desc_target;
    out += ". Are they semantically matched?";
    return out;
}

// ── Providers ──────────────────────────────────────────────────────────

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    // One vector per input text, in order. Vectors need not be normalized;
    // callers normalize.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// Embeds one text, enforcing the dimension and normalization contract.
inline EmbeddingVector embed(const std::string& text, EmbeddingProvider& provider) {
    auto out = provider.embed_batch({text});
    if (out.size() != 1) throw TransportError("provider returned wrong batch size");
    EmbeddingVector v = std::move(out[0]);
    if (v.size() != provider.dim())
        throw ConfigError("provider returned dim " + std::to_string(v.size()) + ", configured " +
                          std::to_string(provider.dim()));
    normalize(v);
    return v;
}

// Deterministic offline embedder: lowercased alphanumeric tokens hashed into
// dim buckets with a hash-derived sign, then normalized. Same text, same
// vector, on every platform.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 300, std::uint64_t seed = 0)
        : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw ConfigError("embedding dim must be positive");
    }

    std::size_t dim() const override { return dim_; }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed_one(t));
        return out;
    }

private:
    EmbeddingVector embed_one(const std::string& text) const {
        EmbeddingVector v(dim_, 0.0f);
        std::size_t tokens = 0;
        std::string tok;
        auto flush = [&] {
            if (tok.empty()) return;
            add_token(v, tok);
            tok.clear();
            ++tokens;
        };
        for (char c : text) {
            if (std::isalnum(static_cast<unsigned char>(c)))
                tok += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            else
                flush();
        }
        flush();
        if (tokens == 0) add_token(v, text);  // degenerate text still gets a direction
        normalize(v);
        return v;
    }

    void add_token(EmbeddingVector& v, const std::string& tok) const {
        std::uint64_t h = 1469598103934665603ull ^ seed_;
        for (unsigned char c : tok) {
            h ^= c;
            h *= 1099511628211ull;
        }
        float sign = (h >> 63) ? -1.0f : 1.0f;
        v[h % dim_] += sign;
        if (v[h % dim_] == 0.0f) v[h % dim_] = sign;  // cancelled buckets keep a direction
    }

    std::size_t dim_;
    std::uint64_t seed_;
};

// ── Persistence ────────────────────────────────────────────────────────

namespace detail {

constexpr std::uint32_t kEmbedMagic = 0x4d45474bu;  // "KGEM"
constexpr std::uint32_t kEmbedVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<bool>(in);
}

inline void write_embed_record(std::ostream& out, const EmbeddedItem& item) {
    write_pod(out, static_cast<std::uint8_t>(item.kind));
    write_pod(out, static_cast<std::uint16_t>(item.item_id.size()));
    out.write(item.item_id.data(), static_cast<std::streamsize>(item.item_id.size()));
    write_pod(out, static_cast<std::uint32_t>(item.vector.size()));
    out.write(reinterpret_cast<const char*>(item.vector.data()),
              static_cast<std::streamsize>(item.vector.size() * sizeof(float)));
}

}  // namespace detail

// Loads a collection, validating each record. A truncated or corrupt record
// reports the index of the last record that read cleanly.
inline std::vector<EmbeddedItem> load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embeddings file: " + path);
    std::uint32_t magic = 0, version = 0, dim = 0;
    if (!detail::read_pod(in, magic) || magic != detail::kEmbedMagic)
        throw FormatError("not an embeddings file: " + path);
    if (!detail::read_pod(in, version) || version != detail::kEmbedVersion)
        throw FormatError("unsupported embeddings file version in " + path);
    if (!detail::read_pod(in, dim)) throw FormatError("embeddings header truncated in " + path);

    std::vector<EmbeddedItem> items;
    std::set<std::pair<std::uint8_t, std::string>> seen;
    auto corrupt = [&](const char* what) -> FormatError {
        std::string at = items.empty() ? std::string("none")
                                       : std::to_string(items.size() - 1);
        return FormatError(std::string(what) + " in " + path + "; last valid record index: " + at);
    };
    while (true) {
        std::uint8_t kind = 0;
        in.read(reinterpret_cast<char*>(&kind), 1);
        if (in.eof()) break;
        if (!in) throw corrupt("short read");
        if (kind > static_cast<std::uint8_t>(ItemKind::Question)) throw corrupt("bad record kind");
        std::uint16_t id_len = 0;
        if (!detail::read_pod(in, id_len) || id_len == 0) throw corrupt("bad record id");
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        if (!in) throw corrupt("truncated record id");
        std::uint32_t rdim = 0;
        if (!detail::read_pod(in, rdim) || rdim != dim) throw corrupt("record dim mismatch");
        EmbeddingVector v(rdim);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(rdim * sizeof(float)));
        if (!in) throw corrupt("truncated record vector");
        if (!all_finite(v)) throw corrupt("non-finite values");
        if (!seen.insert({kind, id}).second) throw corrupt("duplicate item id");
        items.push_back({std::move(id), static_cast<ItemKind>(kind), std::move(v)});
    }
    return items;
}

// Raised when a corpus run fails partway; already-written records stay on
// disk and the message carries the persisted count.
class EmbedError : public Error {
public:
    EmbedError(const std::string& msg, std::size_t completed)
        : Error(msg + " (persisted " + std::to_string(completed) + " records)"),
          completed_(completed) {}
    std::size_t completed() const { return completed_; }

private:
    std::size_t completed_;
};

struct CorpusItem {
    std::string item_id;
    ItemKind kind;
    std::string text;
};

// Embeds every item not already present in out_path and appends it there.
// Returns the number of records written by this call. Batches may be
// embedded concurrently (parallelism > 1); writes stay in input order
// through a single writer.
inline std::size_t embed_corpus(const std::vector<CorpusItem>& items, EmbeddingProvider& provider,
                                std::size_t batch_size, const std::string& out_path,
                                std::size_t parallelism = 1) {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (parallelism == 0) parallelism = 1;

    std::set<std::pair<std::uint8_t, std::string>> done;
    bool existing = static_cast<bool>(std::ifstream(out_path, std::ios::binary));
    if (existing) {
        for (const auto& item : load_embeddings(out_path))
            done.insert({static_cast<std::uint8_t>(item.kind), item.item_id});
    }

    std::vector<const CorpusItem*> pending;
    for (const auto& item : items)
        if (!done.count({static_cast<std::uint8_t>(item.kind), item.item_id}))
            pending.push_back(&item);

    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open embeddings file for write: " + out_path);
    if (!existing) {
        detail::write_pod(out, detail::kEmbedMagic);
        detail::write_pod(out, detail::kEmbedVersion);
        detail::write_pod(out, static_cast<std::uint32_t>(provider.dim()));
        out.flush();
    }

    std::vector<std::vector<const CorpusItem*>> batches;
    for (std::size_t i = 0; i < pending.size(); i += batch_size)
        batches.emplace_back(pending.begin() + static_cast<std::ptrdiff_t>(i),
                             pending.begin() +
                                 static_cast<std::ptrdiff_t>(std::min(i + batch_size, pending.size())));

    std::size_t written = 0;
    auto embed_batch_of = [&](const std::vector<const CorpusItem*>& batch) {
        std::vector<std::string> texts;
        texts.reserve(batch.size());
        for (const auto* it : batch) texts.push_back(it->text);
        auto vectors = provider.embed_batch(texts);
        if (vectors.size() != batch.size())
            throw TransportError("provider returned wrong batch size");
        for (auto& v : vectors) {
            if (v.size() != provider.dim())
                throw ConfigError("provider returned dim " + std::to_string(v.size()) +
                                  ", configured " + std::to_string(provider.dim()));
            normalize(v);
        }
        return vectors;
    };

    for (std::size_t group = 0; group < batches.size(); group += parallelism) {
        std::size_t n = std::min(parallelism, batches.size() - group);
        std::vector<std::future<std::vector<EmbeddingVector>>> futs;
        for (std::size_t j = 0; j < n; ++j)
            futs.push_back(std::async(n == 1 ? std::launch::deferred : std::launch::async,
                                      embed_batch_of, std::cref(batches[group + j])));
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<EmbeddingVector> vectors;
            try {
                vectors = futs[j].get();
            } catch (const std::exception& e) {
                out.flush();
                throw EmbedError(e.what(), written);
            }
            const auto& batch = batches[group + j];
            for (std::size_t i = 0; i < batch.size(); ++i) {
                detail::write_embed_record(
                    out, EmbeddedItem{batch[i]->item_id, batch[i]->kind, std::move(vectors[i])});
                ++written;
            }
            out.flush();
        }
    }
    return written;
}

}  // namespace kgrag
