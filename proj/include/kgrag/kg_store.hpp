#pragma once
// In-memory knowledge-graph store over Wikidata5M-style dump files.
//
// Layout:
// - Entity/Relation dictionaries: id string -> dense u32 index
// - Triples: packed (head_idx, rel_idx, tail_idx), deduplicated
// - Adjacency: per entity, every incident edge with its orientation,
//   so traversal can walk edges in either direction
// - Label index: lowercased label/alias -> entity indexes
//
// Single writer during ingestion; immutable and freely shareable afterwards.

#include "kgrag/errors.hpp"
#include "kgrag/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgrag {

struct Entity {
    std::string id;
    std::string label;
    std::string description;
    std::vector<std::string> aliases;
};

struct Relation {
    std::string id;
    std::string label;
    std::string description;
    std::vector<std::string> aliases;
};

struct Triple {
    std::string head;
    std::string relation;
    std::string tail;
};

struct StoreStats {
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    std::size_t triple_count = 0;
    std::size_t max_degree = 0;
};

struct IngestReport {
    std::size_t loaded = 0;
    std::size_t skipped = 0;
};

enum class IngestMode { Strict, Lenient };

// Edge as seen from one endpoint.
struct NeighborEdge {
    std::string relation;
    std::string neighbor;
    Direction direction;
};

// Index-space edge used by traversal code.
struct AdjEdge {
    std::uint32_t relation;
    std::uint32_t neighbor;
    Direction direction;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

struct TripleKeyHash {
    std::size_t operator()(const std::array<std::uint32_t, 3>& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint32_t v : k) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

class KgStore {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;

    // ── Ingestion ──────────────────────────────────────────────────────

    // Lines: head<TAB>relation<TAB>tail. Duplicate triples and (in lenient
    // mode) malformed lines count as skipped; loaded + skipped equals the
    // number of input lines.
    IngestReport ingest_triples(const std::string& path, IngestMode mode = IngestMode::Lenient) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open triples file: " + path);
        IngestReport report;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string_view v(line);
            auto t1 = v.find('\t');
            auto t2 = t1 == std::string_view::npos ? t1 : v.find('\t', t1 + 1);
            if (t1 == std::string_view::npos || t2 == std::string_view::npos) {
                if (mode == IngestMode::Strict)
                    throw FormatError("expected head<TAB>relation<TAB>tail in " + path, lineno);
                ++report.skipped;
                continue;
            }
            std::string_view h = v.substr(0, t1);
            std::string_view r = v.substr(t1 + 1, t2 - t1 - 1);
            std::string_view t = v.substr(t2 + 1);
            if (h.empty() || r.empty() || t.empty() || t.find('\t') != std::string_view::npos) {
                if (mode == IngestMode::Strict)
                    throw FormatError("expected head<TAB>relation<TAB>tail in " + path, lineno);
                ++report.skipped;
                continue;
            }
            if (mode == IngestMode::Strict) {
                if (!entity_idx_.count(std::string(h)) || !entity_idx_.count(std::string(t)))
                    throw FormatError("unknown entity id in " + path, lineno);
                if (!relation_idx_.count(std::string(r)))
                    throw FormatError("unknown relation id in " + path, lineno);
            }
            std::uint32_t hi = intern_entity(h);
            std::uint32_t ri = intern_relation(r);
            std::uint32_t ti = intern_entity(t);
            if (add_triple(hi, ri, ti))
                ++report.loaded;
            else
                ++report.skipped;
        }
        return report;
    }

    // Lines: id<TAB>alias1<TAB>alias2... First alias becomes the label, the
    // rest become aliases. A repeated id merges its aliases and counts as
    // skipped so that loaded counts distinct records.
    IngestReport ingest_labels(const std::string& entities_path, const std::string& relations_path,
                               IngestMode mode = IngestMode::Lenient) {
        IngestReport report;
        ingest_label_file(entities_path, /*relations=*/false, mode, report);
        ingest_label_file(relations_path, /*relations=*/true, mode, report);
        return report;
    }

    // Lines: id<TAB>description.
    IngestReport ingest_descriptions(const std::string& path, bool relations = false,
                                     IngestMode mode = IngestMode::Lenient) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open descriptions file: " + path);
        IngestReport report;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0) {
                if (mode == IngestMode::Strict)
                    throw FormatError("expected id<TAB>description in " + path, lineno);
                ++report.skipped;
                continue;
            }
            std::string id = line.substr(0, tab);
            std::string desc = line.substr(tab + 1);
            if (mode == IngestMode::Strict) {
                bool known = relations ? relation_idx_.count(id) > 0 : entity_idx_.count(id) > 0;
                if (!known) throw FormatError("unknown id in " + path, lineno);
            }
            if (relations)
                relations_[intern_relation(id)].description = std::move(desc);
            else
                entities_[intern_entity(id)].description = std::move(desc);
            ++report.loaded;
        }
        return report;
    }

    // ── Queries ────────────────────────────────────────────────────────

    // Every triple incident to entity_id. Unknown id yields an empty list.
    std::vector<NeighborEdge> neighbors(std::string_view entity_id) const {
        std::vector<NeighborEdge> out;
        auto idx = entity_index(entity_id);
        if (!idx) return out;
        const auto& adj = adjacency_[*idx];
        out.reserve(adj.size());
        for (const AdjEdge& e : adj)
            out.push_back({relations_[e.relation].id, entities_[e.neighbor].id, e.direction});
        return out;
    }

    std::size_t degree(std::string_view entity_id) const {
        auto idx = entity_index(entity_id);
        return idx ? adjacency_[*idx].size() : 0;
    }

    // Case-insensitive match over entity labels and aliases.
    std::vector<std::string> resolve_label(std::string_view label) const {
        return resolve_in(entity_label_index_, entities_, label);
    }

    std::vector<std::string> resolve_relation_label(std::string_view label) const {
        return resolve_in(relation_label_index_, relations_, label);
    }

    const Entity* lookup_entity(std::string_view id) const {
        auto idx = entity_index(id);
        return idx ? &entities_[*idx] : nullptr;
    }

    const Relation* lookup_relation(std::string_view id) const {
        auto it = relation_idx_.find(std::string(id));
        return it == relation_idx_.end() ? nullptr : &relations_[it->second];
    }

    bool has_triple(std::string_view h, std::string_view r, std::string_view t) const {
        auto hi = entity_index(h);
        auto ti = entity_index(t);
        auto ri = relation_idx_.find(std::string(r));
        if (!hi || !ti || ri == relation_idx_.end()) return false;
        return triple_set_.count({*hi, ri->second, *ti}) > 0;
    }

    StoreStats stats() const {
        StoreStats s;
        s.entity_count = entities_.size();
        s.relation_count = relations_.size();
        s.triple_count = triples_.size();
        for (const auto& adj : adjacency_) s.max_degree = std::max(s.max_degree, adj.size());
        return s;
    }

    std::vector<Triple> triples() const {
        std::vector<Triple> out;
        out.reserve(triples_.size());
        for (const auto& t : triples_)
            out.push_back({entities_[t[0]].id, relations_[t[1]].id, entities_[t[2]].id});
        return out;
    }

    std::size_t triple_count() const { return triples_.size(); }
    std::size_t entity_count() const { return entities_.size(); }
    std::size_t relation_count() const { return relations_.size(); }

    // ── Index-space accessors for traversal ────────────────────────────

    std::optional<std::uint32_t> entity_index(std::string_view id) const {
        auto it = entity_idx_.find(std::string(id));
        if (it == entity_idx_.end()) return std::nullopt;
        return it->second;
    }

    const Entity& entity_at(std::uint32_t idx) const { return entities_[idx]; }
    const Relation& relation_at(std::uint32_t idx) const { return relations_[idx]; }

    std::span<const AdjEdge> adjacency(std::uint32_t entity_idx) const {
        return adjacency_[entity_idx];
    }

    // Nth stored triple in index space (head, relation, tail).
    const std::array<std::uint32_t, 3>& triple_at(std::size_t n) const { return triples_[n]; }

    const std::string& entity_label_or_id(std::string_view id) const {
        const Entity* e = lookup_entity(id);
        static const std::string empty;
        if (!e) return empty;  // callers pass ids resolved from this store
        return e->label.empty() ? e->id : e->label;
    }

    const std::string& relation_label_or_id(std::string_view id) const {
        const Relation* r = lookup_relation(id);
        static const std::string empty;
        if (!r) return empty;
        return r->label.empty() ? r->id : r->label;
    }

private:
    std::uint32_t intern_entity(std::string_view id) {
        auto it = entity_idx_.find(std::string(id));
        if (it != entity_idx_.end()) return it->second;
        std::uint32_t idx = static_cast<std::uint32_t>(entities_.size());
        entities_.push_back(Entity{std::string(id), "", "", {}});
        adjacency_.emplace_back();
        entity_idx_.emplace(std::string(id), idx);
        return idx;
    }

    std::uint32_t intern_relation(std::string_view id) {
        auto it = relation_idx_.find(std::string(id));
        if (it != relation_idx_.end()) return it->second;
        std::uint32_t idx = static_cast<std::uint32_t>(relations_.size());
        relations_.push_back(Relation{std::string(id), "", "", {}});
        relation_idx_.emplace(std::string(id), idx);
        return idx;
    }

    bool add_triple(std::uint32_t h, std::uint32_t r, std::uint32_t t) {
        std::array<std::uint32_t, 3> key{h, r, t};
        if (!triple_set_.insert(key).second) return false;
        triples_.push_back(key);
        adjacency_[h].push_back({r, t, Direction::Outgoing});
        adjacency_[t].push_back({r, h, Direction::Incoming});
        return true;
    }

    void ingest_label_file(const std::string& path, bool relations, IngestMode mode,
                           IngestReport& report) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open labels file: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::vector<std::string_view> fields;
            std::string_view v(line);
            std::size_t start = 0;
            while (true) {
                auto tab = v.find('\t', start);
                fields.push_back(v.substr(start, tab - start));
                if (tab == std::string_view::npos) break;
                start = tab + 1;
            }
            if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
                if (mode == IngestMode::Strict)
                    throw FormatError("expected id<TAB>label<TAB>alias... in " + path, lineno);
                ++report.skipped;
                continue;
            }
            bool fresh;
            if (relations) {
                std::uint32_t idx = intern_relation(fields[0]);
                Relation& rec = relations_[idx];
                fresh = rec.label.empty() && rec.aliases.empty();
                apply_labels(rec.label, rec.aliases, fields);
                index_labels(relation_label_index_, idx, rec.label, rec.aliases);
            } else {
                std::uint32_t idx = intern_entity(fields[0]);
                Entity& rec = entities_[idx];
                fresh = rec.label.empty() && rec.aliases.empty();
                apply_labels(rec.label, rec.aliases, fields);
                index_labels(entity_label_index_, idx, rec.label, rec.aliases);
            }
            if (fresh)
                ++report.loaded;
            else
                ++report.skipped;
        }
    }

    static void apply_labels(std::string& label, std::vector<std::string>& aliases,
                             const std::vector<std::string_view>& fields) {
        std::size_t first = 1;
        if (label.empty()) {
            label = std::string(fields[1]);
            first = 2;
        }
        for (std::size_t i = first; i < fields.size(); ++i) {
            if (fields[i].empty()) continue;
            std::string a(fields[i]);
            if (a == label) continue;
            if (std::find(aliases.begin(), aliases.end(), a) == aliases.end())
                aliases.push_back(std::move(a));
        }
    }

    template <typename IndexMap>
    static void index_labels(IndexMap& index, std::uint32_t idx, const std::string& label,
                             const std::vector<std::string>& aliases) {
        auto add = [&](const std::string& text) {
            if (text.empty()) return;
            auto& ids = index[detail::ascii_lower(text)];
            if (std::find(ids.begin(), ids.end(), idx) == ids.end()) ids.push_back(idx);
        };
        add(label);
        for (const auto& a : aliases) add(a);
    }

    template <typename IndexMap, typename Records>
    static std::vector<std::string> resolve_in(const IndexMap& index, const Records& records,
                                               std::string_view label) {
        std::vector<std::string> out;
        auto it = index.find(detail::ascii_lower(label));
        if (it == index.end()) return out;
        for (std::uint32_t idx : it->second) out.push_back(records[idx].id);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    std::unordered_map<std::string, std::uint32_t> entity_idx_;
    std::unordered_map<std::string, std::uint32_t> relation_idx_;
    std::vector<std::array<std::uint32_t, 3>> triples_;
    std::unordered_set<std::array<std::uint32_t, 3>, detail::TripleKeyHash> triple_set_;
    std::vector<std::vector<AdjEdge>> adjacency_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> entity_label_index_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> relation_label_index_;
};

}  // namespace kgrag
