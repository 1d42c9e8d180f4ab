#pragma once
// Shared fixtures for the test suites: temp dirs, store builders, and the
// independent brute-force path enumerator used as the BFS oracle.

#include "kgrag/kg_store.hpp"
#include "kgrag/retrieval.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

namespace testutil {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("kgrag_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Builds a store from inline TSV content (labels optional).
inline kgrag::KgStore make_store(const std::string& triples_tsv,
                                 const std::string& entities_tsv = "",
                                 const std::string& relations_tsv = "",
                                 kgrag::IngestMode mode = kgrag::IngestMode::Lenient) {
    TempDir dir;
    kgrag::KgStore store;
    if (!entities_tsv.empty() || !relations_tsv.empty()) {
        write_file(dir.file("e.txt"), entities_tsv);
        write_file(dir.file("r.txt"), relations_tsv);
        store.ingest_labels(dir.file("e.txt"), dir.file("r.txt"), mode);
    }
    write_file(dir.file("t.txt"), triples_tsv);
    store.ingest_triples(dir.file("t.txt"), mode);
    return store;
}

// Entities and relations from the worked examples, with labels.
inline kgrag::KgStore case_study_store() {
    return make_store(
        "Q2596417\tQ21514624\tQ852835\n"
        "Q852835\tQ21514624\tQ181600\n"
        "Q297199\tP31\tQ3518464\n",
        "Q2596417\tbeneficiary\n"
        "Q852835\tcustomer\n"
        "Q181600\tpatient\n"
        "Q297199\tSA physical status classification system\n"
        "Q3518464\tmedical classification\n"
        "Q39631\tphysician\tdoctor\n",
        "Q21514624\tsubclass of\n"
        "P31\tinstance of\n");
}

// A-B-C-D chain plus A-E and E-D shortcut.
inline kgrag::KgStore chain_store() {
    return make_store(
        "A\tP1\tB\n"
        "B\tP1\tC\n"
        "C\tP1\tD\n"
        "A\tP2\tE\n"
        "E\tP2\tD\n");
}

// ── Independent all-simple-paths oracle (recursive DFS over the public
// neighbors() API; no shared code with the BFS implementation) ──────────

inline void oracle_dfs(const kgrag::KgStore& store, const std::string& cur,
                       const std::string& dst, std::size_t d_max, std::vector<kgrag::Hop>& hops,
                       std::set<std::string>& visited, std::vector<kgrag::Path>& out) {
    if (hops.size() >= d_max) return;
    for (const kgrag::NeighborEdge& e : store.neighbors(cur)) {
        if (visited.count(e.neighbor)) continue;
        kgrag::Hop hop = e.direction == kgrag::Direction::Outgoing
                             ? kgrag::Hop{cur, e.relation, e.neighbor, kgrag::Direction::Outgoing}
                             : kgrag::Hop{e.neighbor, e.relation, cur, kgrag::Direction::Incoming};
        hops.push_back(hop);
        if (e.neighbor == dst) {
            out.push_back(kgrag::Path{hops, kgrag::Strategy::EntityVecBfs});
        } else {
            visited.insert(e.neighbor);
            oracle_dfs(store, e.neighbor, dst, d_max, hops, visited, out);
            visited.erase(e.neighbor);
        }
        hops.pop_back();
    }
}

inline std::vector<kgrag::Path> oracle_simple_paths(const kgrag::KgStore& store,
                                                    const std::string& src,
                                                    const std::string& dst, std::size_t d_max) {
    std::vector<kgrag::Path> out;
    if (src == dst) return out;
    std::vector<kgrag::Hop> hops;
    std::set<std::string> visited{src};
    oracle_dfs(store, src, dst, d_max, hops, visited, out);
    return out;
}

inline std::vector<kgrag::Path> sorted_paths(std::vector<kgrag::Path> paths) {
    std::sort(paths.begin(), paths.end());
    return paths;
}

// Random graph as TSV: up to n nodes, m edge draws, r relation labels.
inline std::string random_graph_tsv(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                    std::size_t r) {
    std::string tsv;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t h = rng() % n;
        std::size_t t = rng() % n;
        std::size_t rel = rng() % r;
        tsv += "N" + std::to_string(h) + "\tR" + std::to_string(rel) + "\tN" + std::to_string(t) +
               "\n";
    }
    return tsv;
}

}  // namespace testutil
