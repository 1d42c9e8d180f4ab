#pragma once
// Application configuration: one JSON file plus flag overrides (flags win).
// Unknown keys are rejected so typos fail loudly, every field has a
// documented default, and the effective configuration is echoed (with a
// hash) into every report.

#include "kgrag/errors.hpp"
#include "kgrag/ranking.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/vector_index.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace kgrag {

struct PathsConfig {
    std::string triples;
    std::string entities;
    std::string relations;
    std::string entity_descriptions;
    std::string relation_descriptions;
    std::string dataset;
    std::string templates_dir;
    std::string embeddings_dir = "artifacts/embeddings";
    std::string index_dir = "artifacts/indexes";
    std::string replay_store = "artifacts/replay.jsonl";
    std::string out_dir = "artifacts/out";
};

struct EmbeddingConfig {
    std::string provider = "hash";  // hash | http
    std::string endpoint;
    std::string model;
    std::string api_key_env = "EMBED_API_KEY";
    std::size_t dim = 300;
    std::size_t batch_size = 32;
    std::size_t parallelism = 1;
    double timeout_s = 60.0;
    int retries = 3;
};

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o-mini";
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_s = 60.0;
    int retries = 3;
    int min_interval_ms = 0;
    SamplingParams sampling;
};

struct IndexConfig {
    std::string mode = "hnsw";  // exact | hnsw
    HnswParams hnsw;
};

struct RankingConfig {
    std::string scheme = "auto";  // auto | frequency | normalized | similarity
    std::string top = "2";        // 1 | 2 | all
};

struct AppConfig {
    PathsConfig paths;
    std::string ingest_mode = "lenient";  // strict | lenient
    std::string strategy = "triple_vec";
    RetrievalConfig retrieval;
    RankingConfig ranking;
    EmbeddingConfig embedding;
    LlmConfig llm;
    std::string replay = "replay";  // record | replay | live
    std::uint64_t seed = 42;
    std::size_t parallelism = 1;

    // "auto" pairs the similarity scheme with the triple pipeline and
    // frequency scoring with the path pipelines.
    RankScheme resolved_scheme() const {
        if (ranking.scheme == "auto")
            return strategy == "triple_vec" ? RankScheme::Similarity : RankScheme::Frequency;
        return parse_rank_scheme(ranking.scheme);
    }

    IngestMode resolved_ingest_mode() const {
        if (ingest_mode == "strict") return IngestMode::Strict;
        if (ingest_mode == "lenient") return IngestMode::Lenient;
        throw ConfigError("ingest_mode must be strict or lenient (got '" + ingest_mode + "')");
    }

    IndexMode resolved_index_mode() const {
        if (index.mode == "exact") return IndexMode::Exact;
        if (index.mode == "hnsw") return IndexMode::Hnsw;
        throw ConfigError("index.mode must be exact or hnsw (got '" + index.mode + "')");
    }

    IndexConfig index;

    void validate() const {
        retrieval.validate();
        (void)parse_strategy(strategy);
        (void)resolved_ingest_mode();
        (void)resolved_index_mode();
        (void)parse_replay_mode(replay);
        (void)TopN::parse(ranking.top);
        if (ranking.scheme != "auto") (void)parse_rank_scheme(ranking.scheme);
        if (embedding.provider != "hash" && embedding.provider != "http")
            throw ConfigError("embedding.provider must be hash or http (got '" +
                              embedding.provider + "')");
        if (embedding.provider == "http" && embedding.endpoint.empty())
            throw ConfigError("embedding.provider=http requires embedding.endpoint");
        if (embedding.dim < 1) throw ConfigError("embedding.dim must be >= 1");
        if (embedding.batch_size < 1) throw ConfigError("embedding.batch_size must be >= 1");
        if (index.hnsw.m < 2) throw ConfigError("index.m must be >= 2");
        if (index.hnsw.ef_construction < 1 || index.hnsw.ef_search < 1)
            throw ConfigError("index ef values must be >= 1");
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline AppConfig config_from_json(const nlohmann::json& j) {
    AppConfig c;
    detail::check_keys(j,
                       {"paths", "ingest_mode", "strategy", "retrieval", "ranking", "embedding",
                        "llm", "index", "replay", "seed", "parallelism"},
                       "");
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        detail::check_keys(p,
                           {"triples", "entities", "relations", "entity_descriptions",
                            "relation_descriptions", "dataset", "templates_dir", "embeddings_dir",
                            "index_dir", "replay_store", "out_dir"},
                           "paths.");
        detail::maybe(p, "triples", c.paths.triples);
        detail::maybe(p, "entities", c.paths.entities);
        detail::maybe(p, "relations", c.paths.relations);
        detail::maybe(p, "entity_descriptions", c.paths.entity_descriptions);
        detail::maybe(p, "relation_descriptions", c.paths.relation_descriptions);
        detail::maybe(p, "dataset", c.paths.dataset);
        detail::maybe(p, "templates_dir", c.paths.templates_dir);
        detail::maybe(p, "embeddings_dir", c.paths.embeddings_dir);
        detail::maybe(p, "index_dir", c.paths.index_dir);
        detail::maybe(p, "replay_store", c.paths.replay_store);
        detail::maybe(p, "out_dir", c.paths.out_dir);
    }
    detail::maybe(j, "ingest_mode", c.ingest_mode);
    detail::maybe(j, "strategy", c.strategy);
    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        detail::check_keys(r, {"d_max", "k_entities", "k_relations", "k_triples", "path_cap"},
                           "retrieval.");
        detail::maybe(r, "d_max", c.retrieval.d_max);
        detail::maybe(r, "k_entities", c.retrieval.k_entities);
        detail::maybe(r, "k_relations", c.retrieval.k_relations);
        detail::maybe(r, "k_triples", c.retrieval.k_triples);
        detail::maybe(r, "path_cap", c.retrieval.path_cap);
    }
    if (j.contains("ranking")) {
        const auto& r = j.at("ranking");
        detail::check_keys(r, {"scheme", "top"}, "ranking.");
        detail::maybe(r, "scheme", c.ranking.scheme);
        detail::maybe(r, "top", c.ranking.top);
    }
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        detail::check_keys(e,
                           {"provider", "endpoint", "model", "api_key_env", "dim", "batch_size",
                            "parallelism", "timeout_s", "retries"},
                           "embedding.");
        detail::maybe(e, "provider", c.embedding.provider);
        detail::maybe(e, "endpoint", c.embedding.endpoint);
        detail::maybe(e, "model", c.embedding.model);
        detail::maybe(e, "api_key_env", c.embedding.api_key_env);
        detail::maybe(e, "dim", c.embedding.dim);
        detail::maybe(e, "batch_size", c.embedding.batch_size);
        detail::maybe(e, "parallelism", c.embedding.parallelism);
        detail::maybe(e, "timeout_s", c.embedding.timeout_s);
        detail::maybe(e, "retries", c.embedding.retries);
    }
    if (j.contains("llm")) {
        const auto& l = j.at("llm");
        detail::check_keys(
            l, {"endpoint", "model", "api_key_env", "timeout_s", "retries", "min_interval_ms",
                "sampling"},
            "llm.");
        detail::maybe(l, "endpoint", c.llm.endpoint);
        detail::maybe(l, "model", c.llm.model);
        detail::maybe(l, "api_key_env", c.llm.api_key_env);
        detail::maybe(l, "timeout_s", c.llm.timeout_s);
        detail::maybe(l, "retries", c.llm.retries);
        detail::maybe(l, "min_interval_ms", c.llm.min_interval_ms);
        if (l.contains("sampling")) {
            const auto& s = l.at("sampling");
            detail::check_keys(s, {"temperature", "top_p", "top_k", "max_new_tokens"},
                               "llm.sampling.");
            detail::maybe(s, "temperature", c.llm.sampling.temperature);
            detail::maybe(s, "top_p", c.llm.sampling.top_p);
            detail::maybe(s, "top_k", c.llm.sampling.top_k);
            detail::maybe(s, "max_new_tokens", c.llm.sampling.max_new_tokens);
        }
    }
    if (j.contains("index")) {
        const auto& i = j.at("index");
        detail::check_keys(i, {"mode", "m", "ef_construction", "ef_search"}, "index.");
        detail::maybe(i, "mode", c.index.mode);
        detail::maybe(i, "m", c.index.hnsw.m);
        detail::maybe(i, "ef_construction", c.index.hnsw.ef_construction);
        detail::maybe(i, "ef_search", c.index.hnsw.ef_search);
    }
    detail::maybe(j, "replay", c.replay);
    detail::maybe(j, "seed", c.seed);
    detail::maybe(j, "parallelism", c.parallelism);
    c.index.hnsw.seed = c.seed;
    c.validate();
    return c;
}

inline AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError("config file is not valid JSON: " + path);
    return config_from_json(j);
}

inline nlohmann::json config_to_json(const AppConfig& c) {
    return nlohmann::json{
        {"paths",
         {{"triples", c.paths.triples},
          {"entities", c.paths.entities},
          {"relations", c.paths.relations},
          {"entity_descriptions", c.paths.entity_descriptions},
          {"relation_descriptions", c.paths.relation_descriptions},
          {"dataset", c.paths.dataset},
          {"templates_dir", c.paths.templates_dir},
          {"embeddings_dir", c.paths.embeddings_dir},
          {"index_dir", c.paths.index_dir},
          {"replay_store", c.paths.replay_store},
          {"out_dir", c.paths.out_dir}}},
        {"ingest_mode", c.ingest_mode},
        {"strategy", c.strategy},
        {"retrieval",
         {{"d_max", c.retrieval.d_max},
          {"k_entities", c.retrieval.k_entities},
          {"k_relations", c.retrieval.k_relations},
          {"k_triples", c.retrieval.k_triples},
          {"path_cap", c.retrieval.path_cap}}},
        {"ranking", {{"scheme", c.ranking.scheme}, {"top", c.ranking.top}}},
        {"embedding",
         {{"provider", c.embedding.provider},
          {"endpoint", c.embedding.endpoint},
          {"model", c.embedding.model},
          {"api_key_env", c.embedding.api_key_env},
          {"dim", c.embedding.dim},
          {"batch_size", c.embedding.batch_size},
          {"parallelism", c.embedding.parallelism},
          {"timeout_s", c.embedding.timeout_s},
          {"retries", c.embedding.retries}}},
        {"llm",
         {{"endpoint", c.llm.endpoint},
          {"model", c.llm.model},
          {"api_key_env", c.llm.api_key_env},
          {"timeout_s", c.llm.timeout_s},
          {"retries", c.llm.retries},
          {"min_interval_ms", c.llm.min_interval_ms},
          {"sampling",
           {{"temperature", c.llm.sampling.temperature},
            {"top_p", c.llm.sampling.top_p},
            {"top_k", c.llm.sampling.top_k},
            {"max_new_tokens", c.llm.sampling.max_new_tokens}}}}},
        {"index",
         {{"mode", c.index.mode},
          {"m", c.index.hnsw.m},
          {"ef_construction", c.index.hnsw.ef_construction},
          {"ef_search", c.index.hnsw.ef_search}}},
        {"replay", c.replay},
        {"seed", c.seed},
        {"parallelism", c.parallelism},
    };
}

// Flattened "key.path = default" listing for --help output.
inline std::string config_reference() {
    nlohmann::json defaults = config_to_json(AppConfig{});
    std::string out;
    std::function<void(const nlohmann::json&, const std::string&)> walk =
        [&](const nlohmann::json& node, const std::string& prefix) {
            for (const auto& [key, value] : node.items()) {
                std::string full = prefix.empty() ? key : prefix + "." + key;
                if (value.is_object())
                    walk(value, full);
                else
                    out += "  " + full + " = " + value.dump() + "\n";
            }
        };
    walk(defaults, "");
    return out;
}

}  // namespace kgrag
