#pragma once
// Chat-completion client with record/replay support.
//
// The wire contract is the common hosted-API shape: model name, a message
// list with roles, sampling parameters, answer text in the first choice.
// Requests are keyed by a hash of (model, system, user, params) so a run
// can be recorded once and replayed offline, byte-for-byte.
//
// Replay store: append-only JSON lines {"key", "model", "response"}.

#include "kgrag/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>

namespace kgrag {

struct SamplingParams {
    double temperature = 0.6;
    double top_p = 0.9;
    int top_k = 1;
    int max_new_tokens = 4096;
};

struct ChatRequest {
    std::string model;
    std::string system_text;
    std::string user_text;
    SamplingParams params;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Test/stub client backed by a function.
class FunctionChatClient : public ChatClient {
public:
    explicit FunctionChatClient(std::function<std::string(const ChatRequest&)> fn)
        : fn_(std::move(fn)) {}
    std::string complete(const ChatRequest& request) override { return fn_(request); }

private:
    std::function<std::string(const ChatRequest&)> fn_;
};

// FNV-1a over a canonical rendering of the request.
inline std::string request_key(const ChatRequest& r) {
    char num[64];
    std::string canon = r.model;
    canon += '\x1f';
    std::snprintf(num, sizeof num, "%.6g|%.6g|%d|%d", r.params.temperature, r.params.top_p,
                  r.params.top_k, r.params.max_new_tokens);
    canon += num;
    canon += '\x1f';
    canon += r.system_text;
    canon += '\x1f';
    canon += r.user_text;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

// Append-only request-key -> response store. Single writer, any readers.
class ReplayStore {
public:
    explicit ReplayStore(std::string path) : path_(std::move(path)) {
        std::ifstream in(path_);
        if (!in) return;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key") || !j.contains("response"))
                throw FormatError("bad replay store record in " + path_, lineno);
            entries_[j["key"].get<std::string>()] = j["response"].get<std::string>();
        }
    }

    std::optional<std::string> find(const std::string& key) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void append(const std::string& key, const std::string& model, const std::string& response) {
        std::lock_guard lock(mutex_);
        if (entries_.count(key)) return;
        entries_[key] = response;
        std::ofstream out(path_, std::ios::app);
        if (!out) throw IoError("cannot append to replay store: " + path_);
        nlohmann::json j{{"key", key}, {"model", model}, {"response", response}};
        out << j.dump() << '\n';
        out.flush();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
};

enum class ReplayMode { Record, Replay, Live };

inline ReplayMode parse_replay_mode(const std::string& s) {
    if (s == "record") return ReplayMode::Record;
    if (s == "replay") return ReplayMode::Replay;
    if (s == "live") return ReplayMode::Live;
    throw ConfigError("replay mode must be record, replay, or live (got '" + s + "')");
}

// Record: answer from the store when present, otherwise call through and
// persist. Replay: store only; a miss is an explicit error. Live: pass
// through, no store.
class RecordReplayClient : public ChatClient {
public:
    RecordReplayClient(ReplayMode mode, ReplayStore* store, ChatClient* inner)
        : mode_(mode), store_(store), inner_(inner) {
        if (mode_ != ReplayMode::Live && !store_)
            throw ConfigError("record/replay mode requires a replay store");
        if (mode_ != ReplayMode::Replay && !inner_)
            throw ConfigError("record/live mode requires an inner chat client");
    }

    std::string complete(const ChatRequest& request) override {
        if (mode_ == ReplayMode::Live) return inner_->complete(request);
        std::string key = request_key(request);
        if (auto hit = store_->find(key)) return *hit;
        if (mode_ == ReplayMode::Replay)
            throw ReplayMissError("replay store " + store_->path() +
                                  " has no response for request key " + key);
        std::string response = inner_->complete(request);
        store_->append(key, request.model, response);
        return response;
    }

private:
    ReplayMode mode_;
    ReplayStore* store_;
    ChatClient* inner_;
};

}  // namespace kgrag
