#pragma once
// HTTP implementations of the chat and embedding provider interfaces.
//
// Chat wire: POST {model, messages:[{role,content}...], temperature, top_p,
// max_tokens}; answer text taken from the first choice. Embedding wire:
// POST {model, texts:[...]}; response carries a parallel "embeddings" list
// of float arrays. API keys come from the environment, never from config
// files. Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff up to the configured count.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "kgrag/chat_client.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/errors.hpp"

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace kgrag {

struct HttpEndpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/...
};

inline HttpEndpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL must start with http:// or https://: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string api_key_from_env(const std::string& env_var) {
    if (env_var.empty()) return "";
    const char* v = std::getenv(env_var.c_str());
    return v ? v : "";
}

namespace detail {

// Posts JSON with retries on transient failures; optional minimum spacing
// between request starts acts as a simple client-side rate bound.
class HttpPoster {
public:
    HttpPoster(const std::string& url, double timeout_s, int retries, int min_interval_ms)
        : endpoint_(split_url(url)),
          client_(endpoint_.base),
          retries_(retries),
          min_interval_ms_(min_interval_ms) {
        auto secs = std::chrono::duration<double>(timeout_s);
        client_.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(secs));
        client_.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(secs));
        client_.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(secs));
    }

    nlohmann::json post(const nlohmann::json& body, const std::string& api_key) {
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= retries_; ++attempt) {
            if (attempt > 0) backoff(attempt);
            pace();
            auto res = client_.Post(endpoint_.path, headers, payload, "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw TransportError("endpoint " + endpoint_.base + endpoint_.path +
                                     " returned status " + std::to_string(res->status) + ": " +
                                     res->body);
            nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded()) throw TransportError("endpoint returned invalid JSON");
            return j;
        }
        throw TransportError("request to " + endpoint_.base + endpoint_.path + " failed after " +
                             std::to_string(retries_ + 1) + " attempts (" + last_error + ")");
    }

private:
    void backoff(int attempt) {
        int ms = std::min(200 * (1 << std::min(attempt, 5)), 5000);
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    void pace() {
        if (min_interval_ms_ <= 0) return;
        std::lock_guard lock(pace_mutex_);
        auto now = std::chrono::steady_clock::now();
        auto next = last_request_ + std::chrono::milliseconds(min_interval_ms_);
        if (now < next) std::this_thread::sleep_until(next);
        last_request_ = std::chrono::steady_clock::now();
    }

    HttpEndpoint endpoint_;
    httplib::Client client_;
    int retries_;
    int min_interval_ms_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace detail

class HttpChatClient : public ChatClient {
public:
    HttpChatClient(const std::string& url, std::string api_key_env, double timeout_s = 60.0,
                   int retries = 3, int min_interval_ms = 0)
        : poster_(url, timeout_s, retries, min_interval_ms),
          api_key_env_(std::move(api_key_env)) {}

    std::string complete(const ChatRequest& request) override {
        nlohmann::json body{
            {"model", request.model},
            {"messages",
             {{{"role", "system"}, {"content", request.system_text}},
              {{"role", "user"}, {"content", request.user_text}}}},
            {"temperature", request.params.temperature},
            {"top_p", request.params.top_p},
            {"max_tokens", request.params.max_new_tokens},
        };
        nlohmann::json j = poster_.post(body, api_key_from_env(api_key_env_));
        if (!j.contains("choices") || j["choices"].empty() ||
            !j["choices"][0].contains("message"))
            throw TransportError("chat response has no choices");
        return j["choices"][0]["message"].value("content", "");
    }

private:
    detail::HttpPoster poster_;
    std::string api_key_env_;
};

class HttpEmbedder : public EmbeddingProvider {
public:
    HttpEmbedder(const std::string& url, std::string model, std::string api_key_env,
                 std::size_t dim, double timeout_s = 60.0, int retries = 3,
                 int min_interval_ms = 0)
        : poster_(url, timeout_s, retries, min_interval_ms),
          model_(std::move(model)),
          api_key_env_(std::move(api_key_env)),
          dim_(dim) {}

    std::size_t dim() const override { return dim_; }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        nlohmann::json body{{"model", model_}, {"texts", texts}};
        nlohmann::json j = poster_.post(body, api_key_from_env(api_key_env_));
        if (!j.contains("embeddings") || !j["embeddings"].is_array())
            throw TransportError("embedding response has no embeddings list");
        const auto& arr = j["embeddings"];
        if (arr.size() != texts.size())
            throw TransportError("embedding response size " + std::to_string(arr.size()) +
                                 " does not match batch size " + std::to_string(texts.size()));
        std::vector<EmbeddingVector> out;
        out.reserve(arr.size());
        for (const auto& row : arr) {
            EmbeddingVector v;
            v.reserve(row.size());
            for (const auto& x : row) v.push_back(x.get<float>());
            if (v.size() != dim_)
                throw ConfigError("provider returned dim " + std::to_string(v.size()) +
                                  ", configured " + std::to_string(dim_));
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    detail::HttpPoster poster_;
    std::string model_;
    std::string api_key_env_;
    std::size_t dim_;
};

}  // namespace kgrag
