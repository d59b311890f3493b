#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <atomic>
#include <string>

#include "drift/hash.hpp"
#include "drift/llm.hpp"

namespace drift {

// Chat-completion client over HTTP(S). Request/response pairs are cached
// under cache_dir by the SHA-256 of the request body, so a recorded run
// replays without the network.
class HttpChatClient final : public ChatBackend {
public:
    explicit HttpChatClient(ServiceConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty())
            throw ServiceError("chat service endpoint is not configured (DRIFT_LLM_ENDPOINT)");
        auto scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw ServiceError("chat service endpoint must be an http(s) URL: " + config_.endpoint);
        auto path_start = config_.endpoint.find('/', scheme_end + 3);
        origin_ = config_.endpoint.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
    }

    std::string complete(const ChatRequest& request) override {
        std::string body = chat_request_body(request, config_.model).dump();
        std::string key = sha256_hex(body);
        fs::path cached = config_.cache_dir.empty() ? fs::path() : config_.cache_dir / (key + ".json");
        if (!cached.empty() && fs::exists(cached)) {
            auto j = nlohmann::json::parse(read_text_file(cached));
            return j.at("response").get<std::string>();
        }

        std::string content = post_with_retries(body);
        ++network_calls_;
        if (!cached.empty()) {
            nlohmann::ordered_json record = {{"request", nlohmann::ordered_json::parse(body)}, {"response", content}};
            write_file_atomic(cached, to_pretty_json(record));
        }
        return content;
    }

    std::size_t network_calls() const noexcept { return network_calls_; }

private:
    std::string post_with_retries(const std::string& body) {
        std::string last_error;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            httplib::Client client(origin_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            client.set_write_timeout(config_.timeout_seconds, 0);
            httplib::Headers headers;
            if (!config_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + config_.api_key);
            auto res = client.Post(path_, headers, body, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw ServiceError("chat service returned HTTP " + std::to_string(res->status) + ": " + res->body);
            return chat_reply_content(res->body);
        }
        throw ServiceError("chat service unreachable at " + config_.endpoint + " after " +
                           std::to_string(config_.retries + 1) + " attempt(s): " + last_error);
    }

    ServiceConfig config_;
    std::string origin_;
    std::string path_;
    std::atomic<std::size_t> network_calls_{0};
};

} // namespace drift
