#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drift/error.hpp"
#include "drift/io.hpp"

namespace drift {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.2;
};

// Generic chat-completion backend. Implementations throw ServiceError on
// transport or protocol failure.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

class FunctionChat final : public ChatBackend {
public:
    explicit FunctionChat(std::function<std::string(const ChatRequest&)> fn) : fn_(std::move(fn)) {}
    std::string complete(const ChatRequest& request) override { return fn_(request); }

private:
    std::function<std::string(const ChatRequest&)> fn_;
};

struct ServiceConfig {
    std::string endpoint; // full URL, e.g. http://localhost:8000/v1/chat/completions
    std::string model;
    std::string api_key;
    int timeout_seconds = 60;
    int retries = 2;
    fs::path cache_dir; // empty disables caching

    static ServiceConfig from_env() {
        auto env = [](const char* name) {
            const char* v = std::getenv(name);
            return v ? std::string(v) : std::string();
        };
        ServiceConfig c;
        c.endpoint = env("DRIFT_LLM_ENDPOINT");
        c.model = env("DRIFT_LLM_MODEL");
        c.api_key = env("DRIFT_LLM_API_KEY");
        return c;
    }
};

inline ordered_json chat_request_body(const ChatRequest& request, const std::string& model) {
    ordered_json msgs = ordered_json::array();
    for (const auto& m : request.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", model}, {"messages", msgs}, {"temperature", request.temperature}};
}

// choices[0].message.content of an OpenAI-style completion response.
inline std::string chat_reply_content(std::string_view body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ServiceError(std::string("chat service returned non-JSON body: ") + e.what());
    }
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ServiceError("chat service response lacks choices[0].message.content");
    }
}

} // namespace drift
