#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "drift/llm_http.hpp"
#include "fixture_repo.hpp"

using namespace drift;
using drift::testing::TempDir;

namespace {

// Loopback OpenAI-style server. The first `failures` requests answer with
// `fail_status`; later ones echo the last user message back as content.
class MockService {
public:
    MockService(int failures = 0, int fail_status = 503) : failures_(failures), fail_status_(fail_status) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_auth_ = req.get_header_value("Authorization");
            last_body_ = req.body;
            if (failures_ > 0) {
                --failures_;
                res.status = fail_status_;
                res.set_content("{\"error\":\"busy\"}", "application/json");
                return;
            }
            auto j = nlohmann::json::parse(req.body);
            nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", j["messages"].back()["content"]}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockService() {
        server_.stop();
        thread_.join();
    }

    ServiceConfig config() const {
        ServiceConfig c;
        c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
        c.model = "mock-model";
        c.timeout_seconds = 5;
        c.retries = 2;
        return c;
    }

    int hits() const { return hits_; }
    std::string last_auth() const { return last_auth_; }
    std::string last_body() const { return last_body_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    int failures_;
    int fail_status_;
    std::string last_auth_, last_body_;
};

ChatRequest hello() { return ChatRequest{{{"system", "sys"}, {"user", "hello"}}, 0.0}; }

} // namespace

TEST(HttpChat, SendsAnOpenAIStyleBody) {
    MockService svc;
    auto cfg = svc.config();
    cfg.api_key = "secret";
    HttpChatClient client(cfg);
    EXPECT_EQ(client.complete(hello()), "hello");
    EXPECT_EQ(svc.last_auth(), "Bearer secret");
    EXPECT_EQ(svc.last_body(),
              R"({"model":"mock-model","messages":[{"role":"system","content":"sys"},{"role":"user","content":"hello"}],"temperature":0.0})");
    EXPECT_EQ(client.network_calls(), 1u);
}

TEST(HttpChat, CacheReplaysWithoutTheNetwork) {
    MockService svc;
    TempDir dir("drift-cache");
    auto cfg = svc.config();
    cfg.cache_dir = dir.path();
    {
        HttpChatClient client(cfg);
        EXPECT_EQ(client.complete(hello()), "hello");
    }
    HttpChatClient again(cfg);
    EXPECT_EQ(again.complete(hello()), "hello");
    EXPECT_EQ(svc.hits(), 1);
    EXPECT_EQ(again.network_calls(), 0u);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path())) {
        ++files;
        EXPECT_EQ(e.path().extension(), ".json");
    }
    EXPECT_EQ(files, 1u);
}

TEST(HttpChat, RetriesServerErrors) {
    MockService svc(2, 503);
    HttpChatClient client(svc.config());
    EXPECT_EQ(client.complete(hello()), "hello");
    EXPECT_EQ(svc.hits(), 3);
}

TEST(HttpChat, GivesUpAfterTheRetryBudget) {
    MockService svc(5, 500);
    HttpChatClient client(svc.config());
    try {
        client.complete(hello());
        FAIL() << "expected ServiceError";
    } catch (const ServiceError& e) {
        EXPECT_NE(std::string(e.what()).find("after 3 attempt(s): HTTP 500"), std::string::npos) << e.what();
    }
    EXPECT_EQ(svc.hits(), 3);
}

TEST(HttpChat, ClientErrorsAreNotRetried) {
    MockService svc(1, 401);
    HttpChatClient client(svc.config());
    EXPECT_THROW(client.complete(hello()), ServiceError);
    EXPECT_EQ(svc.hits(), 1);
}

TEST(HttpChat, UnreachableAndMisconfigured) {
    ServiceConfig cfg;
    EXPECT_THROW(HttpChatClient{cfg}, ServiceError);
    cfg.endpoint = "localhost:1234";
    EXPECT_THROW(HttpChatClient{cfg}, ServiceError);
    cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    cfg.timeout_seconds = 1;
    cfg.retries = 0;
    HttpChatClient client(cfg);
    try {
        client.complete(hello());
        FAIL() << "expected ServiceError";
    } catch (const ServiceError& e) {
        EXPECT_NE(std::string(e.what()).find("unreachable"), std::string::npos) << e.what();
    }
}

TEST(HttpChat, MalformedReplies) {
    EXPECT_THROW(chat_reply_content("not json"), ServiceError);
    EXPECT_THROW(chat_reply_content(R"({"choices":[]})"), ServiceError);
    EXPECT_EQ(chat_reply_content(R"({"choices":[{"message":{"content":"ok"}}]})"), "ok");
}
