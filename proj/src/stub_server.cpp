#include <httplib.h>

#include "racas/error.hpp"
#include "racas/stub_server.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace racas {

using nlohmann::json;

std::optional<std::string> validate_chat_request(const json& body) {
    if (!body.is_object()) return "body is not a JSON object";
    if (!body.contains("model") || !body["model"].is_string() || body["model"].get<std::string>().empty()) {
        return "missing or empty string field 'model'";
    }
    if (!body.contains("messages") || !body["messages"].is_array() || body["messages"].empty()) {
        return "'messages' must be a non-empty array";
    }
    for (const auto& [key, _] : body.items()) {
        if (key != "model" && key != "messages" && key != "temperature") return "unexpected top-level key '" + key + "'";
    }
    if (body.contains("temperature") && !body["temperature"].is_number()) return "'temperature' must be a number";
    const auto& msgs = body["messages"];
    for (std::size_t i = 0; i < msgs.size(); ++i) {
        const auto& m = msgs[i];
        const auto where = "messages[" + std::to_string(i) + "]";
        if (!m.is_object() || !m.contains("role") || !m["role"].is_string()) return where + ".role missing";
        const auto role = m["role"].get<std::string>();
        if (role != "system" && role != "user" && role != "assistant") return where + ".role invalid: " + role;
        if (!m.contains("content")) return where + ".content missing";
        const auto& c = m["content"];
        if (c.is_string()) continue;
        if (!c.is_array() || c.empty()) return where + ".content must be a string or non-empty part list";
        if (role == "system") return where + ": system content must be a plain string";
        for (const auto& part : c) {
            if (!part.is_object() || !part.contains("type")) return where + ": part without type";
            const auto type = part["type"].get<std::string>();
            if (type == "text") {
                if (!part.contains("text") || !part["text"].is_string()) return where + ": text part without text";
            } else if (type == "image_url") {
                if (!part.contains("image_url") || !part["image_url"].contains("url")) {
                    return where + ": image part without url";
                }
                const auto url = part["image_url"]["url"].get<std::string>();
                if (url.rfind("data:image/png;base64,", 0) != 0) return where + ": image url is not a PNG data URL";
            } else {
                return where + ": unknown part type " + type;
            }
        }
    }
    return std::nullopt;
}

struct StubChatServer::Impl {
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
    Responder responder;

    mutable std::mutex mu;
    std::size_t requests = 0;
    int fail_remaining = 0;
    int fail_status = 503;
    std::vector<std::string> errors;
    std::optional<std::string> authorization;
};

StubChatServer::StubChatServer(Responder responder, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
    impl_->host = host;
    impl_->responder = responder ? std::move(responder) : [](const json& body) {
        return std::to_string(body["messages"].size());
    };
    auto* impl = impl_.get();
    impl->server.Post(R"(.*/chat/completions)", [impl](const httplib::Request& req, httplib::Response& res) {
        {
            std::lock_guard lock(impl->mu);
            ++impl->requests;
            if (req.has_header("Authorization")) impl->authorization = req.get_header_value("Authorization");
            if (impl->fail_remaining > 0) {
                --impl->fail_remaining;
                res.status = impl->fail_status;
                res.set_content(R"({"error":{"message":"injected failure"}})", "application/json");
                return;
            }
        }
        json body;
        std::optional<std::string> problem;
        try {
            body = json::parse(req.body);
            problem = validate_chat_request(body);
        } catch (const json::parse_error& e) {
            problem = std::string("malformed JSON: ") + e.what();
        }
        if (problem) {
            std::lock_guard lock(impl->mu);
            impl->errors.push_back(*problem);
            res.status = 400;
            res.set_content(json{{"error", {{"message", *problem}}}}.dump(), "application/json");
            return;
        }
        const auto text = impl->responder(body);
        json reply = {{"id", "stub"},
                      {"object", "chat.completion"},
                      {"model", body["model"]},
                      {"choices", json::array({{{"index", 0},
                                                {"message", {{"role", "assistant"}, {"content", text}}},
                                                {"finish_reason", "stop"}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    if (port == 0) {
        impl->port = impl->server.bind_to_any_port(host);
    } else {
        impl->port = impl->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl->port <= 0) throw IoFailure("stub server could not bind " + host);
    impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    impl->server.wait_until_ready();
}

StubChatServer::~StubChatServer() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int StubChatServer::port() const { return impl_->port; }

std::string StubChatServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1";
}

void StubChatServer::fail_next(int n, int status) {
    std::lock_guard lock(impl_->mu);
    impl_->fail_remaining = n;
    impl_->fail_status = status;
}

std::size_t StubChatServer::request_count() const {
    std::lock_guard lock(impl_->mu);
    return impl_->requests;
}

std::vector<std::string> StubChatServer::validation_errors() const {
    std::lock_guard lock(impl_->mu);
    return impl_->errors;
}

std::optional<std::string> StubChatServer::last_authorization() const {
    std::lock_guard lock(impl_->mu);
    return impl_->authorization;
}

void StubChatServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace racas
