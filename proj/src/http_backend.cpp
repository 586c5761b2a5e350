#include <httplib.h>

#include "racas/error.hpp"
#include "racas/llm_backend.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace racas {

using nlohmann::json;

std::string chat_completions_body(std::span<const ChatMessage> messages, const std::string& model,
                                  std::optional<double> temperature) {
    json msgs = json::array();
    for (const auto& m : messages) {
        json entry = {{"role", to_string(m.role)}};
        if (m.images.empty()) {
            entry["content"] = m.text;
        } else {
            json parts = json::array();
            if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
            for (const auto& img : m.images) {
                parts.push_back({{"type", "image_url"},
                                 {"image_url", {{"url", "data:image/png;base64," + base64_encode(img)}}}});
            }
            entry["content"] = std::move(parts);
        }
        msgs.push_back(std::move(entry));
    }
    json body = {{"model", model}, {"messages", std::move(msgs)}};
    if (temperature) body["temperature"] = *temperature;
    return body.dump();
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const auto& url = config_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw SchemaViolation("http.base_url", "expected scheme://host[:port][/path]");
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (config_.max_attempts < 1) config_.max_attempts = 1;
}

std::string HttpBackend::do_complete(std::span<const ChatMessage> messages) {
    const auto body = chat_completions_body(messages, config_.model, config_.temperature);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const auto endpoint = path_prefix_ + "/chat/completions";

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        httplib::Client client(scheme_host_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        auto res = client.Post(endpoint, headers, body, "application/json");

        bool transient = false;
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            transient = true;
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            transient = true;
        } else if (res->status != 200) {
            throw BackendUnavailable("HTTP " + std::to_string(res->status) + " from " + scheme_host_ + endpoint +
                                     ": " + res->body.substr(0, 300));
        } else {
            try {
                const auto doc = json::parse(res->body);
                const auto& content = doc.at("choices").at(0).at("message").at("content");
                if (!content.is_string()) throw BackendUnavailable("response content is not a string");
                return content.get<std::string>();
            } catch (const json::exception& e) {
                throw BackendUnavailable(std::string("malformed chat-completions response: ") + e.what());
            }
        }
        if (transient && attempt < config_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw BackendUnavailable("giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

}  // namespace racas
