#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace racas {

// Describes why a body is not a valid chat-completions request, or nullopt.
std::optional<std::string> validate_chat_request(const nlohmann::json& body);

// In-process OpenAI-compatible endpoint used for conformance tests. It checks
// every request body against the chat-completions shape (400 on violation)
// and answers with the responder's text; the default responder returns the
// number of messages in the request.
class StubChatServer {
public:
    using Responder = std::function<std::string(const nlohmann::json& body)>;

    explicit StubChatServer(Responder responder = {}, const std::string& host = "127.0.0.1", int port = 0);
    ~StubChatServer();
    StubChatServer(const StubChatServer&) = delete;
    StubChatServer& operator=(const StubChatServer&) = delete;

    int port() const;
    std::string base_url() const;  // http://host:port/v1

    // The next n requests fail with the given status before any validation.
    void fail_next(int n, int status = 503);

    std::size_t request_count() const;
    std::vector<std::string> validation_errors() const;
    std::optional<std::string> last_authorization() const;

    void wait();  // blocks until the server thread exits (CLI use)

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace racas
