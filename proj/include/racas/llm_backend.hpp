#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racas {

using Bytes = std::vector<std::uint8_t>;

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct ChatMessage {
    Role role = Role::user;
    std::string text;
    std::vector<Bytes> images;  // PNG payloads

    static ChatMessage system(std::string t) { return {Role::system, std::move(t), {}}; }
    static ChatMessage user(std::string t, std::vector<Bytes> imgs = {}) {
        return {Role::user, std::move(t), std::move(imgs)};
    }
    static ChatMessage assistant(std::string t) { return {Role::assistant, std::move(t), {}}; }
};

struct ChatExchange {
    std::vector<ChatMessage> request;
    std::string response_text;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
};

// Hex SHA-256 of the canonical request: roles, texts and per-image hashes.
std::string request_digest(std::span<const ChatMessage> messages);
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;

protected:
    friend std::string complete(std::span<const ChatMessage>, ChatBackend&);
    virtual std::string do_complete(std::span<const ChatMessage> messages) = 0;
};

// Checks the request shape (non-empty, leading system message, no images on
// system messages, text only empty next to images) and dispatches.
std::string complete(std::span<const ChatMessage> messages, ChatBackend& backend);

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptedRule {
    std::string pattern;   // ECMAScript regex searched in the final user message
    std::string response;  // $0, $1.. expand to captures
};

// Deterministic rule table. Rules are tried in order; the first whose pattern
// matches the final user message (plus "[image caption: ...]" lines for PNG
// payloads carrying a Caption text chunk) produces the response.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptedRule> rules, std::string id = "scripted");
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    std::string id() const override { return id_; }
    std::size_t call_count() const;

    // Text the rules are matched against; exposed for debugging rule files.
    static std::string match_text(std::span<const ChatMessage> messages);

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override;

private:
    struct Compiled {
        std::regex re;
        std::string response;
    };
    std::vector<Compiled> rules_;
    std::string id_;
    mutable std::mutex mu_;
    std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Transcript recording and replay

class TranscriptRecorder {
public:
    explicit TranscriptRecorder(const std::filesystem::path& sink);
    void append(std::span<const ChatMessage> request, const std::string& response, const std::string& backend_id);
    std::size_t count() const;

private:
    mutable std::mutex mu_;
    std::ofstream out_;
    std::size_t count_ = 0;
};

// Opens (truncating) a JSON Lines transcript. Throws IoFailure.
std::shared_ptr<TranscriptRecorder> record_session(const std::filesystem::path& sink);

// Forwards to an inner backend and appends every exchange to the recorder.
class RecordingBackend final : public ChatBackend {
public:
    RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<TranscriptRecorder> recorder);
    std::string id() const override { return inner_->id(); }

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override;

private:
    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<TranscriptRecorder> recorder_;
};

// Serves recorded responses keyed by request digest, in recorded order.
class ReplayBackend final : public ChatBackend {
public:
    explicit ReplayBackend(const std::filesystem::path& transcript);
    std::string id() const override { return "replay"; }
    std::size_t remaining() const;

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::deque<std::string>> responses_;
};

// ---------------------------------------------------------------------------
// HTTP backend (OpenAI-compatible chat completions)

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4.1-mini";
    std::string api_key_env = "OPENAI_API_KEY";
    std::optional<double> temperature;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{120};
};

// The JSON body POSTed to {base_url}/chat/completions.
std::string chat_completions_body(std::span<const ChatMessage> messages, const std::string& model,
                                  std::optional<double> temperature);

class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    std::string id() const override { return "http:" + config_.model; }

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override;

private:
    HttpBackendConfig config_;
    std::string scheme_host_;
    std::string path_prefix_;
};

// ---------------------------------------------------------------------------

enum class BackendKind { scripted, replay, http };

struct BackendConfig {
    BackendKind kind = BackendKind::scripted;
    std::filesystem::path rules;       // scripted
    std::filesystem::path transcript;  // replay
    HttpBackendConfig http;
    std::filesystem::path record_to;   // optional, wraps any kind
};

BackendKind parse_backend_kind(std::string_view text);
std::shared_ptr<ChatBackend> make_backend(const BackendConfig& config);

}  // namespace racas
