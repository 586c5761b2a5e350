#include "racas/llm_backend.hpp"

#include "racas/core_model.hpp"
#include "racas/error.hpp"
#include "racas/image.hpp"
#include "racas/text.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>

namespace racas {

using nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

namespace {

Role parse_role(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "assistant") return Role::assistant;
    if (s == "user") return Role::user;
    throw IoFailure("unknown chat role in transcript: " + std::string(s));
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(bytes.data(), bytes.size(), md.data());
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(md.size() * 2);
    for (unsigned char c : md) {
        out.push_back(kHex[c >> 4]);
        out.push_back(kHex[c & 0xF]);
    }
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view in) {
    if (in.size() % 4 != 0) throw IoFailure("malformed base64 payload");
    Bytes out(3 * in.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(in.data()),
                                  static_cast<int>(in.size()));
    if (n < 0) throw IoFailure("malformed base64 payload");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    if (!in.empty() && in.back() == '=') --len;
    if (in.size() > 1 && in[in.size() - 2] == '=') --len;
    out.resize(len);
    return out;
}

std::string request_digest(std::span<const ChatMessage> messages) {
    json canon = json::array();
    for (const auto& m : messages) {
        json images = json::array();
        for (const auto& img : m.images) images.push_back(sha256_hex(img));
        canon.push_back({{"role", to_string(m.role)}, {"text", m.text}, {"images", std::move(images)}});
    }
    const auto s = canon.dump();
    return sha256_hex({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string complete(std::span<const ChatMessage> messages, ChatBackend& backend) {
    if (messages.empty()) throw Error("chat request must contain at least one message");
    if (messages.front().role != Role::system) throw Error("chat request must start with a system message");
    for (const auto& m : messages) {
        if (m.role == Role::system && !m.images.empty()) throw Error("system messages cannot carry images");
        if (m.text.empty() && m.images.empty()) throw Error("message text may be empty only when images are attached");
    }
    auto response = backend.do_complete(messages);
    if (response.empty()) throw BackendUnavailable("backend " + backend.id() + " returned an empty response");
    return response;
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules, std::string id) : id_(std::move(id)) {
    rules_.reserve(rules.size());
    for (auto& r : rules) {
        try {
            rules_.push_back({std::regex(r.pattern, std::regex::ECMAScript), std::move(r.response)});
        } catch (const std::regex_error& e) {
            throw SchemaViolation("rules.match", "invalid pattern '" + r.pattern + "': " + e.what());
        }
    }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaViolation("rules", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
        throw SchemaViolation("rules", "expected {\"rules\": [...]}");
    }
    for (const auto& [key, _] : doc.items()) {
        if (key != "rules" && key != "id") throw SchemaViolation("rules_file." + key, "unknown key");
    }
    std::vector<ScriptedRule> rules;
    for (const auto& r : doc["rules"]) {
        if (!r.is_object() || r.size() != 2 || !r.contains("match") || !r.contains("response") ||
            !r["match"].is_string() || !r["response"].is_string()) {
            throw SchemaViolation("rules[]", "each rule is {\"match\": string, \"response\": string}");
        }
        rules.push_back({r["match"].get<std::string>(), r["response"].get<std::string>()});
    }
    return std::make_unique<ScriptedBackend>(std::move(rules), doc.value("id", std::string("scripted")));
}

std::size_t ScriptedBackend::call_count() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::string ScriptedBackend::match_text(std::span<const ChatMessage> messages) {
    const ChatMessage* last_user = nullptr;
    for (const auto& m : messages) {
        if (m.role == Role::user) last_user = &m;
    }
    if (!last_user) return {};
    std::string out = last_user->text;
    for (const auto& img : last_user->images) {
        try {
            if (auto cap = png_caption(img)) out += "\n[image caption: " + *cap + "]";
        } catch (const IoFailure&) {
            // Not a PNG payload; nothing to add.
        }
    }
    return out;
}

std::string ScriptedBackend::do_complete(std::span<const ChatMessage> messages) {
    {
        std::lock_guard lock(mu_);
        ++calls_;
    }
    const auto subject = match_text(messages);
    for (const auto& rule : rules_) {
        std::smatch m;
        if (std::regex_search(subject, m, rule.re)) return m.format(rule.response);
    }
    throw NoRuleMatched("no scripted rule matched: " + subject.substr(0, 200));
}

// ---------------------------------------------------------------------------
// Recording / replay

namespace {

json request_to_json(std::span<const ChatMessage> request) {
    json msgs = json::array();
    for (const auto& m : request) {
        json images = json::array();
        for (const auto& img : m.images) images.push_back(base64_encode(img));
        msgs.push_back({{"role", to_string(m.role)}, {"text", m.text}, {"images", std::move(images)}});
    }
    return msgs;
}

std::vector<ChatMessage> request_from_json(const json& msgs) {
    std::vector<ChatMessage> out;
    for (const auto& m : msgs) {
        ChatMessage cm;
        cm.role = parse_role(m.at("role").get<std::string>());
        cm.text = m.at("text").get<std::string>();
        for (const auto& img : m.value("images", json::array())) cm.images.push_back(base64_decode(img.get<std::string>()));
        out.push_back(std::move(cm));
    }
    return out;
}

}  // namespace

TranscriptRecorder::TranscriptRecorder(const std::filesystem::path& sink)
    : out_(sink, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoFailure("cannot open transcript for writing: " + sink.string());
}

void TranscriptRecorder::append(std::span<const ChatMessage> request, const std::string& response,
                                const std::string& backend_id) {
    json rec = {{"digest", request_digest(request)},
                {"backend", backend_id},
                {"request", request_to_json(request)},
                {"response", response}};
    std::lock_guard lock(mu_);
    out_ << rec.dump() << '\n';
    out_.flush();
    if (!out_) throw IoFailure("transcript write failed");
    ++count_;
}

std::size_t TranscriptRecorder::count() const {
    std::lock_guard lock(mu_);
    return count_;
}

std::shared_ptr<TranscriptRecorder> record_session(const std::filesystem::path& sink) {
    return std::make_shared<TranscriptRecorder>(sink);
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<TranscriptRecorder> recorder)
    : inner_(std::move(inner)), recorder_(std::move(recorder)) {}

std::string RecordingBackend::do_complete(std::span<const ChatMessage> messages) {
    auto response = complete(messages, *inner_);
    recorder_->append(messages, response, inner_->id());
    return response;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& transcript) {
    const auto body = read_text_file(transcript);
    for (auto line : text::split_lines(body)) {
        line = text::trim(line);
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoFailure(std::string("malformed transcript line: ") + e.what());
        }
        // Recompute the digest so transcripts survive digest-field edits.
        const auto request = request_from_json(rec.at("request"));
        responses_[request_digest(request)].push_back(rec.at("response").get<std::string>());
    }
}

std::size_t ReplayBackend::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [_, q] : responses_) n += q.size();
    return n;
}

std::string ReplayBackend::do_complete(std::span<const ChatMessage> messages) {
    const auto digest = request_digest(messages);
    std::lock_guard lock(mu_);
    auto it = responses_.find(digest);
    if (it == responses_.end() || it->second.empty()) throw ReplayMiss(digest);
    auto response = std::move(it->second.front());
    it->second.pop_front();
    return response;
}

// ---------------------------------------------------------------------------

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "scripted") return BackendKind::scripted;
    if (s == "replay") return BackendKind::replay;
    if (s == "http") return BackendKind::http;
    throw SchemaViolation("backend", "expected scripted|replay|http, got " + std::string(s));
}

std::shared_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    std::shared_ptr<ChatBackend> backend;
    switch (config.kind) {
        case BackendKind::scripted: backend = ScriptedBackend::from_file(config.rules); break;
        case BackendKind::replay: backend = std::make_shared<ReplayBackend>(config.transcript); break;
        case BackendKind::http: backend = std::make_shared<HttpBackend>(config.http); break;
    }
    if (!config.record_to.empty()) {
        backend = std::make_shared<RecordingBackend>(std::move(backend), record_session(config.record_to));
    }
    return backend;
}

}  // namespace racas
