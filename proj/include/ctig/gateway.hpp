#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ctig {

enum class GatewayErrorCode {
    invalid_request,
    auth_failure,
    exhausted_retries,
    malformed_response,
    transcript_miss,
    digest_conflict,
    store_error,
};

struct GatewayError : std::runtime_error {
    GatewayError(GatewayErrorCode c, const std::string& message)
        : std::runtime_error(message), code(c) {}
    GatewayErrorCode code;
};

enum class Role { system, user, assistant };
std::string_view role_name(Role r);

struct TextPart {
    std::string text;
};

struct ImagePart {
    std::string media_type;  // "image/png" or "image/jpeg"
    std::string content;     // raw bytes
};

using MessagePart = std::variant<TextPart, ImagePart>;

struct ChatMessage {
    Role role = Role::user;
    std::vector<MessagePart> parts;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    std::int64_t seed = 1337;
    int max_tokens = 512;
};

// Throws GatewayError{invalid_request} when the request breaks its
// invariants (no user message, image outside a user message, max_tokens < 1).
void validate_request(const ChatRequest& req);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);

// Stable content digest: model, roles, text parts, image content hashes,
// temperature, seed, max_tokens. Image file names never enter the digest.
std::string request_digest(const ChatRequest& req);

// OpenAI-compatible chat-completions body with content-part arrays.
std::string request_wire_body(const ChatRequest& req);

// One-line human summary used in transcript-miss errors.
std::string request_summary(const ChatRequest& req);

// ---------------------------------------------------------------------------

// Runtime parameters every request starts from.
struct ChatProfile {
    std::string model = "qwen2.5-vl";
    double temperature = 0.7;
    std::int64_t seed = 1337;
};

class Gateway {
public:
    Gateway() = default;
    virtual ~Gateway() = default;
    Gateway(const Gateway& other) : calls_(other.calls_.load()), profile_(other.profile_) {}
    Gateway& operator=(const Gateway& other) {
        calls_ = other.calls_.load();
        profile_ = other.profile_;
        return *this;
    }

    std::string complete(const ChatRequest& req) {
        validate_request(req);
        ++calls_;
        return do_complete(req);
    }

    std::uint64_t call_count() const { return calls_.load(); }

    void set_profile(ChatProfile profile) { profile_ = std::move(profile); }
    const ChatProfile& profile() const { return profile_; }

    ChatRequest new_request() const {
        ChatRequest req;
        req.model = profile_.model;
        req.temperature = profile_.temperature;
        req.seed = profile_.seed;
        return req;
    }

private:
    virtual std::string do_complete(const ChatRequest& req) = 0;

    std::atomic<std::uint64_t> calls_{0};
    ChatProfile profile_;
};

// ---------------------------------------------------------------------------

// Append-only digest -> response log, one JSON object per line.
class TranscriptStore {
public:
    TranscriptStore() = default;

    static TranscriptStore load(const std::filesystem::path& path);

    // Future record() calls are appended to this file.
    void bind(const std::filesystem::path& path) { log_path_ = path; }

    std::optional<std::string> lookup(std::string_view digest) const;

    // Returns true when the entry is new; identical re-records are no-ops.
    // Throws GatewayError{digest_conflict} on same digest, different response.
    bool record(const std::string& digest, const std::string& response);

    std::size_t size() const;

private:
    std::map<std::string, std::string> entries_;
    std::filesystem::path log_path_;
    mutable std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

// ---------------------------------------------------------------------------

struct HttpGatewayConfig {
    std::string endpoint;  // base URL, e.g. http://127.0.0.1:8080
    std::string api_key;
    std::string path = "/v1/chat/completions";
    int max_attempts = 3;
    int backoff_initial_ms = 200;
    double backoff_multiplier = 2.0;
    int timeout_sec = 60;
    int max_inflight = 4;
};

class HttpGateway : public Gateway {
public:
    explicit HttpGateway(HttpGatewayConfig config);
    ~HttpGateway() override;

private:
    std::string do_complete(const ChatRequest& req) override;

    HttpGatewayConfig config_;
    struct Inflight;
    std::unique_ptr<Inflight> inflight_;
};

// Serves recorded responses; never touches the network.
class ReplayGateway : public Gateway {
public:
    explicit ReplayGateway(const TranscriptStore& store) : store_(store) {}

private:
    std::string do_complete(const ChatRequest& req) override;
    const TranscriptStore& store_;
};

// Forwards to an inner gateway and records each response. Digest hits are
// served from the store so interrupted record runs resume cheaply.
class RecordingGateway : public Gateway {
public:
    RecordingGateway(Gateway& inner, TranscriptStore& store) : inner_(inner), store_(store) {}

private:
    std::string do_complete(const ChatRequest& req) override;
    Gateway& inner_;
    TranscriptStore& store_;
};

}  // namespace ctig
