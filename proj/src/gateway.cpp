#include "ctig/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace ctig {

std::string_view role_name(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

void validate_request(const ChatRequest& req) {
    if (req.max_tokens < 1) {
        throw GatewayError(GatewayErrorCode::invalid_request, "max_tokens must be >= 1");
    }
    bool has_user = false;
    for (const ChatMessage& m : req.messages) {
        if (m.role == Role::user) has_user = true;
        for (const MessagePart& p : m.parts) {
            if (std::holds_alternative<ImagePart>(p) && m.role != Role::user) {
                throw GatewayError(GatewayErrorCode::invalid_request,
                                   "image parts are only allowed in user messages");
            }
        }
    }
    if (!has_user) {
        throw GatewayError(GatewayErrorCode::invalid_request,
                           "request needs at least one user message");
    }
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

std::string base64_encode(std::string_view data) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string request_digest(const ChatRequest& req) {
    nlohmann::json canonical;
    canonical["model"] = req.model;
    canonical["temperature"] = req.temperature;
    canonical["seed"] = req.seed;
    canonical["max_tokens"] = req.max_tokens;
    canonical["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : req.messages) {
        nlohmann::json parts = nlohmann::json::array();
        for (const MessagePart& p : m.parts) {
            if (const auto* text = std::get_if<TextPart>(&p)) {
                parts.push_back({{"type", "text"}, {"text", text->text}});
            } else {
                const auto& image = std::get<ImagePart>(p);
                parts.push_back({{"type", "image"},
                                 {"media_type", image.media_type},
                                 {"sha256", sha256_hex(image.content)}});
            }
        }
        canonical["messages"].push_back(
            {{"role", std::string(role_name(m.role))}, {"parts", std::move(parts)}});
    }
    return sha256_hex(canonical.dump());
}

std::string request_wire_body(const ChatRequest& req) {
    nlohmann::json body;
    body["model"] = req.model;
    body["temperature"] = req.temperature;
    body["seed"] = req.seed;
    body["max_tokens"] = req.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : req.messages) {
        nlohmann::json content = nlohmann::json::array();
        for (const MessagePart& p : m.parts) {
            if (const auto* text = std::get_if<TextPart>(&p)) {
                content.push_back({{"type", "text"}, {"text", text->text}});
            } else {
                const auto& image = std::get<ImagePart>(p);
                content.push_back(
                    {{"type", "image_url"},
                     {"image_url",
                      {{"url", "data:" + image.media_type + ";base64," +
                                   base64_encode(image.content)}}}});
            }
        }
        body["messages"].push_back(
            {{"role", std::string(role_name(m.role))}, {"content", std::move(content)}});
    }
    return body.dump();
}

std::string request_summary(const ChatRequest& req) {
    std::string first_text;
    std::size_t images = 0;
    for (const ChatMessage& m : req.messages) {
        for (const MessagePart& p : m.parts) {
            if (const auto* text = std::get_if<TextPart>(&p)) {
                if (first_text.empty()) first_text = text->text.substr(0, 96);
            } else {
                ++images;
            }
        }
    }
    return "model=" + req.model + " messages=" + std::to_string(req.messages.size()) +
           " images=" + std::to_string(images) + " first_text=\"" + first_text + "\"";
}

// ---------------------------------------------------------------------------
// TranscriptStore

TranscriptStore TranscriptStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw GatewayError(GatewayErrorCode::store_error,
                           "cannot open transcript file: " + path.string());
    }
    TranscriptStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayErrorCode::store_error,
                               path.string() + ":" + std::to_string(line_no) +
                                   ": invalid transcript line: " + e.what());
        }
        if (!row.contains("digest") || !row.contains("response")) {
            throw GatewayError(GatewayErrorCode::store_error,
                               path.string() + ":" + std::to_string(line_no) +
                                   ": transcript line needs digest and response");
        }
        store.record(row["digest"].get<std::string>(), row["response"].get<std::string>());
    }
    store.log_path_.clear();
    return store;
}

std::optional<std::string> TranscriptStore::lookup(std::string_view digest) const {
    std::shared_lock lock(*mutex_);
    auto it = entries_.find(std::string(digest));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool TranscriptStore::record(const std::string& digest, const std::string& response) {
    std::unique_lock lock(*mutex_);
    auto it = entries_.find(digest);
    if (it != entries_.end()) {
        if (it->second != response) {
            throw GatewayError(GatewayErrorCode::digest_conflict,
                               "digest " + digest + " already recorded with a different response");
        }
        return false;
    }
    entries_.emplace(digest, response);
    if (!log_path_.empty()) {
        std::ofstream out(log_path_, std::ios::app);
        if (!out) {
            throw GatewayError(GatewayErrorCode::store_error,
                               "cannot append to transcript file: " + log_path_.string());
        }
        nlohmann::json row = {{"digest", digest}, {"response", response}};
        out << row.dump() << "\n";
    }
    return true;
}

std::size_t TranscriptStore::size() const {
    std::shared_lock lock(*mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// HttpGateway

struct HttpGateway::Inflight {
    std::mutex mutex;
    std::condition_variable cv;
    int available = 0;
};

HttpGateway::HttpGateway(HttpGatewayConfig config)
    : config_(std::move(config)), inflight_(std::make_unique<Inflight>()) {
    inflight_->available = std::max(1, config_.max_inflight);
}

HttpGateway::~HttpGateway() = default;

std::string HttpGateway::do_complete(const ChatRequest& req) {
    if (config_.api_key.empty()) {
        throw GatewayError(GatewayErrorCode::auth_failure,
                           "no API key configured; refusing to call the endpoint");
    }
    if (config_.endpoint.empty()) {
        throw GatewayError(GatewayErrorCode::invalid_request, "no endpoint configured");
    }

    struct Slot {
        Inflight& s;
        explicit Slot(Inflight& s_) : s(s_) {
            std::unique_lock lock(s.mutex);
            s.cv.wait(lock, [&] { return s.available > 0; });
            --s.available;
        }
        ~Slot() {
            {
                std::lock_guard lock(s.mutex);
                ++s.available;
            }
            s.cv.notify_one();
        }
    } slot(*inflight_);

    std::string body = request_wire_body(req);
    std::string last_error;

    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            double factor = 1.0;
            for (int i = 2; i < attempt; ++i) factor *= config_.backoff_multiplier;
            auto delay = std::chrono::milliseconds(
                static_cast<long>(config_.backoff_initial_ms * factor));
            std::this_thread::sleep_for(delay);
        }

        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.timeout_sec, 0);
        client.set_read_timeout(config_.timeout_sec, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};
        auto res = client.Post(config_.path, headers, body, "application/json");

        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw GatewayError(GatewayErrorCode::auth_failure,
                               "endpoint rejected credentials (HTTP " +
                                   std::to_string(res->status) + ")");
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw GatewayError(GatewayErrorCode::malformed_response,
                               "unexpected HTTP " + std::to_string(res->status) + ": " +
                                   res->body.substr(0, 200));
        }

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayErrorCode::malformed_response,
                               std::string("response is not JSON: ") + e.what());
        }
        if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
            !doc["choices"][0].contains("message") ||
            !doc["choices"][0]["message"].contains("content") ||
            !doc["choices"][0]["message"]["content"].is_string()) {
            throw GatewayError(GatewayErrorCode::malformed_response,
                               "response lacks choices[0].message.content");
        }
        std::string text = doc["choices"][0]["message"]["content"].get<std::string>();
        // Guard against servers that ignore max_tokens; ~4 chars per token.
        std::size_t budget = static_cast<std::size_t>(req.max_tokens) * 4;
        if (text.size() > budget) text.resize(budget);
        return text;
    }
    throw GatewayError(GatewayErrorCode::exhausted_retries,
                       "gave up after " + std::to_string(config_.max_attempts) +
                           " attempts; last error: " + last_error);
}

// ---------------------------------------------------------------------------

std::string ReplayGateway::do_complete(const ChatRequest& req) {
    std::string digest = request_digest(req);
    if (auto hit = store_.lookup(digest)) return *hit;
    throw GatewayError(GatewayErrorCode::transcript_miss,
                       "no transcript for digest " + digest + " (" + request_summary(req) + ")");
}

std::string RecordingGateway::do_complete(const ChatRequest& req) {
    std::string digest = request_digest(req);
    if (auto hit = store_.lookup(digest)) return *hit;
    std::string response = inner_.complete(req);
    store_.record(digest, response);
    return response;
}

}  // namespace ctig
