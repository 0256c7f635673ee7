#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "vltrack/driver.hpp"

namespace vltrack {

namespace http_detail {

inline std::string base64_encode(const std::string& bytes) {
    static const char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::string mime_for(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".png") return "image/png";
    if (ext == ".bmp") return "image/bmp";
    if (ext == ".webp") return "image/webp";
    return "image/jpeg";
}

// local file paths become base64 data URLs; URLs pass through untouched
inline std::string image_url_for(const std::string& ref) {
    if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0 ||
        ref.rfind("data:", 0) == 0) {
        return ref;
    }
    std::ifstream in(ref, std::ios::binary);
    if (!in) {
        throw BackendError("cannot read image file '" + ref + "'", /*retryable=*/false);
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return "data:" + mime_for(ref) + ";base64," + base64_encode(bytes.str());
}

}  // namespace http_detail

// Chat-completion request body: every turn becomes one message; the
// request's images ride along as image parts ahead of the text in the last
// user message.
inline nlohmann::ordered_json build_chat_payload(const BackendRequest& request,
                                                 const std::string& model) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["max_tokens"] = request.max_output_tokens;
    auto& messages = body["messages"] = nlohmann::ordered_json::array();

    std::size_t last_user = request.turns.size();
    for (std::size_t i = 0; i < request.turns.size(); ++i) {
        if (request.turns[i].role == Role::User) last_user = i;
    }

    for (std::size_t i = 0; i < request.turns.size(); ++i) {
        const Turn& turn = request.turns[i];
        nlohmann::ordered_json msg;
        msg["role"] = role_to_string(turn.role);
        if (turn.role == Role::User && i == last_user && !request.image_refs.empty()) {
            auto content = nlohmann::ordered_json::array();
            for (const auto& ref : request.image_refs) {
                content.push_back({{"type", "image_url"},
                                   {"image_url", {{"url", http_detail::image_url_for(ref.path)}}}});
            }
            content.push_back({{"type", "text"}, {"text", turn.text}});
            msg["content"] = std::move(content);
        } else {
            msg["content"] = turn.text;
        }
        messages.push_back(std::move(msg));
    }
    return body;
}

inline std::string extract_chat_text(const nlohmann::json& body) {
    const auto& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) {
        throw BackendError("chat response has no choices", /*retryable=*/false);
    }
    const auto& content = choices.at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content) {
        if (part.contains("text")) text += part.at("text").get<std::string>();
    }
    return text;
}

struct HttpBackendConfig {
    std::string endpoint;  // e.g. http://localhost:8000 or .../v1/chat/completions
    std::string api_key;
    std::string model;
    int timeout_seconds = 120;
};

// OpenAI-compatible chat-completion backend. HTTP errors and timeouts are
// retryable; undecodable bodies are terminal. A fresh connection is opened
// per call, so concurrent use across sequences is safe.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
        const auto scheme_end = cfg_.endpoint.find("://");
        if (scheme_end == std::string::npos) {
            throw std::invalid_argument("http backend endpoint must include a scheme: " +
                                        cfg_.endpoint);
        }
        const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = cfg_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = cfg_.endpoint.substr(0, path_start);
            const std::string p = cfg_.endpoint.substr(path_start);
            path_ = p == "/" ? "/v1/chat/completions" : p;
        }
    }

    std::string complete(const BackendRequest& request) override {
        const auto payload = build_chat_payload(request, cfg_.model);

        httplib::Client client(base_);
        client.set_connection_timeout(cfg_.timeout_seconds, 0);
        client.set_read_timeout(cfg_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        }
        const auto res = client.Post(path_, headers, payload.dump(), "application/json");
        if (!res) {
            throw BackendError("http request to " + base_ + path_ + " failed: " +
                                   httplib::to_string(res.error()),
                               /*retryable=*/true);
        }
        if (res->status >= 400) {
            throw BackendError("http status " + std::to_string(res->status) + " from " + base_ +
                                   path_,
                               /*retryable=*/true);
        }
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("chat response is not JSON: ") + e.what(),
                               /*retryable=*/false);
        }
        try {
            return extract_chat_text(body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected chat response shape: ") + e.what(),
                               /*retryable=*/false);
        }
    }

private:
    HttpBackendConfig cfg_;
    std::string base_;
    std::string path_;
};

}  // namespace vltrack
