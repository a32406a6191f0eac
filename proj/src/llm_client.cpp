#include "fctn/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fctn {

using nlohmann::json;

ScriptedChatClient ScriptedChatClient::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProtocolError("mock script not readable: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ProtocolError("mock script is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw ProtocolError("mock script must be a JSON array of strings");
    std::vector<std::string> responses;
    for (const auto& item : doc) {
        if (!item.is_string()) throw ProtocolError("mock script entries must be strings");
        responses.push_back(item.get<std::string>());
    }
    return ScriptedChatClient(std::move(responses));
}

ChatMessage ScriptedChatClient::send(const Conversation& conversation,
                                     const ClientParams& params) {
    const TokenBudget budget = token_budget_check(conversation, params);
    if (!budget.ok)
        throw ContextOverflow("conversation exceeds context window: projected " +
                              std::to_string(budget.projected_tokens) + " tokens");
    received_.push_back(conversation.messages);
    if (next_ >= responses_.size()) throw ScriptExhausted("mock script has no more responses");
    return ChatMessage{Role::assistant, responses_[next_++]};
}

namespace {

/// Split "http(s)://host[:port]/path" into (scheme://host[:port], /path).
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ProtocolError("endpoint URL missing scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

HttpChatClient::HttpChatClient(std::string endpoint_url, std::string api_key_env)
    : endpoint_url_(std::move(endpoint_url)), api_key_env_(std::move(api_key_env)) {}

ChatMessage HttpChatClient::send(const Conversation& conversation, const ClientParams& params) {
    const TokenBudget budget = token_budget_check(conversation, params);
    if (!budget.ok)
        throw ContextOverflow("conversation exceeds context window: projected " +
                              std::to_string(budget.projected_tokens) + " tokens");

    json body;
    body["model"] = params.model_name;
    body["messages"] = json::array();
    for (const auto& m : conversation.messages)
        body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});
    body["max_tokens"] = params.max_output_tokens;
    body["temperature"] = params.temperature;
    const std::string payload = body.dump();

    auto [base, path] = split_url(endpoint_url_);
    httplib::Client client(base);
    client.set_connection_timeout(params.timeout_ms / 1000, (params.timeout_ms % 1000) * 1000);
    client.set_read_timeout(params.timeout_ms / 1000, (params.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_env_.empty()) {
        if (const char* key = std::getenv(api_key_env_.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * (1 << (attempt - 1))));
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProtocolError("chat endpoint returned status " + std::to_string(res->status));
        try {
            const json doc = json::parse(res->body);
            const auto& content = doc.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw ProtocolError("assistant content is not a string");
            return ChatMessage{Role::assistant, content.get<std::string>()};
        } catch (const json::exception& e) {
            throw ProtocolError("malformed provider response: " + std::string(e.what()));
        }
    }
    throw ClientUnavailable("chat endpoint unreachable after retries: " + last_error);
}

} // namespace fctn
