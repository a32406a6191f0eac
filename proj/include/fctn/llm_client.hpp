#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fctn/chat.hpp"
#include "fctn/errors.hpp"

namespace fctn {

struct ClientParams {
    std::string model_name = "gpt-4o";
    int max_output_tokens = 3000;
    double temperature = 0.7;
    long context_window_tokens = 128000;
    int timeout_ms = 60000;
    int max_retries = 3;
};

/// Projected token usage (history estimate plus reserved output) and whether
/// it fits the context window.
struct TokenBudget {
    long projected_tokens = 0;
    bool ok = true;
};

inline TokenBudget token_budget_check(const Conversation& conversation,
                                      const ClientParams& params) {
    TokenBudget b;
    b.projected_tokens = conversation.token_estimate() + params.max_output_tokens;
    b.ok = b.projected_tokens <= params.context_window_tokens;
    return b;
}

/// One chat-completion transport. `send` never mutates the conversation;
/// appending the reply is the caller's act. Throws ContextOverflow instead of
/// ever truncating history.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatMessage send(const Conversation& conversation, const ClientParams& params) = 0;
};

/// Deterministic mock: replays a fixed ordered list of response strings and
/// records every message list it was sent.
class ScriptedChatClient final : public ChatClient {
public:
    explicit ScriptedChatClient(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    /// Load from a JSON file holding an ordered array of response strings.
    static ScriptedChatClient from_file(const std::string& path);

    ChatMessage send(const Conversation& conversation, const ClientParams& params) override;

    const std::vector<std::vector<ChatMessage>>& received() const { return received_; }
    std::size_t responses_left() const { return responses_.size() - next_; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
    std::vector<std::vector<ChatMessage>> received_;
};

/// HTTP chat-completions backend. POSTs {model, messages, max_tokens,
/// temperature} to the configured endpoint and returns the first choice's
/// message. Transient transport failures retry with exponential backoff up to
/// max_retries. The API key is read from `api_key_env` (never logged).
class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(std::string endpoint_url, std::string api_key_env);

    ChatMessage send(const Conversation& conversation, const ClientParams& params) override;

private:
    std::string endpoint_url_;
    std::string api_key_env_;
};

} // namespace fctn
