#pragma once

#include <string>
#include <vector>

#include "fctn/errors.hpp"

namespace fctn {

enum class Role { system, user, assistant };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

/// Ordered chat history. The first message is always the system message;
/// roles alternate user/assistant after it.
struct Conversation {
    std::vector<ChatMessage> messages;

    void append(ChatMessage msg) {
        if (msg.content.empty()) throw ProtocolError("chat message content must be nonempty");
        if (messages.empty() && msg.role != Role::system)
            throw ProtocolError("conversation must start with a system message");
        messages.push_back(std::move(msg));
    }

    std::size_t size() const { return messages.size(); }

    /// Crude chars/4 token estimate for budgeting (an overestimate-tolerant
    /// heuristic, not a tokenizer).
    long token_estimate() const {
        long total = 0;
        for (const auto& m : messages)
            total += static_cast<long>((m.content.size() + 3) / 4);
        return total;
    }
};

} // namespace fctn
