#include "fctn/llm_strategy.hpp"

#include <cstdio>
#include <regex>
#include <sstream>

#include "fctn/prompts.hpp"

namespace fctn {

namespace {

std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string mode_table(const TensorMeta& meta) {
    std::ostringstream out;
    for (std::size_t k = 0; k < meta.shape.size(); ++k) {
        if (k) out << '\n';
        out << "Mode " << (k + 1) << " (size " << meta.shape[k]
            << "): " << meta.mode_descriptions[k];
    }
    return out.str();
}

std::string bounds_table(const RankAssignment& bounds) {
    std::ostringstream out;
    for (auto [i, j] : bounds.edges())
        out << "1 <= R(" << i << "," << j << ") <= " << bounds.at(i, j) << '\n';
    std::string s = out.str();
    if (!s.empty()) s.pop_back();
    return s;
}

std::string ranks_format(const RankAssignment& bounds) {
    std::ostringstream out;
    for (auto [i, j] : bounds.edges()) out << "R(" << i << "," << j << ")=<value>\n";
    return out.str();
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) out << " x ";
        out << shape[k];
    }
    return out.str();
}

std::string rstrip(const std::string& s) {
    std::size_t end = s.size();
    while (end > 0 && (s[end - 1] == '\r' || s[end - 1] == ' ' || s[end - 1] == '\t')) --end;
    return s.substr(0, end);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(rstrip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(rstrip(cur));
    return lines;
}

} // namespace

std::string render_template(std::string tpl,
                            const std::vector<std::pair<std::string, std::string>>& vars) {
    for (const auto& [key, value] : vars) {
        const std::string needle = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = tpl.find(needle, pos)) != std::string::npos) {
            tpl.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return tpl;
}

ChatMessage build_system_message(const TensorMeta& meta, double lambda,
                                 const PromptTemplates& templates) {
    const std::string tpl = templates.system_template.empty() ? prompts::kSystemTemplate
                                                              : templates.system_template;
    return ChatMessage{Role::system,
                       render_template(tpl, {{"DOMAIN", meta.domain_label},
                                             {"LAMBDA", fmt_number(lambda)}})};
}

ChatMessage build_initial_prompt(const TensorMeta& meta, double lambda,
                                 const PromptTemplates& templates) {
    const std::string tpl = templates.initial_template.empty() ? prompts::kInitialTemplate
                                                               : templates.initial_template;
    return ChatMessage{
        Role::user,
        render_template(tpl, {{"NUM_MODES", std::to_string(meta.shape.size())},
                              {"NUM_EDGES", std::to_string(meta.bounds.num_edges())},
                              {"SHAPE", shape_string(meta.shape)},
                              {"MODE_TABLE", mode_table(meta)},
                              {"BOUNDS_TABLE", bounds_table(meta.bounds)},
                              {"RANKS_FORMAT", ranks_format(meta.bounds)},
                              {"LAMBDA", fmt_number(lambda)}})};
}

ChatMessage build_iterative_prompt(const IterationRecord& prev, const IterationRecord& best,
                                   const TensorMeta& meta, double lambda,
                                   const PromptTemplates& templates) {
    const std::string tpl = templates.iterative_template.empty() ? prompts::kIterativeTemplate
                                                                 : templates.iterative_template;
    return ChatMessage{
        Role::user,
        render_template(tpl, {{"PREV_LOSS", fmt_number(prev.train.loss)},
                              {"BEST_LOSS", fmt_number(best.train.loss)},
                              {"PREV_RANKS", prev.ranks.to_string()},
                              {"BEST_RANKS", best.ranks.to_string()},
                              {"BOUNDS_TABLE", bounds_table(meta.bounds)},
                              {"RANKS_FORMAT", ranks_format(meta.bounds)},
                              {"LAMBDA", fmt_number(lambda)}})};
}

std::string render_ranks_block(const RankAssignment& ranks) {
    std::ostringstream out;
    out << "RANKS\n";
    for (auto [i, j] : ranks.edges())
        out << "R(" << i << "," << j << ")=" << ranks.at(i, j) << '\n';
    out << "END\n";
    return out.str();
}

RankAssignment parse_ranks(const std::string& response_text, const std::vector<Edge>& edges) {
    const std::vector<std::string> lines = split_lines(response_text);
    std::size_t start = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (lines[i] == "RANKS") start = i;
    if (start == lines.size()) throw ParseFailure("no RANKS block found in response");

    int order = 0;
    for (auto [i, j] : edges) order = std::max(order, std::max(i, j));
    RankAssignment ranks(order);
    std::vector<bool> seen(edges.size(), false);

    static const std::regex edge_re(R"(^R\((\d+),(\d+)\)=(.*)$)");
    bool closed = false;
    for (std::size_t ln = start + 1; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        if (line.empty()) continue;
        if (line == "END") {
            closed = true;
            break;
        }
        std::smatch m;
        if (!std::regex_match(line, m, edge_re))
            throw ParseFailure("unexpected line inside RANKS block: " + line);
        int i = std::stoi(m[1]), j = std::stoi(m[2]);
        if (i > j) std::swap(i, j);
        std::size_t pos = edges.size();
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].first == i && edges[e].second == j) pos = e;
        if (pos == edges.size())
            throw InvalidRankToken("unknown edge in RANKS block: " + line);
        if (seen[pos]) throw DuplicateEdge("duplicate edge line in RANKS block: " + line);
        const std::string tok = m[3];
        long value = 0;
        try {
            std::size_t consumed = 0;
            value = std::stol(tok, &consumed);
            if (consumed != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidRankToken("non-integer rank value: " + line);
        }
        if (value < 1) throw InvalidRankToken("rank values must be >= 1: " + line);
        ranks.set(i, j, static_cast<Index>(value));
        seen[pos] = true;
    }
    if (!closed) throw ParseFailure("RANKS block not terminated by END");
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (!seen[e]) throw MissingEdge(edges[e].first, edges[e].second);
    return ranks;
}

std::string extract_reasoning(const std::string& response_text) {
    const std::vector<std::string> lines = split_lines(response_text);
    std::size_t start = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (lines[i] == "RANKS") start = i;
    if (start == lines.size()) return response_text;
    std::string out;
    for (std::size_t i = 0; i < start; ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

bool detect_repeat(const RankAssignment& ranks, const std::vector<RankAssignment>& history) {
    for (const auto& h : history)
        if (h == ranks) return true;
    return false;
}

LlmRankProposer::LlmRankProposer(TensorMeta meta, double lambda, ChatClient& client,
                                 ClientParams params, PromptTemplates templates)
    : meta_(std::move(meta)), lambda_(lambda), client_(client), params_(std::move(params)),
      templates_(std::move(templates)) {
    if (meta_.mode_descriptions.size() != meta_.shape.size())
        throw ShapeMismatch("TensorMeta needs exactly one description per mode");
    conversation_.append(build_system_message(meta_, lambda_, templates_));
    conversation_.append(build_initial_prompt(meta_, lambda_, templates_));
}

ChatMessage LlmRankProposer::ask() { return client_.send(conversation_, params_); }

Proposal LlmRankProposer::next() {
    const auto edges = meta_.bounds.edges();
    Proposal proposal;

    // the conversation already ends with the pending user prompt
    ChatMessage reply = ask();
    conversation_.append(reply);

    RankAssignment parsed;
    try {
        parsed = parse_ranks(reply.content, edges);
    } catch (const Error&) {
        conversation_.append(
            ChatMessage{Role::user, render_template(prompts::kParseRetryNote,
                                                    {{"RANKS_FORMAT", ranks_format(meta_.bounds)}})});
        reply = ask();
        conversation_.append(reply);
        proposal.retried = true;
        try {
            parsed = parse_ranks(reply.content, edges);
        } catch (const Error& e2) {
            throw ProposalFailed(std::string("no parseable RANKS block after re-ask: ") +
                                 e2.what());
        }
    }

    RankAssignment ranks = clamp(parsed, meta_.bounds).first;
    if (detect_repeat(ranks, proposed_)) {
        conversation_.append(ChatMessage{Role::user, prompts::kRepeatRetryNote});
        ChatMessage retry = ask();
        conversation_.append(retry);
        proposal.retried = true;
        bool replaced = false;
        try {
            const RankAssignment again = clamp(parse_ranks(retry.content, edges), meta_.bounds).first;
            ranks = again;
            reply = retry;
            replaced = true;
            proposal.repeated = detect_repeat(again, proposed_);
        } catch (const Error&) {
            // retry reply unusable; keep the original repeated proposal
        }
        if (!replaced) proposal.repeated = true;
    }

    proposed_.push_back(ranks);
    proposal.ranks = std::move(ranks);
    proposal.reasoning = extract_reasoning(reply.content);
    return proposal;
}

void LlmRankProposer::observe(const IterationRecord& latest, const IterationRecord& best) {
    conversation_.append(build_iterative_prompt(latest, best, meta_, lambda_, templates_));
}

} // namespace fctn
