#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fctn/chat.hpp"
#include "fctn/llm_client.hpp"
#include "fctn/rank_assignment.hpp"
#include "fctn/search.hpp"
#include "fctn/tensor.hpp"

namespace fctn {

/// What the prompts say about the data: shape, one free-text label per mode,
/// a domain label, and the per-edge rank bounds.
struct TensorMeta {
    Shape shape;
    std::vector<std::string> mode_descriptions;
    std::string domain_label;
    RankAssignment bounds;
};

/// Override points for the shipped prompt templates (empty = use built-in).
struct PromptTemplates {
    std::string system_template;
    std::string initial_template;
    std::string iterative_template;
};

/// Replace every {{KEY}} placeholder with its value.
std::string render_template(std::string tpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

ChatMessage build_system_message(const TensorMeta& meta, double lambda,
                                 const PromptTemplates& templates = {});
ChatMessage build_initial_prompt(const TensorMeta& meta, double lambda,
                                 const PromptTemplates& templates = {});
ChatMessage build_iterative_prompt(const IterationRecord& prev, const IterationRecord& best,
                                   const TensorMeta& meta, double lambda,
                                   const PromptTemplates& templates = {});

/// Machine-parseable output block: `RANKS`, one `R(i,j)=v` line per edge
/// (i < j, ascending lexicographic), then `END`.
std::string render_ranks_block(const RankAssignment& ranks);

/// Extract the rank assignment from the final RANKS block of a response.
/// Prose before the block is ignored (it is the reasoning text).
RankAssignment parse_ranks(const std::string& response_text, const std::vector<Edge>& edges);

/// The response with its final RANKS block removed: the stored reasoning.
std::string extract_reasoning(const std::string& response_text);

bool detect_repeat(const RankAssignment& ranks, const std::vector<RankAssignment>& history);

/// LLM-guided proposer: maintains the full conversation (system message and
/// initial prompt up front, then one user/assistant pair per iteration),
/// parses the RANKS block from each reply, clamps to bounds, and handles
/// parse failures and repeats with a single corrective re-ask each.
class LlmRankProposer final : public RankProposer {
public:
    LlmRankProposer(TensorMeta meta, double lambda, ChatClient& client, ClientParams params,
                    PromptTemplates templates = {});

    std::string name() const override { return "llm"; }
    Proposal next() override;
    void observe(const IterationRecord& latest, const IterationRecord& best) override;

    const Conversation& conversation() const { return conversation_; }

private:
    ChatMessage ask();

    TensorMeta meta_;
    double lambda_;
    ChatClient& client_;
    ClientParams params_;
    PromptTemplates templates_;
    Conversation conversation_;
    std::vector<RankAssignment> proposed_;
};

} // namespace fctn
