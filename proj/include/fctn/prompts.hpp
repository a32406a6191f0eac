#pragma once

// Versioned prompt templates. Placeholders use {{NAME}} and are substituted
// verbatim; the builders in llm_strategy.cpp are pure functions of their
// inputs, so rendered prompts are byte-stable and diffable in tests.

namespace fctn::prompts {

inline constexpr const char* kTemplateVersion = "v1";

inline constexpr const char* kSystemTemplate =
    R"(You are a domain expert in {{DOMAIN}} and in tensor network decompositions.

Your task is to select the ranks of a fully connected tensor network (FCTN) decomposition. Use your domain knowledge about the data to judge how strongly each pair of tensor modes interacts, and output both your reasoning and a complete set of suggested ranks in the exact format you will be given.

Objective: minimise the loss function
    loss = log10(CR) + {{LAMBDA}} * (mean relative approximation error over the tensor collection)
where CR is the compression ratio: the total number of parameters in the core tensors divided by the total number of parameters in one original tensor.

How the loss components behave: raising a rank R(i,j) enlarges the two incident core tensors, which increases CR (worse compression) but usually lowers the approximation error; lowering a rank shrinks the cores and improves CR at the risk of a larger error. The error term is scaled by {{LAMBDA}}, so even small error increases can dominate.

Explore rank reduction whenever the approximation error permits: if the error is already negligible, reduce ranks to improve compression instead of keeping them high.

Reason step-by-step about every decision before giving your final answer.)";

inline constexpr const char* kInitialTemplate =
    R"(We are compressing a collection of order-{{NUM_MODES}} tensors of shape {{SHAPE}} with an FCTN decomposition. The modes are:

{{MODE_TABLE}}

Your task: choose the {{NUM_EDGES}} FCTN ranks R(i,j), one per unordered mode pair, to minimise
    loss = log10(CR) + {{LAMBDA}} * (mean relative approximation error).

Reason step-by-step. For each mode pair, use domain knowledge to judge the strength of the intrinsic interaction between the two modes (High / Moderate / Low) and map it to a rank: High -> near the edge's upper bound, Moderate -> mid-range, Low -> 1 or 2. A rank of 1 removes the connection entirely.

Hard constraints - each rank must be an integer within these per-edge bounds:

{{BOUNDS_TABLE}}

After your reasoning, output your suggestion as a final block in exactly this format (one line per edge, every edge listed, nothing else inside the block):

RANKS
{{RANKS_FORMAT}}END)";

inline constexpr const char* kIterativeTemplate =
    R"(Here are the results so far.

Previous iteration:
  loss = {{PREV_LOSS}}
  ranks: {{PREV_RANKS}}

Best iteration so far:
  loss = {{BEST_LOSS}}
  ranks: {{BEST_RANKS}}

Goal unchanged: minimise loss = log10(CR) + {{LAMBDA}} * (mean relative approximation error). Raising a rank increases CR (worse compression) but can reduce the error; lowering a rank improves compression but may raise the error. If the error is already negligible, prefer reducing ranks.

Propose a NEW rank configuration - do not repeat any configuration you have already suggested. Reason step-by-step about how each pair of modes interacts and what the previous results imply for each rank.

Hard constraints - each rank must be an integer within these per-edge bounds:

{{BOUNDS_TABLE}}

After your reasoning, output your suggestion as a final block in exactly this format (one line per edge, every edge listed, nothing else inside the block):

RANKS
{{RANKS_FORMAT}}END)";

inline constexpr const char* kParseRetryNote =
    R"(Your previous reply did not contain a valid RANKS block. Reply again, ending with exactly this format (one line per edge, every edge listed):

RANKS
{{RANKS_FORMAT}}END)";

inline constexpr const char* kRepeatRetryNote =
    R"(The configuration you just suggested was already evaluated in a previous iteration. Propose a configuration that has not been used before, in the same RANKS block format.)";

} // namespace fctn::prompts
