#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fctn/objective.hpp"
#include "fctn/rank_assignment.hpp"
#include "fctn/tensor.hpp"

namespace fctn {

enum class BoundPolicy { max_of_modes, min_of_modes };

/// Knobs of the iterative rank-search loop.
struct SearchConfig {
    int max_iterations = 10;
    int patience = 5;
    double min_delta = 0.0;
    BoundPolicy bound_policy = BoundPolicy::max_of_modes;
    double lambda = kDefaultLambda;
    AlsOptions als;
    std::uint64_t rng_seed = 0;
};

struct IterationRecord {
    int index = 0;
    RankAssignment ranks;
    EvalResult train;
    EvalResult test;
    std::optional<std::string> reasoning;
    std::vector<Edge> clamped_edges;
    bool repeated = false;
    bool retried = false;
    std::int64_t wall_time_ms = 0;
};

struct RunLog {
    std::vector<IterationRecord> iterations;
    int best_index = 0; // minimal train loss, earliest on ties
    bool stopped_early = false;
    std::string strategy_name;
    std::vector<std::string> errors; // skipped-iteration strategy failures
};

/// One proposed rank assignment, possibly annotated by the strategy.
struct Proposal {
    RankAssignment ranks;
    std::optional<std::string> reasoning;
    bool repeated = false;
    bool retried = false;
};

/// A rank-proposing strategy driven by the search loop. `next` produces the
/// proposal for the upcoming iteration; `observe` reports the evaluated
/// outcome (and the best-so-far record) back to the strategy.
class RankProposer {
public:
    virtual ~RankProposer() = default;
    virtual std::string name() const = 0;
    virtual Proposal next() = 0;
    virtual void observe(const IterationRecord& latest, const IterationRecord& best) {
        (void)latest;
        (void)best;
    }
};

/// Per-edge rank bound derived from the sizes of the two incident modes.
RankAssignment rank_upper_bounds(const Shape& shape, BoundPolicy policy);

/// Reduce each entry to its bound; returns the clamped assignment and the
/// edges where a reduction occurred.
std::pair<RankAssignment, std::vector<Edge>> clamp(const RankAssignment& ranks,
                                                   const RankAssignment& bounds);

/// True iff the tail of `train_losses` holds `patience` consecutive entries
/// that each failed to improve the running best by more than min_delta.
bool early_stop_check(const std::vector<double>& train_losses, int patience, double min_delta);

/// Uniform in-bounds assignment: each edge drawn from [1, bound].
RankAssignment random_propose(const RankAssignment& bounds, std::mt19937_64& rng);

/// Model-based proposal: random for the first n_init observations, then a
/// Gaussian-process surrogate with expected-improvement acquisition over a
/// candidate pool (the whole integer box when it fits, else 512 samples),
/// excluding already-evaluated points while unevaluated candidates exist.
RankAssignment smbo_propose(const std::vector<std::pair<RankAssignment, double>>& history,
                            const RankAssignment& bounds, int n_init, std::mt19937_64& rng,
                            int pool_size = 512);

/// Every in-bounds assignment in ascending lexicographic order; throws
/// SpaceTooLarge beyond `cap`.
std::vector<RankAssignment> enumerate_assignments(const RankAssignment& bounds, Index cap = 4096);

struct ExhaustiveResult {
    RankAssignment best_ranks;
    double best_loss = 0.0;
    std::vector<std::pair<RankAssignment, double>> table;
};

/// Evaluate every in-bounds assignment (small spaces only). Ties resolve to
/// the lexicographically smallest ranks.
ExhaustiveResult exhaustive_search(const RankAssignment& bounds,
                                   const std::vector<TensorD>& tensors,
                                   const SearchConfig& config, Index cap = 4096);

/// The iterative loop: propose, clamp, evaluate train and test, log, update
/// the best by train loss, stop early on patience or hard-stop at
/// max_iterations. Test evaluation is recorded every iteration but never
/// consulted by the stopping rule. `on_record` (optional) streams each
/// finished record, enabling crash-safe log writing.
RunLog run_search(RankProposer& strategy, const std::vector<TensorD>& tensors_train,
                  const std::vector<TensorD>& tensors_test, const SearchConfig& config,
                  const std::function<void(const IterationRecord&)>& on_record = {});

/// Uniform random strategy (the random-search baseline). Re-draws (up to a
/// fixed number of attempts) when a draw repeats an earlier proposal, so
/// small search spaces are covered instead of resampled.
class RandomProposer final : public RankProposer {
public:
    RandomProposer(RankAssignment bounds, std::uint64_t seed)
        : bounds_(std::move(bounds)), rng_(seed) {}
    std::string name() const override { return "random"; }
    Proposal next() override {
        RankAssignment draw = random_propose(bounds_, rng_);
        for (int attempt = 0; attempt < 64 && seen(draw); ++attempt)
            draw = random_propose(bounds_, rng_);
        proposed_.push_back(draw);
        return Proposal{std::move(draw), {}, false, false};
    }

private:
    bool seen(const RankAssignment& r) const {
        return std::find(proposed_.begin(), proposed_.end(), r) != proposed_.end();
    }
    RankAssignment bounds_;
    std::mt19937_64 rng_;
    std::vector<RankAssignment> proposed_;
};

/// Sequential model-based strategy (the Bayesian-optimisation baseline).
class SmboProposer final : public RankProposer {
public:
    SmboProposer(RankAssignment bounds, std::uint64_t seed, int n_init = 3)
        : bounds_(std::move(bounds)), rng_(seed), n_init_(n_init) {}
    std::string name() const override { return "bayes"; }
    Proposal next() override {
        return Proposal{smbo_propose(history_, bounds_, n_init_, rng_), {}, false, false};
    }
    void observe(const IterationRecord& latest, const IterationRecord&) override {
        history_.emplace_back(latest.ranks, latest.train.loss);
    }

private:
    RankAssignment bounds_;
    std::mt19937_64 rng_;
    int n_init_;
    std::vector<std::pair<RankAssignment, double>> history_;
};

/// Fixed proposal sequence, for tests and replays.
class ScriptedProposer final : public RankProposer {
public:
    explicit ScriptedProposer(std::vector<RankAssignment> script, std::string name = "scripted")
        : script_(std::move(script)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    Proposal next() override {
        if (pos_ >= script_.size()) throw ProposalFailed("scripted proposer exhausted");
        return Proposal{script_[pos_++], {}, false, false};
    }

private:
    std::vector<RankAssignment> script_;
    std::string name_;
    std::size_t pos_ = 0;
};

} // namespace fctn
