#include "fctn/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace fctn {

RankAssignment rank_upper_bounds(const Shape& shape, BoundPolicy policy) {
    const int n = static_cast<int>(shape.size());
    RankAssignment bounds(n);
    for (auto [i, j] : bounds.edges()) {
        const Index a = shape[static_cast<std::size_t>(i - 1)];
        const Index b = shape[static_cast<std::size_t>(j - 1)];
        bounds.set(i, j, policy == BoundPolicy::max_of_modes ? std::max(a, b) : std::min(a, b));
    }
    return bounds;
}

std::pair<RankAssignment, std::vector<Edge>> clamp(const RankAssignment& ranks,
                                                   const RankAssignment& bounds) {
    if (ranks.order() != bounds.order())
        throw ShapeMismatch("clamp: order mismatch between ranks and bounds");
    RankAssignment out = ranks;
    std::vector<Edge> clamped;
    for (auto [i, j] : ranks.edges()) {
        if (ranks.at(i, j) > bounds.at(i, j)) {
            out.set(i, j, bounds.at(i, j));
            clamped.emplace_back(i, j);
        }
    }
    return {out, clamped};
}

bool early_stop_check(const std::vector<double>& train_losses, int patience, double min_delta) {
    double best = std::numeric_limits<double>::infinity();
    int streak = 0;
    for (double loss : train_losses) {
        if (loss < best - min_delta) {
            best = loss;
            streak = 0;
        } else {
            ++streak;
        }
    }
    return streak >= patience;
}

RankAssignment random_propose(const RankAssignment& bounds, std::mt19937_64& rng) {
    RankAssignment out(bounds.order());
    for (auto [i, j] : bounds.edges()) {
        std::uniform_int_distribution<Index> dist(1, bounds.at(i, j));
        out.set(i, j, dist(rng));
    }
    return out;
}

namespace {

Index box_size(const RankAssignment& bounds) {
    Index total = 1;
    for (Index b : bounds.values()) {
        if (total > std::numeric_limits<Index>::max() / b) return std::numeric_limits<Index>::max();
        total *= b;
    }
    return total;
}

/// All in-bounds assignments in ascending lexicographic order of the
/// edge-ordered value vector (last edge varies fastest).
std::vector<RankAssignment> enumerate_box(const RankAssignment& bounds) {
    const auto edges = bounds.edges();
    std::vector<RankAssignment> out;
    RankAssignment cur(bounds.order());
    for (;;) {
        out.push_back(cur);
        int d = static_cast<int>(edges.size()) - 1;
        for (; d >= 0; --d) {
            auto [i, j] = edges[static_cast<std::size_t>(d)];
            if (cur.at(i, j) < bounds.at(i, j)) {
                cur.set(i, j, cur.at(i, j) + 1);
                break;
            }
            cur.set(i, j, 1);
        }
        if (d < 0) break;
    }
    return out;
}

} // namespace

std::vector<RankAssignment> enumerate_assignments(const RankAssignment& bounds, Index cap) {
    const Index total = box_size(bounds);
    if (total > cap)
        throw SpaceTooLarge("enumerate_assignments: " + std::to_string(total) +
                            " configurations exceed cap " + std::to_string(cap));
    return enumerate_box(bounds);
}

RankAssignment smbo_propose(const std::vector<std::pair<RankAssignment, double>>& history,
                            const RankAssignment& bounds, int n_init, std::mt19937_64& rng,
                            int pool_size) {
    if (static_cast<int>(history.size()) < n_init) return random_propose(bounds, rng);

    std::vector<RankAssignment> pool;
    if (box_size(bounds) <= pool_size) {
        pool = enumerate_box(bounds);
    } else {
        pool.reserve(static_cast<std::size_t>(pool_size));
        for (int i = 0; i < pool_size; ++i) pool.push_back(random_propose(bounds, rng));
    }

    std::set<std::vector<Index>> evaluated;
    for (const auto& [ranks, loss] : history) evaluated.insert(ranks.values());

    std::vector<const RankAssignment*> candidates;
    for (const auto& c : pool)
        if (!evaluated.count(c.values())) candidates.push_back(&c);
    if (candidates.empty()) return random_propose(bounds, rng);

    // GP surrogate on edge ranks normalized to [0, 1]
    const auto edges = bounds.edges();
    const int dims = static_cast<int>(edges.size());
    auto normalize = [&](const RankAssignment& r) {
        Eigen::VectorXd x(dims);
        for (int d = 0; d < dims; ++d) {
            auto [i, j] = edges[static_cast<std::size_t>(d)];
            const double span = static_cast<double>(bounds.at(i, j) - 1);
            x[d] = span > 0 ? static_cast<double>(r.at(i, j) - 1) / span : 0.0;
        }
        return x;
    };

    const int m = static_cast<int>(history.size());
    Eigen::MatrixXd xs(m, dims);
    Eigen::VectorXd ys(m);
    for (int i = 0; i < m; ++i) {
        xs.row(i) = normalize(history[static_cast<std::size_t>(i)].first).transpose();
        ys[i] = history[static_cast<std::size_t>(i)].second;
    }
    const double y_mean = ys.mean();
    double y_std = std::sqrt((ys.array() - y_mean).square().mean());
    if (!(y_std > 0)) y_std = 1.0;
    const Eigen::VectorXd yn = (ys.array() - y_mean) / y_std;

    const double length_scale = 0.3;
    auto kern = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return std::exp(-(a - b).squaredNorm() / (2.0 * length_scale * length_scale));
    };
    Eigen::MatrixXd K(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) K(i, j) = kern(xs.row(i), xs.row(j));
    K.diagonal().array() += 1e-6;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    const Eigen::VectorXd alpha = ldlt.solve(yn);

    const double y_best = yn.minCoeff();
    auto normal_pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
    auto normal_cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };

    const RankAssignment* chosen = candidates.front();
    double best_ei = -1.0;
    for (const RankAssignment* cand : candidates) {
        const Eigen::VectorXd x = normalize(*cand);
        Eigen::VectorXd kv(m);
        for (int i = 0; i < m; ++i) kv[i] = kern(xs.row(i), x);
        const double mu = kv.dot(alpha);
        const double var = std::max(1.0 + 1e-6 - kv.dot(ldlt.solve(kv)), 1e-12);
        const double sigma = std::sqrt(var);
        const double z = (y_best - mu) / sigma;
        const double ei = (y_best - mu) * normal_cdf(z) + sigma * normal_pdf(z);
        if (ei > best_ei) {
            best_ei = ei;
            chosen = cand;
        }
    }
    return *chosen;
}

ExhaustiveResult exhaustive_search(const RankAssignment& bounds,
                                   const std::vector<TensorD>& tensors,
                                   const SearchConfig& config, Index cap) {
    const Index total = box_size(bounds);
    if (total > cap)
        throw SpaceTooLarge("exhaustive_search: " + std::to_string(total) +
                            " configurations exceed cap " + std::to_string(cap));
    ExhaustiveResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    for (const RankAssignment& ranks : enumerate_box(bounds)) {
        const EvalResult eval = evaluate(ranks, tensors, config.als, config.lambda);
        result.table.emplace_back(ranks, eval.loss);
        if (eval.loss < result.best_loss) {
            result.best_loss = eval.loss;
            result.best_ranks = ranks;
        }
    }
    return result;
}

RunLog run_search(RankProposer& strategy, const std::vector<TensorD>& tensors_train,
                  const std::vector<TensorD>& tensors_test, const SearchConfig& config,
                  const std::function<void(const IterationRecord&)>& on_record) {
    if (tensors_train.empty()) throw EmptyCollection("run_search: empty training set");
    const RankAssignment bounds =
        rank_upper_bounds(tensors_train.front().shape(), config.bound_policy);

    RunLog log;
    log.strategy_name = strategy.name();
    std::vector<double> train_losses;
    int best_pos = -1;

    for (int attempt = 1; attempt <= config.max_iterations; ++attempt) {
        const auto t0 = std::chrono::steady_clock::now();
        Proposal proposal;
        try {
            proposal = strategy.next();
        } catch (const Error& e) {
            if (log.iterations.empty()) throw;
            log.errors.push_back("iteration attempt " + std::to_string(attempt) +
                                 " skipped: " + e.what());
            continue;
        }

        IterationRecord rec;
        rec.index = static_cast<int>(log.iterations.size()) + 1;
        auto [clamped, clamped_edges] = clamp(proposal.ranks, bounds);
        rec.ranks = std::move(clamped);
        rec.clamped_edges = std::move(clamped_edges);
        rec.reasoning = proposal.reasoning;
        rec.retried = proposal.retried;
        rec.repeated = proposal.repeated;
        for (const auto& prev : log.iterations)
            if (prev.ranks == rec.ranks) rec.repeated = true;

        rec.train = evaluate(rec.ranks, tensors_train, config.als, config.lambda);
        if (!tensors_test.empty())
            rec.test = evaluate(rec.ranks, tensors_test, config.als, config.lambda);
        rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

        train_losses.push_back(rec.train.loss);
        log.iterations.push_back(std::move(rec));
        if (best_pos < 0 ||
            log.iterations.back().train.loss <
                log.iterations[static_cast<std::size_t>(best_pos)].train.loss)
            best_pos = static_cast<int>(log.iterations.size()) - 1;
        log.best_index = log.iterations[static_cast<std::size_t>(best_pos)].index;

        if (on_record) on_record(log.iterations.back());
        strategy.observe(log.iterations.back(), log.iterations[static_cast<std::size_t>(best_pos)]);

        if (early_stop_check(train_losses, config.patience, config.min_delta)) {
            log.stopped_early = true;
            break;
        }
    }
    return log;
}

} // namespace fctn
