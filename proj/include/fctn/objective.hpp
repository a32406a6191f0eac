#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fctn/network.hpp"
#include "fctn/rank_assignment.hpp"
#include "fctn/tensor.hpp"

namespace fctn {

constexpr double kDefaultLambda = 1e3;

/// Score of one rank assignment on a tensor collection:
/// loss = log10(CR) + lambda * mean relative approximation error.
struct EvalResult {
    double cr = 0.0;
    double log10_cr = 0.0;
    std::vector<double> per_tensor_errors;
    double mean_error = 0.0;
    double loss = 0.0;
    double lambda = kDefaultLambda;
    std::vector<int> sweeps_per_tensor;
};

/// Core parameters divided by entries of one original tensor. Depends only on
/// (shape, ranks), never on tensor values; may exceed 1.
inline double compression_ratio(const Shape& shape, const RankAssignment& ranks) {
    return static_cast<double>(param_count(shape, ranks)) /
           static_cast<double>(shape_size(shape));
}

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double loss(double log10_cr, const std::vector<double>& per_tensor_errors, double lambda) {
    if (per_tensor_errors.empty()) throw EmptyCollection("loss: empty error list");
    return log10_cr + lambda * mean_of(per_tensor_errors);
}

/// Decompose every tensor independently at the shared ranks and aggregate.
/// All tensors must share one shape (the CR is a single number).
inline EvalResult evaluate(const RankAssignment& ranks, const std::vector<TensorD>& tensors,
                           const AlsOptions& opts, double lambda = kDefaultLambda) {
    if (tensors.empty()) throw EmptyCollection("evaluate: empty tensor collection");
    const Shape& shape = tensors.front().shape();
    for (const auto& t : tensors)
        if (t.shape() != shape)
            throw ShapeMismatch("evaluate: mixed-shape tensor collections are rejected");

    EvalResult r;
    r.lambda = lambda;
    r.cr = compression_ratio(shape, ranks);
    r.log10_cr = std::log10(r.cr);
    r.per_tensor_errors.reserve(tensors.size());
    for (std::size_t n = 0; n < tensors.size(); ++n) {
        try {
            const auto fit = decompose(tensors[n], ranks, opts);
            r.per_tensor_errors.push_back(fit.rel_error);
            r.sweeps_per_tensor.push_back(fit.sweeps_used);
        } catch (const DegenerateReference&) {
            throw DegenerateReference("evaluate: tensor " + std::to_string(n + 1) +
                                      " has zero norm");
        }
    }
    r.mean_error = mean_of(r.per_tensor_errors);
    r.loss = r.log10_cr + lambda * r.mean_error;
    return r;
}

} // namespace fctn
