#pragma once

#include <limits>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fctn/errors.hpp"
#include "fctn/rank_assignment.hpp"
#include "fctn/tensor.hpp"

namespace fctn {

/// Shape of core k (1-based): [R_{1,k}, ..., R_{k-1,k}, I_k, R_{k,k+1}, ..., R_{k,N}].
/// The data mode sits at position k.
inline Shape core_shape(int k, const Shape& shape, const RankAssignment& ranks) {
    const int n = static_cast<int>(shape.size());
    Shape cs(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j)
        cs[static_cast<std::size_t>(j - 1)] =
            (j == k) ? shape[static_cast<std::size_t>(k - 1)] : ranks.at(j, k);
    return cs;
}

/// Total core parameters: sum_k I_k * prod_{j != k} R_{j,k}.
inline Index param_count(const Shape& shape, const RankAssignment& ranks) {
    Index total = 0;
    for (int k = 1; k <= static_cast<int>(shape.size()); ++k)
        total += shape_size(core_shape(k, shape, ranks));
    return total;
}

/// The N order-N core tensors of a fully connected tensor network.
template <class Scalar>
struct FctnCores {
    std::vector<DenseTensor<Scalar>> cores;

    int order() const { return static_cast<int>(cores.size()); }

    Shape full_shape() const {
        Shape s(cores.size());
        for (int k = 1; k <= order(); ++k)
            s[static_cast<std::size_t>(k - 1)] = cores[static_cast<std::size_t>(k - 1)].dim(k);
        return s;
    }

    Index param_count() const {
        Index total = 0;
        for (const auto& c : cores) total += c.size();
        return total;
    }
};

/// ALS hyperparameters. The base algorithm uses a constant `ridge`; three
/// optional stabilizers improve recovery from random starts on hard
/// instances:
///   - ridge annealing: start at `ridge_init` and decay by `ridge_decay`
///     each sweep, then drop to `ridge` for the final polish phase
///     (`anneal_sweeps` sweeps of annealing; -1 = 3/4 of max_sweeps).
///     Disabled when ridge_init == 0.
///   - line search: after each sweep, try extrapolating further along the
///     sweep displacement and keep the best candidate.
///   - core balancing: rescale cores to a common norm after each sweep
///     (leaves the composed tensor unchanged).
struct AlsOptions {
    int max_sweeps = 100;
    double rel_tol = 1e-8;
    double ridge = 1e-10;
    std::uint64_t seed = 0;
    int restarts = 1;
    double ridge_init = 0.0;
    double ridge_decay = 0.96;
    int anneal_sweeps = -1;
    bool line_search = false;
    bool balance_cores = false;
};

/// Random cores with the prescribed shapes. Entries are standard normal from
/// a seeded generator, then each core is scaled by 1/sqrt(prod of its rank
/// modes) to keep the composed magnitude bounded. Same seed, same cores.
template <class Scalar>
FctnCores<Scalar> init_cores(const Shape& shape, const RankAssignment& ranks, std::uint64_t seed) {
    const int n = static_cast<int>(shape.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    FctnCores<Scalar> out;
    out.cores.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        const Shape cs = core_shape(k, shape, ranks);
        const Index rank_prod = shape_size(cs) / shape[static_cast<std::size_t>(k - 1)];
        const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(rank_prod));
        DenseTensor<Scalar> core(cs);
        for (Index i = 0; i < core.size(); ++i) core[i] = scale * static_cast<Scalar>(gauss(rng));
        out.cores.push_back(std::move(core));
    }
    return out;
}

namespace detail {

/// Axis label inside a partially contracted network: either the data mode of
/// core k, or the rank edge shared by cores i < j.
struct AxisLabel {
    bool is_edge;
    int a, b; // mode (a, 0) or edge (a, b)
    bool operator==(const AxisLabel& o) const {
        return is_edge == o.is_edge && a == o.a && b == o.b;
    }
};

template <class Scalar>
struct Labeled {
    DenseTensor<Scalar> tensor;
    std::vector<AxisLabel> labels;
};

template <class Scalar>
Labeled<Scalar> labeled_core(const FctnCores<Scalar>& cores, int k) {
    const int n = cores.order();
    Labeled<Scalar> out{cores.cores[static_cast<std::size_t>(k - 1)], {}};
    for (int j = 1; j <= n; ++j) {
        if (j == k)
            out.labels.push_back({false, k, 0});
        else
            out.labels.push_back({true, std::min(j, k), std::max(j, k)});
    }
    return out;
}

/// Contract two labeled tensors over every shared label.
template <class Scalar>
Labeled<Scalar> contract_shared(const Labeled<Scalar>& x, const Labeled<Scalar>& y) {
    std::vector<int> ax, ay;
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
        for (std::size_t j = 0; j < y.labels.size(); ++j) {
            if (x.labels[i] == y.labels[j]) {
                ax.push_back(static_cast<int>(i) + 1);
                ay.push_back(static_cast<int>(j) + 1);
            }
        }
    }
    Labeled<Scalar> out{contract(x.tensor, ax, y.tensor, ay), {}};
    for (std::size_t i = 0; i < x.labels.size(); ++i)
        if (std::find(ax.begin(), ax.end(), static_cast<int>(i) + 1) == ax.end())
            out.labels.push_back(x.labels[i]);
    for (std::size_t j = 0; j < y.labels.size(); ++j)
        if (std::find(ay.begin(), ay.end(), static_cast<int>(j) + 1) == ay.end())
            out.labels.push_back(y.labels[j]);
    return out;
}

} // namespace detail

/// Evaluate the full tensor from its cores by contracting G_1..G_N
/// sequentially over the shared rank modes.
template <class Scalar>
DenseTensor<Scalar> compose(const FctnCores<Scalar>& cores) {
    const int n = cores.order();
    detail::Labeled<Scalar> acc = detail::labeled_core(cores, 1);
    for (int k = 2; k <= n; ++k)
        acc = detail::contract_shared(acc, detail::labeled_core(cores, k));
    // surviving labels are exactly the data modes; sort them ascending
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const detail::AxisLabel& lab = acc.labels[static_cast<std::size_t>(d)];
        if (lab.is_edge) throw ShapeMismatch("compose: inconsistent rank modes");
        perm[static_cast<std::size_t>(lab.a - 1)] = d + 1;
    }
    return transpose(acc.tensor, perm);
}

/// Contract every core except G_k over all edges not incident to k, then
/// matricize to [prod_{j != k} R_{j,k}, prod_{j != k} I_j]. Rows run over the
/// rank modes in ascending j (smallest fastest); columns match unfold(., k).
/// unfold(G_k, k) times this matrix reproduces unfold(compose(cores), k).
template <class Scalar>
DenseTensor<Scalar> all_but_one(const FctnCores<Scalar>& cores, int k) {
    const int n = cores.order();
    if (k < 1 || k > n) throw InvalidMode("all_but_one: core index out of range");
    detail::Labeled<Scalar> acc;
    bool first = true;
    for (int j = 1; j <= n; ++j) {
        if (j == k) continue;
        if (first) {
            acc = detail::labeled_core(cores, j);
            first = false;
        } else {
            acc = detail::contract_shared(acc, detail::labeled_core(cores, j));
        }
    }
    // reorder to [edges (j,k) ascending j..., data modes ascending...]
    std::vector<int> perm;
    for (int j = 1; j <= n; ++j) {
        if (j == k) continue;
        const detail::AxisLabel want{true, std::min(j, k), std::max(j, k)};
        for (std::size_t d = 0; d < acc.labels.size(); ++d)
            if (acc.labels[d] == want) perm.push_back(static_cast<int>(d) + 1);
    }
    for (int j = 1; j <= n; ++j) {
        if (j == k) continue;
        const detail::AxisLabel want{false, j, 0};
        for (std::size_t d = 0; d < acc.labels.size(); ++d)
            if (acc.labels[d] == want) perm.push_back(static_cast<int>(d) + 1);
    }
    if (perm.size() != acc.labels.size())
        throw ShapeMismatch("all_but_one: inconsistent network labels");
    DenseTensor<Scalar> ordered = transpose(acc.tensor, perm);
    Index rows = 1;
    for (int j = 1; j <= n; ++j)
        if (j != k) rows *= cores.cores[static_cast<std::size_t>(k - 1)].dim(j);
    return reshape(ordered, Shape{rows, ordered.size() / rows});
}

/// Replace G_k with the exact least-squares minimizer of
/// || unfold(x, k) - unfold(G_k, k) * all_but_one(cores, k) ||_F,
/// solved via normal equations with an optional ridge on the diagonal.
/// Throws SingularSystem when ridge == 0 and the normal matrix is
/// numerically singular.
template <class Scalar>
void als_update_core(const DenseTensor<Scalar>& x, FctnCores<Scalar>& cores, int k, double ridge) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const DenseTensor<Scalar> m = all_but_one(cores, k);
    const DenseTensor<Scalar> xk = unfold(x, k);
    Eigen::Map<const Matrix> M(m.data().data(), m.dim(1), m.dim(2));
    Eigen::Map<const Matrix> X(xk.data().data(), xk.dim(1), xk.dim(2));

    Matrix gram = M * M.transpose();
    gram.diagonal().array() += static_cast<Scalar>(ridge);
    const Matrix rhs = M * X.transpose(); // [R, I_k]

    Eigen::LDLT<Matrix> ldlt(gram);
    if (ridge == 0.0) {
        const auto d = ldlt.vectorD();
        const Scalar dmax = d.cwiseAbs().maxCoeff();
        if (!(dmax > Scalar(0)) ||
            d.cwiseAbs().minCoeff() <= dmax * std::numeric_limits<Scalar>::epsilon() *
                                           static_cast<Scalar>(gram.rows()))
            throw SingularSystem("als_update_core: singular normal matrix at ridge 0");
    }
    const Matrix g_unf_t = ldlt.solve(rhs); // [R, I_k] = G_unf^T

    typename DenseTensor<Scalar>::Vector flat(g_unf_t.size());
    Eigen::Map<Matrix>(flat.data(), g_unf_t.cols(), g_unf_t.rows()) = g_unf_t.transpose();
    const DenseTensor<Scalar> g_unf(Shape{g_unf_t.cols(), g_unf_t.rows()}, std::move(flat));
    cores.cores[static_cast<std::size_t>(k - 1)] =
        refold(g_unf, k, cores.cores[static_cast<std::size_t>(k - 1)].shape());
}

/// Rescale every core to the geometric-mean norm; the composed tensor is
/// unchanged. No-op if any core has zero norm.
template <class Scalar>
void balance_core_norms(FctnCores<Scalar>& cores) {
    const int n = cores.order();
    std::vector<Scalar> norms;
    norms.reserve(static_cast<std::size_t>(n));
    Scalar log_sum = Scalar(0);
    for (const auto& c : cores.cores) {
        Scalar sq = Scalar(0);
        for (Index i = 0; i < c.size(); ++i) sq += c[i] * c[i];
        const Scalar norm = std::sqrt(sq);
        if (!(norm > Scalar(0))) return;
        norms.push_back(norm);
        log_sum += std::log(norm);
    }
    const Scalar target = std::exp(log_sum / static_cast<Scalar>(n));
    for (int k = 0; k < n; ++k) {
        const Scalar s = target / norms[static_cast<std::size_t>(k)];
        auto& c = cores.cores[static_cast<std::size_t>(k)];
        for (Index i = 0; i < c.size(); ++i) c[i] *= s;
    }
}

template <class Scalar>
struct DecomposeResult {
    FctnCores<Scalar> cores;
    Scalar rel_error = Scalar(0);
    int sweeps_used = 0;
    std::vector<Scalar> sweep_errors; // per-sweep relative error of the returned run
};

/// Fit an FCTN to x at the given ranks by alternating least squares. Runs
/// `restarts` seeded runs (seed, seed+1, ...) and returns the best. Within a
/// run, sweeps stop once the error change drops below rel_tol (relative to
/// max(1, previous error)) or max_sweeps is hit. On SingularSystem the
/// offending update retries with ridge escalated x100 from 1e-10 up to 1e-4.
template <class Scalar>
DecomposeResult<Scalar> decompose(const DenseTensor<Scalar>& x, const RankAssignment& ranks,
                                  const AlsOptions& opts) {
    if (frobenius_norm(x) == Scalar(0))
        throw DegenerateReference("decompose: target has zero norm");
    const int n = x.order();

    DecomposeResult<Scalar> best;
    bool have_best = false;
    const int anneal_end =
        (opts.ridge_init > 0.0)
            ? (opts.anneal_sweeps >= 0 ? opts.anneal_sweeps : opts.max_sweeps * 3 / 4)
            : 0;
    for (int restart = 0; restart < opts.restarts; ++restart) {
        DecomposeResult<Scalar> run;
        run.cores = init_cores<Scalar>(x.shape(), ranks, opts.seed + static_cast<std::uint64_t>(restart));
        Scalar err_prev = std::numeric_limits<Scalar>::infinity();
        double annealed = opts.ridge_init;
        for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
            const bool annealing = sweep <= anneal_end;
            const double sweep_ridge = annealing ? std::max(annealed, opts.ridge) : opts.ridge;
            FctnCores<Scalar> before;
            if (opts.line_search) before = run.cores;
            for (int k = 1; k <= n; ++k) {
                double ridge = sweep_ridge;
                for (;;) {
                    try {
                        als_update_core(x, run.cores, k, ridge);
                        break;
                    } catch (const SingularSystem&) {
                        ridge = (ridge <= 0.0) ? 1e-10 : ridge * 100.0;
                        if (ridge > 1e-4) throw;
                    }
                }
            }
            Scalar err = relative_error(x, compose(run.cores));
            if (opts.line_search) {
                for (const double t : {1.8, 3.0, 5.0}) {
                    FctnCores<Scalar> cand = before;
                    for (int k = 0; k < n; ++k) {
                        auto& cc = cand.cores[static_cast<std::size_t>(k)];
                        const auto& uc = run.cores.cores[static_cast<std::size_t>(k)];
                        for (Index i = 0; i < cc.size(); ++i)
                            cc[i] += static_cast<Scalar>(t) * (uc[i] - cc[i]);
                    }
                    const Scalar e = relative_error(x, compose(cand));
                    if (e < err) {
                        run.cores = std::move(cand);
                        err = e;
                    }
                }
            }
            if (opts.balance_cores) balance_core_norms(run.cores);
            run.sweep_errors.push_back(err);
            run.sweeps_used = sweep;
            run.rel_error = err;
            if (!annealing && std::isfinite(err_prev) &&
                std::abs(err_prev - err) <= opts.rel_tol * std::max(Scalar(1), err_prev))
                break;
            err_prev = err;
            annealed *= opts.ridge_decay;
        }
        if (!have_best || run.rel_error < best.rel_error) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

} // namespace fctn
