#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fctn/errors.hpp"

namespace fctn {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
    Index n = 1;
    for (Index d : shape) n *= d;
    return n;
}

/// Strides for the fixed linearization: the first mode varies fastest.
inline Shape shape_strides(const Shape& shape) {
    Shape strides(shape.size());
    Index s = 1;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        strides[d] = s;
        s *= shape[d];
    }
    return strides;
}

/// Dense N-way array with an explicit shape. Data is stored flat with the
/// first mode varying fastest (the natural generalization of column-major).
/// Order-0 tensors (empty shape, one entry) are legal and act as scalars.
/// Tensors are immutable values once built; all free functions below are pure.
template <class Scalar>
class DenseTensor {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    DenseTensor() : shape_{}, data_(Vector::Zero(1)) {}

    explicit DenseTensor(Shape shape) : shape_(std::move(shape)) {
        check_shape();
        data_ = Vector::Zero(shape_size(shape_));
    }

    DenseTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape();
        if (data_.size() != shape_size(shape_))
            throw ShapeMismatch("data length does not match shape product");
    }

    static DenseTensor from_scalar(Scalar v) {
        DenseTensor t;
        t.data_[0] = v;
        return t;
    }

    int order() const { return static_cast<int>(shape_.size()); }
    const Shape& shape() const { return shape_; }
    /// Size of mode `k`, 1-based.
    Index dim(int k) const { return shape_[static_cast<std::size_t>(k - 1)]; }
    Index size() const { return data_.size(); }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    Scalar operator[](Index linear) const { return data_[linear]; }
    Scalar& operator[](Index linear) { return data_[linear]; }

    /// Element access by 0-based multi-index.
    Scalar at(const Shape& idx) const { return data_[linear_index(idx)]; }
    Scalar& at(const Shape& idx) { return data_[linear_index(idx)]; }

    Index linear_index(const Shape& idx) const {
        Index lin = 0, stride = 1;
        for (std::size_t d = 0; d < shape_.size(); ++d) {
            lin += idx[d] * stride;
            stride *= shape_[d];
        }
        return lin;
    }

private:
    void check_shape() const {
        for (Index d : shape_)
            if (d < 1) throw ShapeMismatch("mode sizes must be >= 1");
    }

    Shape shape_;
    Vector data_;
};

using TensorD = DenseTensor<double>;

template <class Scalar>
bool same_shape(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b) {
    return a.shape() == b.shape();
}

/// Permute modes: result mode d is input mode perm[d] (1-based entries).
template <class Scalar>
DenseTensor<Scalar> transpose(const DenseTensor<Scalar>& t, const std::vector<int>& perm) {
    const int n = t.order();
    if (static_cast<int>(perm.size()) != n) throw InvalidAxes("permutation length mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int p : perm) {
        if (p < 1 || p > n || seen[static_cast<std::size_t>(p - 1)])
            throw InvalidAxes("invalid mode permutation");
        seen[static_cast<std::size_t>(p - 1)] = true;
    }

    const Shape in_strides = shape_strides(t.shape());
    Shape out_shape(perm.size());
    Shape out_in_stride(perm.size());
    for (std::size_t d = 0; d < perm.size(); ++d) {
        out_shape[d] = t.shape()[static_cast<std::size_t>(perm[d] - 1)];
        out_in_stride[d] = in_strides[static_cast<std::size_t>(perm[d] - 1)];
    }

    DenseTensor<Scalar> out(out_shape);
    Shape idx(out_shape.size(), 0);
    Index in_lin = 0;
    for (Index lin = 0; lin < out.size(); ++lin) {
        out[lin] = t[in_lin];
        for (std::size_t d = 0; d < out_shape.size(); ++d) {
            ++idx[d];
            in_lin += out_in_stride[d];
            if (idx[d] < out_shape[d]) break;
            in_lin -= out_in_stride[d] * out_shape[d];
            idx[d] = 0;
        }
    }
    return out;
}

/// Reinterpret the flat data with a new shape of equal total size.
template <class Scalar>
DenseTensor<Scalar> reshape(const DenseTensor<Scalar>& t, Shape new_shape) {
    if (shape_size(new_shape) != t.size())
        throw ShapeMismatch("reshape changes total size");
    return DenseTensor<Scalar>(std::move(new_shape), t.data());
}

/// Mode-k matricization: rows are mode k, columns run over the remaining
/// modes in ascending mode order with the smallest remaining mode fastest.
template <class Scalar>
DenseTensor<Scalar> unfold(const DenseTensor<Scalar>& t, int mode) {
    const int n = t.order();
    if (mode < 1 || mode > n) throw InvalidMode("unfold: mode out of range");
    std::vector<int> perm;
    perm.reserve(static_cast<std::size_t>(n));
    perm.push_back(mode);
    for (int d = 1; d <= n; ++d)
        if (d != mode) perm.push_back(d);
    DenseTensor<Scalar> p = transpose(t, perm);
    return reshape(p, Shape{t.dim(mode), t.size() / t.dim(mode)});
}

/// Inverse of unfold: rebuild the full tensor of `shape` from its mode-k
/// matricization.
template <class Scalar>
DenseTensor<Scalar> refold(const DenseTensor<Scalar>& m, int mode, const Shape& shape) {
    const int n = static_cast<int>(shape.size());
    if (mode < 1 || mode > n) throw InvalidMode("refold: mode out of range");
    if (m.order() != 2 || m.dim(1) != shape[static_cast<std::size_t>(mode - 1)] ||
        m.size() != shape_size(shape))
        throw ShapeMismatch("refold: matrix incompatible with target shape");
    Shape perm_shape;
    perm_shape.push_back(shape[static_cast<std::size_t>(mode - 1)]);
    for (int d = 1; d <= n; ++d)
        if (d != mode) perm_shape.push_back(shape[static_cast<std::size_t>(d - 1)]);
    DenseTensor<Scalar> p = reshape(m, perm_shape);
    // inverse permutation of [mode, others ascending]
    std::vector<int> inv(static_cast<std::size_t>(n));
    inv[static_cast<std::size_t>(mode - 1)] = 1;
    int pos = 2;
    for (int d = 1; d <= n; ++d)
        if (d != mode) inv[static_cast<std::size_t>(d - 1)] = pos++;
    return transpose(p, inv);
}

/// General pairwise contraction over matched axis lists (1-based).
/// Result modes are the remaining modes of `a` in ascending order followed by
/// the remaining modes of `b` in ascending order. Contracting over no axes
/// yields the outer product; contracting over all axes yields an order-0
/// scalar tensor.
template <class Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar>& a, const std::vector<int>& axes_a,
                             const DenseTensor<Scalar>& b, const std::vector<int>& axes_b) {
    if (axes_a.size() != axes_b.size())
        throw InvalidAxes("contract: axis lists differ in length");
    auto check_axes = [](const DenseTensor<Scalar>& t, const std::vector<int>& axes) {
        std::vector<bool> seen(static_cast<std::size_t>(t.order()), false);
        for (int ax : axes) {
            if (ax < 1 || ax > t.order()) throw InvalidAxes("contract: axis out of range");
            if (seen[static_cast<std::size_t>(ax - 1)]) throw InvalidAxes("contract: repeated axis");
            seen[static_cast<std::size_t>(ax - 1)] = true;
        }
    };
    check_axes(a, axes_a);
    check_axes(b, axes_b);
    for (std::size_t i = 0; i < axes_a.size(); ++i)
        if (a.dim(axes_a[i]) != b.dim(axes_b[i]))
            throw ShapeMismatch("contract: size mismatch on matched axes");

    auto free_modes = [](const DenseTensor<Scalar>& t, const std::vector<int>& axes) {
        std::vector<int> free;
        for (int d = 1; d <= t.order(); ++d)
            if (std::find(axes.begin(), axes.end(), d) == axes.end()) free.push_back(d);
        return free;
    };
    const std::vector<int> free_a = free_modes(a, axes_a);
    const std::vector<int> free_b = free_modes(b, axes_b);

    // a -> [free_a..., axes_a...], b -> [axes_b..., free_b...]; both flatten
    // the contracted block with the first listed axis fastest, so the two
    // matrix inner dimensions line up.
    std::vector<int> perm_a = free_a;
    perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
    std::vector<int> perm_b = axes_b;
    perm_b.insert(perm_b.end(), free_b.begin(), free_b.end());
    DenseTensor<Scalar> ap = transpose(a, perm_a);
    DenseTensor<Scalar> bp = transpose(b, perm_b);

    Index rows = 1, inner = 1, cols = 1;
    for (int d : free_a) rows *= a.dim(d);
    for (int d : axes_a) inner *= a.dim(d);
    for (int d : free_b) cols *= b.dim(d);

    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::Map<const Matrix> ma(ap.data().data(), rows, inner);
    Eigen::Map<const Matrix> mb(bp.data().data(), inner, cols);
    typename DenseTensor<Scalar>::Vector out(rows * cols);
    Eigen::Map<Matrix>(out.data(), rows, cols).noalias() = ma * mb;

    Shape out_shape;
    for (int d : free_a) out_shape.push_back(a.dim(d));
    for (int d : free_b) out_shape.push_back(b.dim(d));
    return DenseTensor<Scalar>(std::move(out_shape), std::move(out));
}

template <class Scalar>
Scalar frobenius_norm(const DenseTensor<Scalar>& t) {
    return t.data().norm();
}

/// || x - approx ||_F / || x ||_F
template <class Scalar>
Scalar relative_error(const DenseTensor<Scalar>& x, const DenseTensor<Scalar>& approx) {
    if (!same_shape(x, approx)) throw ShapeMismatch("relative_error: shapes differ");
    const Scalar denom = frobenius_norm(x);
    if (denom == Scalar(0)) throw DegenerateReference("relative_error: reference has zero norm");
    return (x.data() - approx.data()).norm() / denom;
}

} // namespace fctn
