#include "fanfold/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "fanfold/errors.hpp"

namespace fanfold {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ContractError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ContractError("ragged rows in Tensor::from_rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(r, c, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw ContractError("matmul shape mismatch: " + a.shape_string() + " * " + b.shape_string());
    }
    Tensor out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = po + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            if (av == 0.0) continue;
            const double* brow = pb + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) {
        throw ContractError("matmul_nt shape mismatch: " + a.shape_string() + " * " + b.shape_string() + "^T");
    }
    Tensor out(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ar = a.data().data() + i * k;
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* br = b.data().data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
            out(i, j) = s;
        }
    }
    return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) {
        throw ContractError("matmul_tn shape mismatch: " + a.shape_string() + "^T * " + b.shape_string());
    }
    Tensor out(a.cols(), b.cols());
    const std::size_t m = b.cols();
    for (std::size_t p = 0; p < a.rows(); ++p) {
        const double* ar = a.data().data() + p * a.cols();
        const double* br = b.data().data() + p * m;
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double av = ar[i];
            if (av == 0.0) continue;
            double* orow = out.data().data() + i * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * br[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor hconcat(const Tensor& left, const Tensor& right) {
    if (left.rows() != right.rows()) {
        throw ContractError("hconcat row mismatch: " + left.shape_string() + " | " + right.shape_string());
    }
    Tensor out(left.rows(), left.cols() + right.cols());
    for (std::size_t i = 0; i < left.rows(); ++i) {
        auto dst = out.row(i);
        std::copy(left.row(i).begin(), left.row(i).end(), dst.begin());
        std::copy(right.row(i).begin(), right.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(left.cols()));
    }
    return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols()) {
        throw ContractError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                            a.shape_string());
    }
    Tensor out(a.rows(), end - begin);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = a(i, j);
    return out;
}

Tensor select_rows(const Tensor& a, std::span<const std::size_t> order) {
    Tensor out(order.size(), a.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] >= a.rows()) throw ContractError("select_rows index out of range");
        std::copy(a.row(order[i]).begin(), a.row(order[i]).end(), out.row(i).begin());
    }
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ContractError("max_abs_diff shape mismatch: " + a.shape_string() + " vs " + b.shape_string());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double frobenius_sq(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
}

}  // namespace fanfold
