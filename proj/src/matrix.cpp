#include "sgnet/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/error.hpp"
#include "sgnet/kernels.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::random_normal(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
    Matrix m(rows, cols);
    for (auto& x : m.data_) x = stddev * rng.normal();
    return m;
}

Matrix Matrix::random_uniform(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
    Matrix m(rows, cols);
    for (auto& x : m.data_) x = rng.uniform(lo, hi);
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double Matrix::scalar_value() const {
    if (rows_ != 1 || cols_ != 1)
        throw DimensionError("Matrix::scalar_value: expected 1x1, got " + shape_str());
    return data_[0];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + a.shape_str() + " x " + b.shape_str());
    Matrix c(a.rows(), b.cols());
    kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
    return c;
}

namespace {
void require_same(const char* op, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
}
}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same("add", a, b);
    Matrix c(a.rows(), a.cols());
    kernels::active().add(a.size(), a.data(), b.data(), c.data());
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same("subtract", a, b);
    Matrix c(a.rows(), a.cols());
    kernels::active().sub(a.size(), a.data(), b.data(), c.data());
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    kernels::active().scale(a.size(), s, a.data(), c.data());
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same("hadamard", a, b);
    Matrix c(a.rows(), a.cols());
    kernels::active().mul(a.size(), a.data(), b.data(), c.data());
    return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same("max_abs_diff", a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double frobenius_norm(const Matrix& a) {
    return std::sqrt(kernels::active().dot(a.size(), a.data(), a.data()));
}

}  // namespace sgnet
