#include "chromacs/linear_operator.hpp"

#include <algorithm>
#include <cmath>

#include "chromacs/errors.hpp"

namespace chromacs {

namespace {

void check_sizes(const LinearOperator& op, std::size_t in, std::size_t out, bool adjoint) {
    const std::size_t want_in = adjoint ? op.rows() : op.cols();
    const std::size_t want_out = adjoint ? op.cols() : op.rows();
    require(in == want_in && out == want_out, Errc::DimensionMismatch,
            "operator expects " + std::to_string(want_in) + " -> " + std::to_string(want_out) +
                ", got " + std::to_string(in) + " -> " + std::to_string(out));
}

} // namespace

void ScaledIdentity::apply(std::span<const double> x, std::span<double> y) const {
    check_sizes(*this, x.size(), y.size(), false);
    for (std::size_t i = 0; i < n_; ++i) y[i] = scale_ * x[i];
}

void ScaledIdentity::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    check_sizes(*this, y.size(), x.size(), true);
    for (std::size_t i = 0; i < n_; ++i) x[i] = scale_ * y[i];
}

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, Errc::DimensionMismatch, "dense matrix storage size mismatch");
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
    check_sizes(*this, x.size(), y.size(), false);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        const double* row = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void DenseOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    check_sizes(*this, y.size(), x.size(), true);
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* row = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) x[j] += row[j] * y[i];
    }
}

ComposedOperator::ComposedOperator(std::shared_ptr<const LinearOperator> outer,
                                   std::shared_ptr<const LinearOperator> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
    require(outer_ && inner_, Errc::InvalidArgument, "null operator");
    require(outer_->cols() == inner_->rows(), Errc::DimensionMismatch,
            "cannot compose operators with mismatched inner dimension");
}

void ComposedOperator::apply(std::span<const double> x, std::span<double> y) const {
    std::vector<double> mid(inner_->rows());
    inner_->apply(x, mid);
    outer_->apply(mid, y);
}

void ComposedOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
    std::vector<double> mid(outer_->cols());
    outer_->apply_adjoint(y, mid);
    inner_->apply_adjoint(mid, x);
}

DenseOperator to_dense(const LinearOperator& op, std::size_t max_entries) {
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    require(n == 0 || m <= max_entries / n, Errc::TooLarge, "dense matrix would be too large");
    std::vector<double> data(m * n);
    std::vector<double> e(n, 0.0);
    std::vector<double> col(m);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply(e, col);
        e[j] = 0.0;
        for (std::size_t i = 0; i < m; ++i) data[i * n + j] = col[i];
    }
    return DenseOperator(m, n, std::move(data));
}

DenseOperator to_dense_from_adjoint(const LinearOperator& op, std::size_t max_entries) {
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    require(n == 0 || m <= max_entries / n, Errc::TooLarge, "dense matrix would be too large");
    std::vector<double> data(m * n);
    std::vector<double> e(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        e[i] = 1.0;
        op.apply_adjoint(e, std::span<double>(data).subspan(i * n, n));
        e[i] = 0.0;
    }
    return DenseOperator(m, n, std::move(data));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), Errc::DimensionMismatch, "dot of unequal lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace chromacs
