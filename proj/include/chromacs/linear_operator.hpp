#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace chromacs {

/// Real linear map R^cols -> R^rows with its exact adjoint.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;

    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(rows());
        apply(x, y);
        return y;
    }
    std::vector<double> apply_adjoint(std::span<const double> y) const {
        std::vector<double> x(cols());
        apply_adjoint(y, x);
        return x;
    }
};

/// scale * I
class ScaledIdentity final : public LinearOperator {
public:
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;
    explicit ScaledIdentity(std::size_t n, double scale = 1.0) : n_(n), scale_(scale) {}

    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return n_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

private:
    std::size_t n_;
    double scale_;
};

/// Row-major dense matrix.
class DenseOperator final : public LinearOperator {
public:
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;
    DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const override { return rows_; }
    std::size_t cols() const override { return cols_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

    const std::vector<double>& data() const noexcept { return data_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// outer * inner
class ComposedOperator final : public LinearOperator {
public:
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;
    ComposedOperator(std::shared_ptr<const LinearOperator> outer,
                     std::shared_ptr<const LinearOperator> inner);

    std::size_t rows() const override { return outer_->rows(); }
    std::size_t cols() const override { return inner_->cols(); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

private:
    std::shared_ptr<const LinearOperator> outer_;
    std::shared_ptr<const LinearOperator> inner_;
};

/// Column j is op.apply(e_j). TooLarge when rows*cols exceeds max_entries.
DenseOperator to_dense(const LinearOperator& op, std::size_t max_entries = std::size_t{1} << 26);

/// Row i is op.apply_adjoint(e_i), i.e. the matrix of the adjoint transposed back.
DenseOperator to_dense_from_adjoint(const LinearOperator& op,
                                    std::size_t max_entries = std::size_t{1} << 26);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace chromacs
