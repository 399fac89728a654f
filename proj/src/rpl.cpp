#include "rpcl/rpl.hpp"

#include <cmath>
#include <sstream>

namespace rpcl::rpl {

BasisBlock::BasisBlock(DenseMatrix input_weights, std::vector<double> biases, double xi)
    : input_weights_(std::move(input_weights)), biases_(std::move(biases)), xi_(xi) {
    if (input_weights_.cols() == 0 || input_weights_.rows() == 0) {
        throw DimensionError("BasisBlock: needs d >= 1 and s >= 1");
    }
    if (biases_.size() != input_weights_.cols()) {
        throw DimensionError("BasisBlock: one bias per hidden unit");
    }
    if (!(xi_ > 0.0) || !std::isfinite(xi_)) {
        throw NumericError("BasisBlock: xi must be positive and finite");
    }
    numerics::require_finite(input_weights_, "BasisBlock weights");
    for (double b : biases_) {
        if (!std::isfinite(b)) throw NumericError("BasisBlock: non-finite bias");
    }
}

RplModel::RplModel(index_t feature_dim, Activation activation)
    : feature_dim_(feature_dim), activation_(activation) {
    if (feature_dim_ == 0) throw DimensionError("RplModel: feature_dim must be >= 1");
}

void RplModel::append(BasisBlock block) {
    if (block.feature_dim() != feature_dim_) {
        std::ostringstream msg;
        msg << "RplModel::append: block feature dim " << block.feature_dim()
            << " != model feature dim " << feature_dim_;
        throw DimensionError(msg.str());
    }
    total_units_ += block.units();
    blocks_.push_back(std::move(block));
}

DenseMatrix RplModel::stacked_weights() const {
    DenseMatrix out(feature_dim_, total_units_);
    index_t col = 0;
    for (const auto& block : blocks_) {
        for (index_t j = 0; j < block.units(); ++j, ++col)
            for (index_t i = 0; i < feature_dim_; ++i)
                out(i, col) = block.input_weights()(i, j);
    }
    return out;
}

XiSchedule::XiSchedule(double xi_min, double delta_xi, double xi_max)
    : xi_min_(xi_min), delta_xi_(delta_xi), xi_max_(xi_max) {
    if (!(xi_min > 0.0) || !(xi_max > 0.0) || !(delta_xi > 0.0)) {
        throw NumericError("XiSchedule: xi_min, delta_xi, xi_max must be positive");
    }
    if (xi_min > xi_max) throw NumericError("XiSchedule: xi_min > xi_max");
    // Absorb accumulated rounding so xi_max itself is always reachable.
    const double slack = 1e-9 * xi_max;
    for (index_t k = 0;; ++k) {
        const double xi = xi_min + static_cast<double>(k) * delta_xi;
        if (xi > xi_max + slack) break;
        values_.push_back(std::min(xi, xi_max));
    }
}

double GaussianSampler::next_unit_() {
    // 53-bit mantissa draw mapped onto [-1, 1).
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

double GaussianSampler::next(double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return spare_ * stddev;
    }
    double x, y, s;
    do {
        x = next_unit_();
        y = next_unit_();
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * f;
    has_spare_ = true;
    return x * f * stddev;
}

BasisBlock sample_block(GaussianSampler& rng, index_t d, index_t s, double xi) {
    if (d == 0 || s == 0) throw DimensionError("sample_block: needs d >= 1 and s >= 1");
    if (!(xi > 0.0)) throw NumericError("sample_block: xi must be positive");

    DenseMatrix weights(d, s);
    for (index_t j = 0; j < s; ++j)
        for (index_t i = 0; i < d; ++i) weights(i, j) = rng.next(xi);
    std::vector<double> biases(s);
    for (index_t j = 0; j < s; ++j) biases[j] = rng.next(xi);
    return BasisBlock(std::move(weights), std::move(biases), xi);
}

namespace {

double sigmoid_open(double x) {
    double v;
    if (x >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        v = e / (1.0 + e);
    }
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    if (v <= 0.0) v = std::nextafter(0.0, 1.0);
    return v;
}

}  // namespace

DenseMatrix activate(const DenseMatrix& z, const BasisBlock& block) {
    if (z.cols() != block.feature_dim()) {
        std::ostringstream msg;
        msg << "activate: Z has " << z.cols() << " features, block expects "
            << block.feature_dim();
        throw DimensionError(msg.str());
    }
    numerics::require_finite(z, "activate Z");

    DenseMatrix pre = z * block.input_weights();
    for (index_t i = 0; i < pre.rows(); ++i)
        for (index_t j = 0; j < pre.cols(); ++j)
            pre(i, j) = sigmoid_open(pre(i, j) + block.biases()[j]);
    return pre;
}

DenseMatrix project(const DenseMatrix& z, const RplModel& model) {
    if (z.cols() != model.feature_dim()) {
        std::ostringstream msg;
        msg << "project: Z has " << z.cols() << " features, model expects "
            << model.feature_dim();
        throw DimensionError(msg.str());
    }
    DenseMatrix out(z.rows(), model.total_units());
    index_t col = 0;
    for (const auto& block : model.blocks()) {
        const DenseMatrix h = activate(z, block);
        for (index_t i = 0; i < h.rows(); ++i)
            for (index_t j = 0; j < h.cols(); ++j) out(i, col + j) = h(i, j);
        col += block.units();
    }
    return out;
}

}  // namespace rpcl::rpl
