#ifndef RPCL_RPL_HPP
#define RPCL_RPL_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "rpcl/numerics.hpp"

// Random Projection Layer: an ordered list of accepted random basis blocks.
// Each basis is a hidden unit (w_i, b_i) whose sigmoid activation on the data
// contributes one feature column; the layer maps Z -> g(ZW + 1 b^T).

namespace rpcl::rpl {

using numerics::DenseMatrix;
using numerics::index_t;

enum class Activation : std::uint32_t { Sigmoid = 0 };

// One block of s hidden units sampled at a common scale xi. Column i of
// input_weights is w_i; biases[i] is b_i.
class BasisBlock {
public:
    BasisBlock(DenseMatrix input_weights, std::vector<double> biases, double xi);

    const DenseMatrix& input_weights() const { return input_weights_; }
    const std::vector<double>& biases() const { return biases_; }
    double xi() const { return xi_; }
    index_t feature_dim() const { return input_weights_.rows(); }
    index_t units() const { return input_weights_.cols(); }

private:
    DenseMatrix input_weights_;  // d x s
    std::vector<double> biases_;  // s
    double xi_;
};

class RplModel {
public:
    explicit RplModel(index_t feature_dim, Activation activation = Activation::Sigmoid);

    void append(BasisBlock block);

    index_t feature_dim() const { return feature_dim_; }
    Activation activation() const { return activation_; }
    const std::vector<BasisBlock>& blocks() const { return blocks_; }
    // L*: total accepted hidden units, in acceptance order.
    index_t total_units() const { return total_units_; }

    // All input weight columns side by side, d x L*.
    DenseMatrix stacked_weights() const;

private:
    index_t feature_dim_;
    Activation activation_;
    std::vector<BasisBlock> blocks_;
    index_t total_units_ = 0;
};

// Discrete exploration set {xi_min, xi_min + delta, ..., <= xi_max}, walked
// upward when no candidate block is accepted at the current scale.
class XiSchedule {
public:
    XiSchedule(double xi_min, double delta_xi, double xi_max);

    double xi_min() const { return xi_min_; }
    double delta_xi() const { return delta_xi_; }
    double xi_max() const { return xi_max_; }
    const std::vector<double>& values() const { return values_; }

private:
    double xi_min_, delta_xi_, xi_max_;
    std::vector<double> values_;
};

// Deterministic Gaussian stream: mt19937_64 (whose 64-bit outputs the
// standard pins down exactly) plus the Marsaglia polar transform.
// std::normal_distribution is implementation-defined and deliberately
// avoided so a seed replays the same layer everywhere.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double next(double stddev);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;

    double next_unit_();  // uniform in [-1, 1)
};

// Draws a d x s block with all weights and biases i.i.d. N(0, xi^2), advancing
// the sampler. Weight draw order is column-major (unit by unit), biases last.
BasisBlock sample_block(GaussianSampler& rng, index_t d, index_t s, double xi);

// Entry (n, i) = sigmoid(<z_n, w_i> + b_i). Outputs are nudged off exact 0/1:
// sigmoid saturates to those values in double precision beyond |x| ~ 37 and
// downstream contracts require the open interval.
DenseMatrix activate(const DenseMatrix& z, const BasisBlock& block);

// Horizontal concatenation of per-block activations in acceptance order;
// N x 0 for an empty model.
DenseMatrix project(const DenseMatrix& z, const RplModel& model);

}  // namespace rpcl::rpl

#endif  // RPCL_RPL_HPP
