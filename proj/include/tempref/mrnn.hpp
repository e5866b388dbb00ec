/*
 Copyright 2026 the tempref authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tempref/core.hpp"

namespace tempref::mrnn {

struct MrnnConfig {
    int m = 4;
    int horizon = 20;       // T
    int gamma = 4;
    int hidden_size = 16;   // s
    int class_count = 2;    // H
    int q_hidden = 8;       // hidden width of the discount gate
    int epochs = 200;
    double learning_rate = 1e-2;
    int batch_size = 32;
    std::uint64_t seed = 0;
    int validation_patience = 20;
};

/// Weight tensors are stored raw; the ReLU mask phi is applied at use so the
/// effective weights on every path from inputs to U are nonnegative and the
/// network is monotone by construction. Gate biases are unconstrained (they do
/// not affect monotonicity).
struct MrnnParams {
    // Per criterion j:
    std::vector<Eigen::MatrixXd> w_v;   // s x gamma, masked
    std::vector<Eigen::MatrixXd> w_h;   // s x s, masked
    std::vector<Eigen::VectorXd> b;     // s, masked
    std::vector<Eigen::MatrixXd> w_f;   // T x s (row per timestamp), masked
    // Discount gate Q_j: sigmoid(q2'tanh(q1 h + q1b) + q2b), weights masked.
    std::vector<Eigen::MatrixXd> q1;    // q_hidden x s
    std::vector<Eigen::VectorXd> q1b;   // q_hidden
    std::vector<Eigen::VectorXd> q2;    // q_hidden
    std::vector<double> q2b;            // scalar per criterion
    // theta_1 = base; theta_{h+1} = theta_h + softplus(incr) + 1e-4.
    double threshold_base = 0.0;
    std::vector<double> threshold_incr;  // H-2 raw increments

    static MrnnParams init(const MrnnConfig& config, std::uint64_t seed);
    static MrnnParams zeros(const MrnnConfig& config);

    std::vector<double> materialized_thresholds() const;
    ClassStructure class_structure() const;

    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
};

struct ForwardTrace {
    std::vector<std::vector<Eigen::VectorXd>> hidden;  // [T][m] of s
    std::vector<std::vector<double>> sub_marginal;     // [T][m]
    std::vector<std::vector<double>> discount;         // [T-1][m], tau_j^t from h^t
    std::vector<std::vector<double>> marginal;         // [T][m]
    double comprehensive = 0.0;
};

ForwardTrace forward(const MrnnParams& params, const MrnnConfig& config,
                     const EncodedAlternative& encoded);

/// p_h = sigmoid(theta_h - U) - sigmoid(theta_{h-1} - U), with sentinel limits
/// 1 and 0. Sums to 1 exactly.
std::vector<double> class_probabilities(double u_value,
                                        const std::vector<double>& thresholds);

struct LossResult {
    std::vector<double> per_sample;
    double mean = 0.0;
};

/// Mean negative log-likelihood of the true classes; probabilities clamped at
/// 1e-12 before the log.
LossResult ordinal_loss(const std::vector<double>& u_values,
                        const std::vector<int>& labels,
                        const std::vector<double>& thresholds);

struct GradientResult {
    MrnnParams grad;  // same shapes as the parameters
    double mean_loss = 0.0;
};

/// Exact reverse-mode gradients of the mean ordinal loss over the batch,
/// including through the ReLU masks (subgradient 0 at 0) and the threshold
/// parameterization.
GradientResult gradients(const MrnnParams& params, const MrnnConfig& config,
                         const std::vector<const EncodedAlternative*>& batch);

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    int best_epoch = -1;
    double best_val_loss = 0.0;
    std::vector<double> thresholds;  // materialized, from the best parameters
    bool diverged = false;
};

/// Mini-batch gradient descent with momentum, gradient-norm clipping, and
/// early stopping on validation loss; returns the best-validation parameters.
std::pair<MrnnParams, TrainReport> train(
    const std::vector<EncodedAlternative>& train_set,
    const std::vector<EncodedAlternative>& validation_set,
    const MrnnConfig& config);

/// Threshold comparison against the materialized thresholds (not probability
/// argmax).
int predict(const MrnnParams& params, const MrnnConfig& config, const Grid& grid,
            const Alternative& alt);

struct MarginalRow {
    int criterion;    // 1-based
    int timestamp;    // 1-based
    int point_index;  // 0..gamma
    double g_value;
    double sub_marginal;
};

struct DiscountRow {
    std::string sample_id;
    int criterion;  // 1-based
    int timestamp;  // 1-based, 1..T-1
    double tau;
};

struct MarginalTable {
    std::vector<MarginalRow> marginals;
    std::vector<DiscountRow> discounts;
};

/// Sub-marginal values at every characteristic point from probe inputs that
/// vary one (j,t) cell while holding the rest at the sample mean, plus
/// per-sample discount traces.
MarginalTable export_marginals(const MrnnParams& params, const MrnnConfig& config,
                               const Grid& grid,
                               const std::vector<EncodedAlternative>& sample);

}  // namespace tempref::mrnn
