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

#include <array>
#include <cstdint>
#include <vector>

#include "tempref/model.hpp"

namespace tempref::eval {

struct ConfusionMatrix {
    std::vector<std::vector<long long>> counts;  // counts[i][j]: true i+1, pred j+1

    int class_count() const { return static_cast<int>(counts.size()); }
    long long total() const;
};

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& pred, int class_count);

struct MetricsReport {
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f_score;
    double macro_f = 0.0;
    double accuracy = 0.0;
    double beta = 1.0;
};

/// F_i = (1 + beta^2) * recall_i * precision_i / (beta^2 * recall_i +
/// precision_i); zero-denominator cells yield 0.
MetricsReport metrics(const ConfusionMatrix& cm, double beta = 1.0);

struct FoldSplit {
    struct Fold {
        std::vector<std::size_t> train;
        std::vector<std::size_t> validation;
        std::vector<std::size_t> test;
    };
    std::vector<Fold> folds;
};

/// Seeded shuffle once, then k rotations of contiguous test/validation blocks
/// starting at offset floor(f*n/k); the remainder is the training part.
FoldSplit kfold_split(std::size_t n, int k, std::array<double, 3> ratios,
                      std::uint64_t seed);

/// Hyperparameters for one trained model of either kind.
struct ModelOptions {
    std::string kind = "tpl";  // "tpl" | "mrnn"
    int gamma = 4;
    // tpl
    double tau = 0.9;
    double c_param = 1.0;
    std::string solver = "dual";  // "dual" | "primal"
    std::optional<std::size_t> pair_cap = 20000;
    // mrnn (m, horizon, gamma, class_count are filled from the data)
    mrnn::MrnnConfig mrnn;
};

/// Builds the grid on the training subset, trains one model, and selects with
/// the validation subset (mRNN early stopping; no-op for TPL).
Model train_model(const Dataset& data, const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& validation_idx,
                  const ModelOptions& options, std::uint64_t seed);

struct FoldOutcome {
    MetricsReport metrics;
    Model model;
    double train_seconds = 0.0;
    double eval_seconds = 0.0;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // unbiased, n-1
};

struct ExperimentConfig {
    ModelOptions model;
    int k = 5;
    std::uint64_t seed = 0;
    double beta = 1.0;
    int jobs = 1;
};

struct ExperimentReport {
    std::vector<FoldOutcome> folds;
    Aggregate accuracy;
    Aggregate macro_f;
    std::vector<Aggregate> per_class_f;
    double total_seconds = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

/// Per fold: train on the train part, select on validation, score on test.
ExperimentReport run_experiment(const Dataset& data,
                                const ExperimentConfig& config);

}  // namespace tempref::eval
