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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tempref/types.hpp"

namespace tempref::dgp {

enum class Kind { Basic, NonMarkovian, NonMonotonic, NonIndependent };

Kind kind_from_string(const std::string& name);
std::string kind_to_string(Kind kind);

struct DgpConfig {
    Kind kind = Kind::Basic;
    int n_samples = 3000;
    int m = 4;
    int horizon = 20;  // T
    std::uint64_t seed = 0;
};

/// sin(omega_i * pi * t) for omega = 0.10, 0.15, ..., 0.50.
struct BasisSet {
    std::vector<double> omegas;

    static BasisSet standard();
    double evaluate(const std::vector<double>& beta, int t) const;  // t 1-based
};

struct SampleTruth {
    std::vector<std::vector<double>> beta;          // [m][9]
    std::vector<std::vector<double>> sub_marginal;  // [channels][T]
    std::vector<std::vector<double>> discount;      // [channels][T-1]
    std::vector<std::vector<double>> marginal;      // [channels][T]
    double comprehensive = 0.0;                     // sigmoid(sum of u^T)
    int label = 1;                                  // 2 = positive
};

struct GroundTruth {
    std::vector<SampleTruth> samples;
};

/// Draws beta ~ Dirichlet(1,...,1) and evaluates the mixed basis at t = 1..T.
std::vector<double> gen_series(const BasisSet& basis, int horizon,
                               std::mt19937_64& rng,
                               std::vector<double>* beta_out = nullptr);

/// True sub-marginals per kind; NonIndependent pools the four series into two
/// channels, so the result has 2 rows instead of m.
std::vector<std::vector<double>> true_sub_marginal(
    Kind kind, const std::vector<std::vector<double>>& g);

/// u^t = tau_{t-1} u^{t-1} + (1 - tau_{t-1}) f^t with tau_{t-1} =
/// sigmoid(u^{t-2}) and u^0 = u^{-1} = 0, run per channel.
void true_marginal_recurrence(const std::vector<std::vector<double>>& f,
                              std::vector<std::vector<double>>& u,
                              std::vector<std::vector<double>>& tau);

/// Deterministic for a fixed seed; each sample uses a seed derived from
/// (config.seed, sample index). Labels: 2 iff sigmoid(sum u^T) >= 0.5.
std::pair<Dataset, GroundTruth> generate(const DgpConfig& config);

}  // namespace tempref::dgp
