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
#include <optional>
#include <vector>

#include "tempref/core.hpp"

namespace tempref::tpl {

/// One preference pair: the discount-weighted difference v(a) - v(b) and its
/// direction label.
struct PairwiseSample {
    std::vector<double> v_diff;  // length m*T*gamma, Lambda-weighted
    int y = 1;                   // +1 or -1
};

struct TplModel {
    PiecewiseValueFunction pvf;
    DiscountSchedule schedule;
    ClassStructure classes;
    double c_param = 1.0;
    bool threshold_fallback = false;  // some boundary used the class-mean fallback
};

struct SolverReport {
    double objective = 0.0;  // primal objective 0.5*||u||^2 + C*sum(hinge)
    std::optional<std::vector<double>> dual_mu;
    std::optional<std::vector<double>> dual_slack;  // sigma = delta_f - sum y mu v
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

/// All ordered cross-class pairs (a better than b), y = +1, capped by uniform
/// subsampling that keeps at least one pair per adjacent class boundary.
std::vector<PairwiseSample> derive_pairs(
    const std::vector<EncodedAlternative>& encoded,
    const DiscountSchedule& schedule,
    std::optional<std::size_t> cap = 20000,
    std::uint64_t rng_seed = 0);

/// Minimizes 0.5*||u||^2 + C * sum_i max(0, 1 - y_i u'v_i) over u >= 0 by
/// projected Newton on a smoothed hinge with continuation.
std::pair<PiecewiseValueFunction, SolverReport> solve_primal(
    const std::vector<PairwiseSample>& pairs, double c_param, int m, int horizon,
    int gamma, double tol = 1e-6, int max_iter = 50000);

/// Solves P1 (box-constrained dual with u = max(sum_i y_i mu_i v_i, 0)) by
/// coordinate ascent; reports mu and the slack sigma.
std::pair<PiecewiseValueFunction, SolverReport> solve_dual(
    const std::vector<PairwiseSample>& pairs, double c_param, int m, int horizon,
    int gamma, double tol = 1e-6, int max_iter = 50000);

/// Primal objective of an arbitrary u on the given pairs.
double primal_objective(const std::vector<double>& u,
                        const std::vector<PairwiseSample>& pairs, double c_param);

/// Midpoint-of-closest-correctly-ordered-pair thresholds; falls back to the
/// midpoint of class means when a boundary has no correctly ordered pair.
ClassStructure fit_thresholds(const PiecewiseValueFunction& pvf,
                              const DiscountSchedule& schedule,
                              const std::vector<EncodedAlternative>& encoded,
                              int class_count, bool* used_fallback = nullptr);

int predict(const TplModel& model, const Alternative& alt, const Grid& grid);

}  // namespace tempref::tpl
