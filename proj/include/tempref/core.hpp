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

#include "tempref/types.hpp"

namespace tempref {

/// Equally spaced characteristic points over the observed per-(j,t) min/max.
/// Cells with alpha == beta are flagged degenerate (they encode to all-zero v).
Grid build_grid(const Dataset& dataset, int gamma);

/// Three-case transform of raw performances into the piecewise-linear basis:
/// 1 above the cell, linear inside it, 0 below. Saturates for out-of-range
/// inputs; degenerate cells map to zero.
EncodedAlternative encode(const Alternative& alt, const Grid& grid);

/// offsets[j][t] + sum_k delta_f * v, the interpolated sub-marginal value.
double sub_marginal(const PiecewiseValueFunction& pvf,
                    const EncodedAlternative& encoded, int j, int t);

/// U(a) = sum_j sum_t tau^(T-t) * f_j^t(a). With tau = 0 only the last
/// timestamp contributes.
double comprehensive_value(const PiecewiseValueFunction& pvf,
                           const EncodedAlternative& encoded,
                           const DiscountSchedule& schedule);

/// Class h such that theta_{h-1} <= U < theta_h; exact interior hits go up.
int assign(double u_value, const ClassStructure& classes);

struct Normalization {
    PiecewiseValueFunction pvf;
    double scale = 1.0;
    double offset = 0.0;
};

/// Rescales so that offsets vanish and the maximal sub-marginal values sum to
/// one. Normalized comprehensive values satisfy U' = (U - offset) / scale.
/// Throws ZeroScaleError when every increment is zero.
Normalization normalize(const PiecewiseValueFunction& pvf,
                        const DiscountSchedule& schedule);

/// Applies theta' = (theta - offset) / scale so that assignments are preserved
/// under normalization.
ClassStructure transform_thresholds(const ClassStructure& classes, double scale,
                                    double offset);

}  // namespace tempref
