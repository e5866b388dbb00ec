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

#include "tempref/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tempref {

void Dataset::validate() const {
    const int mm = m();
    for (const auto& alt : alternatives) {
        if (static_cast<int>(alt.series.size()) != mm)
            throw DimensionMismatch("alternative '" + alt.id + "' has " +
                                    std::to_string(alt.series.size()) +
                                    " series, expected " + std::to_string(mm));
        for (const auto& s : alt.series) {
            if (static_cast<int>(s.size()) != horizon)
                throw DimensionMismatch("alternative '" + alt.id +
                                        "' has a ragged series");
            for (double x : s)
                if (!std::isfinite(x))
                    throw Error("non-finite value in alternative '" + alt.id + "'");
        }
        if (alt.label && (*alt.label < 1 || *alt.label > class_count))
            throw LabelOutOfRange("label " + std::to_string(*alt.label) +
                                  " outside 1.." + std::to_string(class_count) +
                                  " in alternative '" + alt.id + "'");
    }
}

void ClassStructure::validate() const {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i - 1] < thresholds[i]))
            throw Error("class thresholds are not strictly increasing");
}

PiecewiseValueFunction PiecewiseValueFunction::zeros(int m, int horizon, int gamma) {
    PiecewiseValueFunction pvf;
    pvf.m = m;
    pvf.horizon = horizon;
    pvf.gamma = gamma;
    pvf.delta_f.assign(static_cast<std::size_t>(m) * horizon * gamma, 0.0);
    pvf.offsets.assign(static_cast<std::size_t>(m) * horizon, 0.0);
    return pvf;
}

DiscountSchedule DiscountSchedule::fixed(double tau, int horizon) {
    DiscountSchedule s;
    s.tau = tau;
    s.horizon = horizon;
    s.weights.resize(horizon);
    for (int t = 0; t < horizon; ++t)
        s.weights[t] = std::pow(tau, horizon - 1 - t);  // pow(0,0) == 1
    return s;
}

Grid build_grid(const Dataset& dataset, int gamma) {
    if (dataset.alternatives.empty()) throw Error("build_grid: empty dataset");
    if (gamma < 1) throw Error("build_grid: gamma must be >= 1");
    dataset.validate();

    const int m = dataset.m();
    const int T = dataset.horizon;
    Grid grid;
    grid.m = m;
    grid.horizon = T;
    grid.gamma = gamma;
    grid.alpha.assign(static_cast<std::size_t>(m) * T,
                      std::numeric_limits<double>::infinity());
    grid.beta.assign(static_cast<std::size_t>(m) * T,
                     -std::numeric_limits<double>::infinity());
    grid.degenerate.assign(static_cast<std::size_t>(m) * T, 0);
    grid.points.resize(static_cast<std::size_t>(m) * T * (gamma + 1));

    for (const auto& alt : dataset.alternatives)
        for (int j = 0; j < m; ++j)
            for (int t = 0; t < T; ++t) {
                const double g = alt.series[j][t];
                auto c = grid.cell(j, t);
                grid.alpha[c] = std::min(grid.alpha[c], g);
                grid.beta[c] = std::max(grid.beta[c], g);
            }

    for (int j = 0; j < m; ++j)
        for (int t = 0; t < T; ++t) {
            const auto c = grid.cell(j, t);
            const double a = grid.alpha[c], b = grid.beta[c];
            if (a == b) {
                grid.degenerate[c] = 1;
                grid.any_degenerate = true;
            }
            for (int k = 0; k <= gamma; ++k)
                grid.points[c * (gamma + 1) + k] =
                    a + (static_cast<double>(k) / gamma) * (b - a);
        }
    return grid;
}

EncodedAlternative encode(const Alternative& alt, const Grid& grid) {
    if (static_cast<int>(alt.series.size()) != grid.m)
        throw DimensionMismatch("encode: criteria count mismatch");
    EncodedAlternative enc;
    enc.id = alt.id;
    enc.label = alt.label;
    enc.m = grid.m;
    enc.horizon = grid.horizon;
    enc.gamma = grid.gamma;
    enc.v.resize(static_cast<std::size_t>(grid.m) * grid.horizon * grid.gamma);

    for (int j = 0; j < grid.m; ++j) {
        if (static_cast<int>(alt.series[j].size()) != grid.horizon)
            throw DimensionMismatch("encode: horizon mismatch");
        for (int t = 0; t < grid.horizon; ++t) {
            const double g = alt.series[j][t];
            const bool degen = grid.degenerate[grid.cell(j, t)] != 0;
            for (int k = 1; k <= grid.gamma; ++k) {
                double vk = 0.0;
                if (!degen) {
                    const double lo = grid.point(j, t, k - 1);
                    const double hi = grid.point(j, t, k);
                    if (g > hi)
                        vk = 1.0;
                    else if (g >= lo)
                        vk = (g - lo) / (hi - lo);
                }
                enc.v[enc.idx(j, t, k - 1)] = vk;
            }
        }
    }
    return enc;
}

double sub_marginal(const PiecewiseValueFunction& pvf,
                    const EncodedAlternative& encoded, int j, int t) {
    double f = pvf.offsets[pvf.cell(j, t)];
    for (int k = 0; k < pvf.gamma; ++k)
        f += pvf.delta_f[pvf.idx(j, t, k)] * encoded.v[encoded.idx(j, t, k)];
    return f;
}

double comprehensive_value(const PiecewiseValueFunction& pvf,
                           const EncodedAlternative& encoded,
                           const DiscountSchedule& schedule) {
    double u = 0.0;
    for (int j = 0; j < pvf.m; ++j)
        for (int t = 0; t < pvf.horizon; ++t)
            u += schedule.weights[t] * sub_marginal(pvf, encoded, j, t);
    return u;
}

int assign(double u_value, const ClassStructure& classes) {
    const int H = classes.class_count();
    for (int h = 1; h < H; ++h)
        if (u_value < classes.thresholds[h - 1]) return h;
    return H;
}

Normalization normalize(const PiecewiseValueFunction& pvf,
                        const DiscountSchedule& schedule) {
    double scale = 0.0;
    for (double d : pvf.delta_f) scale += d;
    if (scale <= 0.0) throw ZeroScaleError("normalize: all increments are zero");

    double offset = 0.0;
    for (int j = 0; j < pvf.m; ++j)
        for (int t = 0; t < pvf.horizon; ++t)
            offset += schedule.weights[t] * pvf.offsets[pvf.cell(j, t)];

    Normalization out;
    out.pvf = pvf;
    std::fill(out.pvf.offsets.begin(), out.pvf.offsets.end(), 0.0);
    for (double& d : out.pvf.delta_f) d /= scale;
    out.scale = scale;
    out.offset = offset;
    return out;
}

ClassStructure transform_thresholds(const ClassStructure& classes, double scale,
                                    double offset) {
    if (scale <= 0.0) throw ZeroScaleError("transform_thresholds: scale <= 0");
    ClassStructure out = classes;
    for (double& th : out.thresholds) th = (th - offset) / scale;
    return out;
}

}  // namespace tempref
