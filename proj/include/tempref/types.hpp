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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempref {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ZeroScaleError : public Error {
public:
    using Error::Error;
};

class SingleClassError : public Error {
public:
    using Error::Error;
};

class LabelOutOfRange : public Error {
public:
    using Error::Error;
};

class TooFewSamples : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// One alternative: m time series of length T plus an optional class label (1-based).
struct Alternative {
    std::string id;
    std::vector<std::vector<double>> series;  // [m][T]
    std::optional<int> label;
};

struct Dataset {
    std::vector<Alternative> alternatives;
    std::vector<std::string> criteria_names;
    int horizon = 0;      // T, uniform across criteria
    int class_count = 0;  // H

    int m() const { return static_cast<int>(criteria_names.size()); }
    std::size_t size() const { return alternatives.size(); }

    /// Throws if any alternative is ragged, non-finite, or labeled outside 1..H.
    void validate() const;
};

/// Equally spaced characteristic points over the observed per-(j,t) range.
struct Grid {
    int m = 0;
    int horizon = 0;
    int gamma = 0;
    std::vector<double> points;      // [m][T][gamma+1]
    std::vector<double> alpha;       // [m][T]
    std::vector<double> beta;        // [m][T]
    std::vector<char> degenerate;    // [m][T], alpha == beta
    bool any_degenerate = false;

    std::size_t cell(int j, int t) const {
        return static_cast<std::size_t>(j) * horizon + t;
    }
    double point(int j, int t, int k) const {
        return points[cell(j, t) * (gamma + 1) + k];
    }
};

/// Performance values mapped to the piecewise-linear basis: for each (j,t) a
/// vector of gamma entries in [0,1] with a staircase shape (1s, at most one
/// fractional entry, then 0s).
struct EncodedAlternative {
    std::string id;
    std::optional<int> label;
    int m = 0;
    int horizon = 0;
    int gamma = 0;
    std::vector<double> v;  // [m][T][gamma]

    std::size_t idx(int j, int t, int k) const {
        return (static_cast<std::size_t>(j) * horizon + t) * gamma + k;
    }
};

/// The value model: nonnegative increments delta_f define all sub-marginal
/// value functions. Offsets are zero for freshly trained models; they exist so
/// deserialized shifted models round-trip.
struct PiecewiseValueFunction {
    int m = 0;
    int horizon = 0;
    int gamma = 0;
    std::vector<double> delta_f;  // [m][T][gamma], all >= 0
    std::vector<double> offsets;  // [m][T]

    static PiecewiseValueFunction zeros(int m, int horizon, int gamma);
    std::size_t idx(int j, int t, int k) const {
        return (static_cast<std::size_t>(j) * horizon + t) * gamma + k;
    }
    std::size_t cell(int j, int t) const {
        return static_cast<std::size_t>(j) * horizon + t;
    }
};

/// Fixed discount factor tau with per-timestamp weights tau^(T-t).
struct DiscountSchedule {
    double tau = 1.0;
    int horizon = 0;
    std::vector<double> weights;  // [T], weights[t] = tau^(T-1-t), last is 1

    static DiscountSchedule fixed(double tau, int horizon);
};

/// Strictly increasing interior thresholds; sentinels at +-LARGE.
struct ClassStructure {
    std::vector<double> thresholds;  // H-1 interior thresholds
    double large = 1e30;

    int class_count() const { return static_cast<int>(thresholds.size()) + 1; }
    double lower(int h) const {  // theta_{h-1}, h in 1..H
        return h <= 1 ? -large : thresholds[h - 2];
    }
    double upper(int h) const {  // theta_h
        return h >= class_count() ? large : thresholds[h - 1];
    }
    void validate() const;
};

}  // namespace tempref
