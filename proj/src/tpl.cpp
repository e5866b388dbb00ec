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

#include "tempref/tpl.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace tempref::tpl {

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

PiecewiseValueFunction make_pvf(const Eigen::VectorXd& u, int m, int horizon,
                                int gamma) {
    auto pvf = PiecewiseValueFunction::zeros(m, horizon, gamma);
    if (static_cast<std::size_t>(u.size()) != pvf.delta_f.size())
        throw DimensionMismatch("solver: dimension does not match m*T*gamma");
    for (Eigen::Index c = 0; c < u.size(); ++c) pvf.delta_f[c] = u[c];
    return pvf;
}

// Huber-smoothed hinge: exact hinge outside a width-delta zone below margin 1.
double smoothed_hinge(double margin, double delta) {
    if (margin >= 1.0) return 0.0;
    if (margin <= 1.0 - delta) return (1.0 - margin) - 0.5 * delta;
    const double z = 1.0 - margin;
    return z * z / (2.0 * delta);
}

double smoothed_hinge_grad(double margin, double delta) {
    if (margin >= 1.0) return 0.0;
    if (margin <= 1.0 - delta) return -1.0;
    return -(1.0 - margin) / delta;
}

struct DensePairs {
    Eigen::MatrixXd V;  // N x d, rows already multiplied by y
    int n = 0;
    Eigen::Index d = 0;
};

DensePairs densify(const std::vector<PairwiseSample>& pairs) {
    DensePairs dp;
    dp.n = static_cast<int>(pairs.size());
    dp.d = static_cast<Eigen::Index>(pairs.front().v_diff.size());
    dp.V.resize(dp.n, dp.d);
    for (int i = 0; i < dp.n; ++i) {
        if (static_cast<Eigen::Index>(pairs[i].v_diff.size()) != dp.d)
            throw DimensionMismatch("pairs have inconsistent dimensions");
        dp.V.row(i) = pairs[i].y * to_eigen(pairs[i].v_diff).transpose();
    }
    return dp;
}

double smoothed_objective(const Eigen::VectorXd& u, const DensePairs& dp,
                          double c_param, double delta) {
    const Eigen::VectorXd margins = dp.V * u;
    double loss = 0.0;
    for (int i = 0; i < dp.n; ++i) loss += smoothed_hinge(margins[i], delta);
    return 0.5 * u.squaredNorm() + c_param * loss;
}

}  // namespace

double primal_objective(const std::vector<double>& u,
                        const std::vector<PairwiseSample>& pairs,
                        double c_param) {
    double obj = 0.0;
    for (double x : u) obj += 0.5 * x * x;
    for (const auto& p : pairs) {
        double margin = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) margin += u[c] * p.v_diff[c];
        obj += c_param * std::max(0.0, 1.0 - p.y * margin);
    }
    return obj;
}

std::vector<PairwiseSample> derive_pairs(
    const std::vector<EncodedAlternative>& encoded,
    const DiscountSchedule& schedule, std::optional<std::size_t> cap,
    std::uint64_t rng_seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < encoded.size(); ++i)
        if (encoded[i].label) by_class[*encoded[i].label].push_back(i);
    if (by_class.size() < 2)
        throw SingleClassError("derive_pairs: fewer than two classes present");

    // Ordered (better, worse) index pairs, deterministic nested order.
    struct RawPair {
        std::size_t a, b;
        int la, lb;
    };
    std::vector<RawPair> raw;
    for (auto ita = by_class.rbegin(); ita != by_class.rend(); ++ita)
        for (auto itb = by_class.rbegin(); itb != by_class.rend(); ++itb) {
            if (ita->first <= itb->first) continue;
            for (auto a : ita->second)
                for (auto b : itb->second)
                    raw.push_back({a, b, ita->first, itb->first});
        }

    std::vector<std::size_t> selected(raw.size());
    std::iota(selected.begin(), selected.end(), 0);
    if (cap && raw.size() > *cap) {
        std::mt19937_64 rng(rng_seed);
        std::shuffle(selected.begin(), selected.end(), rng);
        selected.resize(*cap);
        // Keep at least one pair per adjacent class boundary.
        std::map<int, bool> have_boundary;
        for (auto it = by_class.begin(); std::next(it) != by_class.end(); ++it)
            have_boundary[it->first] = false;
        for (auto s : selected)
            if (raw[s].la == raw[s].lb + 1) have_boundary[raw[s].lb] = true;
        std::size_t tail = selected.size() - 1;
        for (auto& [lb, have] : have_boundary) {
            if (have) continue;
            for (std::size_t r = 0; r < raw.size(); ++r)
                if (raw[r].lb == lb && raw[r].la == lb + 1) {
                    selected[tail--] = r;
                    break;
                }
        }
    }

    const auto& first = encoded.front();
    const std::size_t dim = first.v.size();
    std::vector<PairwiseSample> pairs;
    pairs.reserve(selected.size());
    for (auto s : selected) {
        const auto& ea = encoded[raw[s].a];
        const auto& eb = encoded[raw[s].b];
        if (ea.v.size() != dim || eb.v.size() != dim)
            throw DimensionMismatch("derive_pairs: encoded size mismatch");
        PairwiseSample p;
        p.y = 1;
        p.v_diff.resize(dim);
        for (int j = 0; j < first.m; ++j)
            for (int t = 0; t < first.horizon; ++t) {
                const double w = schedule.weights[t];
                for (int k = 0; k < first.gamma; ++k) {
                    const auto c = first.idx(j, t, k);
                    p.v_diff[c] = w * (ea.v[c] - eb.v[c]);
                }
            }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::pair<PiecewiseValueFunction, SolverReport> solve_primal(
    const std::vector<PairwiseSample>& pairs, double c_param, int m, int horizon,
    int gamma, double tol, int max_iter) {
    if (pairs.empty()) throw Error("solve_primal: no pairs");
    if (c_param <= 0.0) throw Error("solve_primal: C must be positive");
    const DensePairs dp = densify(pairs);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(dp.d);
    SolverReport report;
    int iters = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();

    // Smoothing continuation: the final problem differs from the true hinge
    // objective by at most N*C*delta/2.
    for (double delta = 1e-2; delta >= 0.5e-8; delta *= 0.1) {
        const bool last_stage = delta < 1e-8 * 10.0 * 0.999;
        const double stage_tol = last_stage ? tol : std::max(tol, delta);
        converged = false;
        while (iters < max_iter) {
            const Eigen::VectorXd margins = dp.V * u;
            Eigen::VectorXd lgrad(dp.n);
            for (int i = 0; i < dp.n; ++i)
                lgrad[i] = smoothed_hinge_grad(margins[i], delta);
            Eigen::VectorXd g = u + c_param * dp.V.transpose() * lgrad;

            // Projected-gradient residual on the box u >= 0.
            residual = 0.0;
            for (Eigen::Index c = 0; c < dp.d; ++c) {
                const double step = std::max(u[c] - g[c], 0.0) - u[c];
                residual = std::max(residual, std::abs(step));
            }
            if (residual < stage_tol) {
                converged = true;
                break;
            }

            std::vector<Eigen::Index> free_set;
            for (Eigen::Index c = 0; c < dp.d; ++c)
                if (!(u[c] <= 0.0 && g[c] > 0.0)) free_set.push_back(c);

            Eigen::VectorXd dir = Eigen::VectorXd::Zero(dp.d);
            if (!free_set.empty()) {
                const Eigen::Index nf = static_cast<Eigen::Index>(free_set.size());
                Eigen::MatrixXd H = Eigen::MatrixXd::Identity(nf, nf);
                for (int i = 0; i < dp.n; ++i) {
                    if (margins[i] >= 1.0 || margins[i] <= 1.0 - delta) continue;
                    Eigen::VectorXd vf(nf);
                    for (Eigen::Index c = 0; c < nf; ++c)
                        vf[c] = dp.V(i, free_set[c]);
                    H.noalias() += (c_param / delta) * vf * vf.transpose();
                }
                Eigen::VectorXd gf(nf);
                for (Eigen::Index c = 0; c < nf; ++c) gf[c] = g[free_set[c]];
                const Eigen::VectorXd df = -H.ldlt().solve(gf);
                for (Eigen::Index c = 0; c < nf; ++c) dir[free_set[c]] = df[c];
            }

            const double f0 = smoothed_objective(u, dp, c_param, delta);
            double alpha = 1.0;
            Eigen::VectorXd u_next = u;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                u_next = (u + alpha * dir).cwiseMax(0.0);
                const double f1 = smoothed_objective(u_next, dp, c_param, delta);
                const double decrease = g.dot(u_next - u);
                if (f1 <= f0 + 1e-4 * decrease && f1 <= f0) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // Fall back to a projected gradient step.
                alpha = 1.0;
                for (int ls = 0; ls < 60; ++ls) {
                    u_next = (u - alpha * g).cwiseMax(0.0);
                    if (smoothed_objective(u_next, dp, c_param, delta) < f0) break;
                    alpha *= 0.5;
                }
            }
            u = u_next;
            ++iters;
        }
        if (!converged) break;
    }

    report.iterations = iters;
    report.converged = converged;
    report.kkt_residual = residual;
    std::vector<double> uvec(u.data(), u.data() + u.size());
    report.objective = primal_objective(uvec, pairs, c_param);
    return {make_pvf(u, m, horizon, gamma), report};
}

std::pair<PiecewiseValueFunction, SolverReport> solve_dual(
    const std::vector<PairwiseSample>& pairs, double c_param, int m, int horizon,
    int gamma, double tol, int max_iter) {
    if (pairs.empty()) throw Error("solve_dual: no pairs");
    if (c_param <= 0.0) throw Error("solve_dual: C must be positive");
    const DensePairs dp = densify(pairs);
    const int n = dp.n;

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dp.d);  // sum_i y_i mu_i v_i
    Eigen::VectorXd qnorm(n);
    for (int i = 0; i < n; ++i) qnorm[i] = dp.V.row(i).squaredNorm();

    auto clamp = [&](double x) { return std::min(std::max(x, 0.0), c_param); };

    SolverReport report;
    int sweep = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    for (; sweep < max_iter; ++sweep) {
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd u = w.cwiseMax(0.0);
            const double g = 1.0 - dp.V.row(i).dot(u);
            const double mu_new =
                qnorm[i] > 0.0 ? clamp(mu[i] + g / qnorm[i]) : (g > 0 ? c_param : 0.0);
            const double d = mu_new - mu[i];
            if (d != 0.0) {
                mu[i] = mu_new;
                w += d * dp.V.row(i).transpose();
            }
        }
        const Eigen::VectorXd u = w.cwiseMax(0.0);
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = 1.0 - dp.V.row(i).dot(u);
            residual = std::max(residual, std::abs(clamp(mu[i] + g) - mu[i]));
        }
        if (residual < tol) {
            converged = true;
            ++sweep;
            break;
        }
    }

    const Eigen::VectorXd u = w.cwiseMax(0.0);
    report.iterations = sweep;
    report.converged = converged;
    report.kkt_residual = residual;
    report.dual_mu = std::vector<double>(mu.data(), mu.data() + mu.size());
    const Eigen::VectorXd sigma = u - w;  // >= 0 by construction
    report.dual_slack = std::vector<double>(sigma.data(), sigma.data() + sigma.size());
    std::vector<double> uvec(u.data(), u.data() + u.size());
    report.objective = primal_objective(uvec, pairs, c_param);
    return {make_pvf(u, m, horizon, gamma), report};
}

ClassStructure fit_thresholds(const PiecewiseValueFunction& pvf,
                              const DiscountSchedule& schedule,
                              const std::vector<EncodedAlternative>& encoded,
                              int class_count, bool* used_fallback) {
    struct Scored {
        double u;
        const EncodedAlternative* enc;
    };
    std::map<int, std::vector<Scored>> by_class;
    for (const auto& e : encoded) {
        if (!e.label) continue;
        by_class[*e.label].push_back({comprehensive_value(pvf, e, schedule), &e});
    }

    bool fallback = false;
    ClassStructure classes;
    classes.thresholds.resize(class_count - 1);
    for (int h = 1; h < class_count; ++h) {
        const auto* upper = by_class.count(h + 1) ? &by_class[h + 1] : nullptr;
        const auto* lower = by_class.count(h) ? &by_class[h] : nullptr;

        double best_gap = std::numeric_limits<double>::infinity();
        double theta = 0.0;
        bool found = false;
        std::pair<std::string, std::string> best_ids;
        if (upper && lower) {
            for (const auto& a : *upper)
                for (const auto& b : *lower) {
                    if (a.u < b.u) continue;
                    const double gap = a.u - b.u;
                    const auto ids = std::make_pair(a.enc->id, b.enc->id);
                    if (gap < best_gap || (gap == best_gap && ids < best_ids)) {
                        best_gap = gap;
                        best_ids = ids;
                        theta = 0.5 * (a.u + b.u);
                        found = true;
                    }
                }
        }
        if (!found) {
            fallback = true;
            if (upper && lower && !upper->empty() && !lower->empty()) {
                double mu_up = 0.0, mu_lo = 0.0;
                for (const auto& a : *upper) mu_up += a.u;
                for (const auto& b : *lower) mu_lo += b.u;
                theta = 0.5 * (mu_up / upper->size() + mu_lo / lower->size());
            } else {
                theta = (h >= 2 ? classes.thresholds[h - 2] : 0.0) + 1.0;
            }
        }
        classes.thresholds[h - 1] = theta;
    }

    // The midpoint rule does not guarantee ordering on interleaved data.
    for (int h = 1; h < class_count - 1; ++h)
        if (classes.thresholds[h] <= classes.thresholds[h - 1]) {
            classes.thresholds[h] =
                std::nextafter(classes.thresholds[h - 1],
                               std::numeric_limits<double>::infinity());
            fallback = true;
        }
    if (used_fallback) *used_fallback = fallback;
    return classes;
}

int predict(const TplModel& model, const Alternative& alt, const Grid& grid) {
    if (grid.m != model.pvf.m || grid.horizon != model.pvf.horizon ||
        grid.gamma != model.pvf.gamma)
        throw DimensionMismatch("predict: grid does not match model");
    const auto enc = encode(alt, grid);
    return assign(comprehensive_value(model.pvf, enc, model.schedule),
                  model.classes);
}

}  // namespace tempref::tpl
