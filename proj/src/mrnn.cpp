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

#include "tempref/mrnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tempref::mrnn {

namespace {

constexpr double kThresholdGap = 1e-4;
constexpr double kProbClamp = 1e-12;
constexpr double kGradClip = 10.0;
constexpr double kMomentum = 0.9;

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& w) { return w.cwiseMax(0.0); }
inline Eigen::VectorXd relu(const Eigen::VectorXd& w) { return w.cwiseMax(0.0); }

// Subgradient of the mask: 0 at and below 0.
inline Eigen::ArrayXXd mask(const Eigen::MatrixXd& w) {
    return (w.array() > 0.0).cast<double>();
}

Eigen::VectorXd input_segment(const EncodedAlternative& enc, int j, int t) {
    return Eigen::Map<const Eigen::VectorXd>(enc.v.data() + enc.idx(j, t, 0),
                                             enc.gamma);
}

}  // namespace

MrnnParams MrnnParams::zeros(const MrnnConfig& c) {
    MrnnParams p;
    p.w_v.assign(c.m, Eigen::MatrixXd::Zero(c.hidden_size, c.gamma));
    p.w_h.assign(c.m, Eigen::MatrixXd::Zero(c.hidden_size, c.hidden_size));
    p.b.assign(c.m, Eigen::VectorXd::Zero(c.hidden_size));
    p.w_f.assign(c.m, Eigen::MatrixXd::Zero(c.horizon, c.hidden_size));
    p.q1.assign(c.m, Eigen::MatrixXd::Zero(c.q_hidden, c.hidden_size));
    p.q1b.assign(c.m, Eigen::VectorXd::Zero(c.q_hidden));
    p.q2.assign(c.m, Eigen::VectorXd::Zero(c.q_hidden));
    p.q2b.assign(c.m, 0.0);
    p.threshold_base = 0.0;
    p.threshold_incr.assign(std::max(0, c.class_count - 2), 0.0);
    return p;
}

MrnnParams MrnnParams::init(const MrnnConfig& c, std::uint64_t seed) {
    MrnnParams p = zeros(c);
    std::mt19937_64 rng(seed);
    // Small positive weights: the comprehensive value accumulates over m
    // criteria and T timestamps, and a large initial U drives raw weights
    // negative where the mask's zero subgradient strands them.
    const double scale = 1.0 / static_cast<double>(c.hidden_size);
    std::uniform_real_distribution<double> unif(0.0, scale);
    auto fill = [&](Eigen::MatrixXd& w) {
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = unif(rng);
    };
    auto fillv = [&](Eigen::VectorXd& w) {
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = unif(rng);
    };
    for (int j = 0; j < c.m; ++j) {
        fill(p.w_v[j]);
        fill(p.w_h[j]);
        fill(p.w_f[j]);
        fill(p.q1[j]);
        fillv(p.q2[j]);
        // Small positive bias: a zero-initialized masked bias would stay dead.
        for (Eigen::Index i = 0; i < p.b[j].size(); ++i)
            p.b[j][i] = 0.1 * unif(rng);
    }
    // Interior thresholds start near spacing 1.
    const double incr0 = std::log(std::exp(1.0 - kThresholdGap) - 1.0);
    for (double& r : p.threshold_incr) r = incr0;
    return p;
}

std::vector<double> MrnnParams::materialized_thresholds() const {
    std::vector<double> th;
    th.reserve(threshold_incr.size() + 1);
    double cur = threshold_base;
    th.push_back(cur);
    for (double r : threshold_incr) {
        cur += softplus(r) + kThresholdGap;
        th.push_back(cur);
    }
    return th;
}

ClassStructure MrnnParams::class_structure() const {
    ClassStructure cs;
    cs.thresholds = materialized_thresholds();
    return cs;
}

std::vector<double> MrnnParams::flatten() const {
    std::vector<double> flat;
    auto push = [&](const double* d, Eigen::Index n) {
        flat.insert(flat.end(), d, d + n);
    };
    for (std::size_t j = 0; j < w_v.size(); ++j) {
        push(w_v[j].data(), w_v[j].size());
        push(w_h[j].data(), w_h[j].size());
        push(b[j].data(), b[j].size());
        push(w_f[j].data(), w_f[j].size());
        push(q1[j].data(), q1[j].size());
        push(q1b[j].data(), q1b[j].size());
        push(q2[j].data(), q2[j].size());
        flat.push_back(q2b[j]);
    }
    flat.push_back(threshold_base);
    flat.insert(flat.end(), threshold_incr.begin(), threshold_incr.end());
    return flat;
}

void MrnnParams::unflatten(const std::vector<double>& flat) {
    std::size_t pos = 0;
    auto take = [&](double* d, Eigen::Index n) {
        std::copy(flat.begin() + pos, flat.begin() + pos + n, d);
        pos += n;
    };
    for (std::size_t j = 0; j < w_v.size(); ++j) {
        take(w_v[j].data(), w_v[j].size());
        take(w_h[j].data(), w_h[j].size());
        take(b[j].data(), b[j].size());
        take(w_f[j].data(), w_f[j].size());
        take(q1[j].data(), q1[j].size());
        take(q1b[j].data(), q1b[j].size());
        take(q2[j].data(), q2[j].size());
        q2b[j] = flat[pos++];
    }
    threshold_base = flat[pos++];
    for (double& r : threshold_incr) r = flat[pos++];
    if (pos != flat.size()) throw DimensionMismatch("unflatten: size mismatch");
}

ForwardTrace forward(const MrnnParams& params, const MrnnConfig& config,
                     const EncodedAlternative& encoded) {
    if (encoded.m != config.m || encoded.horizon != config.horizon ||
        encoded.gamma != config.gamma)
        throw DimensionMismatch("forward: encoded shape does not match config");

    const int T = config.horizon;
    ForwardTrace trace;
    trace.hidden.assign(T, std::vector<Eigen::VectorXd>(config.m));
    trace.sub_marginal.assign(T, std::vector<double>(config.m, 0.0));
    trace.discount.assign(std::max(0, T - 1), std::vector<double>(config.m, 0.0));
    trace.marginal.assign(T, std::vector<double>(config.m, 0.0));

    for (int j = 0; j < config.m; ++j) {
        const Eigen::MatrixXd wv = relu(params.w_v[j]);
        const Eigen::MatrixXd wh = relu(params.w_h[j]);
        const Eigen::VectorXd bj = relu(params.b[j]);
        const Eigen::MatrixXd q1 = relu(params.q1[j]);
        const Eigen::VectorXd q2 = relu(params.q2[j]);

        Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(config.hidden_size);
        double u_prev = 0.0;
        for (int t = 0; t < T; ++t) {
            double tau = 0.0;
            if (t >= 1) {
                const Eigen::VectorXd a1 =
                    (q1 * h_prev + params.q1b[j]).array().tanh();
                tau = sigmoid(q2.dot(a1) + params.q2b[j]);
                trace.discount[t - 1][j] = tau;
            }
            const Eigen::VectorXd h =
                (wv * input_segment(encoded, j, t) + wh * h_prev + bj)
                    .array()
                    .tanh();
            const Eigen::VectorXd wf_row = params.w_f[j].row(t).transpose();
            const double f = relu(wf_row).dot(h);
            const double u = f + (t >= 1 ? tau * u_prev : 0.0);

            trace.hidden[t][j] = h;
            trace.sub_marginal[t][j] = f;
            trace.marginal[t][j] = u;
            h_prev = h;
            u_prev = u;
        }
        trace.comprehensive += u_prev;
    }
    return trace;
}

std::vector<double> class_probabilities(double u_value,
                                        const std::vector<double>& thresholds) {
    const int H = static_cast<int>(thresholds.size()) + 1;
    std::vector<double> p(H);
    double prev_cdf = 0.0;  // sigmoid(theta_0 - U) with theta_0 = -inf
    for (int h = 1; h < H; ++h) {
        const double cdf = sigmoid(thresholds[h - 1] - u_value);
        p[h - 1] = cdf - prev_cdf;
        prev_cdf = cdf;
    }
    p[H - 1] = 1.0 - prev_cdf;
    return p;
}

LossResult ordinal_loss(const std::vector<double>& u_values,
                        const std::vector<int>& labels,
                        const std::vector<double>& thresholds) {
    if (u_values.size() != labels.size())
        throw DimensionMismatch("ordinal_loss: length mismatch");
    const int H = static_cast<int>(thresholds.size()) + 1;
    LossResult out;
    out.per_sample.reserve(u_values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < u_values.size(); ++i) {
        const int y = labels[i];
        if (y < 1 || y > H) throw LabelOutOfRange("ordinal_loss: bad label");
        const auto p = class_probabilities(u_values[i], thresholds);
        const double loss = -std::log(std::max(p[y - 1], kProbClamp));
        out.per_sample.push_back(loss);
        total += loss;
    }
    out.mean = u_values.empty() ? 0.0 : total / u_values.size();
    return out;
}

namespace {

// dL/dU and dL/dtheta_h for one sample under the ordinal loss.
void loss_backward(double u_value, int label, const std::vector<double>& theta,
                   double& d_u, std::vector<double>& d_theta) {
    const int H = static_cast<int>(theta.size()) + 1;
    const auto p = class_probabilities(u_value, theta);
    const double py = p[label - 1];
    d_u = 0.0;
    if (py <= kProbClamp) return;  // clamped region, gradient zeroed
    const double dldp = -1.0 / py;
    if (label <= H - 1) {
        const double s = sigmoid(theta[label - 1] - u_value);
        const double sp = s * (1.0 - s);
        d_u += dldp * (-sp);
        d_theta[label - 1] += dldp * sp;
    }
    if (label >= 2) {
        const double s = sigmoid(theta[label - 2] - u_value);
        const double sp = s * (1.0 - s);
        d_u += dldp * sp;
        d_theta[label - 2] += dldp * (-sp);
    }
}

}  // namespace

GradientResult gradients(const MrnnParams& params, const MrnnConfig& config,
                         const std::vector<const EncodedAlternative*>& batch) {
    if (batch.empty()) throw Error("gradients: empty batch");
    GradientResult out;
    out.grad = MrnnParams::zeros(config);
    MrnnParams& g = out.grad;

    const auto theta = params.materialized_thresholds();
    std::vector<double> d_theta(theta.size(), 0.0);
    const int T = config.horizon;
    double loss_total = 0.0;

    for (const auto* enc : batch) {
        if (!enc->label) throw Error("gradients: unlabeled sample in batch");
        const auto trace = forward(params, config, *enc);
        const auto p = class_probabilities(trace.comprehensive, theta);
        loss_total += -std::log(std::max(p[*enc->label - 1], kProbClamp));

        double d_u_comp = 0.0;
        loss_backward(trace.comprehensive, *enc->label, theta, d_u_comp, d_theta);
        if (d_u_comp == 0.0) continue;

        for (int j = 0; j < config.m; ++j) {
            const Eigen::MatrixXd wh = relu(params.w_h[j]);
            const Eigen::MatrixXd q1 = relu(params.q1[j]);
            const Eigen::VectorXd q2 = relu(params.q2[j]);

            std::vector<double> du(T, 0.0);
            du[T - 1] = d_u_comp;  // dU/du_j^T = 1
            Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(config.hidden_size);

            for (int t = T - 1; t >= 0; --t) {
                const Eigen::VectorXd& h = trace.hidden[t][j];
                Eigen::VectorXd dh = dh_carry;
                dh_carry.setZero();

                // f_t = relu(w_f row t) . h_t
                const Eigen::VectorXd wf_row = params.w_f[j].row(t).transpose();
                const double df = du[t];
                g.w_f[j].row(t) +=
                    (mask(wf_row).array() * h.array()).matrix().transpose() * df;
                dh += relu(wf_row) * df;

                if (t >= 1) {
                    const double tau = trace.discount[t - 1][j];
                    const double dtau = du[t] * trace.marginal[t - 1][j];
                    du[t - 1] += du[t] * tau;

                    // Gate input is h_{t-1}; its gradient joins the carry.
                    const Eigen::VectorXd& hg = trace.hidden[t - 1][j];
                    const Eigen::VectorXd a1 =
                        (q1 * hg + params.q1b[j]).array().tanh();
                    const double ds2 = dtau * tau * (1.0 - tau);
                    g.q2[j] += (mask(params.q2[j]).array() * a1.array()).matrix() * ds2;
                    g.q2b[j] += ds2;
                    const Eigen::VectorXd dz1 =
                        ((1.0 - a1.array().square()) * (q2 * ds2).array()).matrix();
                    g.q1[j] +=
                        (mask(params.q1[j]).array() * (dz1 * hg.transpose()).array())
                            .matrix();
                    g.q1b[j] += dz1;
                    dh_carry += q1.transpose() * dz1;
                }

                // Through tanh into the cell parameters.
                const Eigen::VectorXd da =
                    ((1.0 - h.array().square()) * dh.array()).matrix();
                const Eigen::VectorXd v = input_segment(*enc, j, t);
                g.w_v[j] += (mask(params.w_v[j]).array() *
                             (da * v.transpose()).array())
                                .matrix();
                g.b[j] += (mask(params.b[j]).array() * da.array()).matrix();
                if (t >= 1) {
                    const Eigen::VectorXd& h_prev = trace.hidden[t - 1][j];
                    g.w_h[j] += (mask(params.w_h[j]).array() *
                                 (da * h_prev.transpose()).array())
                                    .matrix();
                    dh_carry += wh.transpose() * da;
                }
                // h_prev at t=0 is the zero initial state; nothing flows there.
            }
        }
    }

    // Thresholds: theta_1 = base, theta_{h+1} = theta_h + softplus(incr_h) + gap.
    double d_base = 0.0;
    for (double d : d_theta) d_base += d;
    g.threshold_base = d_base;
    for (std::size_t i = 0; i < params.threshold_incr.size(); ++i) {
        double acc = 0.0;
        for (std::size_t h = i + 1; h < theta.size(); ++h) acc += d_theta[h];
        g.threshold_incr[i] = sigmoid(params.threshold_incr[i]) * acc;
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    auto flat = g.flatten();
    for (double& x : flat) x *= inv_n;
    g.unflatten(flat);
    out.mean_loss = loss_total * inv_n;
    return out;
}

namespace {

double evaluate_loss(const MrnnParams& params, const MrnnConfig& config,
                     const std::vector<EncodedAlternative>& set) {
    std::vector<double> u;
    std::vector<int> labels;
    u.reserve(set.size());
    for (const auto& e : set) {
        u.push_back(forward(params, config, e).comprehensive);
        labels.push_back(e.label.value());
    }
    return ordinal_loss(u, labels, params.materialized_thresholds()).mean;
}

}  // namespace

std::pair<MrnnParams, TrainReport> train(
    const std::vector<EncodedAlternative>& train_set,
    const std::vector<EncodedAlternative>& validation_set,
    const MrnnConfig& config) {
    if (train_set.empty()) throw Error("train: empty training set");
    for (const auto& e : train_set)
        if (!e.label) throw Error("train: unlabeled training sample");

    MrnnParams params = MrnnParams::init(config, config.seed);
    std::vector<double> velocity(params.flatten().size(), 0.0);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainReport report;
    MrnnParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int patience_left = config.validation_patience;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const bool have_val = !validation_set.empty();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += config.batch_size) {
            std::vector<const EncodedAlternative*> batch;
            for (std::size_t i = start;
                 i < std::min(order.size(), start + config.batch_size); ++i)
                batch.push_back(&train_set[order[i]]);

            auto gres = gradients(params, config, batch);
            epoch_loss += gres.mean_loss * batch.size();
            seen += batch.size();
            if (!std::isfinite(gres.mean_loss)) {
                report.diverged = true;
                report.best_epoch = best_epoch;
                report.best_val_loss = best_val;
                report.thresholds = best.materialized_thresholds();
                return {best, report};
            }

            auto gflat = gres.grad.flatten();
            double norm2 = 0.0;
            for (double x : gflat) norm2 += x * x;
            const double norm = std::sqrt(norm2);
            const double clip = norm > kGradClip ? kGradClip / norm : 1.0;

            auto pflat = params.flatten();
            for (std::size_t i = 0; i < pflat.size(); ++i) {
                velocity[i] = kMomentum * velocity[i] -
                              config.learning_rate * clip * gflat[i];
                pflat[i] += velocity[i];
            }
            params.unflatten(pflat);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(seen));

        const double val =
            have_val ? evaluate_loss(params, config, validation_set)
                     : report.train_loss.back();
        report.val_loss.push_back(val);
        if (!std::isfinite(val)) {
            report.diverged = true;
            break;
        }
        if (val < best_val) {
            best_val = val;
            best = params;
            best_epoch = epoch;
            patience_left = config.validation_patience;
        } else if (--patience_left <= 0) {
            break;
        }
    }

    report.best_epoch = best_epoch;
    report.best_val_loss = best_val;
    report.thresholds = best.materialized_thresholds();
    return {best, report};
}

int predict(const MrnnParams& params, const MrnnConfig& config, const Grid& grid,
            const Alternative& alt) {
    const auto enc = encode(alt, grid);
    const auto trace = forward(params, config, enc);
    return assign(trace.comprehensive, params.class_structure());
}

MarginalTable export_marginals(const MrnnParams& params, const MrnnConfig& config,
                               const Grid& grid,
                               const std::vector<EncodedAlternative>& sample) {
    MarginalTable table;
    EncodedAlternative probe;
    probe.id = "probe";
    probe.m = config.m;
    probe.horizon = config.horizon;
    probe.gamma = config.gamma;
    probe.v.assign(static_cast<std::size_t>(config.m) * config.horizon *
                       config.gamma,
                   0.0);
    if (!sample.empty()) {
        for (const auto& e : sample)
            for (std::size_t c = 0; c < probe.v.size(); ++c) probe.v[c] += e.v[c];
        for (double& x : probe.v) x /= static_cast<double>(sample.size());
    }

    for (int j = 0; j < config.m; ++j)
        for (int t = 0; t < config.horizon; ++t) {
            EncodedAlternative cur = probe;
            for (int k = 0; k <= config.gamma; ++k) {
                // A characteristic point encodes to k ones followed by zeros.
                for (int kk = 0; kk < config.gamma; ++kk)
                    cur.v[cur.idx(j, t, kk)] = kk < k ? 1.0 : 0.0;
                const auto trace = forward(params, config, cur);
                table.marginals.push_back({j + 1, t + 1, k, grid.point(j, t, k),
                                           trace.sub_marginal[t][j]});
            }
        }

    for (const auto& e : sample) {
        const auto trace = forward(params, config, e);
        for (int j = 0; j < config.m; ++j)
            for (int t = 1; t < config.horizon; ++t)
                table.discounts.push_back(
                    {e.id, j + 1, t, trace.discount[t - 1][j]});
    }
    return table;
}

}  // namespace tempref::mrnn
