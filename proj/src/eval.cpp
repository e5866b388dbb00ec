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

#include "tempref/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace tempref::eval {

long long ConfusionMatrix::total() const {
    long long n = 0;
    for (const auto& row : counts)
        for (long long c : row) n += c;
    return n;
}

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& pred, int class_count) {
    if (truth.size() != pred.size())
        throw DimensionMismatch("confusion: length mismatch");
    ConfusionMatrix cm;
    cm.counts.assign(class_count, std::vector<long long>(class_count, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = pred[i];
        if (t < 1 || t > class_count || p < 1 || p > class_count)
            throw LabelOutOfRange("confusion: label outside 1.." +
                                  std::to_string(class_count));
        ++cm.counts[t - 1][p - 1];
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm, double beta) {
    const int H = cm.class_count();
    const long long n = cm.total();
    if (H == 0 || n == 0) throw Error("metrics: empty confusion matrix");

    MetricsReport r;
    r.beta = beta;
    r.precision.resize(H);
    r.recall.resize(H);
    r.f_score.resize(H);
    long long diag = 0;
    for (int i = 0; i < H; ++i) {
        long long row = 0, col = 0;
        for (int j = 0; j < H; ++j) {
            row += cm.counts[i][j];
            col += cm.counts[j][i];
        }
        const long long tp = cm.counts[i][i];
        diag += tp;
        r.recall[i] = row > 0 ? static_cast<double>(tp) / row : 0.0;
        r.precision[i] = col > 0 ? static_cast<double>(tp) / col : 0.0;
        const double denom = beta * beta * r.recall[i] + r.precision[i];
        r.f_score[i] = denom > 0.0 ? (1.0 + beta * beta) * r.recall[i] *
                                         r.precision[i] / denom
                                   : 0.0;
    }
    r.macro_f = std::accumulate(r.f_score.begin(), r.f_score.end(), 0.0) / H;
    r.accuracy = static_cast<double>(diag) / n;
    return r;
}

FoldSplit kfold_split(std::size_t n, int k, std::array<double, 3> ratios,
                      std::uint64_t seed) {
    if (k < 2) throw Error("kfold_split: k must be >= 2");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
        throw Error("kfold_split: ratios must sum to 1");
    const std::size_t n_test = static_cast<std::size_t>(ratios[2] * n);
    const std::size_t n_val = static_cast<std::size_t>(ratios[1] * n);
    if (n_test == 0 || n_val == 0 || n_test + n_val >= n)
        throw TooFewSamples("kfold_split: a fold part would be empty");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    FoldSplit split;
    split.folds.resize(k);
    for (int f = 0; f < k; ++f) {
        const std::size_t start = (static_cast<std::size_t>(f) * n) / k;
        auto& fold = split.folds[f];
        std::size_t pos = start;
        auto take = [&](std::vector<std::size_t>& out, std::size_t count) {
            for (std::size_t i = 0; i < count; ++i) {
                out.push_back(perm[pos]);
                pos = (pos + 1) % n;
            }
        };
        take(fold.test, n_test);
        take(fold.validation, n_val);
        take(fold.train, n - n_test - n_val);
    }
    return split;
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    if (values.empty()) return a;
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / (values.size() - 1));
    }
    return a;
}

Model train_model(const Dataset& data, const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& validation_idx,
                  const ModelOptions& options, std::uint64_t seed) {
    Dataset train_sub;
    train_sub.horizon = data.horizon;
    train_sub.class_count = data.class_count;
    train_sub.criteria_names = data.criteria_names;
    for (std::size_t i : train_idx)
        train_sub.alternatives.push_back(data.alternatives[i]);

    Model model;
    model.kind = options.kind;
    model.grid = build_grid(train_sub, options.gamma);

    std::vector<EncodedAlternative> enc_train;
    enc_train.reserve(train_idx.size());
    for (const auto& alt : train_sub.alternatives)
        enc_train.push_back(encode(alt, model.grid));

    if (options.kind == "tpl") {
        const auto schedule = DiscountSchedule::fixed(options.tau, data.horizon);
        const auto pairs =
            tpl::derive_pairs(enc_train, schedule, options.pair_cap, seed);
        auto solved = options.solver == "primal"
                          ? tpl::solve_primal(pairs, options.c_param, data.m(),
                                              data.horizon, options.gamma)
                          : tpl::solve_dual(pairs, options.c_param, data.m(),
                                            data.horizon, options.gamma);
        tpl::TplModel tm;
        tm.pvf = std::move(solved.first);
        tm.schedule = schedule;
        tm.c_param = options.c_param;
        tm.classes = tpl::fit_thresholds(tm.pvf, schedule, enc_train,
                                         data.class_count,
                                         &tm.threshold_fallback);
        model.tpl = std::move(tm);
    } else if (options.kind == "mrnn") {
        mrnn::MrnnConfig cfg = options.mrnn;
        cfg.m = data.m();
        cfg.horizon = data.horizon;
        cfg.gamma = options.gamma;
        cfg.class_count = data.class_count;
        cfg.seed = seed;

        std::vector<EncodedAlternative> enc_val;
        for (std::size_t i : validation_idx)
            enc_val.push_back(encode(data.alternatives[i], model.grid));

        auto [params, report] = mrnn::train(enc_train, enc_val, cfg);
        if (report.diverged) throw Error("mrnn training diverged");
        model.mrnn_params = std::move(params);
        model.mrnn_config = cfg;
    } else {
        throw Error("unknown model kind '" + options.kind + "'");
    }
    return model;
}

ExperimentReport run_experiment(const Dataset& data,
                                const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto split = kfold_split(data.alternatives.size(), config.k,
                                   {0.6, 0.2, 0.2}, config.seed);

    ExperimentReport report;
    report.folds.resize(config.k);

    auto run_fold = [&](int f) {
        const auto& fold = split.folds[f];
        FoldOutcome& out = report.folds[f];
        const auto t_train = std::chrono::steady_clock::now();
        out.model = train_model(data, fold.train, fold.validation, config.model,
                                config.seed + static_cast<std::uint64_t>(f));
        const auto t_eval = std::chrono::steady_clock::now();

        std::vector<int> truth, pred;
        for (std::size_t i : fold.test) {
            const auto& alt = data.alternatives[i];
            if (!alt.label) throw Error("run_experiment: unlabeled test sample");
            truth.push_back(*alt.label);
            pred.push_back(out.model.predict(alt));
        }
        out.metrics = metrics(confusion(truth, pred, data.class_count),
                              config.beta);
        const auto t_done = std::chrono::steady_clock::now();
        out.train_seconds =
            std::chrono::duration<double>(t_eval - t_train).count();
        out.eval_seconds = std::chrono::duration<double>(t_done - t_eval).count();
    };

    if (config.jobs <= 1) {
        for (int f = 0; f < config.k; ++f) run_fold(f);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const int nw = std::min(config.jobs, config.k);
        for (int w = 0; w < nw; ++w)
            workers.emplace_back([&] {
                for (int f = next.fetch_add(1); f < config.k;
                     f = next.fetch_add(1))
                    run_fold(f);
            });
        for (auto& t : workers) t.join();
    }

    std::vector<double> acc, mf;
    std::vector<std::vector<double>> per_class(data.class_count);
    for (const auto& fold : report.folds) {
        acc.push_back(fold.metrics.accuracy);
        mf.push_back(fold.metrics.macro_f);
        for (int h = 0; h < data.class_count; ++h)
            per_class[h].push_back(fold.metrics.f_score[h]);
    }
    report.accuracy = aggregate(acc);
    report.macro_f = aggregate(mf);
    for (const auto& v : per_class) report.per_class_f.push_back(aggregate(v));
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

}  // namespace tempref::eval
