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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "tempref/mrnn.hpp"

using namespace tempref;
using namespace tempref::mrnn;

namespace {

// Random staircase encodings consistent with the given shape.
EncodedAlternative random_encoded(const MrnnConfig& cfg, std::mt19937_64& rng,
                                  int label) {
    std::uniform_real_distribution<double> unif(0.0, static_cast<double>(cfg.gamma));
    EncodedAlternative e;
    e.label = label;
    e.m = cfg.m;
    e.horizon = cfg.horizon;
    e.gamma = cfg.gamma;
    e.v.resize(static_cast<std::size_t>(cfg.m) * cfg.horizon * cfg.gamma);
    for (int j = 0; j < cfg.m; ++j)
        for (int t = 0; t < cfg.horizon; ++t) {
            const double level = unif(rng);
            for (int k = 0; k < cfg.gamma; ++k)
                e.v[e.idx(j, t, k)] = std::clamp(level - k, 0.0, 1.0);
        }
    return e;
}

double batch_loss(const MrnnParams& params, const MrnnConfig& cfg,
                  const std::vector<EncodedAlternative>& batch) {
    std::vector<double> u;
    std::vector<int> labels;
    for (const auto& e : batch) {
        u.push_back(forward(params, cfg, e).comprehensive);
        labels.push_back(*e.label);
    }
    return ordinal_loss(u, labels, params.materialized_thresholds()).mean;
}

// Shifts every raw parameter away from the ReLU kink so central differences
// stay on one side of it.
MrnnParams shifted_init(const MrnnConfig& cfg, std::uint64_t seed) {
    MrnnParams params = MrnnParams::init(cfg, seed);
    std::vector<double> flat = params.flatten();
    for (double& x : flat) x += 0.05;
    params.unflatten(flat);
    return params;
}

}  // namespace

TEST_CASE("forward with zero parameters yields a zero comprehensive value") {
    MrnnConfig cfg;
    cfg.m = 2;
    cfg.horizon = 3;
    cfg.gamma = 2;
    cfg.hidden_size = 4;
    cfg.q_hidden = 2;
    const MrnnParams params = MrnnParams::zeros(cfg);
    std::mt19937_64 rng(1);
    const EncodedAlternative e = random_encoded(cfg, rng, 1);
    const ForwardTrace trace = forward(params, cfg, e);
    CHECK(trace.comprehensive == 0.0);
    for (const auto& row : trace.sub_marginal)
        for (double f : row) CHECK(f == 0.0);
}

TEST_CASE("class_probabilities matches the logistic-difference table") {
    const std::vector<double> thresholds = {1.0, 4.0};
    struct Row {
        double u;
        double p1, p2, p3;
    };
    for (const Row& r : {Row{0.5, 0.6225, 0.3482, 0.0293},
                         Row{1.5, 0.3775, 0.5466, 0.0759},
                         Row{5.0, 0.0180, 0.2510, 0.7311}}) {
        const auto p = class_probabilities(r.u, thresholds);
        REQUIRE(p.size() == 3);
        CHECK(p[0] == doctest::Approx(r.p1).epsilon(1e-3));
        CHECK(p[1] == doctest::Approx(r.p2).epsilon(1e-3));
        CHECK(p[2] == doctest::Approx(r.p3).epsilon(1e-3));
        CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("ordinal_loss reproduces the worked negative log-likelihoods") {
    const std::vector<double> u = {0.5, 1.5, 5.0};
    const std::vector<int> labels = {1, 2, 3};
    const LossResult loss = ordinal_loss(u, labels, {1.0, 4.0});
    REQUIRE(loss.per_sample.size() == 3);
    CHECK(loss.per_sample[0] == doctest::Approx(0.4741).epsilon(1e-3));
    CHECK(loss.per_sample[1] == doctest::Approx(0.6040).epsilon(1e-3));
    CHECK(loss.per_sample[2] == doctest::Approx(0.3133).epsilon(1e-3));
    CHECK(loss.mean == doctest::Approx(0.4638).epsilon(1e-3));
}

TEST_CASE("reverse-mode gradients match central finite differences") {
    MrnnConfig cfg;
    cfg.m = 2;
    cfg.horizon = 3;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    cfg.class_count = 3;
    MrnnParams params = shifted_init(cfg, 99);

    std::mt19937_64 rng(5);
    std::vector<EncodedAlternative> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_encoded(cfg, rng, 1 + (i % 3)));
    std::vector<const EncodedAlternative*> ptrs;
    for (const auto& e : batch) ptrs.push_back(&e);

    const GradientResult result = gradients(params, cfg, ptrs);
    CHECK(result.mean_loss == doctest::Approx(batch_loss(params, cfg, batch)).epsilon(1e-12));

    const std::vector<double> flat = params.flatten();
    const std::vector<double> grad_flat = result.grad.flatten();
    REQUIRE(grad_flat.size() == flat.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::vector<double> bumped = flat;
        bumped[i] = flat[i] + h;
        params.unflatten(bumped);
        const double up = batch_loss(params, cfg, batch);
        bumped[i] = flat[i] - h;
        params.unflatten(bumped);
        const double down = batch_loss(params, cfg, batch);
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(fd - grad_flat[i]);
        const double tol = std::max(1e-7, 1e-4 * std::abs(fd));
        CAPTURE(i);
        CHECK(err <= tol);
    }
}

TEST_CASE("gradients are invariant to duplicating every batch element") {
    MrnnConfig cfg;
    cfg.m = 1;
    cfg.horizon = 2;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    cfg.class_count = 2;
    const MrnnParams params = shifted_init(cfg, 4);
    std::mt19937_64 rng(6);
    const EncodedAlternative a = random_encoded(cfg, rng, 1);
    const EncodedAlternative b = random_encoded(cfg, rng, 2);

    const auto g1 = gradients(params, cfg, {&a, &b}).grad.flatten();
    const auto g2 = gradients(params, cfg, {&a, &a, &b, &b}).grad.flatten();
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
}

TEST_CASE("at the all-zero point the masked weights receive zero gradient") {
    MrnnConfig cfg;
    cfg.m = 1;
    cfg.horizon = 2;
    cfg.gamma = 1;
    cfg.hidden_size = 2;
    cfg.q_hidden = 2;
    cfg.class_count = 3;
    const MrnnParams params = MrnnParams::zeros(cfg);
    std::mt19937_64 rng(8);
    const EncodedAlternative a = random_encoded(cfg, rng, 1);
    const EncodedAlternative b = random_encoded(cfg, rng, 3);
    const GradientResult result = gradients(params, cfg, {&a, &b});
    for (const auto& w : result.grad.w_v) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& w : result.grad.w_h) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    // The thresholds still learn: both samples sit at U = 0 on the wrong side.
    CHECK(std::abs(result.grad.threshold_base) > 0.0);
}

TEST_CASE("materialized thresholds are strictly increasing") {
    MrnnConfig cfg;
    cfg.class_count = 4;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const MrnnParams params = MrnnParams::init(cfg, seed);
        const auto th = params.materialized_thresholds();
        REQUIRE(th.size() == 3);
        for (std::size_t i = 1; i < th.size(); ++i)
            CHECK(th[i] >= th[i - 1] + 1e-4);
    }
}

TEST_CASE("training separates a toy two-class problem") {
    MrnnConfig cfg;
    cfg.m = 1;
    cfg.horizon = 2;
    cfg.gamma = 2;
    cfg.hidden_size = 4;
    cfg.q_hidden = 2;
    cfg.class_count = 2;
    cfg.epochs = 300;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 8;
    cfg.seed = 17;

    // Raw performances in [0, 2]; class 2 has uniformly high series.
    Dataset ds;
    ds.criteria_names = {"g1"};
    ds.horizon = 2;
    ds.class_count = 2;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lo(0.0, 0.3);
    std::uniform_real_distribution<double> hi(1.7, 2.0);
    for (int i = 0; i < 60; ++i) {
        Alternative a;
        a.id = "t" + std::to_string(i);
        const bool positive = i % 2 == 0;
        a.series = {{positive ? hi(rng) : lo(rng), positive ? hi(rng) : lo(rng)}};
        a.label = positive ? 2 : 1;
        ds.alternatives.push_back(a);
    }
    const Grid grid = build_grid(ds, cfg.gamma);
    std::vector<EncodedAlternative> train_set, val_set;
    for (std::size_t i = 0; i < ds.alternatives.size(); ++i) {
        EncodedAlternative e = encode(ds.alternatives[i], grid);
        (i % 5 == 4 ? val_set : train_set).push_back(std::move(e));
    }

    const auto [params, report] = train(train_set, val_set, cfg);
    CHECK_FALSE(report.diverged);
    CHECK(report.best_epoch >= 0);
    REQUIRE(report.thresholds.size() == 1);

    int correct = 0, total = 0;
    for (const Alternative& alt : ds.alternatives) {
        const int pred = predict(params, cfg, grid, alt);
        const int via_assign =
            assign(forward(params, cfg, encode(alt, grid)).comprehensive,
                   params.class_structure());
        CHECK(pred == via_assign);
        correct += pred == *alt.label;
        ++total;
    }
    CHECK(correct == total);
}

TEST_CASE("training is reproducible for a fixed seed") {
    MrnnConfig cfg;
    cfg.m = 1;
    cfg.horizon = 2;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    cfg.epochs = 20;
    cfg.batch_size = 4;
    cfg.seed = 5;
    std::mt19937_64 rng(10);
    std::vector<EncodedAlternative> train_set, val_set;
    for (int i = 0; i < 24; ++i) train_set.push_back(random_encoded(cfg, rng, 1 + i % 2));
    for (int i = 0; i < 8; ++i) val_set.push_back(random_encoded(cfg, rng, 1 + i % 2));

    const auto [p1, r1] = train(train_set, val_set, cfg);
    const auto [p2, r2] = train(train_set, val_set, cfg);
    CHECK(r1.train_loss == r2.train_loss);
    CHECK(r1.val_loss == r2.val_loss);
    CHECK(p1.flatten() == p2.flatten());
}

TEST_CASE("criteria are processed independently") {
    MrnnConfig cfg;
    cfg.m = 3;
    cfg.horizon = 4;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    const MrnnParams params = MrnnParams::init(cfg, 12);
    std::mt19937_64 rng(13);
    const EncodedAlternative base = random_encoded(cfg, rng, 1);
    EncodedAlternative perturbed = base;
    for (int t = 0; t < cfg.horizon; ++t)
        for (int k = 0; k < cfg.gamma; ++k)
            perturbed.v[perturbed.idx(0, t, k)] = 1.0;  // rewrite criterion 1 only

    const ForwardTrace a = forward(params, cfg, base);
    const ForwardTrace b = forward(params, cfg, perturbed);
    for (int t = 0; t < cfg.horizon; ++t)
        for (int j = 1; j < cfg.m; ++j) {
            CHECK((a.hidden[t][j].array() == b.hidden[t][j].array()).all());
            CHECK(a.sub_marginal[t][j] == b.sub_marginal[t][j]);
            CHECK(a.marginal[t][j] == b.marginal[t][j]);
            if (t < cfg.horizon - 1) CHECK(a.discount[t][j] == b.discount[t][j]);
        }
}

TEST_CASE("flatten and unflatten round-trip bit-exactly") {
    MrnnConfig cfg;
    cfg.m = 2;
    cfg.horizon = 3;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    cfg.class_count = 4;
    const MrnnParams params = MrnnParams::init(cfg, 77);
    const std::vector<double> flat = params.flatten();
    MrnnParams copy = MrnnParams::zeros(cfg);
    copy.unflatten(flat);
    CHECK(copy.flatten() == flat);
}

TEST_CASE("export_marginals produces the full probe table") {
    MrnnConfig cfg;
    cfg.m = 2;
    cfg.horizon = 3;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;

    Dataset ds;
    ds.criteria_names = {"g1", "g2"};
    ds.horizon = 3;
    ds.class_count = 2;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 6; ++i) {
        Alternative a;
        a.id = "e" + std::to_string(i);
        a.series = {{unif(rng), unif(rng), unif(rng)},
                    {unif(rng), unif(rng), unif(rng)}};
        ds.alternatives.push_back(a);
    }
    const Grid grid = build_grid(ds, cfg.gamma);
    std::vector<EncodedAlternative> sample;
    for (const auto& alt : ds.alternatives) sample.push_back(encode(alt, grid));

    SUBCASE("zero parameters give zero sub-marginals") {
        const MarginalTable table =
            export_marginals(MrnnParams::zeros(cfg), cfg, grid, sample);
        CHECK(table.marginals.size() ==
              static_cast<std::size_t>(cfg.m * cfg.horizon * (cfg.gamma + 1)));
        for (const auto& row : table.marginals) CHECK(row.sub_marginal == 0.0);
    }
    SUBCASE("random parameters give valid discount traces") {
        const MarginalTable table =
            export_marginals(MrnnParams::init(cfg, 3), cfg, grid, sample);
        CHECK(table.discounts.size() ==
              sample.size() * static_cast<std::size_t>(cfg.m * (cfg.horizon - 1)));
        for (const auto& row : table.discounts) {
            CHECK(row.tau > 0.0);
            CHECK(row.tau < 1.0);
        }
    }
}
