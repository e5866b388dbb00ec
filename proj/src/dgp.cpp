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

#include "tempref/dgp.hpp"

#include <cmath>
#include <numbers>

namespace tempref::dgp {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// splitmix64 over (seed, index) gives independent per-sample streams.
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Kind kind_from_string(const std::string& name) {
    if (name == "basic") return Kind::Basic;
    if (name == "non_markovian") return Kind::NonMarkovian;
    if (name == "non_monotonic") return Kind::NonMonotonic;
    if (name == "non_independent") return Kind::NonIndependent;
    throw Error("unknown generator kind '" + name + "'");
}

std::string kind_to_string(Kind kind) {
    switch (kind) {
        case Kind::Basic: return "basic";
        case Kind::NonMarkovian: return "non_markovian";
        case Kind::NonMonotonic: return "non_monotonic";
        case Kind::NonIndependent: return "non_independent";
    }
    throw Error("invalid kind");
}

BasisSet BasisSet::standard() {
    BasisSet b;
    for (int i = 0; i < 9; ++i) b.omegas.push_back(0.10 + 0.05 * i);
    return b;
}

double BasisSet::evaluate(const std::vector<double>& beta, int t) const {
    double g = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i)
        g += beta[i] * std::sin(omegas[i] * std::numbers::pi * t);
    return g;
}

std::vector<double> gen_series(const BasisSet& basis, int horizon,
                               std::mt19937_64& rng,
                               std::vector<double>* beta_out) {
    // Dirichlet(1,...,1): normalized unit exponentials.
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> beta(basis.omegas.size());
    double total = 0.0;
    for (double& x : beta) {
        x = expo(rng);
        total += x;
    }
    for (double& x : beta) x /= total;
    if (beta_out) *beta_out = beta;

    std::vector<double> g(horizon);
    for (int t = 1; t <= horizon; ++t) g[t - 1] = basis.evaluate(beta, t);
    return g;
}

std::vector<std::vector<double>> true_sub_marginal(
    Kind kind, const std::vector<std::vector<double>>& g) {
    const int m = static_cast<int>(g.size());
    const int T = static_cast<int>(g[0].size());

    if (kind == Kind::NonIndependent) {
        if (m != 4) throw DimensionMismatch("non_independent needs m = 4");
        std::vector<std::vector<double>> f(2, std::vector<double>(T));
        for (int t = 0; t < T; ++t) {
            f[0][t] = std::tanh(g[0][t] + g[1][t]);
            f[1][t] = std::tanh(g[2][t] + g[3][t]);
        }
        return f;
    }

    std::vector<std::vector<double>> f(m, std::vector<double>(T));
    for (int j = 0; j < m; ++j)
        for (int t = 0; t < T; ++t) {
            switch (kind) {
                case Kind::Basic:
                    f[j][t] = std::tanh(g[j][t]);
                    break;
                case Kind::NonMarkovian:
                    f[j][t] = std::tanh(g[j][t] + (t > 0 ? g[j][t - 1] : 0.0));
                    break;
                case Kind::NonMonotonic:
                    f[j][t] = std::sin(std::pow(2.0, j) * std::numbers::pi *
                                       g[j][t]);
                    break;
                default:
                    throw Error("invalid kind");
            }
        }
    return f;
}

void true_marginal_recurrence(const std::vector<std::vector<double>>& f,
                              std::vector<std::vector<double>>& u,
                              std::vector<std::vector<double>>& tau) {
    const int C = static_cast<int>(f.size());
    const int T = static_cast<int>(f[0].size());
    u.assign(C, std::vector<double>(T, 0.0));
    tau.assign(C, std::vector<double>(std::max(0, T - 1), 0.0));
    for (int c = 0; c < C; ++c) {
        double u_prev = 0.0;       // u^0
        double u_prev_prev = 0.0;  // u^{-1}
        for (int t = 0; t < T; ++t) {
            if (t == 0) {
                u[c][t] = f[c][t];
            } else {
                const double d = sigmoid(u_prev_prev);
                tau[c][t - 1] = d;
                u[c][t] = d * u_prev + (1.0 - d) * f[c][t];
            }
            u_prev_prev = u_prev;
            u_prev = u[c][t];
        }
    }
}

std::pair<Dataset, GroundTruth> generate(const DgpConfig& config) {
    if (config.n_samples <= 0) throw Error("generate: n_samples must be > 0");
    const auto basis = BasisSet::standard();

    Dataset ds;
    ds.horizon = config.horizon;
    ds.class_count = 2;
    for (int j = 1; j <= config.m; ++j)
        ds.criteria_names.push_back("g" + std::to_string(j));

    GroundTruth truth;
    truth.samples.resize(config.n_samples);
    ds.alternatives.resize(config.n_samples);

    for (int i = 0; i < config.n_samples; ++i) {
        std::mt19937_64 rng(mix(config.seed) ^ mix(static_cast<std::uint64_t>(i)));
        SampleTruth& st = truth.samples[i];
        st.beta.resize(config.m);

        std::vector<std::vector<double>> g(config.m);
        for (int j = 0; j < config.m; ++j)
            g[j] = gen_series(basis, config.horizon, rng, &st.beta[j]);

        st.sub_marginal = true_sub_marginal(config.kind, g);
        true_marginal_recurrence(st.sub_marginal, st.marginal, st.discount);

        double total = 0.0;
        for (const auto& u : st.marginal) total += u.back();
        st.comprehensive = sigmoid(total);
        st.label = st.comprehensive >= 0.5 ? 2 : 1;

        Alternative& alt = ds.alternatives[i];
        alt.id = "s" + std::to_string(i);
        alt.series = std::move(g);
        alt.label = st.label;
    }
    ds.validate();
    return {std::move(ds), std::move(truth)};
}

}  // namespace tempref::dgp
