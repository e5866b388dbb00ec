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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tempref/capi.h"

namespace {

// RAII for C-API handles so error paths stay simple.
struct DatasetHandle {
    ts_dataset* ptr = nullptr;
    ~DatasetHandle() { ts_dataset_free(ptr); }
};
struct ModelHandle {
    ts_model* ptr = nullptr;
    ~ModelHandle() { ts_model_free(ptr); }
};

int report_failure(int code) {
    std::fprintf(stderr, "error: %s\n", ts_last_error());
    return code == TS_ERR_USAGE ? 2 : 1;
}

std::string read_file(const std::string& path, bool& ok) {
    std::ifstream in(path);
    if (!in) {
        ok = false;
        return {};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    ok = true;
    return ss.str();
}

int cmd_generate(const std::string& kind, int n, std::uint64_t seed,
                 const std::string& out) {
    DatasetHandle ds;
    int rc = ts_dataset_generate(kind.c_str(), n, seed, &ds.ptr);
    if (rc != TS_OK) return report_failure(rc);
    rc = ts_dataset_save(ds.ptr, out.c_str());
    if (rc != TS_OK) return report_failure(rc);
    double positive = 0.0;
    rc = ts_dataset_positive_fraction(ds.ptr, &positive);
    if (rc != TS_OK) return report_failure(rc);
    std::printf("wrote %d samples to %s (%.1f%% positive)\n", n, out.c_str(),
                100.0 * positive);
    return 0;
}

int cmd_with_config(const std::string& config_path, bool evaluate) {
    bool ok = false;
    const std::string config = read_file(config_path, ok);
    if (!ok) {
        std::fprintf(stderr, "error: cannot read config '%s'\n",
                     config_path.c_str());
        return 1;
    }
    char* report = nullptr;
    const int rc = evaluate ? ts_config_evaluate(config.c_str(), &report)
                            : ts_config_train(config.c_str(), &report);
    if (rc != TS_OK) return report_failure(rc);
    std::fputs(report, stdout);
    ts_string_free(report);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
    ModelHandle model;
    int rc = ts_model_load(model_path.c_str(), &model.ptr);
    if (rc != TS_OK) return report_failure(rc);
    DatasetHandle ds;
    rc = ts_dataset_load(data_path.c_str(), &ds.ptr);
    if (rc != TS_OK) return report_failure(rc);

    int n = 0;
    rc = ts_dataset_info(ds.ptr, &n, nullptr, nullptr, nullptr);
    if (rc != TS_OK) return report_failure(rc);
    std::vector<int> classes(static_cast<std::size_t>(n));
    rc = ts_model_predict(model.ptr, ds.ptr, classes.data());
    if (rc != TS_OK) return report_failure(rc);

    std::ofstream out(out_path);
    if (!out) {
        std::fprintf(stderr, "error: cannot write '%s'\n", out_path.c_str());
        return 1;
    }
    out << "id,predicted_class\n";
    for (int i = 0; i < n; ++i) {
        const char* id = nullptr;
        rc = ts_dataset_id(ds.ptr, static_cast<std::size_t>(i), &id);
        if (rc != TS_OK) return report_failure(rc);
        out << id << "," << classes[static_cast<std::size_t>(i)] << "\n";
    }
    if (!out) {
        std::fprintf(stderr, "error: write failed for '%s'\n", out_path.c_str());
        return 1;
    }
    std::printf("wrote %d predictions to %s\n", n, out_path.c_str());
    return 0;
}

int cmd_export(const std::string& model_path, const std::string& data_path,
               const std::string& out_dir) {
    ModelHandle model;
    int rc = ts_model_load(model_path.c_str(), &model.ptr);
    if (rc != TS_OK) return report_failure(rc);
    DatasetHandle ds;
    rc = ts_dataset_load(data_path.c_str(), &ds.ptr);
    if (rc != TS_OK) return report_failure(rc);
    rc = ts_model_export(model.ptr, ds.ptr, out_dir.c_str());
    if (rc != TS_OK) return report_failure(rc);
    std::printf("wrote tables to %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preference learning for sorting with temporal criteria"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
    std::string kind = "basic";
    int n = 3000;
    std::uint64_t seed = 0;
    std::string out_path;
    gen->add_option("--kind", kind,
                    "basic | non_markovian | non_monotonic | non_independent")
        ->check(CLI::IsMember(
            {"basic", "non_markovian", "non_monotonic", "non_independent"}));
    gen->add_option("--n", n, "Sample count")->check(CLI::PositiveNumber);
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--out", out_path, "Output CSV path")->required();

    auto* train = app.add_subcommand("train", "Train one model from a config");
    std::string train_config;
    train->add_option("--config", train_config, "Run-config JSON path")
        ->required();

    auto* evaluate =
        app.add_subcommand("evaluate", "Cross-validated evaluation from a config");
    std::string eval_config;
    evaluate->add_option("--config", eval_config, "Run-config JSON path")
        ->required();

    auto* predict = app.add_subcommand("predict", "Assign classes to a dataset");
    std::string model_path, data_path, pred_out;
    predict->add_option("--model", model_path, "Model JSON path")->required();
    predict->add_option("--data", data_path, "Dataset CSV path")->required();
    predict->add_option("--out", pred_out, "Predictions CSV path")->required();

    auto* exp = app.add_subcommand("export", "Export marginal/discount tables");
    std::string exp_model, exp_data, exp_dir;
    exp->add_option("--model", exp_model, "Model JSON path")->required();
    exp->add_option("--data", exp_data, "Dataset CSV path")->required();
    exp->add_option("--out", exp_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen->parsed()) return cmd_generate(kind, n, seed, out_path);
    if (train->parsed()) return cmd_with_config(train_config, false);
    if (evaluate->parsed()) return cmd_with_config(eval_config, true);
    if (predict->parsed()) return cmd_predict(model_path, data_path, pred_out);
    if (exp->parsed()) return cmd_export(exp_model, exp_data, exp_dir);
    return 2;
}
