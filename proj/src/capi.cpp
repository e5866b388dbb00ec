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

#include "tempref/capi.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tempref/dgp.hpp"
#include "tempref/eval.hpp"
#include "tempref/io.hpp"

using nlohmann::json;
using namespace tempref;

struct ts_dataset {
    Dataset data;
};

struct ts_model {
    Model model;
};

namespace {

thread_local std::string g_last_error;

/// Thrown for malformed configs and arguments; maps to TS_ERR_USAGE.
class UsageError : public Error {
public:
    using Error::Error;
};

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return TS_OK;
    } catch (const UsageError& e) {
        return fail(TS_ERR_USAGE, e.what());
    } catch (const json::exception& e) {
        return fail(TS_ERR_USAGE, std::string("bad config: ") + e.what());
    } catch (const std::exception& e) {
        return fail(TS_ERR_RUNTIME, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!j.is_object()) throw UsageError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw UsageError("config: unknown key '" + where + "." + key + "'");
    }
}

struct RunConfig {
    std::optional<std::string> dataset_path;
    std::optional<dgp::DgpConfig> dgp_config;
    eval::ExperimentConfig experiment;  // holds model options, k, seed, beta, jobs
    std::string output_dir = "out";
};

RunConfig parse_run_config(const char* config_json) {
    if (!config_json) throw UsageError("config: null document");
    json j;
    try {
        j = json::parse(config_json);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, {"dataset", "dgp", "model", "eval", "output"}, "");

    RunConfig rc;
    if (j.contains("dataset")) {
        check_keys(j["dataset"], {"path"}, "dataset");
        rc.dataset_path = j["dataset"].at("path").get<std::string>();
    }
    if (j.contains("dgp")) {
        check_keys(j["dgp"], {"kind", "n", "seed"}, "dgp");
        dgp::DgpConfig dc;
        try {
            dc.kind = dgp::kind_from_string(
                j["dgp"].value("kind", std::string("basic")));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        dc.n_samples = j["dgp"].value("n", 3000);
        dc.seed = j["dgp"].value("seed", std::uint64_t{0});
        rc.dgp_config = dc;
    }
    if (rc.dataset_path && rc.dgp_config)
        throw UsageError("config: give either dataset.path or dgp, not both");
    if (!rc.dataset_path && !rc.dgp_config)
        throw UsageError("config: a dataset source (dataset.path or dgp) is required");

    auto& mo = rc.experiment.model;
    if (j.contains("model")) {
        check_keys(j["model"],
                   {"kind", "gamma", "tau", "c_param", "solver", "pair_cap",
                    "hidden_size", "q_hidden", "epochs", "learning_rate",
                    "batch_size", "validation_patience"},
                   "model");
        const auto& m = j["model"];
        mo.kind = m.value("kind", std::string("tpl"));
        if (mo.kind != "tpl" && mo.kind != "mrnn")
            throw UsageError("config: model.kind must be 'tpl' or 'mrnn'");
        mo.gamma = m.value("gamma", 4);
        mo.tau = m.value("tau", 0.9);
        mo.c_param = m.value("c_param", 1.0);
        mo.solver = m.value("solver", std::string("dual"));
        if (mo.solver != "dual" && mo.solver != "primal")
            throw UsageError("config: model.solver must be 'dual' or 'primal'");
        if (m.contains("pair_cap"))
            mo.pair_cap = m["pair_cap"].get<std::size_t>();
        mo.mrnn.hidden_size = m.value("hidden_size", 16);
        mo.mrnn.q_hidden = m.value("q_hidden", 8);
        mo.mrnn.epochs = m.value("epochs", 200);
        mo.mrnn.learning_rate = m.value("learning_rate", 1e-2);
        mo.mrnn.batch_size = m.value("batch_size", 32);
        mo.mrnn.validation_patience = m.value("validation_patience", 20);
    }
    if (j.contains("eval")) {
        check_keys(j["eval"], {"k", "seed", "beta", "jobs"}, "eval");
        rc.experiment.k = j["eval"].value("k", 5);
        rc.experiment.seed = j["eval"].value("seed", std::uint64_t{0});
        rc.experiment.beta = j["eval"].value("beta", 1.0);
        rc.experiment.jobs = j["eval"].value("jobs", 1);
    }
    if (j.contains("output")) {
        check_keys(j["output"], {"dir"}, "output");
        rc.output_dir = j["output"].value("dir", std::string("out"));
    }
    return rc;
}

Dataset obtain_dataset(const RunConfig& rc) {
    if (rc.dataset_path) return io::load_dataset(*rc.dataset_path);
    return dgp::generate(*rc.dgp_config).first;
}

json metrics_to_json(const eval::MetricsReport& m) {
    return json{{"precision", m.precision}, {"recall", m.recall},
                {"f_score", m.f_score},     {"macro_f", m.macro_f},
                {"accuracy", m.accuracy},   {"beta", m.beta}};
}

json aggregate_to_json(const eval::Aggregate& a) {
    return json{{"mean", a.mean}, {"stddev", a.stddev}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

extern "C" {

const char* ts_last_error(void) { return g_last_error.c_str(); }

void ts_string_free(char* s) { std::free(s); }

int ts_dataset_generate(const char* kind, int n_samples, uint64_t seed,
                        ts_dataset** out) {
    return guarded([&] {
        if (!kind || !out) throw UsageError("null argument");
        dgp::DgpConfig cfg;
        try {
            cfg.kind = dgp::kind_from_string(kind);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        if (n_samples <= 0) throw UsageError("n_samples must be positive");
        cfg.n_samples = n_samples;
        cfg.seed = seed;
        *out = new ts_dataset{dgp::generate(cfg).first};
    });
}

int ts_dataset_load(const char* path, ts_dataset** out) {
    return guarded([&] {
        if (!path || !out) throw UsageError("null argument");
        *out = new ts_dataset{io::load_dataset(path)};
    });
}

int ts_dataset_save(const ts_dataset* dataset, const char* path) {
    return guarded([&] {
        if (!dataset || !path) throw UsageError("null argument");
        io::save_dataset(dataset->data, path);
    });
}

int ts_dataset_info(const ts_dataset* dataset, int* n, int* m, int* horizon,
                    int* class_count) {
    return guarded([&] {
        if (!dataset) throw UsageError("null dataset");
        if (n) *n = static_cast<int>(dataset->data.size());
        if (m) *m = dataset->data.m();
        if (horizon) *horizon = dataset->data.horizon;
        if (class_count) *class_count = dataset->data.class_count;
    });
}

int ts_dataset_positive_fraction(const ts_dataset* dataset, double* out) {
    return guarded([&] {
        if (!dataset || !out) throw UsageError("null argument");
        std::size_t labeled = 0, positive = 0;
        for (const auto& alt : dataset->data.alternatives)
            if (alt.label) {
                ++labeled;
                if (*alt.label == dataset->data.class_count) ++positive;
            }
        if (labeled == 0) throw Error("dataset has no labels");
        *out = static_cast<double>(positive) / static_cast<double>(labeled);
    });
}

int ts_dataset_id(const ts_dataset* dataset, size_t index, const char** out) {
    return guarded([&] {
        if (!dataset || !out) throw UsageError("null argument");
        if (index >= dataset->data.size())
            throw UsageError("index out of range");
        *out = dataset->data.alternatives[index].id.c_str();
    });
}

void ts_dataset_free(ts_dataset* dataset) { delete dataset; }

int ts_model_load(const char* path, ts_model** out) {
    return guarded([&] {
        if (!path || !out) throw UsageError("null argument");
        *out = new ts_model{io::load_model(path)};
    });
}

int ts_model_save(const ts_model* model, const char* path) {
    return guarded([&] {
        if (!model || !path) throw UsageError("null argument");
        io::save_model(model->model, path);
    });
}

int ts_model_predict(const ts_model* model, const ts_dataset* dataset,
                     int* out_classes) {
    return guarded([&] {
        if (!model || !dataset || !out_classes) throw UsageError("null argument");
        for (std::size_t i = 0; i < dataset->data.size(); ++i)
            out_classes[i] = model->model.predict(dataset->data.alternatives[i]);
    });
}

int ts_model_export(const ts_model* model, const ts_dataset* dataset,
                    const char* out_dir) {
    return guarded([&] {
        if (!model || !dataset || !out_dir) throw UsageError("null argument");
        std::vector<EncodedAlternative> sample;
        const std::size_t cap = 100;  // keep discounts.csv readable
        for (std::size_t i = 0; i < std::min(cap, dataset->data.size()); ++i)
            sample.push_back(
                encode(dataset->data.alternatives[i], model->model.grid));
        io::export_tables(model->model, sample, out_dir);
    });
}

void ts_model_free(ts_model* model) { delete model; }

int ts_config_train(const char* config_json, char** report_out) {
    return guarded([&] {
        const RunConfig rc = parse_run_config(config_json);
        const Dataset data = obtain_dataset(rc);

        const auto split = eval::kfold_split(data.size(), rc.experiment.k,
                                             {0.6, 0.2, 0.2},
                                             rc.experiment.seed);
        const auto& fold = split.folds[0];
        const Model model = eval::train_model(data, fold.train, fold.validation,
                                              rc.experiment.model,
                                              rc.experiment.seed);

        std::filesystem::create_directories(rc.output_dir);
        const auto model_path =
            (std::filesystem::path(rc.output_dir) / "model.json").string();
        io::save_model(model, model_path);

        std::vector<int> truth, pred;
        for (std::size_t i : fold.test) {
            truth.push_back(*data.alternatives[i].label);
            pred.push_back(model.predict(data.alternatives[i]));
        }
        const auto m = eval::metrics(
            eval::confusion(truth, pred, data.class_count), rc.experiment.beta);

        json report{{"schema_version", 1},
                    {"command", "train"},
                    {"model", {{"kind", model.kind}, {"path", model_path}}},
                    {"data",
                     {{"n", data.size()},
                      {"n_train", fold.train.size()},
                      {"n_validation", fold.validation.size()},
                      {"n_test", fold.test.size()}}},
                    {"test_metrics", metrics_to_json(m)}};
        const std::string text = report.dump(2) + "\n";
        write_text_file((std::filesystem::path(rc.output_dir) / "report.json")
                            .string(),
                        text);
        if (report_out) *report_out = dup_string(text);
    });
}

int ts_config_evaluate(const char* config_json, char** report_out) {
    return guarded([&] {
        const RunConfig rc = parse_run_config(config_json);
        const Dataset data = obtain_dataset(rc);
        const auto result = eval::run_experiment(data, rc.experiment);

        std::filesystem::create_directories(rc.output_dir);
        json folds = json::array();
        for (std::size_t f = 0; f < result.folds.size(); ++f) {
            const auto& fo = result.folds[f];
            const auto model_path =
                (std::filesystem::path(rc.output_dir) /
                 ("model_fold" + std::to_string(f) + ".json"))
                    .string();
            io::save_model(fo.model, model_path);
            folds.push_back(json{{"fold", f},
                                 {"metrics", metrics_to_json(fo.metrics)},
                                 {"train_seconds", fo.train_seconds},
                                 {"eval_seconds", fo.eval_seconds},
                                 {"model_path", model_path}});
        }

        json agg{{"accuracy", aggregate_to_json(result.accuracy)},
                 {"macro_f", aggregate_to_json(result.macro_f)}};
        json pcf = json::array();
        for (const auto& a : result.per_class_f) pcf.push_back(aggregate_to_json(a));
        agg["per_class_f"] = pcf;

        json report{{"schema_version", 1},
                    {"command", "evaluate"},
                    {"model_kind", rc.experiment.model.kind},
                    {"k", rc.experiment.k},
                    {"seed", rc.experiment.seed},
                    {"n", data.size()},
                    {"folds", folds},
                    {"aggregate", agg},
                    {"total_seconds", result.total_seconds}};
        const std::string text = report.dump(2) + "\n";
        write_text_file((std::filesystem::path(rc.output_dir) / "report.json")
                            .string(),
                        text);

        std::ostringstream human;
        human << "model: " << rc.experiment.model.kind << "  k: "
              << rc.experiment.k << "  n: " << data.size() << "\n";
        human << "macro F: " << io::format_double(result.macro_f.mean) << " +- "
              << io::format_double(result.macro_f.stddev) << "\n";
        human << "accuracy: " << io::format_double(result.accuracy.mean)
              << " +- " << io::format_double(result.accuracy.stddev) << "\n";
        for (std::size_t f = 0; f < result.folds.size(); ++f)
            human << "fold " << f << ": macro F "
                  << io::format_double(result.folds[f].metrics.macro_f)
                  << ", accuracy "
                  << io::format_double(result.folds[f].metrics.accuracy) << "\n";
        write_text_file(
            (std::filesystem::path(rc.output_dir) / "report.txt").string(),
            human.str());

        if (report_out) *report_out = dup_string(text);
    });
}

}  // extern "C"
