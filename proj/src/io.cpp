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

#include "tempref/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tempref::io {

using nlohmann::json;

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

constexpr int kSchemaVersion = 1;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ParseError("bad numeric cell at row " + std::to_string(row) +
                         ", column " + std::to_string(col) + ": '" + cell + "'");
    return value;
}

json grid_to_json(const Grid& grid) {
    return json{{"m", grid.m},
                {"horizon", grid.horizon},
                {"gamma", grid.gamma},
                {"alpha", grid.alpha},
                {"beta", grid.beta}};
}

Grid grid_from_json(const json& j) {
    Grid grid;
    grid.m = j.at("m").get<int>();
    grid.horizon = j.at("horizon").get<int>();
    grid.gamma = j.at("gamma").get<int>();
    grid.alpha = j.at("alpha").get<std::vector<double>>();
    grid.beta = j.at("beta").get<std::vector<double>>();
    const std::size_t cells = static_cast<std::size_t>(grid.m) * grid.horizon;
    if (grid.alpha.size() != cells || grid.beta.size() != cells)
        throw SchemaError("grid alpha/beta size mismatch");
    grid.degenerate.assign(cells, 0);
    grid.points.resize(cells * (grid.gamma + 1));
    for (std::size_t c = 0; c < cells; ++c) {
        const double a = grid.alpha[c], b = grid.beta[c];
        if (a == b) {
            grid.degenerate[c] = 1;
            grid.any_degenerate = true;
        }
        for (int k = 0; k <= grid.gamma; ++k)
            grid.points[c * (grid.gamma + 1) + k] =
                a + (static_cast<double>(k) / grid.gamma) * (b - a);
    }
    return grid;
}

json matrix_to_json(const Eigen::MatrixXd& w) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
    if (j.size() != static_cast<std::size_t>(rows))
        throw SchemaError("matrix row count mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (row.size() != static_cast<std::size_t>(cols))
            throw SchemaError("matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c)
            w(r, c) = row.at(c).get<double>();
    }
    return w;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index n) {
    if (j.size() != static_cast<std::size_t>(n))
        throw SchemaError("vector length mismatch");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = j.at(i).get<double>();
    return v;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "label")
        throw ParseError("bad header in '" + path +
                         "': expected id,label,g<j>_t<t>...");

    // Infer m and T from the g<j>_t<t> pattern, j outer.
    int m = 0, T = 0;
    for (std::size_t c = 2; c < header.size(); ++c) {
        int j = 0, t = 0;
        if (std::sscanf(header[c].c_str(), "g%d_t%d", &j, &t) != 2 || j < 1 ||
            t < 1)
            throw ParseError("bad header column '" + header[c] + "'");
        const std::size_t expect =
            2 + static_cast<std::size_t>(j - 1) * (T > 0 ? T : t);
        (void)expect;
        m = std::max(m, j);
        T = std::max(T, t);
    }
    if (header.size() != 2 + static_cast<std::size_t>(m) * T)
        throw ParseError("header column count does not match g<j>_t<t> grid");
    for (int j = 1; j <= m; ++j)
        for (int t = 1; t <= T; ++t) {
            const std::size_t c = 2 + static_cast<std::size_t>(j - 1) * T + (t - 1);
            char expect[32];
            std::snprintf(expect, sizeof(expect), "g%d_t%d", j, t);
            if (header[c] != expect)
                throw ParseError("header column " + std::to_string(c + 1) +
                                 " is '" + header[c] + "', expected '" + expect +
                                 "'");
        }

    Dataset ds;
    ds.horizon = T;
    for (int j = 1; j <= m; ++j)
        ds.criteria_names.push_back("g" + std::to_string(j));

    int max_label = 0;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        Alternative alt;
        alt.id = cells[0];
        if (!cells[1].empty()) {
            int label = 0;
            const auto* b = cells[1].data();
            auto [p, ec] = std::from_chars(b, b + cells[1].size(), label);
            if (ec != std::errc{} || p != b + cells[1].size() || label < 1)
                throw ParseError("bad label at row " + std::to_string(row));
            alt.label = label;
            max_label = std::max(max_label, label);
        }
        alt.series.assign(m, std::vector<double>(T));
        for (int j = 0; j < m; ++j)
            for (int t = 0; t < T; ++t) {
                const std::size_t c = 2 + static_cast<std::size_t>(j) * T + t;
                alt.series[j][t] = parse_double(cells[c], row, c + 1);
            }
        ds.alternatives.push_back(std::move(alt));
    }
    ds.class_count = std::max(max_label, 2);
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "id,label";
    for (int j = 1; j <= dataset.m(); ++j)
        for (int t = 1; t <= dataset.horizon; ++t)
            out << ",g" << j << "_t" << t;
    out << "\n";
    for (const auto& alt : dataset.alternatives) {
        out << alt.id << ",";
        if (alt.label) out << *alt.label;
        for (const auto& series : alt.series)
            for (double g : series) out << "," << format_double(g);
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void save_model(const Model& model, const std::string& path) {
    json j;
    j["kind"] = model.kind;
    j["schema_version"] = kSchemaVersion;
    j["grid"] = grid_to_json(model.grid);

    if (model.kind == "tpl") {
        const auto& tm = *model.tpl;
        j["tpl"] = json{{"delta_f", tm.pvf.delta_f},
                        {"offsets", tm.pvf.offsets},
                        {"tau", tm.schedule.tau},
                        {"thresholds", tm.classes.thresholds},
                        {"c_param", tm.c_param}};
    } else if (model.kind == "mrnn") {
        const auto& p = *model.mrnn_params;
        const auto& c = *model.mrnn_config;
        json cfg{{"m", c.m},
                 {"horizon", c.horizon},
                 {"gamma", c.gamma},
                 {"hidden_size", c.hidden_size},
                 {"class_count", c.class_count},
                 {"q_hidden", c.q_hidden},
                 {"epochs", c.epochs},
                 {"learning_rate", c.learning_rate},
                 {"batch_size", c.batch_size},
                 {"seed", c.seed},
                 {"validation_patience", c.validation_patience}};
        json crit = json::array();
        for (int jx = 0; jx < c.m; ++jx) {
            crit.push_back(json{
                {"w_v", matrix_to_json(p.w_v[jx])},
                {"w_h", matrix_to_json(p.w_h[jx])},
                {"b", std::vector<double>(p.b[jx].data(),
                                          p.b[jx].data() + p.b[jx].size())},
                {"w_f", matrix_to_json(p.w_f[jx])},
                {"q1", matrix_to_json(p.q1[jx])},
                {"q1b", std::vector<double>(p.q1b[jx].data(),
                                            p.q1b[jx].data() + p.q1b[jx].size())},
                {"q2", std::vector<double>(p.q2[jx].data(),
                                           p.q2[jx].data() + p.q2[jx].size())},
                {"q2b", p.q2b[jx]}});
        }
        j["mrnn"] = json{{"config", cfg},
                         {"criteria", crit},
                         {"threshold_base", p.threshold_base},
                         {"threshold_incr", p.threshold_incr}};
    } else {
        throw SchemaError("save_model: unknown kind '" + model.kind + "'");
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("bad JSON in '" + path + "': " + e.what());
    }

    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw SchemaError("unsupported schema_version in '" + path + "'");
        Model model;
        model.kind = j.at("kind").get<std::string>();
        model.grid = grid_from_json(j.at("grid"));

        if (model.kind == "tpl") {
            const auto& tj = j.at("tpl");
            tpl::TplModel tm;
            tm.pvf = PiecewiseValueFunction::zeros(model.grid.m,
                                                   model.grid.horizon,
                                                   model.grid.gamma);
            tm.pvf.delta_f = tj.at("delta_f").get<std::vector<double>>();
            tm.pvf.offsets = tj.at("offsets").get<std::vector<double>>();
            if (tm.pvf.delta_f.size() !=
                    static_cast<std::size_t>(model.grid.m) * model.grid.horizon *
                        model.grid.gamma ||
                tm.pvf.offsets.size() !=
                    static_cast<std::size_t>(model.grid.m) * model.grid.horizon)
                throw SchemaError("tpl payload size mismatch");
            tm.schedule = DiscountSchedule::fixed(tj.at("tau").get<double>(),
                                                  model.grid.horizon);
            tm.classes.thresholds =
                tj.at("thresholds").get<std::vector<double>>();
            tm.classes.validate();
            tm.c_param = tj.at("c_param").get<double>();
            model.tpl = std::move(tm);
        } else if (model.kind == "mrnn") {
            const auto& mj = j.at("mrnn");
            const auto& cj = mj.at("config");
            mrnn::MrnnConfig c;
            c.m = cj.at("m").get<int>();
            c.horizon = cj.at("horizon").get<int>();
            c.gamma = cj.at("gamma").get<int>();
            c.hidden_size = cj.at("hidden_size").get<int>();
            c.class_count = cj.at("class_count").get<int>();
            c.q_hidden = cj.at("q_hidden").get<int>();
            c.epochs = cj.at("epochs").get<int>();
            c.learning_rate = cj.at("learning_rate").get<double>();
            c.batch_size = cj.at("batch_size").get<int>();
            c.seed = cj.at("seed").get<std::uint64_t>();
            c.validation_patience = cj.at("validation_patience").get<int>();

            mrnn::MrnnParams p = mrnn::MrnnParams::zeros(c);
            const auto& crit = mj.at("criteria");
            if (crit.size() != static_cast<std::size_t>(c.m))
                throw SchemaError("mrnn criteria count mismatch");
            for (int jx = 0; jx < c.m; ++jx) {
                const auto& kj = crit.at(jx);
                p.w_v[jx] = matrix_from_json(kj.at("w_v"), c.hidden_size, c.gamma);
                p.w_h[jx] =
                    matrix_from_json(kj.at("w_h"), c.hidden_size, c.hidden_size);
                p.b[jx] = vector_from_json(kj.at("b"), c.hidden_size);
                p.w_f[jx] = matrix_from_json(kj.at("w_f"), c.horizon,
                                             c.hidden_size);
                p.q1[jx] = matrix_from_json(kj.at("q1"), c.q_hidden,
                                            c.hidden_size);
                p.q1b[jx] = vector_from_json(kj.at("q1b"), c.q_hidden);
                p.q2[jx] = vector_from_json(kj.at("q2"), c.q_hidden);
                p.q2b[jx] = kj.at("q2b").get<double>();
            }
            p.threshold_base = mj.at("threshold_base").get<double>();
            p.threshold_incr =
                mj.at("threshold_incr").get<std::vector<double>>();
            if (p.threshold_incr.size() !=
                static_cast<std::size_t>(c.class_count - 2))
                throw SchemaError("mrnn threshold size mismatch");
            model.mrnn_config = c;
            model.mrnn_params = std::move(p);
        } else {
            throw SchemaError("unknown model kind '" + model.kind + "' in '" +
                              path + "'");
        }
        return model;
    } catch (const json::exception& e) {
        throw SchemaError("bad model file '" + path + "': " + e.what());
    }
}

void export_tables(const Model& model,
                   const std::vector<EncodedAlternative>& sample,
                   const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto marginals_path =
        (std::filesystem::path(out_dir) / "marginals.csv").string();
    std::ofstream mout(marginals_path);
    if (!mout) throw IoError("cannot write '" + marginals_path + "'");
    mout << "criterion,timestamp,point_index,g_value,sub_marginal\n";

    if (model.kind == "tpl") {
        const auto& pvf = model.tpl->pvf;
        for (int j = 0; j < pvf.m; ++j)
            for (int t = 0; t < pvf.horizon; ++t) {
                double f = pvf.offsets[pvf.cell(j, t)];
                for (int k = 0; k <= pvf.gamma; ++k) {
                    if (k > 0) f += pvf.delta_f[pvf.idx(j, t, k - 1)];
                    mout << (j + 1) << "," << (t + 1) << "," << k << ","
                         << format_double(model.grid.point(j, t, k)) << ","
                         << format_double(f) << "\n";
                }
            }
    } else if (model.kind == "mrnn") {
        const auto table = mrnn::export_marginals(
            *model.mrnn_params, *model.mrnn_config, model.grid, sample);
        for (const auto& row : table.marginals)
            mout << row.criterion << "," << row.timestamp << ","
                 << row.point_index << "," << format_double(row.g_value) << ","
                 << format_double(row.sub_marginal) << "\n";
        const auto discounts_path =
            (std::filesystem::path(out_dir) / "discounts.csv").string();
        std::ofstream dout(discounts_path);
        if (!dout) throw IoError("cannot write '" + discounts_path + "'");
        dout << "sample_id,criterion,timestamp,tau\n";
        for (const auto& row : table.discounts)
            dout << row.sample_id << "," << row.criterion << "," << row.timestamp
                 << "," << format_double(row.tau) << "\n";
        if (!dout) throw IoError("write failed for '" + discounts_path + "'");
    } else {
        throw SchemaError("export_tables: unknown kind '" + model.kind + "'");
    }
    if (!mout) throw IoError("write failed for '" + marginals_path + "'");
}

}  // namespace tempref::io
