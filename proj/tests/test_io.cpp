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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>

#include "tempref/dgp.hpp"
#include "tempref/io.hpp"

using namespace tempref;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("tempref_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double x : {1.0 / 3.0, 0.1, -2.5e-17, 1e300, 0.0, -123.456}) {
        const std::string s = io::format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("load_dataset parses the wide CSV layout") {
    TempDir dir("load");
    const std::string path = dir.file("data.csv");
    spit(path,
         "id,label,g1_t1,g1_t2,g2_t1,g2_t2\n"
         "a,1,0.5,1.5,-1,2\n"
         "b,2,0.25,0.75,3,4\n"
         "c,,0,0,0,0\n");
    const Dataset ds = io::load_dataset(path);
    CHECK(ds.m() == 2);
    CHECK(ds.horizon == 2);
    CHECK(ds.class_count == 2);
    REQUIRE(ds.size() == 3);
    CHECK(ds.alternatives[0].series[0][1] == 1.5);
    CHECK(ds.alternatives[1].series[1][0] == 3.0);
    CHECK(*ds.alternatives[1].label == 2);
    CHECK_FALSE(ds.alternatives[2].label.has_value());
}

TEST_CASE("load_dataset rejects malformed files") {
    TempDir dir("load_bad");
    SUBCASE("missing file") {
        CHECK_THROWS_AS(io::load_dataset(dir.file("absent.csv")), IoError);
    }
    SUBCASE("column order must be criterion-outer") {
        const std::string path = dir.file("bad_header.csv");
        spit(path, "id,label,g1_t2,g1_t1\na,1,0,0\n");
        CHECK_THROWS_AS(io::load_dataset(path), ParseError);
    }
    SUBCASE("bad numeric cell") {
        const std::string path = dir.file("bad_cell.csv");
        spit(path, "id,label,g1_t1\na,1,oops\n");
        CHECK_THROWS_AS(io::load_dataset(path), ParseError);
    }
    SUBCASE("short row") {
        const std::string path = dir.file("short_row.csv");
        spit(path, "id,label,g1_t1,g1_t2\na,1,0.5\n");
        CHECK_THROWS_AS(io::load_dataset(path), ParseError);
    }
}

TEST_CASE("datasets round-trip bit-exactly") {
    TempDir dir("ds_roundtrip");
    dgp::DgpConfig cfg;
    cfg.n_samples = 20;
    cfg.seed = 31;
    const auto [ds, truth] = dgp::generate(cfg);
    const std::string path = dir.file("ds.csv");
    io::save_dataset(ds, path);
    const Dataset back = io::load_dataset(path);
    REQUIRE(back.size() == ds.size());
    CHECK(back.horizon == ds.horizon);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.alternatives[i].id == ds.alternatives[i].id);
        CHECK(back.alternatives[i].label == ds.alternatives[i].label);
        CHECK(back.alternatives[i].series == ds.alternatives[i].series);
    }
}

namespace {

Model make_tpl_model(std::mt19937_64& rng) {
    Dataset ds;
    ds.criteria_names = {"g1", "g2"};
    ds.horizon = 3;
    ds.class_count = 2;
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int i = 0; i < 8; ++i) {
        Alternative a;
        a.id = "m" + std::to_string(i);
        a.series = {{unif(rng), unif(rng), unif(rng)},
                    {unif(rng), unif(rng), unif(rng)}};
        ds.alternatives.push_back(a);
    }
    Model model;
    model.kind = "tpl";
    model.grid = build_grid(ds, 2);
    tpl::TplModel tm;
    tm.pvf = PiecewiseValueFunction::zeros(2, 3, 2);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (double& d : tm.pvf.delta_f) d = pos(rng);
    for (double& o : tm.pvf.offsets) o = pos(rng) - 0.5;
    tm.schedule = DiscountSchedule::fixed(0.8, 3);
    tm.classes.thresholds = {1.0};
    tm.c_param = 2.5;
    model.tpl = std::move(tm);
    return model;
}

}  // namespace

TEST_CASE("tpl models round-trip with identical values and assignments") {
    TempDir dir("tpl_roundtrip");
    std::mt19937_64 rng(8);
    const Model model = make_tpl_model(rng);
    const std::string path = dir.file("model.json");
    io::save_model(model, path);
    const Model back = io::load_model(path);
    CHECK(back.kind == "tpl");
    CHECK(back.tpl->c_param == model.tpl->c_param);

    std::uniform_real_distribution<double> unif(-2.5, 2.5);
    for (int rep = 0; rep < 30; ++rep) {
        Alternative alt;
        alt.series = {{unif(rng), unif(rng), unif(rng)},
                      {unif(rng), unif(rng), unif(rng)}};
        CHECK(back.value(alt) == model.value(alt));  // bit-exact round trip
        CHECK(back.predict(alt) == model.predict(alt));
    }
}

TEST_CASE("mrnn models round-trip with identical comprehensive values") {
    TempDir dir("mrnn_roundtrip");
    mrnn::MrnnConfig cfg;
    cfg.m = 2;
    cfg.horizon = 3;
    cfg.gamma = 2;
    cfg.hidden_size = 3;
    cfg.q_hidden = 2;
    cfg.class_count = 3;

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Dataset ds;
    ds.criteria_names = {"g1", "g2"};
    ds.horizon = 3;
    ds.class_count = 3;
    for (int i = 0; i < 10; ++i) {
        Alternative a;
        a.id = "n" + std::to_string(i);
        a.series = {{unif(rng), unif(rng), unif(rng)},
                    {unif(rng), unif(rng), unif(rng)}};
        ds.alternatives.push_back(a);
    }

    Model model;
    model.kind = "mrnn";
    model.grid = build_grid(ds, cfg.gamma);
    model.mrnn_config = cfg;
    model.mrnn_params = mrnn::MrnnParams::init(cfg, 123);

    const std::string path = dir.file("model.json");
    io::save_model(model, path);
    const Model back = io::load_model(path);
    CHECK(back.kind == "mrnn");
    for (const auto& alt : ds.alternatives) {
        CHECK(back.value(alt) == model.value(alt));
        CHECK(back.predict(alt) == model.predict(alt));
    }
}

TEST_CASE("load_model rejects tampered files") {
    TempDir dir("tamper");
    std::mt19937_64 rng(10);
    const Model model = make_tpl_model(rng);
    const std::string path = dir.file("model.json");
    io::save_model(model, path);
    const std::string original = slurp(path);

    SUBCASE("unknown kind") {
        std::string text = original;
        const auto at = text.find("\"kind\": \"tpl\"");
        REQUIRE(at != std::string::npos);
        text.replace(at, 13, "\"kind\": \"xxx\"");
        spit(path, text);
        CHECK_THROWS_AS(io::load_model(path), SchemaError);
    }
    SUBCASE("unsupported schema version") {
        std::string text = original;
        const auto at = text.find("\"schema_version\": 1");
        REQUIRE(at != std::string::npos);
        text.replace(at, 19, "\"schema_version\": 9");
        spit(path, text);
        CHECK_THROWS_AS(io::load_model(path), SchemaError);
    }
    SUBCASE("not JSON at all") {
        spit(path, "this is not json");
        CHECK_THROWS_AS(io::load_model(path), ParseError);
    }
}

TEST_CASE("export_tables writes the expected table shapes") {
    TempDir dir("export");
    std::mt19937_64 rng(11);

    SUBCASE("tpl marginals are cumulative and nondecreasing") {
        Model model = make_tpl_model(rng);
        for (double& o : model.tpl->pvf.offsets) o = 0.0;
        io::export_tables(model, {}, dir.file("out"));
        const std::string text = slurp(dir.file("out") + "/marginals.csv");
        // header + m * T * (gamma + 1) rows
        CHECK(line_count(text) == 1 + 2 * 3 * 3);
        CHECK_FALSE(fs::exists(dir.file("out") + "/discounts.csv"));

        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        CHECK(line == "criterion,timestamp,point_index,g_value,sub_marginal");
        double prev = 0.0;
        int prev_point = -1;
        while (std::getline(in, line)) {
            int criterion, timestamp, point;
            double g, f;
            REQUIRE(std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &criterion,
                                &timestamp, &point, &g, &f) == 5);
            if (point > prev_point && point > 0) CHECK(f >= prev);
            prev = f;
            prev_point = point;
        }
    }
    SUBCASE("mrnn export includes discount traces") {
        mrnn::MrnnConfig cfg;
        cfg.m = 2;
        cfg.horizon = 3;
        cfg.gamma = 2;
        cfg.hidden_size = 3;
        cfg.q_hidden = 2;

        Dataset ds;
        ds.criteria_names = {"g1", "g2"};
        ds.horizon = 3;
        ds.class_count = 2;
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int i = 0; i < 4; ++i) {
            Alternative a;
            a.id = "x" + std::to_string(i);
            a.series = {{unif(rng), unif(rng), unif(rng)},
                        {unif(rng), unif(rng), unif(rng)}};
            ds.alternatives.push_back(a);
        }
        Model model;
        model.kind = "mrnn";
        model.grid = build_grid(ds, cfg.gamma);
        model.mrnn_config = cfg;
        model.mrnn_params = mrnn::MrnnParams::init(cfg, 5);

        std::vector<EncodedAlternative> sample;
        for (const auto& alt : ds.alternatives)
            sample.push_back(encode(alt, model.grid));
        io::export_tables(model, sample, dir.file("out2"));
        CHECK(line_count(slurp(dir.file("out2") + "/marginals.csv")) ==
              1 + 2 * 3 * 3);
        const std::string discounts = slurp(dir.file("out2") + "/discounts.csv");
        CHECK(line_count(discounts) == 1 + 4 * 2 * 2);  // samples * m * (T-1)
    }
}
