#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "veintex/experiment.hpp"
#include "veintex/synthetic.hpp"

using namespace veintex;
using vt_test::error_kind_of;
using vt_test::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

LabeledDataset<GrayImage> small_corpus(int classes, int samples, std::uint64_t seed = 1) {
    SyntheticCorpusOptions o;
    o.classes = classes;
    o.samples_per_class = samples;
    o.size = 48;
    o.seed = seed;
    return make_synthetic_corpus(o);
}

ExperimentConfig small_config(const std::filesystem::path& out, const char* descriptors, const char* classifiers) {
    auto j = nlohmann::json::parse(std::string(R"({"preprocess": {"width": 48, "height": 48}, "descriptors": )") +
                                   descriptors + R"(, "classifiers": )" + classifiers + R"(, "fusion": []})");
    j["output"] = out.string();
    return config_from_json(j);
}

} // namespace

TEST(Config, DefaultsFillMissingSections) {
    const auto c = config_from_json(nlohmann::json::object());
    EXPECT_EQ(c.preprocess.width, 128);
    EXPECT_EQ(c.preprocess.height, 128);
    EXPECT_TRUE(c.preprocess.equalize);
    EXPECT_EQ(c.descriptors.size(), 5u);
    ASSERT_TRUE(c.knn.has_value());
    EXPECT_EQ(c.knn->metrics.size(), 4u);
    ASSERT_TRUE(c.svm.has_value());
    EXPECT_EQ(c.svm->kernels.size(), 2u);
    ASSERT_EQ(c.fusion.size(), 1u);
    EXPECT_EQ(c.fusion[0], (std::vector<Descriptor>{Descriptor::lpq, Descriptor::haar}));
    EXPECT_EQ(c.split.train_amount, 0.5);
}

TEST(Config, RejectsMalformedInput) {
    auto bad = [](const char* text) { return error_kind_of([&] { config_from_json(nlohmann::json::parse(text)); }); };
    EXPECT_EQ(bad("[]"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"preprocess": {"width": 0}})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"split": {"mode": "random"}})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"descriptors": []})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"descriptors": ["LBP", "LBP"]})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"descriptors": ["SIFT"]})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"descriptors": ["FUSED"]})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"classifiers": {"knn": {"metrics": ["hamming"]}}})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"classifiers": {"svm": {"kernels": [{"kind": "sigmoid"}]}}})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"descriptors": ["LBP"], "fusion": [["LBP", "HAAR"]]})"), ErrorKind::config);
    EXPECT_EQ(bad(R"({"fusion": [["LPQ"]]})"), ErrorKind::config);
    EXPECT_EQ(error_kind_of([] { load_config("/nonexistent/config.json"); }), ErrorKind::config);
}

TEST(Config, SerializationIsStableAndHashed) {
    const auto c = config_from_json(nlohmann::json::parse(
        R"({"descriptors": ["LPQ", {"type": "HAAR", "levels": 2}], "seed": 9,
            "classifiers": {"svm": {"kernels": [{"kind": "rbf", "sigma": 0.5}]}}, "fusion": [["LPQ", "HAAR"]]})"));
    const auto again = config_from_json(to_json(c));
    EXPECT_EQ(to_json(again).dump(), to_json(c).dump());
    EXPECT_EQ(config_hash(again), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 16u);
    auto other = c;
    other.seed = 10;
    EXPECT_NE(config_hash(other), config_hash(c));
    EXPECT_EQ(c.descriptors[1].dwt_levels, 2);
    EXPECT_FALSE(c.knn.has_value());
    EXPECT_EQ(*c.svm->kernels[0].sigma, 0.5);
}

TEST(Extract, WritesOneDumpPerDescriptorAndSide) {
    TempDir dir("extract");
    const auto corpus = small_corpus(2, 4);
    const auto cfg = small_config(dir / "out", R"(["LBP", "HAAR"])", R"({"knn": {"k": 1}})");
    const auto tables = extract_features(corpus, cfg);
    const auto paths = write_feature_tables(tables, cfg);
    ASSERT_EQ(paths.size(), 4u);
    std::vector<std::string> first;
    for (const auto& p : paths) {
        ASSERT_TRUE(std::filesystem::is_regular_file(p)) << p;
        first.push_back(slurp(p));
    }
    EXPECT_EQ(tables.at(Descriptor::lbp).train.size(), 4u);
    EXPECT_EQ(tables.at(Descriptor::haar).test.size(), 4u);

    write_feature_tables(extract_features(corpus, cfg), cfg);
    for (std::size_t i = 0; i < paths.size(); ++i) EXPECT_EQ(slurp(paths[i]), first[i]);

    const auto cached = read_feature_tables(cfg);
    ASSERT_TRUE(cached.has_value());
    EXPECT_EQ(cached->at(Descriptor::lbp).train.payloads, tables.at(Descriptor::lbp).train.payloads);

    auto changed = cfg;
    changed.preprocess.equalize = false;
    EXPECT_FALSE(read_feature_tables(changed).has_value());
}

TEST(Grid, KnnGridHasOneCellPerMetricAndDescriptor) {
    TempDir dir("grid");
    const auto corpus = small_corpus(4, 4);
    const auto cfg = small_config(dir / "out", R"(["LBP", "LPQ", "LOGGABOR", "DB8", "HAAR"])", R"({"knn": {"k": 1}})");
    const auto cells = run_grid(extract_features(corpus, cfg), cfg, corpus.class_set);
    ASSERT_EQ(cells.size(), 20u);
    std::vector<EvalReport> reports;
    for (const auto& c : cells) {
        EXPECT_TRUE(c.report.ok) << c.id << ": " << c.report.error;
        EXPECT_EQ(c.report.confusion.total(), 8u);
        reports.push_back(c.report);
    }
    EXPECT_EQ(cells.front().id, "LBP_knn_euclidean");
    const auto text = render_all(reports);
    EXPECT_NE(text.find("table1"), std::string::npos);
    EXPECT_EQ(text.find("table2"), std::string::npos);
}

TEST(Grid, FailingCellsAreIsolated) {
    TempDir dir("grid");
    const auto corpus = small_corpus(3, 4);
    auto cfg = small_config(dir / "out", R"(["LBP", "HAAR"])",
                            R"({"knn": {"k": 7, "metrics": ["euclidean"]}, "svm": {"kernels": [{"kind": "rbf"}]}})");
    // Three subjects with two training images each leave fewer than k neighbours.
    const auto cells = run_grid(extract_features(corpus, cfg), cfg, corpus.class_set);
    ASSERT_EQ(cells.size(), 4u);
    for (const auto& c : cells) {
        if (c.report.config.classifier == "knn") {
            EXPECT_FALSE(c.report.ok);
            EXPECT_EQ(c.report.error_kind, "parameter error");
        } else {
            EXPECT_TRUE(c.report.ok) << c.id << ": " << c.report.error;
            ASSERT_TRUE(c.model.has_value());
        }
    }
    const auto j = report_json(cells, cfg);
    EXPECT_EQ(j.at("cells").size(), 4u);
    EXPECT_EQ(j.at("cells")[0].at("status"), "failed");
}

TEST(Grid, FusedCellsCarryTheirSchema) {
    TempDir dir("grid");
    const auto corpus = small_corpus(3, 4);
    auto j = nlohmann::json::parse(R"({"preprocess": {"width": 48, "height": 48}, "descriptors": ["LPQ", "HAAR"],
        "classifiers": {"knn": {"k": 1, "metrics": ["cosine"]}}, "fusion": [["LPQ", "HAAR"]]})");
    j["output"] = (dir / "out").string();
    const auto cfg = config_from_json(j);
    const auto cells = run_grid(extract_features(corpus, cfg), cfg, corpus.class_set);
    ASSERT_EQ(cells.size(), 3u);
    const auto& fused = cells.back();
    EXPECT_EQ(fused.id, "LPQ+HAAR_knn_cosine");
    ASSERT_TRUE(fused.model.has_value());
    EXPECT_EQ(schema_from_json(fused.model->at("schema")).total_dim(), 276u);
    EXPECT_EQ(layout_of(fused.report.config), Layout::table3);
}

TEST(Grid, CachedFeaturesReproduceTheReport) {
    TempDir dir("grid");
    const auto corpus = small_corpus(3, 4);
    const auto cfg = small_config(dir / "out", R"(["LPQ", "HAAR"])",
                                  R"({"knn": {"k": 1}, "svm": {"kernels": [{"kind": "rbf"}, {"kind": "polynomial"}]}})");
    const auto fresh = extract_features(corpus, cfg);
    write_feature_tables(fresh, cfg);
    const auto a = report_json(run_grid(fresh, cfg, corpus.class_set), cfg).dump();
    const auto cached = read_feature_tables(cfg);
    ASSERT_TRUE(cached.has_value());
    const auto b = report_json(run_grid(*cached, cfg, corpus.class_set), cfg).dump();
    EXPECT_EQ(a, b);

    std::filesystem::remove(dump_path(cfg.output, Descriptor::lpq, "test"));
    EXPECT_FALSE(read_feature_tables(cfg).has_value());
    write_feature_tables(extract_features(corpus, cfg), cfg);
    const auto c = report_json(run_grid(*read_feature_tables(cfg), cfg, corpus.class_set), cfg).dump();
    EXPECT_EQ(a, c);
}
