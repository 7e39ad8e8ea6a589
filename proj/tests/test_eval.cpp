#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "veintex/eval.hpp"

using namespace veintex;
using vt_test::error_kind_of;
using Strings = std::vector<std::string>;
using Counts = std::vector<std::vector<std::size_t>>;

namespace {

ConfusionMatrix diagonal_heavy(std::size_t correct, std::size_t total) {
    ConfusionMatrix cm{{"a", "b"}, {{correct, 0}, {total - correct, 0}}};
    return cm;
}

EvalReport knn_cell(const std::string& variant, const std::string& descriptor, double rate_hits) {
    const auto hits = static_cast<std::size_t>(rate_hits);
    return make_report(RunConfig{{descriptor}, "knn", variant, {}}, ConfusionMatrix{{"a", "b"}, {{hits, 10 - hits}, {0, 0}}});
}

} // namespace

TEST(ConfusionMatrix, Examples) {
    const Strings cls{"A", "B"};
    EXPECT_EQ(confusion_matrix(Strings{"A", "B"}, Strings{"A", "B"}, cls).counts, (Counts{{1, 0}, {0, 1}}));
    EXPECT_EQ(confusion_matrix(Strings{"A", "A"}, Strings{"B", "B"}, cls).counts, (Counts{{0, 2}, {0, 0}}));
    EXPECT_EQ(confusion_matrix(Strings{"A", "B", "A"}, Strings{"A", "A", "A"}, cls).counts, (Counts{{2, 0}, {1, 0}}));
    EXPECT_EQ(confusion_matrix(std::vector<std::size_t>{0, 1, 0}, std::vector<std::size_t>{0, 0, 0}, cls).counts,
              (Counts{{2, 0}, {1, 0}}));
}

TEST(ConfusionMatrix, Errors) {
    const Strings cls{"A", "B"};
    EXPECT_EQ(error_kind_of([&] { confusion_matrix(Strings{"A"}, Strings{"A", "B"}, cls); }), ErrorKind::parameter);
    EXPECT_EQ(error_kind_of([&] { confusion_matrix(Strings{}, Strings{}, cls); }), ErrorKind::parameter);
    EXPECT_EQ(error_kind_of([&] { confusion_matrix(Strings{"A"}, Strings{"Z"}, cls); }), ErrorKind::data);
    EXPECT_EQ(error_kind_of([&] {
                  confusion_matrix(std::vector<std::size_t>{2}, std::vector<std::size_t>{0}, cls);
              }),
              ErrorKind::data);
}

TEST(Metrics, RecognitionRate) {
    EXPECT_EQ(recognition_rate(diagonal_heavy(170, 200)), 85.0);
    EXPECT_EQ(recognition_rate(ConfusionMatrix{{"a", "b"}, {{3, 0}, {0, 4}}}), 100.0);
    EXPECT_EQ(recognition_rate(ConfusionMatrix{{"a", "b"}, {{0, 3}, {4, 0}}}), 0.0);
    EXPECT_EQ(error_kind_of([] { recognition_rate(ConfusionMatrix{{"a"}, {{0}}}); }), ErrorKind::parameter);
}

TEST(Metrics, FMeasureFixtures) {
    EXPECT_NEAR(f_measure(0.848, 0.845), 0.846, 0.0005);
    EXPECT_NEAR(f_measure(0.848, 0.845), 0.846497341996, 1e-11);
    EXPECT_NEAR(f_measure(0.898, 0.905), 0.9015, 0.0001);
    EXPECT_EQ(f_measure(0.0, 0.0), 0.0);
}

TEST(Metrics, PrecisionRecallPerClass) {
    // truth A,A,A,B ; pred A,A,B,B
    const ConfusionMatrix cm{{"A", "B", "C"}, {{2, 1, 0}, {0, 1, 0}, {0, 0, 0}}};
    const auto m = precision_recall_f(cm);
    EXPECT_EQ(m.per_class[0].precision, 1.0);
    EXPECT_NEAR(m.per_class[0].recall, 2.0 / 3, 1e-15);
    EXPECT_EQ(m.per_class[1].precision, 0.5);
    EXPECT_EQ(m.per_class[1].recall, 1.0);
    EXPECT_TRUE(m.per_class[2].precision_undefined);
    EXPECT_TRUE(m.per_class[2].recall_undefined);
    EXPECT_EQ(m.per_class[2].f, 0.0);
    EXPECT_NEAR(m.macro_precision, 0.5, 1e-15);
    EXPECT_NEAR(m.macro_f, (0.8 + 2.0 / 3) / 3, 1e-15);

    const auto perfect = precision_recall_f(ConfusionMatrix{{"a", "b"}, {{2, 0}, {0, 5}}});
    EXPECT_EQ(perfect.macro_precision, 1.0);
    EXPECT_EQ(perfect.macro_recall, 1.0);
    EXPECT_EQ(perfect.macro_f, 1.0);
}

TEST(Metrics, InvariantUnderClassRelabeling) {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 50; ++t) {
        const std::size_t C = 2 + gen() % 6;
        Counts counts(C, std::vector<std::size_t>(C));
        for (auto& row : counts) {
            for (auto& c : row) c = gen() % 5;
        }
        counts[0][0] += 1;
        std::vector<std::size_t> perm(C);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        Counts permuted(C, std::vector<std::size_t>(C));
        for (std::size_t i = 0; i < C; ++i) {
            for (std::size_t j = 0; j < C; ++j) permuted[perm[i]][perm[j]] = counts[i][j];
        }
        Strings cls(C, "x");
        const ConfusionMatrix a{cls, counts}, b{cls, permuted};
        EXPECT_EQ(recognition_rate(a), recognition_rate(b));
        const auto ma = precision_recall_f(a), mb = precision_recall_f(b);
        EXPECT_NEAR(ma.macro_f, mb.macro_f, 1e-12);
        EXPECT_NEAR(ma.macro_precision, mb.macro_precision, 1e-12);
        EXPECT_NEAR(ma.macro_recall, mb.macro_recall, 1e-12);
    }
}

TEST(Render, SingleDescriptorGrid) {
    std::vector<EvalReport> reports;
    for (const auto* v : {"euclidean", "cityblock"}) {
        for (const auto* d : {"LBP", "LPQ", "HAAR"}) reports.push_back(knn_cell(v, d, 7));
    }
    const auto text = render_report(reports, Layout::table1);
    EXPECT_NE(text.find("K-NN"), std::string::npos);
    EXPECT_NE(text.find("LPQ"), std::string::npos);
    EXPECT_NE(text.find("70.00"), std::string::npos);
    EXPECT_LT(text.find("euclidean"), text.find("cityblock"));

    reports.pop_back();
    try {
        render_report(reports, Layout::table1);
        FAIL() << "expected a report error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::report);
        EXPECT_NE(std::string(e.what()).find("cityblock, HAAR"), std::string::npos);
    }
    EXPECT_EQ(error_kind_of([] { render_report({}, Layout::table1); }), ErrorKind::report);
    EXPECT_EQ(error_kind_of([&] { render_report(reports, Layout::table4); }), ErrorKind::report);
}

TEST(Render, FusedGridShowsMetricsAndFailures) {
    const auto ok = make_report(RunConfig{{"LPQ", "HAAR"}, "svm", "rbf", {}}, diagonal_heavy(170, 200));
    EvalReport failed = failed_report(RunConfig{{"LPQ", "HAAR"}, "svm", "polynomial", {}},
                                      Error(ErrorKind::convergence, "no"));
    const auto text = render_report({ok, failed}, Layout::table4);
    EXPECT_NE(text.find("LPQ+HAAR"), std::string::npos);
    EXPECT_NE(text.find("85.00"), std::string::npos);
    EXPECT_NE(text.find("FAILED"), std::string::npos);
    EXPECT_NE(text.find("F-measure"), std::string::npos);
}

TEST(ReportJson, RoundTrip) {
    const auto r = make_report(RunConfig{{"LPQ"}, "knn", "cosine", {{"k", 1}}},
                               ConfusionMatrix{{"a", "b", "c"}, {{3, 1, 0}, {0, 2, 0}, {1, 0, 0}}});
    const auto j = to_json(r);
    EXPECT_EQ(j.at("layout"), "table1");
    const auto back = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());

    const auto f = failed_report(RunConfig{{"LBP"}, "svm", "rbf", {}}, Error(ErrorKind::training, "x"));
    const auto fb = report_from_json(to_json(f));
    EXPECT_FALSE(fb.ok);
    EXPECT_EQ(fb.error_kind, "training error");

    auto bad = j;
    bad["status"] = "weird";
    EXPECT_EQ(error_kind_of([&] { report_from_json(bad); }), ErrorKind::record);
    bad = j;
    bad["confusion"]["counts"] = Counts{{1}};
    EXPECT_EQ(error_kind_of([&] { report_from_json(bad); }), ErrorKind::record);
}
