#include <algorithm>
#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "veintex/dataset.hpp"

using namespace veintex;
using vt_test::error_kind_of;
using vt_test::TempDir;

namespace {

void put_image(const std::filesystem::path& path, double value) {
    std::filesystem::create_directories(path.parent_path());
    write_pgm(GrayImage(4, 4, value), path);
}

LabeledDataset<int> toy(const std::vector<std::pair<std::string, int>>& counts) {
    LabeledDataset<int> ds;
    int payload = 0;
    for (const auto& [subject, n] : counts) {
        ds.class_set.push_back(subject);
        for (int i = 0; i < n; ++i) ds.push_back(SampleRecord{subject, static_cast<std::size_t>(i), {}}, payload++);
    }
    return ds;
}

std::vector<std::pair<std::string, std::size_t>> keys(const LabeledDataset<int>& ds) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& r : ds.records) out.emplace_back(r.subject_id, r.sample_index);
    return out;
}

} // namespace

TEST(ScanDataset, EnumeratesSubjectsAndFiles) {
    TempDir root("scan");
    put_image(root / "s02/a.png", 0.1);
    put_image(root / "s01/b.png", 0.2);
    put_image(root / "s01/a.png", 0.3);
    const auto ds = scan_dataset(root.path());
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.class_set, (std::vector<std::string>{"s01", "s02"}));
    EXPECT_EQ(ds.records[0].subject_id, "s01");
    EXPECT_EQ(ds.records[0].source_path.filename(), "a.png");
    EXPECT_EQ(ds.records[1].sample_index, 1u);
    EXPECT_EQ(ds.records[1].source_path.filename(), "b.png");
    EXPECT_EQ(ds.records[2].subject_id, "s02");
    EXPECT_EQ(ds.records[2].sample_index, 0u);
}

TEST(ScanDataset, SingleImage) {
    TempDir root("scan");
    put_image(root / "only/x.pgm", 0.5);
    const auto ds = scan_dataset(root.path());
    EXPECT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds.class_set.size(), 1u);
}

TEST(ScanDataset, OrdersNamesLexicographically) {
    TempDir root("scan");
    put_image(root / "10/a.pgm", 0.5);
    put_image(root / "2/a.pgm", 0.5);
    EXPECT_EQ(scan_dataset(root.path()).class_set, (std::vector<std::string>{"10", "2"}));
}

TEST(ScanDataset, SkipsUnreadableFilesAndEmptySubjects) {
    TempDir root("scan");
    put_image(root / "good/a.pgm", 0.5);
    std::filesystem::create_directories(root / "bad");
    std::ofstream(root / "bad/broken.png") << "nope";
    std::ofstream(root / "good/notes.txt") << "ignored";
    vt_test::WarningCapture warnings;
    const auto ds = scan_dataset(root.path());
    EXPECT_EQ(ds.class_set, (std::vector<std::string>{"good"}));
    EXPECT_EQ(warnings.messages.size(), 2u);
}

TEST(ScanDataset, EmptyRootsAreErrors) {
    TempDir root("scan");
    EXPECT_EQ(error_kind_of([&] { scan_dataset(root.path()); }), ErrorKind::empty_dataset);
    std::filesystem::create_directories(root / "empty_subject");
    vt_test::WarningCapture warnings;
    EXPECT_EQ(error_kind_of([&] { scan_dataset(root.path()); }), ErrorKind::empty_dataset);
    EXPECT_EQ(error_kind_of([&] { scan_dataset(root / "missing"); }), ErrorKind::empty_dataset);
}

TEST(ScanDataset, ManifestOverridesDirectories) {
    TempDir root("scan");
    put_image(root / "imgs/one.pgm", 0.1);
    put_image(root / "imgs/two.pgm", 0.2);
    put_image(root / "ignored/three.pgm", 0.3);
    std::ofstream(root / "dataset.json")
        << R"([{"subject": "bob", "path": "imgs/two.pgm"}, {"subject": "alice", "path": "imgs/one.pgm"},
               {"subject": "bob", "path": "imgs/one.pgm"}])";
    const auto ds = scan_dataset(root.path());
    EXPECT_EQ(ds.class_set, (std::vector<std::string>{"alice", "bob"}));
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.records[1].subject_id, "bob");
    EXPECT_EQ(ds.records[1].source_path.filename(), "two.pgm");
    EXPECT_NEAR(ds.payloads[1](0, 0), 0.2, 1.0 / 255);

    std::ofstream(root / "dataset.json") << R"({"not": "an array"})";
    EXPECT_EQ(error_kind_of([&] { scan_dataset(root.path()); }), ErrorKind::format);
}

TEST(ScanDataset, IsDeterministic) {
    TempDir root("scan");
    for (const auto* p : {"b/2.pgm", "a/9.pgm", "b/1.png", "a/10.pgm"}) put_image(root / p, 0.4);
    const auto a = scan_dataset(root.path());
    const auto b = scan_dataset(root.path());
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.records[0].source_path.filename(), "10.pgm");
}

TEST(Split, CountModeTakesFirstSamples) {
    const auto ds = toy({{"A", 4}, {"B", 4}});
    const auto [train, test] = split_dataset(ds, SplitSpec::count(2));
    using K = std::vector<std::pair<std::string, std::size_t>>;
    EXPECT_EQ(keys(train), (K{{"A", 0}, {"A", 1}, {"B", 0}, {"B", 1}}));
    EXPECT_EQ(keys(test), (K{{"A", 2}, {"A", 3}, {"B", 2}, {"B", 3}}));
    EXPECT_EQ(train.class_set, ds.class_set);
    EXPECT_EQ(test.class_set, ds.class_set);
}

TEST(Split, HalfFractionOfFour) {
    const auto ds = toy({{"A", 4}, {"B", 4}});
    const auto [train, test] = split_dataset(ds, SplitSpec{});
    EXPECT_EQ(train.size(), 4u);
    EXPECT_EQ(test.size(), 4u);
}

TEST(Split, SeededSplitsRepeat) {
    const auto ds = toy({{"A", 7}, {"B", 5}, {"C", 9}});
    const auto spec = SplitSpec::fraction(0.5, 42);
    const auto [t1, s1] = split_dataset(ds, spec);
    const auto [t2, s2] = split_dataset(ds, spec);
    EXPECT_EQ(t1.records, t2.records);
    EXPECT_EQ(s1.records, s2.records);
    const auto [t3, s3] = split_dataset(ds, SplitSpec::fraction(0.5, 43));
    EXPECT_NE(keys(t1), keys(t3));
}

TEST(Split, IsAPartitionForRandomSpecs) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::string, int>> counts;
        const int subjects = 1 + static_cast<int>(gen() % 5);
        for (int s = 0; s < subjects; ++s) counts.emplace_back("s" + std::to_string(s), 2 + static_cast<int>(gen() % 8));
        const auto ds = toy(counts);
        std::optional<std::uint64_t> seed;
        if (gen() % 2) seed = gen();
        const auto spec = gen() % 2 ? SplitSpec::count(1, seed) : SplitSpec::fraction(0.5, seed);
        const auto [train, test] = split_dataset(ds, spec);
        std::multiset<int> all(ds.payloads.begin(), ds.payloads.end()), parts(train.payloads.begin(), train.payloads.end());
        parts.insert(test.payloads.begin(), test.payloads.end());
        ASSERT_EQ(all, parts);
        auto k1 = keys(train), k2 = keys(test);
        k1.insert(k1.end(), k2.begin(), k2.end());
        std::sort(k1.begin(), k1.end());
        auto k0 = keys(ds);
        std::sort(k0.begin(), k0.end());
        ASSERT_EQ(k0, k1);
        std::map<std::string, int> per_train, per_test;
        for (const auto& r : train.records) ++per_train[r.subject_id];
        for (const auto& r : test.records) ++per_test[r.subject_id];
        for (const auto& [s, n] : counts) {
            ASSERT_GE(per_train[s], 1);
            ASSERT_GE(per_test[s], 1);
        }
    }
}

TEST(Split, TooFewSamplesNamesTheSubject) {
    const auto ds = toy({{"A", 4}, {"lonely", 1}});
    try {
        split_dataset(ds, SplitSpec::fraction(0.5));
        FAIL() << "expected a split error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::split);
        EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
    }
    EXPECT_EQ(error_kind_of([&] { split_dataset(ds, SplitSpec::count(4)); }), ErrorKind::split);
    EXPECT_EQ(error_kind_of([&] { split_dataset(ds, SplitSpec::fraction(1.0)); }), ErrorKind::split);
}

TEST(LabeledDataset, ValidateCatchesStructuralFaults) {
    auto ds = toy({{"A", 2}});
    EXPECT_NO_THROW(ds.validate());
    ds.push_back(SampleRecord{"A", 1, {}}, 99);
    EXPECT_EQ(error_kind_of([&] { ds.validate(); }), ErrorKind::structure);
    auto unsorted = toy({{"B", 1}, {"A", 1}});
    EXPECT_EQ(error_kind_of([&] { unsorted.validate(); }), ErrorKind::structure);
    auto foreign = toy({{"A", 1}});
    foreign.push_back(SampleRecord{"Z", 0, {}}, 1);
    EXPECT_EQ(error_kind_of([&] { foreign.validate(); }), ErrorKind::data);
}
