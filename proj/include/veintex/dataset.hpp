#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "veintex/error.hpp"
#include "veintex/image.hpp"
#include "veintex/rng.hpp"

namespace veintex {

struct SampleRecord {
    std::string subject_id;
    std::size_t sample_index = 0;
    std::filesystem::path source_path;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/**
 * Subject-labelled collection with one payload (an image, a feature vector,
 * ...) per record.
 *
 * class_set is kept sorted and duplicate-free; records may reference only
 * members of it. A split keeps the full class_set on both sides even if a
 * side happens to contain no samples of some subject.
 */
template <typename Payload>
struct LabeledDataset {
    std::vector<SampleRecord> records;
    std::vector<Payload> payloads;
    std::vector<std::string> class_set;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }

    /// Position of a subject in class_set; throws a data error when absent.
    std::size_t label_of(const std::string& subject) const {
        auto it = std::lower_bound(class_set.begin(), class_set.end(), subject);
        if (it == class_set.end() || *it != subject) fail(ErrorKind::data, "unknown subject '" + subject + "'");
        return static_cast<std::size_t>(it - class_set.begin());
    }

    std::vector<std::size_t> labels() const {
        std::vector<std::size_t> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(label_of(r.subject_id));
        return out;
    }

    void push_back(SampleRecord record, Payload payload) {
        records.push_back(std::move(record));
        payloads.push_back(std::move(payload));
    }

    /// Checks the structural invariants; throws a structure error on violation.
    void validate() const {
        if (records.size() != payloads.size()) fail(ErrorKind::structure, "records and payloads differ in length");
        if (!std::is_sorted(class_set.begin(), class_set.end()) ||
            std::adjacent_find(class_set.begin(), class_set.end()) != class_set.end()) {
            fail(ErrorKind::structure, "class_set must be sorted and duplicate-free");
        }
        std::set<std::pair<std::string, std::size_t>> seen;
        for (const auto& r : records) {
            label_of(r.subject_id);
            if (!seen.emplace(r.subject_id, r.sample_index).second) {
                fail(ErrorKind::structure, "duplicate sample " + r.subject_id + "#" + std::to_string(r.sample_index));
            }
        }
    }
};

/// Replaces every payload with f(payload), keeping records and class_set.
template <typename Payload, typename F>
auto map_payloads(const LabeledDataset<Payload>& ds, F&& f) {
    using Out = std::decay_t<decltype(f(ds.payloads.front()))>;
    LabeledDataset<Out> out;
    out.records = ds.records;
    out.class_set = ds.class_set;
    out.payloads.reserve(ds.payloads.size());
    for (const auto& p : ds.payloads) out.payloads.push_back(f(p));
    return out;
}

inline bool is_image_file(const std::filesystem::path& path) {
    const std::string ext = detail::lower_extension(path);
    return ext == ".pgm" || ext == ".png";
}

namespace detail {

inline LabeledDataset<GrayImage> scan_manifest(const std::filesystem::path& root) {
    const auto manifest_path = root / "dataset.json";
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorKind::io, manifest_path.string() + ": cannot open");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, manifest_path.string() + ": " + e.what());
    }
    if (!doc.is_array()) fail(ErrorKind::format, manifest_path.string() + ": expected an array of {subject, path}");

    std::map<std::string, std::vector<std::filesystem::path>> by_subject;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("subject") || !entry.contains("path") ||
            !entry["subject"].is_string() || !entry["path"].is_string()) {
            fail(ErrorKind::format, manifest_path.string() + ": entries need string fields subject and path");
        }
        std::filesystem::path p = entry["path"].get<std::string>();
        by_subject[entry["subject"].get<std::string>()].push_back(p.is_absolute() ? p : root / p);
    }

    LabeledDataset<GrayImage> ds;
    for (const auto& [subject, paths] : by_subject) {
        ds.class_set.push_back(subject);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            ds.push_back(SampleRecord{subject, i, paths[i]}, load_image(paths[i]));
        }
    }
    return ds;
}

} // namespace detail

/**
 * Loads `<root>/<subject>/<image>` corpora.
 *
 * Subjects and files are ordered lexicographically by name; sample_index is
 * the rank of a file among the readable images of its subject. Files that
 * fail to decode are skipped with a warning, as are subjects left with no
 * images. A `dataset.json` manifest at the root replaces directory scanning.
 */
inline LabeledDataset<GrayImage> scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) fail(ErrorKind::empty_dataset, root.string() + ": not a directory");

    LabeledDataset<GrayImage> ds;
    if (fs::is_regular_file(root / "dataset.json", ec)) {
        ds = detail::scan_manifest(root);
    } else {
        std::vector<fs::path> subjects;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_directory()) subjects.push_back(entry.path());
        }
        std::sort(subjects.begin(), subjects.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

        for (const auto& dir : subjects) {
            const std::string subject = dir.filename().string();
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
                return a.filename().string() < b.filename().string();
            });

            std::size_t index = 0;
            for (const auto& file : files) {
                try {
                    GrayImage img = load_image(file);
                    ds.push_back(SampleRecord{subject, index++, file}, std::move(img));
                } catch (const Error& e) {
                    warn(std::string("skipping unreadable image: ") + e.what());
                }
            }
            if (index == 0) {
                warn("subject '" + subject + "' has no readable images; skipped");
                continue;
            }
            ds.class_set.push_back(subject);
        }
    }
    if (ds.empty()) fail(ErrorKind::empty_dataset, root.string() + ": no readable images");
    ds.validate();
    return ds;
}

struct SplitSpec {
    enum class Mode { per_subject_count, per_subject_fraction };

    Mode mode = Mode::per_subject_fraction;
    double train_amount = 0.5;
    std::optional<std::uint64_t> shuffle_seed;

    static SplitSpec count(std::size_t n, std::optional<std::uint64_t> seed = std::nullopt) {
        return SplitSpec{Mode::per_subject_count, static_cast<double>(n), seed};
    }
    static SplitSpec fraction(double f, std::optional<std::uint64_t> seed = std::nullopt) {
        return SplitSpec{Mode::per_subject_fraction, f, seed};
    }
};

/**
 * Per-subject train/test partition.
 *
 * Count mode sends the first n samples of each subject to train and needs at
 * least one left for test. Fraction mode rounds f*count to the nearest
 * integer and needs both sides non-empty. With a seed, each subject's
 * samples are permuted first (one generator, subjects visited in class_set
 * order).
 */
template <typename Payload>
std::pair<LabeledDataset<Payload>, LabeledDataset<Payload>> split_dataset(const LabeledDataset<Payload>& ds,
                                                                          const SplitSpec& spec) {
    if (spec.mode == SplitSpec::Mode::per_subject_count) {
        if (spec.train_amount < 1.0 || spec.train_amount != std::floor(spec.train_amount)) {
            fail(ErrorKind::split, "per-subject count must be a positive integer");
        }
    } else if (!(spec.train_amount > 0.0 && spec.train_amount < 1.0)) {
        fail(ErrorKind::split, "per-subject fraction must lie in (0,1)");
    }

    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < ds.records.size(); ++i) members[ds.records[i].subject_id].push_back(i);

    LabeledDataset<Payload> train, test;
    train.class_set = test.class_set = ds.class_set;
    std::optional<Rng> rng;
    if (spec.shuffle_seed) rng.emplace(*spec.shuffle_seed);

    for (const auto& subject : ds.class_set) {
        auto it = members.find(subject);
        if (it == members.end()) continue;
        auto& idx = it->second;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return ds.records[a].sample_index < ds.records[b].sample_index; });

        const std::size_t n = idx.size();
        std::size_t n_train = spec.mode == SplitSpec::Mode::per_subject_count
                                  ? static_cast<std::size_t>(spec.train_amount)
                                  : static_cast<std::size_t>(std::floor(spec.train_amount * n + 0.5));
        if (n_train == 0 || n_train >= n) {
            fail(ErrorKind::split, "subject '" + subject + "' has " + std::to_string(n) +
                                       " samples, too few for the requested split");
        }
        if (rng) shuffle(idx, *rng);
        for (std::size_t k = 0; k < n; ++k) {
            auto& side = k < n_train ? train : test;
            side.push_back(ds.records[idx[k]], ds.payloads[idx[k]]);
        }
    }
    return {std::move(train), std::move(test)};
}

} // namespace veintex
