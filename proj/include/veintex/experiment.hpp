#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veintex/classify/knn.hpp"
#include "veintex/classify/svm.hpp"
#include "veintex/dataset.hpp"
#include "veintex/eval.hpp"
#include "veintex/features/extract.hpp"
#include "veintex/fusion.hpp"

namespace veintex {

struct KnnConfig {
    std::size_t k = 5;
    std::vector<DistanceMetric> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
};

/// A kernel as configured: rbf sigma may be left to the median heuristic,
/// evaluated per cell on that cell's training vectors.
struct KernelChoice {
    KernelSpec::Kind kind = KernelSpec::Kind::rbf;
    std::optional<double> sigma;
    int degree = 3;
    double offset = 1.0;
};

struct SvmConfig {
    std::vector<KernelChoice> kernels{KernelChoice{KernelSpec::Kind::polynomial, std::nullopt, 3, 1.0},
                                      KernelChoice{KernelSpec::Kind::rbf, std::nullopt, 3, 1.0}};
    SvmParams params;
};

struct ExperimentConfig {
    std::filesystem::path dataset_root;
    PreprocessOptions preprocess;
    SplitSpec split;
    std::vector<DescriptorSpec> descriptors;
    std::optional<KnnConfig> knn;
    std::optional<SvmConfig> svm;
    std::vector<std::vector<Descriptor>> fusion;
    std::filesystem::path output = "veintex-out";
    std::uint64_t seed = 0;
};

// ---- config (de)serialization ----------------------------------------------

namespace detail {

inline nlohmann::json descriptor_to_json(const DescriptorSpec& d) {
    nlohmann::json j{{"type", to_string(d.kind)}};
    switch (d.kind) {
    case Descriptor::lpq: j["window"] = d.lpq_window; break;
    case Descriptor::log_gabor:
        j["scales"] = d.log_gabor.scales;
        j["orientations"] = d.log_gabor.orientations;
        j["min_wavelength"] = d.log_gabor.min_wavelength;
        j["mult"] = d.log_gabor.mult;
        j["ratio"] = d.log_gabor.ratio;
        j["angular_sigma"] = d.log_gabor.angular_sigma;
        break;
    case Descriptor::haar:
    case Descriptor::db8: j["levels"] = d.dwt_levels; break;
    default: break;
    }
    return j;
}

inline DescriptorSpec descriptor_from_json(const nlohmann::json& j) {
    DescriptorSpec d;
    d.kind = parse_descriptor(j.is_string() ? j.get<std::string>() : j.at("type").get<std::string>());
    if (j.is_string()) {
        if (d.kind == Descriptor::fused) fail(ErrorKind::config, "FUSED is not a configurable descriptor; use \"fusion\"");
        return d;
    }
    if (d.kind == Descriptor::fused) fail(ErrorKind::config, "FUSED is not a configurable descriptor; use \"fusion\"");
    d.lpq_window = j.value("window", d.lpq_window);
    d.dwt_levels = j.value("levels", d.dwt_levels);
    auto& lg = d.log_gabor;
    lg.scales = j.value("scales", lg.scales);
    lg.orientations = j.value("orientations", lg.orientations);
    lg.angular_sigma = 0.6 * std::numbers::pi / lg.orientations;
    lg.min_wavelength = j.value("min_wavelength", lg.min_wavelength);
    lg.mult = j.value("mult", lg.mult);
    lg.ratio = j.value("ratio", lg.ratio);
    lg.angular_sigma = j.value("angular_sigma", lg.angular_sigma);
    return d;
}

inline nlohmann::json kernel_choice_to_json(const KernelChoice& k) {
    if (k.kind == KernelSpec::Kind::rbf) {
        return {{"kind", "rbf"}, {"sigma", k.sigma ? nlohmann::json(*k.sigma) : nlohmann::json("median")}};
    }
    return {{"kind", "polynomial"}, {"degree", k.degree}, {"offset", k.offset}};
}

inline KernelChoice kernel_choice_from_json(const nlohmann::json& j) {
    KernelChoice k;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rbf" || kind == "gaussian") {
        k.kind = KernelSpec::Kind::rbf;
        if (j.contains("sigma") && j["sigma"].is_number()) k.sigma = j["sigma"].get<double>();
        else if (j.contains("sigma") && j["sigma"] != "median") fail(ErrorKind::config, "rbf sigma must be a number or \"median\"");
    } else if (kind == "polynomial") {
        k.kind = KernelSpec::Kind::polynomial;
        k.degree = j.value("degree", k.degree);
        k.offset = j.value("offset", k.offset);
    } else {
        fail(ErrorKind::config, "unknown kernel kind '" + kind + "'");
    }
    return k;
}

inline std::string split_mode_name(SplitSpec::Mode m) {
    return m == SplitSpec::Mode::per_subject_count ? "per-subject-count" : "per-subject-fraction";
}

} // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json descriptors = nlohmann::json::array();
    for (const auto& d : c.descriptors) descriptors.push_back(detail::descriptor_to_json(d));
    nlohmann::json classifiers = nlohmann::json::object();
    if (c.knn) {
        nlohmann::json metrics = nlohmann::json::array();
        for (auto m : c.knn->metrics) metrics.push_back(to_string(m));
        classifiers["knn"] = {{"k", c.knn->k}, {"metrics", metrics}};
    }
    if (c.svm) {
        nlohmann::json kernels = nlohmann::json::array();
        for (const auto& k : c.svm->kernels) kernels.push_back(detail::kernel_choice_to_json(k));
        classifiers["svm"] = {{"kernels", kernels},
                              {"C", c.svm->params.C},
                              {"tol", c.svm->params.tol},
                              {"max_passes", c.svm->params.max_passes}};
    }
    nlohmann::json fusion = nlohmann::json::array();
    for (const auto& group : c.fusion) {
        nlohmann::json g = nlohmann::json::array();
        for (auto d : group) g.push_back(to_string(d));
        fusion.push_back(g);
    }
    nlohmann::json split{{"mode", detail::split_mode_name(c.split.mode)}, {"train_amount", c.split.train_amount}};
    split["shuffle_seed"] = c.split.shuffle_seed ? nlohmann::json(*c.split.shuffle_seed) : nlohmann::json(nullptr);
    return {{"dataset", {{"root", c.dataset_root.string()}}},
            {"preprocess",
             {{"width", c.preprocess.width}, {"height", c.preprocess.height}, {"equalize", c.preprocess.equalize}}},
            {"split", split},
            {"descriptors", descriptors},
            {"classifiers", classifiers},
            {"fusion", fusion},
            {"output", c.output.string()},
            {"seed", c.seed}};
}

/**
 * Parses an experiment config. Missing sections take defaults: 128x128 with
 * equalization, a 50% per-subject split, all five descriptors, KNN (k=5, all
 * metrics), SVM (polynomial d=3 c=1 and median-sigma RBF, C=10), and LPQ+HAAR
 * fusion. Any malformed field is a config error.
 */
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            c.dataset_root = d.is_string() ? d.get<std::string>() : d.at("root").get<std::string>();
        }
        if (j.contains("preprocess")) {
            const auto& p = j["preprocess"];
            c.preprocess.width = p.value("width", c.preprocess.width);
            c.preprocess.height = p.value("height", c.preprocess.height);
            c.preprocess.equalize = p.value("equalize", c.preprocess.equalize);
            if (c.preprocess.width <= 0 || c.preprocess.height <= 0) fail(ErrorKind::config, "preprocess size must be positive");
        }
        if (j.contains("split")) {
            const auto& s = j["split"];
            const std::string mode = s.value("mode", detail::split_mode_name(c.split.mode));
            if (mode == "per-subject-count") c.split.mode = SplitSpec::Mode::per_subject_count;
            else if (mode == "per-subject-fraction") c.split.mode = SplitSpec::Mode::per_subject_fraction;
            else fail(ErrorKind::config, "unknown split mode '" + mode + "'");
            c.split.train_amount = s.value("train_amount", c.split.train_amount);
            if (s.contains("shuffle_seed") && !s["shuffle_seed"].is_null()) c.split.shuffle_seed = s["shuffle_seed"].get<std::uint64_t>();
        }
        if (j.contains("descriptors")) {
            for (const auto& d : j["descriptors"]) c.descriptors.push_back(detail::descriptor_from_json(d));
        } else {
            for (auto kind : kSingleDescriptors) {
                DescriptorSpec spec;
                spec.kind = kind;
                c.descriptors.push_back(spec);
            }
        }
        if (c.descriptors.empty()) fail(ErrorKind::config, "descriptor list is empty");
        for (std::size_t a = 0; a < c.descriptors.size(); ++a) {
            for (std::size_t b = a + 1; b < c.descriptors.size(); ++b) {
                if (c.descriptors[a].kind == c.descriptors[b].kind) {
                    fail(ErrorKind::config, "descriptor " + std::string(to_string(c.descriptors[a].kind)) + " listed twice");
                }
            }
        }
        if (j.contains("classifiers")) {
            const auto& cl = j["classifiers"];
            if (cl.contains("knn")) {
                KnnConfig k;
                k.k = cl["knn"].value("k", k.k);
                if (cl["knn"].contains("metrics")) {
                    k.metrics.clear();
                    for (const auto& m : cl["knn"]["metrics"]) k.metrics.push_back(parse_metric(m.get<std::string>()));
                }
                c.knn = k;
            }
            if (cl.contains("svm")) {
                SvmConfig s;
                const auto& sj = cl["svm"];
                if (sj.contains("kernels")) {
                    s.kernels.clear();
                    for (const auto& k : sj["kernels"]) s.kernels.push_back(detail::kernel_choice_from_json(k));
                }
                s.params.C = sj.value("C", s.params.C);
                s.params.tol = sj.value("tol", s.params.tol);
                s.params.max_passes = sj.value("max_passes", s.params.max_passes);
                c.svm = s;
            }
        } else {
            c.knn = KnnConfig{};
            c.svm = SvmConfig{};
        }
        if (j.contains("fusion")) {
            for (const auto& group : j["fusion"]) {
                std::vector<Descriptor> g;
                for (const auto& d : group) g.push_back(parse_descriptor(d.get<std::string>()));
                c.fusion.push_back(std::move(g));
            }
        } else {
            c.fusion.push_back({Descriptor::lpq, Descriptor::haar});
        }
        for (const auto& group : c.fusion) {
            if (group.size() < 2) fail(ErrorKind::config, "a fusion group needs at least two descriptors");
            for (auto d : group) {
                bool present = false;
                for (const auto& spec : c.descriptors) present = present || spec.kind == d;
                if (!present) {
                    fail(ErrorKind::config, "fusion references " + std::string(to_string(d)) + ", which is not in the descriptor list");
                }
            }
        }
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        c.seed = j.value("seed", c.seed);
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        fail(ErrorKind::config, e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, path.string() + ": cannot open config");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

/// FNV-1a over the canonical (key-sorted, compact) JSON form.
inline std::string hash_json(const nlohmann::json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const ExperimentConfig& c) { return hash_json(to_json(c)); }

// ---- feature extraction ----------------------------------------------------

struct FeatureSplit {
    LabeledDataset<FeatureVector> train;
    LabeledDataset<FeatureVector> test;
};

using FeatureTables = std::map<Descriptor, FeatureSplit>;

/// Preprocesses and splits a loaded corpus, then extracts every configured
/// descriptor on both sides.
inline FeatureTables extract_features(const LabeledDataset<GrayImage>& corpus, const ExperimentConfig& config) {
    auto canonical = map_payloads(corpus, [&](const GrayImage& img) { return preprocess(img, config.preprocess); });
    auto [train, test] = split_dataset(canonical, config.split);
    FeatureTables tables;
    for (const auto& spec : config.descriptors) {
        const FeatureExtractor extract(spec, config.preprocess.width, config.preprocess.height);
        tables[spec.kind] = FeatureSplit{map_payloads(train, extract), map_payloads(test, extract)};
    }
    return tables;
}

inline std::filesystem::path dump_path(const std::filesystem::path& out, Descriptor d, std::string_view side) {
    return out / "features" / (std::string(to_string(d)) + "." + std::string(side) + ".tsv");
}

/// Key identifying the inputs that determine the feature dumps.
inline std::string feature_cache_key(const ExperimentConfig& c) {
    const auto j = to_json(c);
    return hash_json({{"dataset", j["dataset"]}, {"preprocess", j["preprocess"]}, {"split", j["split"]},
                      {"descriptors", j["descriptors"]}});
}

inline std::vector<std::filesystem::path> write_feature_tables(const FeatureTables& tables, const ExperimentConfig& config) {
    std::filesystem::create_directories(config.output / "features");
    std::vector<std::filesystem::path> written;
    for (const auto& [d, split] : tables) {
        written.push_back(dump_path(config.output, d, "train"));
        write_feature_dump(split.train, written.back());
        written.push_back(dump_path(config.output, d, "test"));
        write_feature_dump(split.test, written.back());
    }
    std::ofstream key(config.output / "features" / "cache.json", std::ios::binary);
    key << nlohmann::json{{"key", feature_cache_key(config)}}.dump(2) << '\n';
    return written;
}

/// Loads cached dumps when their key matches the config; nullopt otherwise.
inline std::optional<FeatureTables> read_feature_tables(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const auto key_path = config.output / "features" / "cache.json";
    std::error_code ec;
    if (!fs::is_regular_file(key_path, ec)) return std::nullopt;
    try {
        std::ifstream in(key_path);
        nlohmann::json key;
        in >> key;
        if (key.at("key").get<std::string>() != feature_cache_key(config)) return std::nullopt;
        FeatureTables tables;
        for (const auto& spec : config.descriptors) {
            const auto tr = dump_path(config.output, spec.kind, "train"), te = dump_path(config.output, spec.kind, "test");
            if (!fs::is_regular_file(tr, ec) || !fs::is_regular_file(te, ec)) return std::nullopt;
            tables[spec.kind] = FeatureSplit{read_feature_dump(tr), read_feature_dump(te)};
        }
        return tables;
    } catch (const std::exception& e) {
        warn(std::string("ignoring feature cache: ") + e.what());
        return std::nullopt;
    }
}

// ---- grid execution ---------------------------------------------------------

struct CellResult {
    std::string id;
    EvalReport report;
    std::optional<nlohmann::json> model;
    double wall_time_s = 0.0;
};

namespace detail {

inline std::size_t label_index(const std::vector<std::string>& class_set, const std::string& subject) {
    auto it = std::lower_bound(class_set.begin(), class_set.end(), subject);
    if (it == class_set.end() || *it != subject) fail(ErrorKind::data, "unknown subject '" + subject + "'");
    return static_cast<std::size_t>(it - class_set.begin());
}

inline std::vector<std::vector<double>> values_of(const LabeledDataset<FeatureVector>& ds) {
    std::vector<std::vector<double>> out;
    out.reserve(ds.size());
    for (const auto& fv : ds.payloads) out.push_back(fv.values);
    return out;
}

struct CellData {
    std::vector<std::vector<double>> train_x, test_x;
    std::vector<std::size_t> train_y, test_y;
    std::optional<FusedSchema> schema;
};

inline CellData single_cell_data(const FeatureSplit& split, const std::vector<std::string>& class_set) {
    CellData d{values_of(split.train), values_of(split.test), {}, {}, std::nullopt};
    for (const auto& r : split.train.records) d.train_y.push_back(label_index(class_set, r.subject_id));
    for (const auto& r : split.test.records) d.test_y.push_back(label_index(class_set, r.subject_id));
    return d;
}

inline CellData fused_cell_data(const FeatureTables& tables, const std::vector<Descriptor>& group,
                                const std::vector<std::string>& class_set) {
    FusedSchema schema;
    std::vector<const FeatureSplit*> parts;
    for (auto d : group) {
        auto it = tables.find(d);
        if (it == tables.end()) fail(ErrorKind::config, "no features for " + std::string(to_string(d)));
        parts.push_back(&it->second);
        if (it->second.train.records != parts.front()->train.records ||
            it->second.test.records.size() != parts.front()->test.records.size()) {
            fail(ErrorKind::data, "descriptor tables do not cover the same samples");
        }
        for (std::size_t i = 0; i < it->second.test.size(); ++i) {
            const auto& a = it->second.test.records[i];
            const auto& b = parts.front()->test.records[i];
            if (a.subject_id != b.subject_id || a.sample_index != b.sample_index) {
                fail(ErrorKind::data, "descriptor tables do not cover the same samples");
            }
        }
        schema.parts.push_back(FusedPart{d, fit_zscore(values_of(it->second.train))});
    }
    CellData out;
    auto fuse_side = [&](bool train) {
        const auto& ref = train ? parts.front()->train : parts.front()->test;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            std::vector<const FeatureVector*> vs;
            for (const auto* p : parts) vs.push_back(&(train ? p->train : p->test).payloads[i]);
            (train ? out.train_x : out.test_x).push_back(fuse_concat(schema, vs).values);
            (train ? out.train_y : out.test_y).push_back(label_index(class_set, ref.records[i].subject_id));
        }
    };
    fuse_side(true);
    fuse_side(false);
    out.schema = std::move(schema);
    return out;
}

} // namespace detail

/**
 * Runs every configured cell: single descriptors under each KNN metric and
 * SVM kernel, then every fusion group under the same classifiers. A cell
 * that throws is recorded as failed and the grid continues.
 */
inline std::vector<CellResult> run_grid(const FeatureTables& tables, const ExperimentConfig& config,
                                        const std::vector<std::string>& class_set) {
    struct Source {
        std::vector<std::string> names;
        std::function<detail::CellData()> load;
    };
    std::vector<Source> sources;
    for (const auto& spec : config.descriptors) {
        sources.push_back({{std::string(to_string(spec.kind))}, [&tables, &class_set, kind = spec.kind] {
                               return detail::single_cell_data(tables.at(kind), class_set);
                           }});
    }
    for (const auto& group : config.fusion) {
        std::vector<std::string> names;
        for (auto d : group) names.emplace_back(to_string(d));
        sources.push_back({names, [&tables, &class_set, group] { return detail::fused_cell_data(tables, group, class_set); }});
    }

    std::vector<CellResult> results;
    auto run_cell = [&](const std::string& id, RunConfig rc, const Source& src, auto&& body) {
        const auto start = std::chrono::steady_clock::now();
        CellResult cell{id, {}, std::nullopt, 0.0};
        try {
            const auto data = src.load();
            std::vector<std::size_t> pred;
            cell.model = body(data, rc, pred);
            cell.report = make_report(rc, confusion_matrix(data.test_y, pred, class_set));
        } catch (const Error& e) {
            cell.report = failed_report(rc, e);
        }
        cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(cell));
    };

    auto knn_body = [&](DistanceMetric metric) {
        return [&config, &class_set, metric](const detail::CellData& d, RunConfig&, std::vector<std::size_t>& pred)
                   -> std::optional<nlohmann::json> {
            const KnnModel model(config.knn->k, metric, d.train_x, d.train_y, class_set.size());
            for (const auto& q : d.test_x) pred.push_back(knn_predict(model, q));
            if (d.schema) return nlohmann::json{{"schema", to_json(*d.schema)}};
            return std::nullopt;
        };
    };
    auto svm_body = [&](const KernelChoice& choice) {
        return [&config, &class_set, choice](const detail::CellData& d, RunConfig& rc, std::vector<std::size_t>& pred)
                   -> std::optional<nlohmann::json> {
            KernelSpec spec = choice.kind == KernelSpec::Kind::rbf
                                  ? KernelSpec::rbf(choice.sigma ? *choice.sigma : sigma_median_heuristic(d.train_x, config.seed))
                                  : KernelSpec::polynomial(choice.degree, choice.offset);
            rc.parameters["kernel"] = kernel_to_json(spec);
            const auto model = svm_train(d.train_x, d.train_y, class_set, spec, config.svm->params);
            for (const auto& q : d.test_x) pred.push_back(svm_predict(model, q));
            nlohmann::json j{{"model", to_json(model)}};
            if (d.schema) j["schema"] = to_json(*d.schema);
            return j;
        };
    };

    auto cell_id = [](const std::vector<std::string>& names, const std::string& clf, const std::string& variant) {
        std::string id;
        for (const auto& n : names) id += (id.empty() ? "" : "+") + n;
        return id + "_" + clf + "_" + variant;
    };

    // Table order: single KNN, single SVM, fused KNN, fused SVM.
    for (int fused = 0; fused < 2; ++fused) {
        for (int use_svm = 0; use_svm < 2; ++use_svm) {
            for (const auto& src : sources) {
                if ((src.names.size() > 1) != (fused == 1)) continue;
                if (!use_svm && config.knn) {
                    for (auto m : config.knn->metrics) {
                        RunConfig rc{src.names, "knn", std::string(to_string(m)), {{"k", config.knn->k}}};
                        run_cell(cell_id(src.names, "knn", rc.variant), rc, src, knn_body(m));
                    }
                }
                if (use_svm && config.svm) {
                    for (const auto& k : config.svm->kernels) {
                        const std::string variant = k.kind == KernelSpec::Kind::rbf ? "rbf" : "polynomial";
                        RunConfig rc{src.names, "svm", variant,
                                     {{"C", config.svm->params.C}, {"tol", config.svm->params.tol},
                                      {"max_passes", config.svm->params.max_passes}}};
                        run_cell(cell_id(src.names, "svm", variant), rc, src, svm_body(k));
                    }
                }
            }
        }
    }
    return results;
}

/// All layouts that have at least one report, rendered in table order.
inline std::string render_all(const std::vector<EvalReport>& reports) {
    std::string out;
    for (Layout l : {Layout::table1, Layout::table2, Layout::table3, Layout::table4}) {
        bool any = false;
        for (const auto& r : reports) any = any || layout_of(r.config) == l;
        if (!any) continue;
        if (!out.empty()) out += '\n';
        out += render_report(reports, l);
    }
    return out;
}

/// Machine-readable report: config hash plus every cell, without timings.
inline nlohmann::json report_json(const std::vector<CellResult>& cells, const ExperimentConfig& config) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cells) {
        auto j = to_json(c.report);
        j["id"] = c.id;
        arr.push_back(std::move(j));
    }
    return {{"config_hash", config_hash(config)}, {"seed", config.seed}, {"cells", arr}};
}

} // namespace veintex
