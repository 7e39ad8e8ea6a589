#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veintex/error.hpp"

namespace veintex {

/// Rows are truth, columns are predictions, both indexed by class_set.
struct ConfusionMatrix {
    std::vector<std::string> class_set;
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts) {
            for (std::size_t c : row) t += c;
        }
        return t;
    }

    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& truth, const std::vector<std::string>& pred,
                                        const std::vector<std::string>& class_set) {
    if (truth.size() != pred.size()) fail(ErrorKind::parameter, "truth and prediction lengths differ");
    if (truth.empty()) fail(ErrorKind::parameter, "confusion matrix needs at least one sample");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < class_set.size(); ++i) index.emplace(class_set[i], i);
    auto lookup = [&](const std::string& label) {
        auto it = index.find(label);
        if (it == index.end()) fail(ErrorKind::data, "label '" + label + "' is not in the class set");
        return it->second;
    };
    ConfusionMatrix cm{class_set, std::vector<std::vector<std::size_t>>(class_set.size(),
                                                                        std::vector<std::size_t>(class_set.size(), 0))};
    for (std::size_t t = 0; t < truth.size(); ++t) ++cm.counts[lookup(truth[t])][lookup(pred[t])];
    return cm;
}

/// Index-label variant; labels must be < class_set.size().
inline ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                                        const std::vector<std::string>& class_set) {
    if (truth.size() != pred.size()) fail(ErrorKind::parameter, "truth and prediction lengths differ");
    if (truth.empty()) fail(ErrorKind::parameter, "confusion matrix needs at least one sample");
    const std::size_t C = class_set.size();
    ConfusionMatrix cm{class_set, std::vector<std::vector<std::size_t>>(C, std::vector<std::size_t>(C, 0))};
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (truth[t] >= C || pred[t] >= C) fail(ErrorKind::data, "label index outside the class set");
        ++cm.counts[truth[t]][pred[t]];
    }
    return cm;
}

/// 100 * trace / total.
inline double recognition_rate(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) fail(ErrorKind::parameter, "recognition rate of an empty confusion matrix");
    return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

/// Harmonic mean 2PR/(P+R), 0 when P+R = 0.
inline double f_measure(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    bool precision_undefined = false; // column empty: class never predicted
    bool recall_undefined = false;    // row empty: class absent from truth
};

struct PrfSummary {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f = 0.0;
};

/// Per-class precision/recall/F and their unweighted means. Empty rows or
/// columns give 0 with the matching flag set.
inline PrfSummary precision_recall_f(const ConfusionMatrix& cm) {
    if (cm.total() == 0) fail(ErrorKind::parameter, "metrics of an empty confusion matrix");
    const std::size_t C = cm.counts.size();
    PrfSummary out;
    out.per_class.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t row = 0, col = 0;
        for (std::size_t k = 0; k < C; ++k) {
            row += cm.counts[c][k];
            col += cm.counts[k][c];
        }
        auto& m = out.per_class[c];
        const double hit = static_cast<double>(cm.counts[c][c]);
        m.recall_undefined = row == 0;
        m.precision_undefined = col == 0;
        m.recall = row ? hit / static_cast<double>(row) : 0.0;
        m.precision = col ? hit / static_cast<double>(col) : 0.0;
        m.f = f_measure(m.precision, m.recall);
        out.macro_precision += m.precision;
        out.macro_recall += m.recall;
        out.macro_f += m.f;
    }
    if (C > 0) {
        out.macro_precision /= static_cast<double>(C);
        out.macro_recall /= static_cast<double>(C);
        out.macro_f /= static_cast<double>(C);
    }
    return out;
}

/// What produced a report: descriptors (several when fused), classifier
/// family ("knn" or "svm"), the metric/kernel variant and free-form
/// parameters.
struct RunConfig {
    std::vector<std::string> descriptors;
    std::string classifier;
    std::string variant;
    nlohmann::json parameters = nlohmann::json::object();

    std::string descriptor_label() const {
        std::string out;
        for (const auto& d : descriptors) out += (out.empty() ? "" : "+") + d;
        return out;
    }
};

struct EvalReport {
    RunConfig config;
    bool ok = true;
    std::string error_kind;
    std::string error;
    ConfusionMatrix confusion;
    double recognition_rate = 0.0;
    PrfSummary metrics;
};

inline EvalReport make_report(RunConfig config, const ConfusionMatrix& cm) {
    return EvalReport{std::move(config), true, {}, {}, cm, recognition_rate(cm), precision_recall_f(cm)};
}

inline EvalReport failed_report(RunConfig config, const Error& e) {
    EvalReport r;
    r.config = std::move(config);
    r.ok = false;
    r.error_kind = std::string(to_string(e.kind()));
    r.error = e.what();
    return r;
}

enum class Layout { table1, table2, table3, table4 };

inline std::string_view to_string(Layout l) {
    switch (l) {
    case Layout::table1: return "table1";
    case Layout::table2: return "table2";
    case Layout::table3: return "table3";
    case Layout::table4: return "table4";
    }
    return "?";
}

inline std::optional<Layout> parse_layout(std::string_view s) {
    for (Layout l : {Layout::table1, Layout::table2, Layout::table3, Layout::table4}) {
        if (s == to_string(l)) return l;
    }
    return std::nullopt;
}

/// table1: KNN single descriptor, table2: SVM single, table3: KNN fused,
/// table4: SVM fused.
inline Layout layout_of(const RunConfig& cfg) {
    const bool fused = cfg.descriptors.size() > 1;
    if (cfg.classifier == "knn") return fused ? Layout::table3 : Layout::table1;
    if (cfg.classifier == "svm") return fused ? Layout::table4 : Layout::table2;
    fail(ErrorKind::report, "unknown classifier '" + cfg.classifier + "'");
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string render_grid(const std::string& title, const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            const std::size_t pad = widths[c] - cells[c].size();
            if (c == 0) out << cells[c] << std::string(pad, ' ');
            else out << std::string(pad, ' ') << cells[c];
        }
        out << '\n';
    };
    out << title << '\n';
    line(header);
    std::size_t total = 0;
    for (std::size_t w : widths) total += w;
    out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    for (const auto& row : rows) line(row);
    return out.str();
}

template <typename T>
void push_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

} // namespace detail

/**
 * Renders reports as a text grid in one of the four layouts. Rows are metric/kernel
 * variants, in first-seen order. table1/2 put descriptors in columns and
 * recognition rates (2 decimals) in cells; table3/4 print one block per
 * fused descriptor pair with rate, recall, precision and F (3 decimals).
 * Reports belonging to other layouts are ignored.
 */
inline std::string render_report(const std::vector<EvalReport>& reports, Layout layout) {
    if (reports.empty()) fail(ErrorKind::report, "no reports to render");
    std::vector<const EvalReport*> mine;
    for (const auto& r : reports) {
        if (layout_of(r.config) == layout) mine.push_back(&r);
    }
    if (mine.empty()) fail(ErrorKind::report, "no reports for layout " + std::string(to_string(layout)));

    std::vector<std::string> variants, labels;
    std::map<std::pair<std::string, std::string>, const EvalReport*> cells;
    for (const auto* r : mine) {
        detail::push_unique(variants, r->config.variant);
        detail::push_unique(labels, r->config.descriptor_label());
        cells[{r->config.variant, r->config.descriptor_label()}] = r;
    }
    auto cell = [&](const std::string& variant, const std::string& label) -> const EvalReport& {
        auto it = cells.find({variant, label});
        if (it == cells.end()) {
            fail(ErrorKind::report, "missing cell (" + variant + ", " + label + ") in " + std::string(to_string(layout)));
        }
        return *it->second;
    };

    const bool knn = layout == Layout::table1 || layout == Layout::table3;
    const std::string row_head = knn ? "Distance measure" : "Kernel";
    const std::string classifier = knn ? "K-NN" : "SVM";

    if (layout == Layout::table1 || layout == Layout::table2) {
        std::vector<std::string> header{row_head};
        header.insert(header.end(), labels.begin(), labels.end());
        std::vector<std::vector<std::string>> rows;
        for (const auto& v : variants) {
            std::vector<std::string> row{v};
            for (const auto& l : labels) {
                const auto& r = cell(v, l);
                row.push_back(r.ok ? detail::fixed(r.recognition_rate, 2) : "FAILED");
            }
            rows.push_back(std::move(row));
        }
        return detail::render_grid(std::string(to_string(layout)) + ": performance of " + classifier +
                                       " classifier, recognition rate (%)",
                                   header, rows);
    }

    std::string out;
    for (const auto& l : labels) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& v : variants) {
            const auto& r = cell(v, l);
            if (r.ok) {
                rows.push_back({v, detail::fixed(r.recognition_rate, 2), detail::fixed(r.metrics.macro_recall, 3),
                                detail::fixed(r.metrics.macro_precision, 3), detail::fixed(r.metrics.macro_f, 3)});
            } else {
                rows.push_back({v, "FAILED", "-", "-", "-"});
            }
        }
        out += detail::render_grid(std::string(to_string(layout)) + ": performance of " + classifier +
                                       " classifier, feature level fusion of " + l + " (z-score)",
                                   {row_head, "Rate (%)", "Recall", "Precision", "F-measure"}, rows);
    }
    return out;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"descriptors", c.descriptors},
            {"classifier", c.classifier},
            {"variant", c.variant},
            {"parameters", c.parameters}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    return RunConfig{j.at("descriptors").get<std::vector<std::string>>(), j.at("classifier").get<std::string>(),
                     j.at("variant").get<std::string>(), j.value("parameters", nlohmann::json::object())};
}

/// {config, status, confusion, metrics}.
inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j{{"config", to_json(r.config)}, {"layout", to_string(layout_of(r.config))}};
    if (!r.ok) {
        j["status"] = "failed";
        j["error_kind"] = r.error_kind;
        j["error"] = r.error;
        return j;
    }
    j["status"] = "ok";
    j["confusion"] = {{"class_set", r.confusion.class_set}, {"counts", r.confusion.counts}};
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < r.metrics.per_class.size(); ++c) {
        const auto& m = r.metrics.per_class[c];
        per_class.push_back({{"class", r.confusion.class_set[c]},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f_measure", m.f},
                             {"precision_undefined", m.precision_undefined},
                             {"recall_undefined", m.recall_undefined}});
    }
    j["metrics"] = {{"recognition_rate", r.recognition_rate},
                    {"macro_precision", r.metrics.macro_precision},
                    {"macro_recall", r.metrics.macro_recall},
                    {"macro_f_measure", r.metrics.macro_f},
                    {"per_class", per_class}};
    return j;
}

/// Rebuilds a report from its JSON form. Metrics are recomputed from the
/// stored confusion matrix.
inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.config = run_config_from_json(j.at("config"));
    const std::string status = j.at("status").get<std::string>();
    if (status == "failed") {
        r.ok = false;
        r.error_kind = j.value("error_kind", "");
        r.error = j.value("error", "");
        return r;
    }
    if (status != "ok") fail(ErrorKind::record, "unknown status '" + status + "'");
    ConfusionMatrix cm{j.at("confusion").at("class_set").get<std::vector<std::string>>(),
                       j.at("confusion").at("counts").get<std::vector<std::vector<std::size_t>>>()};
    if (cm.counts.size() != cm.class_set.size()) fail(ErrorKind::record, "confusion matrix shape mismatch");
    for (const auto& row : cm.counts) {
        if (row.size() != cm.class_set.size()) fail(ErrorKind::record, "confusion matrix shape mismatch");
    }
    return make_report(std::move(r.config), cm);
}

} // namespace veintex
