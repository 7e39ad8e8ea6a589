#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "veintex/dataset.hpp"
#include "veintex/features/feature_vector.hpp"
#include "veintex/features/lbp.hpp"
#include "veintex/features/log_gabor.hpp"
#include "veintex/features/lpq.hpp"
#include "veintex/features/wavelet.hpp"

namespace veintex {

/// One descriptor with its parameters. Only the fields relevant to `kind`
/// are read.
struct DescriptorSpec {
    Descriptor kind = Descriptor::lbp;
    int lpq_window = 7;
    LogGaborParams log_gabor;
    int dwt_levels = 3;
};

/// Binds a DescriptorSpec to an image size (the log-Gabor bank depends on it).
class FeatureExtractor {
public:
    FeatureExtractor(DescriptorSpec spec, int width, int height) : spec_(std::move(spec)) {
        switch (spec_.kind) {
        case Descriptor::log_gabor: bank_.emplace(width, height, spec_.log_gabor); break;
        case Descriptor::haar: filter_ = WaveletFilter::haar(); break;
        case Descriptor::db8: filter_ = WaveletFilter::db8(); break;
        case Descriptor::fused: fail(ErrorKind::parameter, "FUSED is not an extractable descriptor");
        default: break;
        }
    }

    const DescriptorSpec& spec() const noexcept { return spec_; }

    FeatureVector operator()(const GrayImage& img) const {
        switch (spec_.kind) {
        case Descriptor::lbp: return lbp_descriptor(img);
        case Descriptor::lpq: return lpq_descriptor(img, spec_.lpq_window);
        case Descriptor::log_gabor: return log_gabor_descriptor(img, *bank_);
        case Descriptor::haar:
        case Descriptor::db8: return dwt_descriptor(img, filter_, spec_.dwt_levels);
        case Descriptor::fused: break;
        }
        fail(ErrorKind::parameter, "FUSED is not an extractable descriptor");
    }

private:
    DescriptorSpec spec_;
    std::optional<LogGaborBank> bank_;
    WaveletFilter filter_;
};

/// %.17g rendering; round-trips every double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/**
 * Feature dump: one line per sample,
 * `subject_id<TAB>sample_index<TAB>descriptor<TAB>v1,v2,...,vdim`.
 */
inline void write_feature_dump(const LabeledDataset<FeatureVector>& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, path.string() + ": cannot open for writing");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& r = ds.records[i];
        const auto& fv = ds.payloads[i];
        out << r.subject_id << '\t' << r.sample_index << '\t' << to_string(fv.descriptor) << '\t';
        for (std::size_t j = 0; j < fv.values.size(); ++j) {
            if (j) out << ',';
            out << format_real(fv.values[j]);
        }
        out << '\n';
    }
    if (!out) fail(ErrorKind::io, path.string() + ": write failed");
}

/// Reads a dump written by write_feature_dump. class_set is the sorted set of
/// subjects present in the file.
inline LabeledDataset<FeatureVector> read_feature_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, path.string() + ": cannot open");
    LabeledDataset<FeatureVector> ds;
    std::set<std::string> subjects;
    std::string line;
    std::size_t line_no = 0;
    auto bad = [&](const std::string& why) {
        fail(ErrorKind::format, path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string subject, index, tag, values;
        if (!std::getline(fields, subject, '\t') || !std::getline(fields, index, '\t') ||
            !std::getline(fields, tag, '\t') || !std::getline(fields, values)) {
            bad("expected 4 tab-separated fields");
        }
        SampleRecord rec{subject, 0, {}};
        auto [p, ec] = std::from_chars(index.data(), index.data() + index.size(), rec.sample_index);
        if (ec != std::errc{} || p != index.data() + index.size()) bad("bad sample index");
        FeatureVector fv{parse_descriptor(tag), {}};
        std::istringstream vs(values);
        std::string item;
        while (std::getline(vs, item, ',')) {
            try {
                std::size_t used = 0;
                fv.values.push_back(std::stod(item, &used));
                if (used != item.size()) bad("bad value '" + item + "'");
            } catch (const std::logic_error&) {
                bad("bad value '" + item + "'");
            }
        }
        if (fv.values.empty()) bad("empty feature vector");
        subjects.insert(subject);
        ds.push_back(std::move(rec), std::move(fv));
    }
    ds.class_set.assign(subjects.begin(), subjects.end());
    return ds;
}

} // namespace veintex
