#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "veintex/experiment.hpp"
#include "veintex/synthetic.hpp"

namespace fs = std::filesystem;
using namespace veintex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string dataset;
};

ExperimentConfig resolve_config(const Overrides& o) {
    ExperimentConfig c = o.config_path.empty() ? config_from_json(nlohmann::json::object()) : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output = o.out;
    if (!o.dataset.empty()) c.dataset_root = o.dataset;
    if (c.dataset_root.empty()) fail(ErrorKind::config, "no dataset root (set \"dataset\" in the config or pass --dataset)");
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, path.string() + ": cannot open for writing");
    out << text;
    if (!out) fail(ErrorKind::io, path.string() + ": write failed");
}

std::string relative_to(const fs::path& p, const fs::path& base) { return p.lexically_relative(base).generic_string(); }

FeatureTables obtain_features(const ExperimentConfig& config, bool use_cache, std::vector<fs::path>& dumps) {
    if (use_cache) {
        if (auto cached = read_feature_tables(config)) {
            std::cerr << "features: using cache in " << (config.output / "features").string() << '\n';
            for (const auto& spec : config.descriptors) {
                dumps.push_back(dump_path(config.output, spec.kind, "train"));
                dumps.push_back(dump_path(config.output, spec.kind, "test"));
            }
            return std::move(*cached);
        }
    }
    const auto corpus = scan_dataset(config.dataset_root);
    std::cerr << "features: extracting from " << corpus.size() << " images of " << corpus.class_set.size()
              << " subjects\n";
    auto tables = extract_features(corpus, config);
    dumps = write_feature_tables(tables, config);
    return tables;
}

int cmd_extract(const Overrides& o) {
    const auto config = resolve_config(o);
    std::vector<fs::path> dumps;
    obtain_features(config, false, dumps);
    for (const auto& p : dumps) std::cout << p.string() << '\n';
    return kExitOk;
}

// Clears artifacts of a previous run so `report` never mixes runs.
void reset_dir(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
}

int cmd_run(const Overrides& o, bool use_cache) {
    const auto config = resolve_config(o);
    std::vector<fs::path> dumps;
    const auto tables = obtain_features(config, use_cache, dumps);
    const auto& class_set = tables.begin()->second.train.class_set;

    const auto cells = run_grid(tables, config, class_set);

    const fs::path records_dir = config.output / "records";
    const fs::path models_dir = config.output / "models";
    reset_dir(records_dir);
    reset_dir(models_dir);
    const std::string hash = config_hash(config);
    nlohmann::json feature_paths = nlohmann::json::array();
    for (const auto& p : dumps) feature_paths.push_back(relative_to(p, config.output));

    bool convergence = false, failed = false;
    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        nlohmann::json artifacts{{"features", feature_paths}};
        if (cell.model) {
            const fs::path model_path = models_dir / (cell.id + ".json");
            write_text(model_path, cell.model->dump(2) + "\n");
            artifacts["model"] = relative_to(model_path, config.output);
        }
        nlohmann::json record{{"config_hash", hash},
                              {"id", cell.id},
                              {"layout", to_string(layout_of(cell.report.config))},
                              {"report", to_json(cell.report)},
                              {"wall_time_s", cell.wall_time_s},
                              {"artifacts", artifacts}};
        char name[16];
        std::snprintf(name, sizeof name, "%03zu_", i);
        write_text(records_dir / (name + cell.id + ".json"), record.dump(2) + "\n");

        if (!cell.report.ok) {
            failed = true;
            convergence = convergence || cell.report.error_kind == to_string(ErrorKind::convergence);
            std::cerr << "cell " << cell.id << " failed (" << cell.report.error_kind << "): " << cell.report.error << '\n';
        }
        reports.push_back(cell.report);
    }

    const std::string tables_text = render_all(reports);
    write_text(config.output / "report.json", report_json(cells, config).dump(2) + "\n");
    write_text(config.output / "tables.txt", tables_text);
    std::cout << tables_text;
    if (convergence) return kExitConvergence;
    return failed ? kExitData : kExitOk;
}

std::vector<EvalReport> load_records(const fs::path& run_dir) {
    const fs::path records_dir = run_dir / "records";
    std::error_code ec;
    if (!fs::is_directory(records_dir, ec)) fail(ErrorKind::report, records_dir.string() + ": no records directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(records_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorKind::report, records_dir.string() + ": no run records");

    std::vector<EvalReport> reports;
    for (const auto& file : files) {
        try {
            std::ifstream in(file);
            nlohmann::json j;
            in >> j;
            const std::string tag = j.at("layout").get<std::string>();
            const auto layout = parse_layout(tag);
            if (!layout) fail(ErrorKind::record, "unknown layout '" + tag + "'");
            auto report = report_from_json(j.at("report"));
            if (layout_of(report.config) != *layout) fail(ErrorKind::record, "layout '" + tag + "' does not match the run");
            reports.push_back(std::move(report));
        } catch (const std::exception& e) {
            fail(ErrorKind::record, file.string() + ": " + e.what());
        }
    }
    return reports;
}

int cmd_report(const fs::path& run_dir, bool as_json) {
    const auto reports = load_records(run_dir);
    if (as_json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(to_json(r));
        std::cout << nlohmann::json{{"cells", arr}}.dump(2) << '\n';
    } else {
        std::cout << render_all(reports);
    }
    return kExitOk;
}

int cmd_synth(const fs::path& root, const SyntheticCorpusOptions& opt) {
    const auto corpus = make_synthetic_corpus(opt);
    write_corpus(corpus, root);
    std::cout << "wrote " << corpus.size() << " images of " << corpus.class_set.size() << " subjects to " << root.string()
              << '\n';
    return kExitOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::convergence: return kExitConvergence;
    default: return kExitData;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"veintex: hand-vein texture recognition experiments"};
    app.require_subcommand(1);

    Overrides o;
    auto add_overrides = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the config seed");
        sub->add_option("--out", o.out, "Override the output directory");
        sub->add_option("--dataset", o.dataset, "Override the dataset root");
    };

    auto* extract = app.add_subcommand("extract", "Extract feature dumps for every descriptor and split side");
    add_overrides(extract);

    auto* run = app.add_subcommand("run", "Run the full classifier grid and render the table1..table4 reports");
    add_overrides(run);
    bool no_cache = false;
    run->add_flag("--no-cache", no_cache, "Ignore cached feature dumps");

    auto* report = app.add_subcommand("report", "Re-render tables from a run directory");
    std::string run_dir;
    bool as_json = false;
    report->add_option("dir", run_dir, "Run output directory")->required();
    report->add_flag("--json", as_json, "Emit JSON instead of text tables");

    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic texture corpus");
    std::string synth_root;
    SyntheticCorpusOptions synth_opt;
    synth->add_option("dir", synth_root, "Output directory")->required();
    synth->add_option("--classes", synth_opt.classes, "Number of subjects")->capture_default_str();
    synth->add_option("--samples", synth_opt.samples_per_class, "Images per subject")->capture_default_str();
    synth->add_option("--size", synth_opt.size, "Image side in pixels")->capture_default_str();
    synth->add_option("--seed", synth_opt.seed, "Corpus seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*extract) return cmd_extract(o);
        if (*run) return cmd_run(o, !no_cache);
        if (*report) return cmd_report(run_dir, as_json);
        if (*synth) return cmd_synth(synth_root, synth_opt);
    } catch (const Error& e) {
        std::cerr << "veintex: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "veintex: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}
