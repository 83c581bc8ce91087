// Command-line experiment runner: generates synthetic grouped datasets, runs
// strategy suites, and produces the sampling/calibration ablation grids.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alcurate/alcurate.hpp"

namespace {

using alcurate::ConfigError;

std::string default_out_dir() {
    const char* env = std::getenv("ALCURATE_OUT_DIR");
    return env && *env ? env : ".";
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ConfigError("write failure on " + path);
}

std::map<std::string, std::string> overrides_to_map(const std::vector<std::string>& sets) {
    std::map<std::string, std::string> kv;
    for (const std::string& s : sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        kv[alcurate::detail::trim(s.substr(0, eq))] = alcurate::detail::trim(s.substr(eq + 1));
    }
    return kv;
}

struct CommonArgs {
    std::string config_path;
    std::string dataset_path;
    std::string out_path;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;  // -1 = not given on the command line
    int repeats = -1;
    int jobs = -1;
};

alcurate::SuiteOptions load_options(const CommonArgs& args) {
    alcurate::SuiteOptions options;
    options.apply(alcurate::parse_key_value_file(args.config_path));
    options.apply(overrides_to_map(args.overrides));
    if (args.seed >= 0) options.seed = static_cast<std::uint64_t>(args.seed);
    if (args.repeats >= 0) options.repeats = args.repeats;
    if (args.jobs >= 0) options.jobs = args.jobs;
    if (options.repeats < 1) throw ConfigError("repeats must be >= 1");
    if (options.jobs < 1) throw ConfigError("jobs must be >= 1");
    return options;
}

void print_class_summary(const alcurate::Dataset& ds) {
    alcurate::IndexSet all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto instances = ds.class_counts(all);
    const auto subjects = ds.subject_counts(all);
    std::cout << "classes: " << ds.num_classes << ", feature_dim: " << ds.feature_dim
              << ", instances: " << ds.size() << "\n";
    for (int c = 0; c < ds.num_classes; ++c)
        std::cout << "  class " << c << ": " << subjects[static_cast<std::size_t>(c)]
                  << " subjects, " << instances[static_cast<std::size_t>(c)] << " instances\n";
}

int cmd_generate(const std::string& spec_path, const std::vector<std::string>& overrides,
                 std::string out_path) {
    std::map<std::string, std::string> kv;
    if (!spec_path.empty()) kv = alcurate::parse_key_value_file(spec_path);
    for (const auto& [key, value] : overrides_to_map(overrides)) kv[key] = value;

    alcurate::GeneratorSpec spec;
    for (const auto& [key, value] : kv) {
        using alcurate::detail::parse_number_or_throw;
        if (key == "classes") spec.num_classes = parse_number_or_throw<int>(key, value);
        else if (key == "feature_dim")
            spec.feature_dim = parse_number_or_throw<std::size_t>(key, value);
        else if (key == "subjects_per_class") {
            spec.subjects_per_class.clear();
            for (const std::string& tok : alcurate::detail::split_list(value))
                spec.subjects_per_class.push_back(parse_number_or_throw<int>(key, tok));
        } else if (key == "instances_per_subject")
            spec.instances_per_subject = parse_number_or_throw<int>(key, value);
        else if (key == "class_separation")
            spec.class_separation = parse_number_or_throw<double>(key, value);
        else if (key == "subject_sigma")
            spec.subject_sigma = parse_number_or_throw<double>(key, value);
        else if (key == "noise_sigma")
            spec.noise_sigma = parse_number_or_throw<double>(key, value);
        else if (key == "seed") spec.rng_seed = parse_number_or_throw<std::uint64_t>(key, value);
        else throw ConfigError("unknown generator key '" + key + "'");
    }
    if (spec.subjects_per_class.size() != static_cast<std::size_t>(spec.num_classes) &&
        kv.count("classes") && !kv.count("subjects_per_class"))
        throw ConfigError("subjects_per_class must be given when classes != 4");

    if (out_path.empty()) out_path = join_path(default_out_dir(), "dataset.csv");
    const alcurate::Dataset ds = alcurate::generate(spec);
    alcurate::save_csv(ds, out_path);
    std::cout << "wrote " << out_path << "\n";
    print_class_summary(ds);
    return 0;
}

int cmd_run(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    const alcurate::SuiteOptions options = load_options(args);
    const alcurate::Dataset ds = alcurate::load_csv(args.dataset_path);
    const auto suite = alcurate::build_strategy_suite(options);
    const auto rows =
        alcurate::run_suite(ds, suite, options.repeats, options.seed, options.jobs);

    const alcurate::Json report = alcurate::build_run_report(
        ds, args.dataset_path, options.to_map(), rows, options.repeats, options.seed);
    const std::string out_path = args.out_path.empty()
                                     ? join_path(default_out_dir(), "report.json")
                                     : args.out_path;
    write_text_file(out_path, report.dump(2) + "\n");

    alcurate::print_suite_table(std::cout, rows, options.repeats > 1);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::cout << "report written to " << out_path << " ("
              << static_cast<double>(elapsed) / 1000.0 << "s)\n";
    return 0;
}

void print_grid_table(const std::string& title,
                      const std::vector<std::string>& column_titles,
                      const std::vector<std::string>& row_titles,
                      const std::vector<std::vector<const alcurate::SuiteRow*>>& cells,
                      bool with_std) {
    std::cout << title << "\n";
    std::size_t label_width = std::string("Method").size();
    for (const auto& r : row_titles) label_width = std::max(label_width, r.size());
    const std::size_t cell_width = with_std ? 38 : 18;
    const auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    std::cout << pad("Method", label_width);
    for (const auto& c : column_titles) std::cout << "  " << pad(c, cell_width);
    std::cout << "\n" << pad("", label_width);
    const std::size_t half = with_std ? 19 : 9;
    for (std::size_t c = 0; c < column_titles.size(); ++c)
        std::cout << "  " << pad("Acc", half) << pad("F1", cell_width - half);
    std::cout << "\n"
              << std::string(label_width + column_titles.size() * (cell_width + 2), '-') << "\n";
    for (std::size_t r = 0; r < row_titles.size(); ++r) {
        std::cout << pad(row_titles[r], label_width);
        for (std::size_t c = 0; c < column_titles.size(); ++c) {
            const alcurate::SuiteRow* row = cells[r][c];
            std::cout << "  "
                      << pad(alcurate::detail::format_metric(row->mean_accuracy,
                                                             row->std_accuracy, with_std),
                             half)
                      << pad(alcurate::detail::format_metric(row->mean_macro_f1,
                                                             row->std_macro_f1, with_std),
                             cell_width - half);
        }
        std::cout << "\n";
    }
    std::cout << "\n";
}

int cmd_ablate(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    const alcurate::SuiteOptions options = load_options(args);
    const alcurate::Dataset ds = alcurate::load_csv(args.dataset_path);
    const alcurate::ExperimentConfig base = options.base_config();

    std::vector<alcurate::UncertaintyMethod> methods;
    for (const std::string& tok : alcurate::detail::split_list(options.methods))
        methods.push_back(alcurate::method_from_string(tok));
    if (methods.empty()) throw ConfigError("methods list is empty");

    std::vector<int> instance_ks;
    if (options.instance_ks == "auto") {
        const int per_subject = alcurate::median_instances_per_subject(ds);
        instance_ks = {per_subject, 2 * per_subject};
    } else {
        for (const std::string& tok : alcurate::detail::split_list(options.instance_ks))
            instance_ks.push_back(alcurate::detail::parse_number_or_throw<int>("instance_ks", tok));
    }
    std::vector<int> subject_ks;
    for (const std::string& tok : alcurate::detail::split_list(options.subject_ks))
        subject_ks.push_back(alcurate::detail::parse_number_or_throw<int>("subject_ks", tok));
    if (instance_ks.empty() || subject_ks.empty())
        throw ConfigError("instance_ks and subject_ks must be non-empty");

    // One flat suite so --jobs spreads across every cell; carved up afterwards.
    std::vector<std::pair<std::string, alcurate::ExperimentConfig>> suite;
    for (const auto method : methods) {
        for (int k : instance_ks) {
            alcurate::ExperimentConfig c = base;
            c.strategy = alcurate::Strategy::ActiveLearning;
            c.al_method = method;
            c.sampling_mode = alcurate::SamplingMode::Instance;
            c.k = k;
            c.calibrated = false;
            suite.emplace_back(std::string(to_string(method)) + "/instance/k=" +
                                   std::to_string(k),
                               c);
        }
        for (int k : subject_ks) {
            alcurate::ExperimentConfig c = base;
            c.strategy = alcurate::Strategy::ActiveLearning;
            c.al_method = method;
            c.sampling_mode = alcurate::SamplingMode::Subject;
            c.k = k;
            c.calibrated = false;
            suite.emplace_back(std::string(to_string(method)) + "/subject/k=" +
                                   std::to_string(k),
                               c);
        }
    }
    const std::size_t mode_cells = suite.size();
    for (const auto method : methods) {
        for (const bool calibrated : {false, true}) {
            alcurate::ExperimentConfig c = base;
            c.strategy = alcurate::Strategy::ActiveLearning;
            c.al_method = method;
            c.sampling_mode = alcurate::SamplingMode::Subject;
            c.k = subject_ks.front();
            c.calibrated = calibrated;
            suite.emplace_back(std::string(to_string(method)) +
                                   (calibrated ? "/calibrated" : "/uncalibrated"),
                               c);
        }
    }

    const auto rows =
        alcurate::run_suite(ds, suite, options.repeats, options.seed, options.jobs);
    const std::vector<alcurate::SuiteRow> mode_grid(rows.begin(),
                                                    rows.begin() + static_cast<long>(mode_cells));
    const std::vector<alcurate::SuiteRow> calibration_grid(
        rows.begin() + static_cast<long>(mode_cells), rows.end());

    const alcurate::Json report =
        alcurate::build_ablation_report(ds, args.dataset_path, options.to_map(), mode_grid,
                                        calibration_grid, options.repeats, options.seed);
    const std::string out_path = args.out_path.empty()
                                     ? join_path(default_out_dir(), "ablation.json")
                                     : args.out_path;
    write_text_file(out_path, report.dump(2) + "\n");

    // Mode grid table.
    const std::size_t ks_per_method = instance_ks.size() + subject_ks.size();
    std::vector<std::string> columns;
    for (int k : instance_ks) columns.push_back("Instance k=" + std::to_string(k));
    for (int k : subject_ks) columns.push_back("Subject k=" + std::to_string(k));
    std::vector<std::string> row_titles;
    std::vector<std::vector<const alcurate::SuiteRow*>> cells;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        row_titles.push_back(alcurate::method_label(methods[m]));
        std::vector<const alcurate::SuiteRow*> line;
        for (std::size_t c = 0; c < ks_per_method; ++c)
            line.push_back(&mode_grid[m * ks_per_method + c]);
        cells.push_back(line);
    }
    print_grid_table("Instance vs subject sampling", columns, row_titles, cells,
                     options.repeats > 1);

    // Calibration grid table.
    std::vector<std::vector<const alcurate::SuiteRow*>> calib_cells;
    for (std::size_t m = 0; m < methods.size(); ++m)
        calib_cells.push_back(
            {&calibration_grid[m * 2], &calibration_grid[m * 2 + 1]});
    print_grid_table("Effect of calibration (subject k=" + std::to_string(subject_ks.front()) +
                         ")",
                     {"Uncalibrated", "Calibrated"}, row_titles, calib_cells,
                     options.repeats > 1);

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::cout << "report written to " << out_path << " ("
              << static_cast<double>(elapsed) / 1000.0 << "s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-learning subset selection for imbalanced grouped datasets"};
    app.set_version_flag("--version", std::string(alcurate::kToolName) + " " +
                                          alcurate::kVersion);
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a synthetic grouped dataset CSV");
    std::string gen_spec, gen_out;
    std::vector<std::string> gen_sets;
    gen->add_option("--spec", gen_spec, "Generator spec file (key = value lines)");
    gen->add_option("--out", gen_out, "Output CSV path (default: $ALCURATE_OUT_DIR/dataset.csv)");
    gen->add_option("--set", gen_sets, "Override a generator key, e.g. --set seed=7");
    std::map<std::string, std::string> gen_flag_keys;
    for (const char* key : {"classes", "feature_dim", "subjects_per_class",
                            "instances_per_subject", "class_separation", "subject_sigma",
                            "noise_sigma", "seed"}) {
        gen_flag_keys[key] = "";
        std::string flag = "--" + std::string(key);
        for (char& ch : flag)
            if (ch == '_') ch = '-';
        gen->add_option(flag, gen_flag_keys[key], "Generator key " + std::string(key));
    }

    // run / ablate share their argument shape
    CommonArgs run_args, ablate_args;
    const auto add_common = [](CLI::App* cmd, CommonArgs& args, const std::string& out_default) {
        cmd->add_option("config", args.config_path, "Experiment config file")->required();
        cmd->add_option("dataset", args.dataset_path, "Dataset CSV path")->required();
        cmd->add_option("--out", args.out_path,
                        "Output JSON path (default: $ALCURATE_OUT_DIR/" + out_default + ")");
        cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set k=2");
        cmd->add_option("--seed", args.seed, "Base seed (overrides config)");
        cmd->add_option("--repeats", args.repeats, "Repeats per config (overrides config)");
        cmd->add_option("--jobs", args.jobs, "Worker threads (overrides config)");
    };
    auto* run = app.add_subcommand("run", "Run a strategy suite and emit a JSON report");
    add_common(run, run_args, "report.json");
    auto* ablate =
        app.add_subcommand("ablate", "Run the sampling-mode and calibration ablation grids");
    add_common(ablate, ablate_args, "ablation.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            std::vector<std::string> sets = gen_sets;
            for (const auto& [key, value] : gen_flag_keys)
                if (!value.empty()) sets.push_back(key + "=" + value);
            return cmd_generate(gen_spec, sets, gen_out);
        }
        if (run->parsed()) return cmd_run(run_args);
        if (ablate->parsed()) return cmd_ablate(ablate_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
