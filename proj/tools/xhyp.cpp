// Command-line runner: one subcommand per experiment.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xhyp/report.hpp"

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> params;
    std::string format;
    std::string output;
    std::string plot_series;
    std::string plot_output;
    bool timing = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file; flags override it");
    cmd->add_option("-p,--param", o.params, "parameter override key=value (value is JSON)");
    cmd->add_option("-f,--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("-o,--output", o.output, "report path (default: standard output)");
    cmd->add_option("--plot-series", o.plot_series, "name of a series to write as a tab-separated table");
    cmd->add_option("--plot-output", o.plot_output, "path for --plot-series (default: standard error)");
    cmd->add_flag("--timing", o.timing, "include wall-clock time in the report");
}

xhyp::json build_document(const std::string& experiment, const Options& o) {
    xhyp::json doc = xhyp::json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw xhyp::config_error("config", "cannot open " + o.config_path);
        try {
            doc = xhyp::json::parse(in);
        } catch (const xhyp::json::parse_error& e) {
            throw xhyp::config_error("config", e.what());
        }
        if (!doc.is_object()) throw xhyp::config_error("config", "must be a JSON object");
        if (doc.contains("experiment") && doc["experiment"] != experiment) {
            throw xhyp::config_error("experiment", "config names a different experiment than the subcommand");
        }
    }
    doc["experiment"] = experiment;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw xhyp::config_error("param", "expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string text = kv.substr(eq + 1);
        xhyp::json value;
        try {
            value = xhyp::json::parse(text);
        } catch (const xhyp::json::parse_error&) {
            value = text;
        }
        doc["parameters"][key] = value;
    }
    if (!o.format.empty()) doc["output"]["format"] = o.format;
    if (!o.output.empty()) doc["output"]["path"] = o.output;
    return doc;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytically continued volumes in extended hyperbolic space"};
    app.set_version_flag("--version", xhyp::kVersion);
    app.require_subcommand(1);
    Options opts;
    for (const auto& name : xhyp::experiment_names()) add_common(app.add_subcommand(name, "run the " + name + " experiment"), opts);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();

    xhyp::ExperimentConfig cfg;
    try {
        cfg = xhyp::parse_config(build_document(experiment, opts));
    } catch (const xhyp::config_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    xhyp::Report rep;
    try {
        rep = xhyp::run(cfg, opts.timing);
    } catch (const xhyp::config_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        const std::string text = cfg.format == "csv" ? xhyp::to_csv(rep) : xhyp::to_json(rep).dump(2) + "\n";
        write_text(cfg.output_path, text, std::cout);
        if (!opts.plot_series.empty()) write_text(opts.plot_output, xhyp::emit_plot_data(rep, opts.plot_series), std::cerr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return rep.exit_code();
}
