#pragma once

// Command-line front end. run() returns 0 on success, 1 on usage errors and
// 2 on data, model or convergence errors; every failure prints one line to
// the error stream.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analysis.hpp"
#include "data_model.hpp"
#include "diagnostics.hpp"
#include "model_spec.hpp"
#include "ordered_probit.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "synth.hpp"

namespace happyreg::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Write `content` to `path` via a temporary file and rename, or to `out` when path is empty.
inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw DataError("cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot move output into place at '" + path + "'");
    }
}

struct RunConfig {
    std::string micro;
    std::string macro;
    std::string beta0;
    std::string spec;
    std::string dgp;
    std::string out;
    std::string beta0_out;
    std::string format = "text";
    std::string kind;
    std::optional<double> significance;
    std::optional<double> macro_baseline;
    double micro_baseline = kDefaultMicroBaseline;
    double delta_u = 0.01;
    std::size_t min_obs = 100;
    unsigned threads = 0;
    std::uint64_t seed = 1;
    std::size_t n_per_year = 1000;
    int lags = 1;
    bool event_dummies = false;
    bool raw_gdp = false;
};

namespace detail {

inline void require_file(const std::string& path, const std::string& flag) {
    if (!path.empty() && !std::filesystem::is_regular_file(path))
        throw UsageError(flag + ": input file '" + path + "' does not exist");
}

inline ModelSpec spec_or_default(const RunConfig& c) {
    ModelSpec s = c.spec.empty() ? baseline_micro_spec() : load_model_spec(c.spec);
    if (c.significance)
        s.significance = *c.significance;
    validate(s);
    return s;
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("'" + path + "': " + e.what());
    }
}

inline std::string dump(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

inline void check_format(const std::string& f) {
    if (f != "text" && f != "csv" && f != "json")
        throw UsageError("--format must be one of text, csv, json");
}

inline std::string cmd_summarize(const RunConfig& c) {
    const int given = !c.micro.empty() + !c.macro.empty() + !c.beta0.empty();
    if (given != 1)
        throw UsageError("summarize: give exactly one of --micro, --macro, --beta0");
    std::vector<SummaryRow> rows;
    std::string preface;
    if (!c.micro.empty()) {
        const auto ds = load_micro_csv(c.micro);
        preface = "rows used " + std::to_string(ds.size()) + ", rejected " +
                  std::to_string(ds.report.rejected_count()) + "\n";
        rows = summarize(ds);
    } else if (!c.macro.empty()) {
        rows = summarize(load_macro_csv(c.macro));
    } else {
        rows = {summarize_values("mean happiness", load_beta0_csv(c.beta0).values())};
    }
    if (c.format == "csv")
        return render_summary_csv(rows);
    if (c.format == "json")
        return dump(to_json(rows));
    return preface + render_summary(rows);
}

inline std::string cmd_fit_micro(const RunConfig& c, bool probit) {
    const auto spec = spec_or_default(c);
    const auto micro = load_micro_csv(c.micro);
    std::optional<MacroSeries> macro;
    if (!c.macro.empty())
        macro = load_macro_csv(c.macro);
    const MacroSeries* mp = macro ? &*macro : nullptr;
    if (probit) {
        const auto fit = pooled_ordered_probit(micro, spec, mp).fit;
        if (c.format == "csv")
            return render_fit_csv(fit);
        if (c.format == "json")
            return dump(to_json(fit));
        return render_coef_table({coef_column(fit, "ordered probit")}, spec.dependent);
    }
    const auto pooled = pooled_ols(micro, spec, mp);
    if (c.format == "csv")
        return render_fit_csv(pooled.fit);
    if (c.format == "json")
        return dump(to_json(pooled.fit));
    return render_coef_table({coef_column(pooled.fit, "OLS")}, spec.dependent);
}

inline std::string cmd_stage1(const RunConfig& c) {
    auto spec = spec_or_default(c);
    const auto micro = load_micro_csv(c.micro);
    const auto res = stage_one(micro, spec, StageOneOptions{c.min_obs, c.threads});
    std::ostringstream out;
    write_beta0_csv(out, res.series);
    return out.str();
}

inline std::string cmd_stage2(const RunConfig& c) {
    const auto series = load_beta0_csv(c.beta0);
    const auto macro = load_macro_csv(c.macro);
    const double sig = c.significance.value_or(0.05);
    const auto m = macro_fit(series, macro, c.event_dummies, c.raw_gdp, sig);
    if (c.format == "csv")
        return render_fit_csv(m.result.fit) + "\n" + render_tests_csv({m.bp, m.durbin});
    if (c.format == "json")
        return dump({{"fit", to_json(m.result.fit)}, {"tests", {to_json(m.bp), to_json(m.durbin)}}});
    return render_coef_table({macro_column(m, c.event_dummies ? "OLS with event dummies" : "OLS without event dummies")},
                             "B0_hat, the mean yearly happiness") +
           "\n" + render_tests({m.bp, m.durbin});
}

inline std::string cmd_diagnose(const RunConfig& c) {
    const auto series = load_beta0_csv(c.beta0);
    const auto macro = load_macro_csv(c.macro);
    const auto s2 = stage_two(series, macro, StageTwoOptions{c.event_dummies, c.raw_gdp, 10, 0.05});
    std::vector<TestReport> tests{breusch_pagan(s2.fit, s2.design), durbin_alternative(s2.fit, s2.design, c.lags)};
    const auto lines = macro_series_checks(series, macro, tests);
    if (c.format == "csv")
        return render_tests_csv(tests);
    if (c.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& t : tests)
            j.push_back(to_json(t));
        return dump(j);
    }
    std::string text = render_tests(tests);
    for (const auto& [label, value] : lines)
        text += label + ": " + value + "\n";
    return text;
}

inline std::string cmd_pipeline(const RunConfig& c) {
    PipelineConfig cfg;
    cfg.spec = spec_or_default(c);
    cfg.min_obs = c.min_obs;
    cfg.threads = c.threads;
    cfg.macro_baseline = c.macro_baseline;
    cfg.micro_baseline = c.micro_baseline;
    cfg.delta_u = c.delta_u;
    cfg.raw_gdp = c.raw_gdp;
    const auto micro = load_micro_csv(c.micro);
    const auto macro = load_macro_csv(c.macro);
    return pipeline_report(micro, macro, cfg);
}

inline std::string cmd_synth(const RunConfig& c, std::ostream& out) {
    const auto j = read_json(c.dgp);
    std::ostringstream s;
    if (c.kind == "micro") {
        const auto data = generate_micro(micro_dgp_from_json(j), c.n_per_year, c.seed);
        write_micro_csv(s, data.data);
        return s.str();
    }
    if (c.kind == "macro") {
        const auto data = generate_macro(macro_dgp_from_json(j), c.seed);
        write_macro_csv(s, data.macro);
        if (!c.beta0_out.empty()) {
            std::ostringstream b;
            write_beta0_csv(b, data.series);
            write_output(c.beta0_out, b.str(), out);
        }
        return s.str();
    }
    throw UsageError("synth: kind must be 'micro' or 'macro'");
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Two-stage happiness regression toolkit", "happyreg"};
    app.require_subcommand(1);
    RunConfig c;

    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", c.format, "Output format: text, csv or json");
        sub->add_option("--out", c.out, "Output file (written atomically); stdout when omitted");
    };

    auto* summarize_cmd = app.add_subcommand("summarize", "Summary statistics of a data file");
    summarize_cmd->add_option("--micro", c.micro, "Micro CSV");
    summarize_cmd->add_option("--macro", c.macro, "Macro CSV");
    summarize_cmd->add_option("--beta0", c.beta0, "Yearly intercept CSV");
    add_format(summarize_cmd);

    auto* fit_micro = app.add_subcommand("fit-micro", "Pooled OLS on the micro data");
    auto* fit_oprobit = app.add_subcommand("fit-oprobit", "Pooled ordered probit on the micro data");
    for (auto* sub : {fit_micro, fit_oprobit}) {
        sub->add_option("--micro", c.micro, "Micro CSV")->required();
        sub->add_option("--spec", c.spec, "Model spec JSON (baseline spec when omitted)");
        sub->add_option("--macro", c.macro, "Macro CSV; attaches unemployment, inflation and GDP per capita");
        sub->add_option("--significance", c.significance, "Two-sided significance level");
        add_format(sub);
    }

    auto* stage1 = app.add_subcommand("stage1", "Per-year micro regressions -> yearly intercepts");
    stage1->add_option("--micro", c.micro, "Micro CSV")->required();
    stage1->add_option("--spec", c.spec, "Model spec JSON (baseline spec when omitted)");
    stage1->add_option("--out", c.out, "Output beta0 CSV; stdout when omitted");
    stage1->add_option("--min-obs", c.min_obs, "Minimum observations per year");
    stage1->add_option("--threads", c.threads, "Worker threads for the yearly fits (0 = all cores)");

    auto* stage2 = app.add_subcommand("stage2", "Macro regression of the yearly intercepts");
    auto* diagnose = app.add_subcommand("diagnose", "Heteroskedasticity, serial correlation and trend tests");
    for (auto* sub : {stage2, diagnose}) {
        sub->add_option("--beta0", c.beta0, "Yearly intercept CSV")->required();
        sub->add_option("--macro", c.macro, "Macro CSV")->required();
        sub->add_flag("--event-dummies", c.event_dummies, "Include party, disaster and tech dummies");
        sub->add_flag("--raw-gdp", c.raw_gdp, "Use GDP per capita in levels instead of first differences");
        add_format(sub);
    }
    stage2->add_option("--significance", c.significance, "Two-sided significance level");
    diagnose->add_option("--lags", c.lags, "Lags for Durbin's alternative test");

    auto* pipeline = app.add_subcommand("pipeline", "Both stages plus diagnostics and effect reports");
    pipeline->add_option("--micro", c.micro, "Micro CSV")->required();
    pipeline->add_option("--macro", c.macro, "Macro CSV")->required();
    pipeline->add_option("--spec", c.spec, "Model spec JSON (baseline spec when omitted)");
    pipeline->add_option("--out", c.out, "Report file; stdout when omitted");
    pipeline->add_option("--min-obs", c.min_obs, "Minimum observations per year");
    pipeline->add_option("--threads", c.threads, "Worker threads for the yearly fits (0 = all cores)");
    pipeline->add_option("--macro-baseline", c.macro_baseline,
                         "Baseline for macro percent effects (default: mean intercept, one decimal)");
    pipeline->add_option("--micro-baseline", c.micro_baseline, "Baseline for micro percent effects");
    pipeline->add_option("--delta-u", c.delta_u, "Change in the unemployment rate (fraction) for the decomposition");
    pipeline->add_flag("--raw-gdp", c.raw_gdp, "Use GDP per capita in levels instead of first differences");
    pipeline->add_option("--significance", c.significance, "Two-sided significance level");

    auto* synth = app.add_subcommand("synth", "Generate synthetic data with known parameters");
    synth->add_option("kind", c.kind, "micro or macro")->required();
    synth->add_option("--dgp", c.dgp, "Data-generating process JSON")->required();
    synth->add_option("--seed", c.seed, "Random seed");
    synth->add_option("--out", c.out, "Output CSV; stdout when omitted");
    synth->add_option("--n-per-year", c.n_per_year, "Rows per year (micro)");
    synth->add_option("--beta0-out", c.beta0_out, "Also write the yearly intercept series (macro)");

    std::vector<const char*> argv{"happyreg"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        const std::string where = subs.empty() ? "happyreg" : "happyreg " + subs.front()->get_name();
        err << where << ": usage error: " << e.what() << " (see --help)\n";
        return 1;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        detail::check_format(c.format);
        detail::require_file(c.micro, "--micro");
        detail::require_file(c.macro, "--macro");
        detail::require_file(c.beta0, "--beta0");
        detail::require_file(c.spec, "--spec");
        detail::require_file(c.dgp, "--dgp");

        std::string content;
        if (name == "summarize")
            content = detail::cmd_summarize(c);
        else if (name == "fit-micro")
            content = detail::cmd_fit_micro(c, false);
        else if (name == "fit-oprobit")
            content = detail::cmd_fit_micro(c, true);
        else if (name == "stage1")
            content = detail::cmd_stage1(c);
        else if (name == "stage2")
            content = detail::cmd_stage2(c);
        else if (name == "diagnose")
            content = detail::cmd_diagnose(c);
        else if (name == "pipeline")
            content = detail::cmd_pipeline(c);
        else
            content = detail::cmd_synth(c, out);
        write_output(c.out, content, out);
    } catch (const UsageError& e) {
        err << "happyreg " << name << ": usage error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "happyreg " << name << ": error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "happyreg " << name << ": error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace happyreg::cli
