#pragma once

// End-to-end run: pooled micro fits, yearly intercepts, macro regressions,
// diagnostics and effect arithmetic, rendered as one text report.

#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "diagnostics.hpp"
#include "pipeline.hpp"
#include "report.hpp"

namespace happyreg {

struct PipelineConfig {
    ModelSpec spec = baseline_micro_spec();
    std::size_t min_obs = 100;
    unsigned threads = 0;
    std::optional<double> macro_baseline;
    double micro_baseline = kDefaultMicroBaseline;
    double delta_u = 0.01;
    bool raw_gdp = false;
};

/// Stage-two fit with its diagnostics, as shown in the macro table.
struct MacroFit {
    StageTwoResult result;
    TestReport bp;
    TestReport durbin;
};

inline MacroFit macro_fit(const YearlyHappinessSeries& series, const MacroSeries& macro, bool event_dummies,
                          bool raw_gdp, double significance) {
    MacroFit m;
    m.result = stage_two(series, macro, StageTwoOptions{event_dummies, raw_gdp, 10, significance});
    m.bp = breusch_pagan(m.result.fit, m.result.design);
    m.durbin = durbin_alternative(m.result.fit, m.result.design, 1);
    return m;
}

inline CoefColumn macro_column(const MacroFit& m, std::string title) {
    auto c = coef_column(m.result.fit, std::move(title));
    c.footer.push_back({"Serial correlation rho_hat",
                        format_sig(m.durbin.estimate) + " (" + format_sig(m.durbin.estimate_se) + ")"});
    c.footer.push_back({"BP test", m.bp.distribution_label() + " = " + format_sig(m.bp.statistic, 4)});
    c.footer.push_back({"BP Prob > F", format_sig(m.bp.p_value, 4)});
    return c;
}

/// Trend and autocorrelation checks on the macro indicators over the series years.
inline std::vector<std::pair<std::string, std::string>> macro_series_checks(const YearlyHappinessSeries& series,
                                                                            const MacroSeries& macro,
                                                                            std::vector<TestReport>& tests) {
    std::vector<double> gdp, unemp, infl;
    for (const auto& e : series.entries)
        if (const auto* m = macro.find(e.year)) {
            gdp.push_back(m->gdp_per_capita);
            unemp.push_back(m->unemployment);
            infl.push_back(m->inflation);
        }
    std::vector<std::pair<std::string, std::string>> lines;
    auto rho = [&](const std::string& label, const std::vector<double>& v) {
        try {
            const auto a = first_order_autocorr(v);
            lines.push_back({label, format_sig(a.rho_hat) + " (" + format_sig(a.std_error) + ")" +
                                        (a.suspicious ? "  [|rho| > 1.05]" : "")});
        } catch (const Error& e) {
            lines.push_back({label, std::string("n/a: ") + e.what()});
        }
    };
    auto trend = [&](const std::string& label, const std::vector<double>& v) {
        try {
            auto t = time_trend_test(v);
            t.name = "time trend: " + label;
            tests.push_back(t);
        } catch (const Error&) {
        }
    };
    if (gdp.size() >= 4) {
        const auto gdpd = difference(gdp);
        rho("rho_hat GDP per capita (linearly detrended)", linear_detrend(gdp));
        rho("rho_hat GDPD", gdpd);
        rho("rho_hat unemployment", unemp);
        rho("rho_hat inflation", infl);
        trend("GDP per capita", gdp);
        trend("GDPD", gdpd);
        trend("unemployment", unemp);
        trend("inflation", infl);
    }
    return lines;
}

inline std::string pipeline_report(const MicroDataset& micro, const MacroSeries& macro, const PipelineConfig& cfg) {
    std::ostringstream out;
    const auto& spec = cfg.spec;
    out << "== Data ==\n"
        << "micro rows used: " << micro.size() << " (rejected " << micro.report.rejected_count() << " of "
        << micro.report.data_rows << ")\n"
        << "survey years: " << micro.years().size() << "\n"
        << "macro years: " << macro.size() << "\n\n";

    // Pooled micro regressions without and with time dummies.
    ModelSpec base = spec;
    base.include_time_dummies = false;
    base.include_trend = false;
    base.macro.clear();
    const auto pooled1 = pooled_ols(micro, base);
    std::optional<PooledOls> pooled2;
    std::string pooled2_note;
    if (micro.years().size() > 1) {
        ModelSpec with_time = base;
        with_time.include_time_dummies = true;
        try {
            pooled2 = pooled_ols(micro, with_time);
        } catch (const Error& e) {
            pooled2_note = e.what();
        }
    }
    out << "== Pooled micro regression ==\n";
    std::vector<CoefColumn> micro_cols{coef_column(pooled1.fit, "OLS w/o time dummies")};
    if (pooled2)
        micro_cols.push_back(coef_column(pooled2->fit, "OLS with time dummies"));
    out << render_coef_table(micro_cols, spec.dependent);
    if (!pooled2_note.empty())
        out << "time-dummy fit unavailable: " << pooled2_note << '\n';
    out << "intercept identity discrepancy: " << format_sig(intercept_identity_check(pooled1.fit, pooled1.design), 3)
        << "\n\n";

    // Stage one.
    const auto s1 = stage_one(micro, base, StageOneOptions{cfg.min_obs, cfg.threads});
    out << "== Stage one: yearly intercepts ==\n";
    double max_gap = 0.0;
    for (std::size_t i = 0; i < s1.fits.size(); ++i) {
        const auto& e = s1.series.entries[i];
        max_gap = std::max(max_gap, intercept_identity_check(s1.fits[i].fit, s1.fits[i].design));
        out << e.year << "  beta0 " << format_sig(e.beta0) << "  (" << format_sig(s1.fits[i].fit.se("Constant"))
            << ")  n=" << e.n_year;
        if (!e.dropped.empty()) {
            out << "  dropped:";
            for (const auto& d : e.dropped)
                out << ' ' << d;
        }
        out << '\n';
    }
    for (const auto& s : s1.series.skipped)
        out << s.year << "  skipped (n=" << s.n_year << "): " << s.reason << '\n';
    out << render_summary({summarize_values("mean happiness", s1.series.values())});
    out << "max intercept identity discrepancy: " << format_sig(max_gap, 3) << "\n\n";

    // Stage two.
    out << "== Stage two: macro regression ==\n";
    std::vector<TestReport> tests;
    std::optional<MacroFit> plain;
    std::optional<MacroFit> events;
    std::vector<std::string> notes;
    try {
        plain = macro_fit(s1.series, macro, false, cfg.raw_gdp, spec.significance);
    } catch (const Error& e) {
        notes.push_back(std::string("fit without event dummies unavailable: ") + e.what());
    }
    try {
        events = macro_fit(s1.series, macro, true, cfg.raw_gdp, spec.significance);
    } catch (const Error& e) {
        notes.push_back(std::string("fit with event dummies unavailable: ") + e.what());
    }
    std::vector<CoefColumn> macro_cols;
    if (plain) {
        macro_cols.push_back(macro_column(*plain, "OLS of the yearly series without event dummies"));
        for (auto t : {plain->bp, plain->durbin}) {
            t.name += " (1)";
            tests.push_back(t);
        }
    }
    if (events) {
        macro_cols.push_back(macro_column(*events, "OLS of the yearly series with event dummies"));
        for (auto t : {events->bp, events->durbin}) {
            t.name += " (2)";
            tests.push_back(t);
        }
    }
    if (!macro_cols.empty())
        out << render_coef_table(macro_cols, "B0_hat, the mean yearly happiness");
    for (const auto& n : notes)
        out << n << '\n';
    out << '\n';

    out << "== Diagnostics ==\n";
    for (const auto& [label, value] : macro_series_checks(s1.series, macro, tests))
        out << label << ": " << value << '\n';
    out << render_tests(tests) << '\n';

    // Effects.
    out << "== Effects ==\n";
    const double macro_base = cfg.macro_baseline.value_or(default_macro_baseline(s1.series));
    const MacroFit* headline = events ? &*events : (plain ? &*plain : nullptr);
    if (headline) {
        out << "macro coefficients relative to baseline " << format_sig(macro_base) << ":\n";
        for (std::size_t j = 0; j < headline->result.fit.names.size(); ++j) {
            const auto& name = headline->result.fit.names[j];
            if (name == "Constant")
                continue;
            out << "  " << render_effect(percent_effect(headline->result.fit.coefficients(static_cast<Eigen::Index>(j)),
                                                        macro_base, name))
                << '\n';
        }
    }
    auto micro_effects = [&](const OlsResult& fit, const std::string& title) {
        out << "micro coefficients (" << title << ") relative to baseline " << format_sig(cfg.micro_baseline) << ":\n";
        for (std::size_t j = 0; j < fit.names.size(); ++j) {
            const bool time_dummy = fit.names[j].rfind("d_", 0) == 0 && fit.names[j].size() > 2 &&
                                    std::isdigit(static_cast<unsigned char>(fit.names[j][2]));
            if (fit.names[j] == "Constant" || time_dummy)
                continue;
            out << "  "
                << render_effect(percent_effect(fit.coefficients(static_cast<Eigen::Index>(j)), cfg.micro_baseline,
                                                fit.names[j]))
                << '\n';
        }
    };
    micro_effects(pooled1.fit, "w/o time dummies");
    if (pooled2)
        micro_effects(pooled2->fit, "with time dummies");

    if (headline && pooled1.design.index_of("d_unemp")) {
        const double aggregate = headline->result.fit.coef("Unemp");
        out << render_decomposition(
            unemployment_net_effect(pooled1.fit.coef("d_unemp"), aggregate, cfg.delta_u, macro_base),
            "personal effect from the fit w/o time dummies");
        if (pooled2 && pooled2->design.index_of("d_unemp"))
            out << render_decomposition(
                unemployment_net_effect(pooled2->fit.coef("d_unemp"), aggregate, cfg.delta_u, macro_base),
                "alternative: personal effect from the fit with time dummies");
    }
    return out.str();
}

} // namespace happyreg
