#pragma once

// Text, CSV and JSON renderings of fits, tests and summaries. Every number
// goes through format_sig (7 significant digits, '.' decimal point) so the
// same inputs always produce the same bytes.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "data_model.hpp"
#include "diagnostics.hpp"
#include "format.hpp"
#include "ols.hpp"
#include "ordered_probit.hpp"
#include "pipeline.hpp"

namespace happyreg {

/// One estimated column of a regression table.
struct CoefColumn {
    std::string title;
    std::vector<std::string> names;
    std::vector<double> coefs;
    std::vector<double> ses;
    std::vector<bool> sig;
    std::vector<std::pair<std::string, std::string>> footer;
};

inline CoefColumn coef_column(const OlsResult& fit, std::string title) {
    CoefColumn c;
    c.title = std::move(title);
    c.names = fit.names;
    for (Eigen::Index j = 0; j < fit.k; ++j) {
        c.coefs.push_back(fit.coefficients(j));
        c.ses.push_back(fit.std_errors(j));
        c.sig.push_back(fit.significant[static_cast<std::size_t>(j)]);
    }
    c.footer = {{"Number of observation", std::to_string(fit.n)},
                {"R-squared", format_sig(fit.r2)},
                {"Adjusted R-squared", format_sig(fit.adj_r2)}};
    return c;
}

inline CoefColumn coef_column(const OrderedProbitResult& fit, std::string title) {
    CoefColumn c;
    c.title = std::move(title);
    c.names = fit.names;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        c.coefs.push_back(fit.coefficients(j));
        c.ses.push_back(fit.std_errors(j));
        c.sig.push_back(fit.significant[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index j = 0; j < fit.cuts.size(); ++j) {
        c.names.push_back("cut" + std::to_string(j + 1));
        c.coefs.push_back(fit.cuts(j));
        c.ses.push_back(fit.cut_std_errors(j));
        c.sig.push_back(false);
    }
    c.footer = {{"Number of observation", std::to_string(fit.n)},
                {"Log likelihood", format_sig(fit.loglik)},
                {"Pseudo R squared", format_sig(fit.pseudo_r2)},
                {"Likelihood ratio", format_sig(fit.lr_statistic)},
                {"Iterations", std::to_string(fit.iterations)}};
    return c;
}

/// Side-by-side coefficient table: coefficient on one line ('*' when
/// significant), standard error in parentheses beneath; constant and cut
/// points last.
inline std::string render_coef_table(const std::vector<CoefColumn>& cols, const std::string& dependent = {}) {
    std::vector<std::string> rows;
    auto is_tail = [](const std::string& n) { return n == "Constant" || n.rfind("cut", 0) == 0; };
    for (bool tail : {false, true})
        for (const auto& c : cols)
            for (const auto& n : c.names)
                if (is_tail(n) == tail && std::find(rows.begin(), rows.end(), n) == rows.end())
                    rows.push_back(n);
    std::vector<std::string> footer_rows;
    for (const auto& c : cols)
        for (const auto& [label, _] : c.footer)
            if (std::find(footer_rows.begin(), footer_rows.end(), label) == footer_rows.end())
                footer_rows.push_back(label);

    std::size_t name_w = 8;
    for (const auto& r : rows)
        name_w = std::max(name_w, r.size());
    for (const auto& r : footer_rows)
        name_w = std::max(name_w, r.size());
    const std::size_t col_w = 16;

    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.append(w - s.size(), ' ');
        return s;
    };
    auto lpad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.insert(0, w - s.size(), ' ');
        return s;
    };

    std::ostringstream out;
    if (!dependent.empty())
        out << "Dependent variable: " << dependent << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << "(" << i + 1 << ") " << cols[i].title << '\n';
    const std::size_t width = name_w + 2 + col_w * cols.size();
    const std::string rule(width, '-');
    out << rule << '\n' << pad("", name_w + 2);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << lpad("(" + std::to_string(i + 1) + ")", col_w);
    out << '\n' << rule << '\n';

    for (const auto& r : rows) {
        std::string line1 = pad(r, name_w + 2);
        std::string line2 = pad("", name_w + 2);
        for (const auto& c : cols) {
            auto it = std::find(c.names.begin(), c.names.end(), r);
            if (it == c.names.end()) {
                line1 += lpad("-", col_w);
                line2 += lpad("", col_w);
                continue;
            }
            const auto j = static_cast<std::size_t>(it - c.names.begin());
            line1 += lpad(format_sig(c.coefs[j]) + (c.sig[j] ? "*" : " "), col_w);
            line2 += lpad("(" + format_sig(c.ses[j]) + ") ", col_w);
        }
        out << line1 << '\n' << line2 << '\n';
    }
    out << rule << '\n';
    for (const auto& label : footer_rows) {
        out << pad(label, name_w + 2);
        for (const auto& c : cols) {
            auto it = std::find_if(c.footer.begin(), c.footer.end(), [&](const auto& p) { return p.first == label; });
            out << lpad(it == c.footer.end() ? "" : it->second + " ", col_w);
        }
        out << '\n';
    }
    out << rule << '\n' << "* significant at the 5% level (two-sided)\n";
    return out.str();
}

inline std::string render_fit_csv(const OlsResult& fit) {
    std::ostringstream out;
    out << "name,coef,se,t,p,sig\n";
    for (Eigen::Index j = 0; j < fit.k; ++j)
        out << fit.names[static_cast<std::size_t>(j)] << ',' << format_sig(fit.coefficients(j)) << ','
            << format_sig(fit.std_errors(j)) << ',' << format_sig(fit.t_stats(j)) << ','
            << format_sig(fit.p_values(j)) << ',' << (fit.significant[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
    return out.str();
}

inline std::string render_fit_csv(const OrderedProbitResult& fit) {
    std::ostringstream out;
    out << "name,coef,se,t,p,sig\n";
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
        out << fit.names[static_cast<std::size_t>(j)] << ',' << format_sig(fit.coefficients(j)) << ','
            << format_sig(fit.std_errors(j)) << ',' << format_sig(fit.z_stats(j)) << ','
            << format_sig(fit.p_values(j)) << ',' << (fit.significant[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
    for (Eigen::Index j = 0; j < fit.cuts.size(); ++j)
        out << "cut" << j + 1 << ',' << format_sig(fit.cuts(j)) << ',' << format_sig(fit.cut_std_errors(j))
            << ",.,.,0\n";
    return out.str();
}

inline std::string render_tests(const std::vector<TestReport>& tests) {
    std::size_t name_w = 4;
    for (const auto& t : tests)
        name_w = std::max(name_w, t.name.size());
    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.append(w - s.size(), ' ');
        return s;
    };
    out << pad("test", name_w + 2) << pad("statistic", 16) << pad("distribution", 16) << pad("p", 14)
        << "decision\n";
    for (const auto& t : tests)
        out << pad(t.name, name_w + 2) << pad(format_sig(t.statistic), 16) << pad(t.distribution_label(), 16)
            << pad(format_sig(t.p_value), 14) << (t.reject_at_5pct ? "reject at 5%" : "fail to reject") << '\n';
    return out.str();
}

inline std::string render_tests_csv(const std::vector<TestReport>& tests) {
    std::ostringstream out;
    out << "name,statistic,distribution,p,reject_5pct,estimate,estimate_se\n";
    for (const auto& t : tests)
        out << t.name << ',' << format_sig(t.statistic) << ',' << '"' << t.distribution_label() << '"' << ','
            << format_sig(t.p_value) << ',' << (t.reject_at_5pct ? 1 : 0) << ',' << format_sig(t.estimate) << ','
            << format_sig(t.estimate_se) << '\n';
    return out.str();
}

inline std::string render_summary(const std::vector<SummaryRow>& rows) {
    std::size_t name_w = 8;
    for (const auto& r : rows)
        name_w = std::max(name_w, r.variable.size());
    auto lpad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.insert(0, w - s.size(), ' ');
        return s;
    };
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.append(w - s.size(), ' ');
        return s;
    };
    std::ostringstream out;
    out << pad("Variable", name_w + 2) << lpad("Obs", 8) << lpad("Mean", 14) << lpad("Std.Dev.", 14)
        << lpad("Min", 14) << lpad("Max", 14) << '\n';
    for (const auto& r : rows)
        out << pad(r.variable, name_w + 2) << lpad(std::to_string(r.n), 8) << lpad(format_sig(r.mean), 14)
            << lpad(format_sig(r.sd), 14) << lpad(format_sig(r.min), 14) << lpad(format_sig(r.max), 14) << '\n';
    return out.str();
}

inline std::string render_summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "variable,obs,mean,sd,min,max\n";
    for (const auto& r : rows)
        out << r.variable << ',' << r.n << ',' << format_sig(r.mean) << ',' << format_sig(r.sd) << ','
            << format_sig(r.min) << ',' << format_sig(r.max) << '\n';
    return out.str();
}

inline std::string render_effect(const EffectReport& e) {
    return (e.name.empty() ? std::string("effect") : e.name) + ": " + format_sig(e.coefficient) + " / " +
           format_sig(e.baseline) + " = " + format_fixed(e.percent, 2) + "%";
}

inline std::string render_decomposition(const Decomposition& d, const std::string& label = {}) {
    std::ostringstream out;
    out << "Net effect of a " << format_sig(d.delta_u * 100.0) << " point rise in unemployment"
        << (label.empty() ? "" : " (" + label + ")") << ":\n"
        << "  " << format_sig(d.delta_u) << " x " << format_sig(d.personal) << " + " << format_sig(d.aggregate)
        << " = " << format_sig(d.net, 4) << " reduction in happiness\n"
        << "  = " << format_fixed(d.percent, 2) << "% of baseline " << format_sig(d.baseline) << '\n';
    return out.str();
}

// --- JSON ------------------------------------------------------------------

namespace detail {

inline nlohmann::json num(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_sig(v));
}

} // namespace detail

inline nlohmann::json to_json(const OlsResult& fit) {
    nlohmann::json j;
    j["n"] = fit.n;
    j["k"] = fit.k;
    j["r2"] = detail::num(fit.r2);
    j["adj_r2"] = detail::num(fit.adj_r2);
    j["rss"] = detail::num(fit.rss);
    j["tss"] = detail::num(fit.tss);
    j["coefficients"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit.k; ++i)
        j["coefficients"].push_back({{"name", fit.names[static_cast<std::size_t>(i)]},
                                     {"coef", detail::num(fit.coefficients(i))},
                                     {"se", detail::num(fit.std_errors(i))},
                                     {"t", detail::num(fit.t_stats(i))},
                                     {"p", detail::num(fit.p_values(i))},
                                     {"sig", static_cast<bool>(fit.significant[static_cast<std::size_t>(i)])}});
    return j;
}

inline nlohmann::json to_json(const OrderedProbitResult& fit) {
    nlohmann::json j;
    j["n"] = fit.n;
    j["loglik"] = detail::num(fit.loglik);
    j["null_loglik"] = detail::num(fit.null_loglik);
    j["pseudo_r2"] = detail::num(fit.pseudo_r2);
    j["lr"] = detail::num(fit.lr_statistic);
    j["iterations"] = fit.iterations;
    j["coefficients"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i)
        j["coefficients"].push_back({{"name", fit.names[static_cast<std::size_t>(i)]},
                                     {"coef", detail::num(fit.coefficients(i))},
                                     {"se", detail::num(fit.std_errors(i))},
                                     {"z", detail::num(fit.z_stats(i))},
                                     {"p", detail::num(fit.p_values(i))},
                                     {"sig", static_cast<bool>(fit.significant[static_cast<std::size_t>(i)])}});
    j["cuts"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit.cuts.size(); ++i)
        j["cuts"].push_back({{"cut", detail::num(fit.cuts(i))}, {"se", detail::num(fit.cut_std_errors(i))}});
    return j;
}

inline nlohmann::json to_json(const TestReport& t) {
    return {{"name", t.name},
            {"statistic", detail::num(t.statistic)},
            {"distribution", t.distribution_label()},
            {"p", detail::num(t.p_value)},
            {"reject_5pct", t.reject_at_5pct},
            {"estimate", detail::num(t.estimate)},
            {"estimate_se", detail::num(t.estimate_se)}};
}

inline nlohmann::json to_json(const std::vector<SummaryRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
        j.push_back({{"variable", r.variable},
                     {"obs", r.n},
                     {"mean", detail::num(r.mean)},
                     {"sd", detail::num(r.sd)},
                     {"min", detail::num(r.min)},
                     {"max", detail::num(r.max)}});
    return j;
}

} // namespace happyreg
