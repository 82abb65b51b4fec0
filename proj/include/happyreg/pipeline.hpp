#pragma once

// Two-stage estimation of national happiness.
//
// Stage one fits the socio-demographic OLS separately for every survey year;
// the intercept of each yearly fit is that year's happiness net of the
// weighted average of personal characteristics. Stage two regresses those
// intercepts on macro indicators.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "data_model.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "format.hpp"
#include "model_spec.hpp"
#include "ols.hpp"
#include "ordered_probit.hpp"

namespace happyreg {

// ---------------------------------------------------------------------------
// Yearly intercept series
// ---------------------------------------------------------------------------

struct YearEntry {
    int year = 0;
    double beta0 = 0.0;
    std::size_t n_year = 0;
    std::vector<std::string> dropped;

    bool operator==(const YearEntry&) const = default;
};

struct SkippedYear {
    int year = 0;
    std::size_t n_year = 0;
    std::string reason;
};

/// Year -> intercept of that year's micro regression, ascending by year.
struct YearlyHappinessSeries {
    std::vector<YearEntry> entries;
    std::vector<SkippedYear> skipped;

    std::size_t size() const noexcept { return entries.size(); }

    std::vector<double> values() const {
        std::vector<double> v;
        for (const auto& e : entries)
            v.push_back(e.beta0);
        return v;
    }
};

inline void write_beta0_csv(std::ostream& out, const YearlyHappinessSeries& s) {
    out << "year,beta0,n_year,dropped_columns\n";
    for (const auto& e : s.entries) {
        out << e.year << ',' << format_exact(e.beta0) << ',' << e.n_year << ',';
        for (std::size_t i = 0; i < e.dropped.size(); ++i)
            out << (i ? ";" : "") << e.dropped[i];
        out << '\n';
    }
}

inline YearlyHappinessSeries parse_beta0_csv(std::istream& in, const std::string& source = "beta0.csv") {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": missing header row");
    const auto header = detail::split_csv(line);
    const auto idx = detail::locate_columns(header, {"year", "beta0"}, source);
    std::optional<std::size_t> n_idx;
    std::optional<std::size_t> drop_idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (detail::unquote(header[i]) == "n_year")
            n_idx = i;
        if (detail::unquote(header[i]) == "dropped_columns")
            drop_idx = i;
    }

    YearlyHappinessSeries s;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank_line(line))
            continue;
        const auto cells = detail::split_csv(line);
        const std::string where = source + " line " + std::to_string(lineno);
        YearEntry e;
        long year = 0;
        if (idx[0] >= cells.size() || !parse_int(cells[idx[0]], year))
            throw DataError(where + ": cannot parse year");
        e.year = static_cast<int>(year);
        if (idx[1] >= cells.size() || !parse_double(cells[idx[1]], e.beta0) || !std::isfinite(e.beta0))
            throw DataError(where + ": cannot parse beta0");
        if (n_idx && *n_idx < cells.size() && !cells[*n_idx].empty()) {
            long n = 0;
            if (!parse_int(cells[*n_idx], n) || n < 0)
                throw DataError(where + ": cannot parse n_year");
            e.n_year = static_cast<std::size_t>(n);
        }
        if (drop_idx && *drop_idx < cells.size()) {
            std::string_view d = cells[*drop_idx];
            while (!d.empty()) {
                auto pos = d.find(';');
                e.dropped.emplace_back(detail::trim(d.substr(0, pos)));
                if (pos == std::string_view::npos)
                    break;
                d.remove_prefix(pos + 1);
            }
        }
        if (!s.entries.empty() && e.year <= s.entries.back().year)
            throw DataError(where + ": years must be strictly increasing");
        s.entries.push_back(std::move(e));
    }
    return s;
}

inline YearlyHappinessSeries load_beta0_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open beta0 file '" + path + "'");
    return parse_beta0_csv(in, path);
}

// ---------------------------------------------------------------------------
// Intercept identity
// ---------------------------------------------------------------------------

/// |b0 - (ybar - sum_j b_j xbar_j)| over the non-constant columns. Zero up to
/// rounding for any least-squares fit that includes a constant.
inline double intercept_identity_check(const OlsResult& fit, const DesignMatrix& design) {
    if (fit.n != design.rows() || fit.k != design.cols())
        throw SpecError("intercept_identity_check: fit was not produced from this design");
    std::optional<Eigen::Index> c;
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        if (design.kinds[static_cast<std::size_t>(j)] == ColumnKind::constant)
            c = j;
    if (!c)
        throw SpecError("intercept_identity_check: fit has no constant");
    double implied = design.y.mean();
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        if (j != *c)
            implied -= fit.coefficients(j) * design.x.col(j).mean();
    return std::fabs(fit.coefficients(*c) - implied);
}

// ---------------------------------------------------------------------------
// Stage one
// ---------------------------------------------------------------------------

struct StageOneOptions {
    std::size_t min_obs = 100;
    /// Worker threads for the per-year fits; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

struct YearFit {
    int year = 0;
    DesignMatrix design;
    OlsResult fit;
};

struct StageOneResult {
    YearlyHappinessSeries series;
    std::vector<YearFit> fits; // ascending by year, one per series entry
};

namespace detail {

inline Frame select_rows(const Frame& f, const std::vector<std::size_t>& rows) {
    Frame out;
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (auto r : rows)
            col.push_back(f.columns[j][r]);
        out.add(f.names[j], std::move(col));
    }
    return out;
}

/// Run fn(i) for i in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    for (unsigned t = 0; t < threads; ++t)
        workers.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        }));
    for (auto& w : workers)
        w.get();
}

} // namespace detail

inline StageOneResult stage_one(const Frame& data, const ModelSpec& spec, const StageOneOptions& opts = {}) {
    validate(spec);
    if (spec.include_time_dummies)
        throw SpecError("stage one: the yearly specification must not include time dummies");
    if (spec.include_trend)
        throw SpecError("stage one: a trend is constant within a single year");
    if (!spec.include_constant)
        throw SpecError("stage one: the yearly specification needs a constant");
    if (!spec.macro.empty())
        throw SpecError("stage one: macro regressors are constant within a single year");

    const auto& year_col = data.column("year");
    std::map<int, std::vector<std::size_t>> by_year;
    for (std::size_t i = 0; i < year_col.size(); ++i)
        by_year[static_cast<int>(year_col[i])].push_back(i);

    struct Slot {
        int year = 0;
        std::size_t n = 0;
        std::optional<YearFit> fit;
        std::string reason;
    };
    std::vector<Slot> slots;
    for (const auto& [year, rows] : by_year)
        slots.push_back({year, rows.size(), std::nullopt, {}});

    detail::parallel_for(slots.size(), opts.threads, [&](std::size_t i) {
        auto& slot = slots[i];
        if (slot.n < opts.min_obs) {
            slot.reason = "n=" + std::to_string(slot.n) + " below minimum " + std::to_string(opts.min_obs);
            return;
        }
        try {
            const Frame slice = detail::select_rows(data, by_year.at(slot.year));
            YearFit yf;
            yf.year = slot.year;
            yf.design = encode_design_matrix(slice, spec, EncodeOptions{true});
            yf.fit = ols_fit(yf.design, spec.significance);
            slot.fit = std::move(yf);
        } catch (const Error& e) {
            slot.reason = e.what();
        }
    });

    StageOneResult res;
    for (auto& slot : slots) {
        if (!slot.fit) {
            res.series.skipped.push_back({slot.year, slot.n, slot.reason});
            continue;
        }
        YearEntry e;
        e.year = slot.year;
        e.beta0 = slot.fit->fit.coef("Constant");
        e.n_year = slot.n;
        e.dropped = slot.fit->design.dropped;
        res.series.entries.push_back(std::move(e));
        res.fits.push_back(std::move(*slot.fit));
    }
    if (res.series.entries.empty())
        throw DataError("stage one: no year has enough usable observations (minimum " +
                        std::to_string(opts.min_obs) + ")");
    return res;
}

inline StageOneResult stage_one(const MicroDataset& micro, const ModelSpec& spec, const StageOneOptions& opts = {}) {
    return stage_one(to_frame(micro), spec, opts);
}

// ---------------------------------------------------------------------------
// Stage two
// ---------------------------------------------------------------------------

struct StageTwoOptions {
    bool event_dummies = false;
    /// Use the level of GDP per capita instead of its first difference.
    bool raw_gdp = false;
    std::size_t min_years = 10;
    double significance = 0.05;
};

struct StageTwoResult {
    std::vector<int> years; // usable years, in design row order
    DesignMatrix design;
    OlsResult fit;
};

/// Regress the yearly intercepts on unemployment, inflation, the change in GDP
/// per capita since the previous series year, a trend t = 1, 2, ... and
/// optionally the party/disaster/tech dummies. Differencing uses consecutive
/// entries of the series and attributes each change to the later year, so
/// the first year is lost.
inline StageTwoResult stage_two(const YearlyHappinessSeries& series, const MacroSeries& macro,
                                const StageTwoOptions& opts = {}) {
    std::vector<const MacroYear*> rows;
    for (const auto& e : series.entries) {
        const auto* m = macro.find(e.year);
        if (!m)
            throw DataError("stage two: year " + std::to_string(e.year) + " is in the series but not in the macro data");
        rows.push_back(m);
    }
    const std::size_t first = opts.raw_gdp ? 0 : 1;
    if (series.size() < first + opts.min_years)
        throw DataError("stage two: only " + std::to_string(series.size() - std::min(series.size(), first)) +
                        " usable years, need at least " + std::to_string(opts.min_years));

    std::vector<double> gdp;
    for (const auto* m : rows)
        gdp.push_back(m->gdp_per_capita);
    std::vector<double> gdp_term = opts.raw_gdp ? gdp : difference(gdp);

    Frame f;
    std::vector<double> dep, unemp, infl, trend, party, disaster, tech, year;
    for (std::size_t i = first; i < rows.size(); ++i) {
        year.push_back(rows[i]->year);
        dep.push_back(series.entries[i].beta0);
        unemp.push_back(rows[i]->unemployment);
        infl.push_back(rows[i]->inflation);
        trend.push_back(static_cast<double>(i - first + 1));
        party.push_back(rows[i]->party);
        disaster.push_back(rows[i]->disaster);
        tech.push_back(rows[i]->tech);
    }
    const std::string gdp_name = opts.raw_gdp ? "GDP_capita" : "GDPD";
    f.add("year", year);
    f.add("B0_hat", std::move(dep));
    f.add("Unemp", std::move(unemp));
    f.add("Infl", std::move(infl));
    f.add(gdp_name, std::move(gdp_term));
    f.add("t", std::move(trend));
    f.add("Party", std::move(party));
    f.add("Disaster", std::move(disaster));
    f.add("Tech", std::move(tech));

    ModelSpec spec;
    spec.dependent = "B0_hat";
    spec.continuous = {"Unemp", "Infl", gdp_name, "t"};
    if (opts.event_dummies)
        for (const char* d : {"Party", "Disaster", "Tech"})
            spec.continuous.emplace_back(d);
    spec.significance = opts.significance;

    StageTwoResult res;
    for (double y : year)
        res.years.push_back(static_cast<int>(y));
    res.design = encode_design_matrix(f, spec);
    res.fit = ols_fit(res.design, opts.significance);
    return res;
}

// ---------------------------------------------------------------------------
// Pooled micro regressions
// ---------------------------------------------------------------------------

/// Names under which macro indicators enter a pooled micro regression.
inline const std::vector<std::pair<std::string, double MacroYear::*>>& pooled_macro_columns() {
    static const std::vector<std::pair<std::string, double MacroYear::*>> cols = {
        {"unemp2", &MacroYear::unemployment},
        {"Infl", &MacroYear::inflation},
        {"GDP_capita", &MacroYear::gdp_per_capita},
    };
    return cols;
}

/// Micro frame with each row's year-level macro indicators attached.
inline Frame attach_macro(const MicroDataset& micro, const MacroSeries& macro) {
    Frame f = to_frame(micro);
    for (const auto& [name, member] : pooled_macro_columns()) {
        std::vector<double> col;
        col.reserve(micro.size());
        for (const auto& r : micro.rows) {
            const auto* m = macro.find(r.year);
            if (!m)
                throw DataError("pooled fit: micro year " + std::to_string(r.year) + " is missing from the macro data");
            col.push_back(m->*member);
        }
        f.add(name, std::move(col));
    }
    return f;
}

struct PooledOls {
    DesignMatrix design;
    OlsResult fit;
};

struct PooledProbit {
    DesignMatrix design;
    OrderedProbitResult fit;
};

enum class Estimator { ols, ordered_probit };

namespace detail {

inline std::pair<Frame, ModelSpec> pooled_inputs(const MicroDataset& micro, ModelSpec spec, const MacroSeries* macro) {
    if (macro) {
        if (spec.include_time_dummies)
            throw SpecError("pooled fit: time dummies and year-constant macro regressors (unemp2, Infl, GDP_capita) "
                            "are perfectly collinear; drop one of them");
        if (spec.macro.empty())
            for (const auto& [name, _] : pooled_macro_columns())
                spec.macro.push_back(name);
        return {attach_macro(micro, *macro), spec};
    }
    if (!spec.macro.empty())
        throw SpecError("pooled fit: spec lists macro regressors but no macro data was supplied");
    return {to_frame(micro), spec};
}

} // namespace detail

inline PooledOls pooled_ols(const MicroDataset& micro, const ModelSpec& spec, const MacroSeries* macro = nullptr) {
    auto [frame, s] = detail::pooled_inputs(micro, spec, macro);
    PooledOls out;
    out.design = encode_design_matrix(frame, s);
    out.fit = ols_fit(out.design, s.significance);
    return out;
}

/// Same specification fitted by ordered probit; the constant is dropped
/// because the cut points absorb it.
inline PooledProbit pooled_ordered_probit(const MicroDataset& micro, const ModelSpec& spec,
                                          const MacroSeries* macro = nullptr, OrderedProbitOptions opts = {}) {
    auto [frame, s] = detail::pooled_inputs(micro, spec, macro);
    s.include_constant = false;
    opts.significance = s.significance;
    PooledProbit out;
    out.design = encode_design_matrix(frame, s);
    out.fit = ordered_probit_fit(out.design, opts);
    return out;
}

inline std::variant<PooledOls, PooledProbit> pooled_micro_fit(const MicroDataset& micro, const ModelSpec& spec,
                                                              const MacroSeries* macro = nullptr,
                                                              Estimator estimator = Estimator::ols) {
    if (estimator == Estimator::ols)
        return pooled_ols(micro, spec, macro);
    return pooled_ordered_probit(micro, spec, macro);
}

// ---------------------------------------------------------------------------
// Effect arithmetic
// ---------------------------------------------------------------------------

struct EffectReport {
    std::string name;
    double coefficient = 0.0;
    double baseline = 0.0;
    double percent = 0.0;
};

/// Coefficient expressed as a percentage of a baseline happiness level.
inline EffectReport percent_effect(double coefficient, double baseline, std::string name = {}) {
    if (!(baseline > 0.0) || !std::isfinite(baseline))
        throw SpecError("percent_effect: baseline must be positive");
    return {std::move(name), coefficient, baseline, coefficient / baseline * 100.0};
}

/// Net happiness reduction from a rise of `delta_u` (a fraction) in the
/// unemployment rate: the personal cost borne by the newly unemployed plus
/// the aggregate effect on everyone. Coefficients enter as magnitudes.
struct Decomposition {
    double personal = 0.0;
    double aggregate = 0.0;
    double delta_u = 0.0;
    double net = 0.0;
    double baseline = 0.0;
    double percent = 0.0;
};

inline Decomposition unemployment_net_effect(double personal, double aggregate, double delta_u, double baseline) {
    if (!(baseline > 0.0) || !std::isfinite(baseline))
        throw SpecError("unemployment_net_effect: baseline must be positive");
    if (!(delta_u >= 0.0))
        throw SpecError("unemployment_net_effect: change in unemployment must be nonnegative");
    Decomposition d;
    d.personal = std::fabs(personal);
    d.aggregate = std::fabs(aggregate);
    d.delta_u = delta_u;
    d.net = delta_u * d.personal + d.aggregate;
    d.baseline = baseline;
    d.percent = d.net / baseline * 100.0;
    return d;
}

/// Mean of the yearly intercepts rounded to one decimal, the default baseline
/// for percent effects of macro coefficients.
inline double default_macro_baseline(const YearlyHappinessSeries& s) {
    const auto v = s.values();
    if (v.empty())
        throw DataError("empty yearly series");
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    return std::round(mean * 10.0) / 10.0;
}

inline constexpr double kDefaultMicroBaseline = 2.0;

} // namespace happyreg
