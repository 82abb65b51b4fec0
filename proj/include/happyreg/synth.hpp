#pragma once

// Synthetic micro and macro data with known ground truth.
//
// Generation recipe (reproducible without this code):
//
//   * Random source: std::mt19937_64 seeded with the 64-bit seed. A uniform
//     u in [0,1) is (draw >> 11) * 2^-53. A standard normal is Box-Muller on
//     two consecutive uniforms: sqrt(-2 ln(1 - u1)) * cos(2 pi u2); the sine
//     branch is discarded.
//   * Integer "code" variables take the first code whose cumulative
//     probability exceeds one uniform draw. Age is lo + floor(u * (hi-lo+1)).
//   * Micro rows: years ascending, n_per_year rows each. Per row the draws are
//     age, sex, race, educ, marital, health, workstatus, income, childs, noise.
//     latent = intercept[year] + sum(coef[v] * v for age, childs, educ)
//              + sum(coef["d_" + label(code)] for every categorical variable)
//              + noise_sd * z
//     happy = 1 + number of thresholds strictly below latent.
//   * Macro: covariates drawn from a stream seeded with covariate_seed (or
//     seed). Per year: unemployment z, inflation z, GDP growth z, then party,
//     disaster, tech uniforms. GDP starts at gdp_start and accumulates growth.
//     Noise comes from a second stream seeded with seed + 0x9E3779B97F4A7C15:
//     v_0 = sd * z_0 / sqrt(1 - rho^2), v_t = rho * v_{t-1} + sd * z_t.
//     beta0_j = constant + b_u U_j + b_i I_j + b_g GDPD_j + b_t j
//               + b_p party_j + b_d disaster_j + b_tech tech_j + v_j
//     with j the 0-based year index and GDPD_0 = 0, so j matches the trend
//     t = 1, 2, ... that stage two assigns to the usable years.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "data_model.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "pipeline.hpp"

namespace happyreg {

class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

struct CodeDistribution {
    std::vector<int> codes;
    std::vector<double> probs;

    int draw(SynthRng& rng) const {
        const double u = rng.uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i < codes.size(); ++i) {
            cum += probs[i];
            if (u < cum)
                return codes[i];
        }
        return codes.back();
    }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < codes.size(); ++i)
            m += codes[i] * probs[i];
        return m;
    }
};

struct MicroDGP {
    std::map<int, double> intercepts; // year -> intercept
    std::map<std::string, double> coefficients;
    double noise_sd = 0.6;
    std::vector<double> thresholds;
    int age_min = 18;
    int age_max = 89;
    std::map<std::string, CodeDistribution> covariates;
};

namespace detail {

inline const std::vector<std::string>& synth_code_variables() {
    static const std::vector<std::string> v = {"sex",    "race",       "educ",   "marital",
                                               "health", "workstatus", "income", "childs"};
    return v;
}

inline bool is_continuous_code(const std::string& v) {
    return v == "educ" || v == "childs";
}

// Contribution of one variable's value to the latent index.
inline double term(const MicroDGP& dgp, const std::string& var, int value) {
    if (var == "age" || is_continuous_code(var)) {
        auto it = dgp.coefficients.find(var);
        return it == dgp.coefficients.end() ? 0.0 : it->second * value;
    }
    const auto* cat = find_categorical(var);
    for (std::size_t i = 0; i < cat->codes.size(); ++i)
        if (cat->codes[i] == value) {
            auto it = dgp.coefficients.find("d_" + cat->labels[i]);
            return it == dgp.coefficients.end() ? 0.0 : it->second;
        }
    return 0.0;
}

} // namespace detail

inline void validate(const MicroDGP& dgp) {
    if (dgp.intercepts.empty())
        throw SpecError("micro DGP: no years");
    if (!(dgp.noise_sd >= 0.0))
        throw SpecError("micro DGP: noise sd must be nonnegative");
    if (dgp.thresholds.empty())
        throw SpecError("micro DGP: no category thresholds");
    for (std::size_t i = 1; i < dgp.thresholds.size(); ++i)
        if (!(dgp.thresholds[i] > dgp.thresholds[i - 1]))
            throw SpecError("micro DGP: thresholds must be strictly increasing");
    if (dgp.thresholds.size() != 2)
        throw SpecError("micro DGP: happiness has three categories, so exactly two thresholds are needed");
    if (dgp.age_min < 18 || dgp.age_max > 89 || dgp.age_min > dgp.age_max)
        throw SpecError("micro DGP: age range must lie within 18..89");
    const auto& domains = detail::micro_domains();
    for (const auto& v : detail::synth_code_variables()) {
        auto it = dgp.covariates.find(v);
        if (it == dgp.covariates.end())
            throw SpecError("micro DGP: no distribution for '" + v + "'");
        const auto& d = it->second;
        if (d.codes.empty() || d.codes.size() != d.probs.size())
            throw SpecError("micro DGP: '" + v + "' needs one probability per code");
        double sum = 0.0;
        for (std::size_t i = 0; i < d.codes.size(); ++i) {
            if (d.probs[i] < 0.0)
                throw SpecError("micro DGP: negative probability for '" + v + "'");
            const auto& dom = domains.at(v);
            if (d.codes[i] < dom.lo || d.codes[i] > dom.hi)
                throw SpecError("micro DGP: code " + std::to_string(d.codes[i]) + " outside the domain of '" + v + "'");
            sum += d.probs[i];
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw SpecError("micro DGP: probabilities of '" + v + "' sum to " + format_sig(sum) + ", not 1");
    }
    std::vector<std::string> known = {"age", "educ", "childs"};
    for (const auto& v : categorical_registry())
        for (const auto& l : v.labels)
            known.push_back("d_" + l);
    for (const auto& [name, _] : dgp.coefficients)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw SpecError("micro DGP: unknown coefficient '" + name + "'");
}

/// Mean and variance of the latent index pooled over years, with covariates
/// drawn independently.
inline std::pair<double, double> latent_moments(const MicroDGP& dgp) {
    double mean = 0.0, var = 0.0;
    {
        double m = 0.0, m2 = 0.0;
        for (const auto& [_, b] : dgp.intercepts) {
            m += b;
            m2 += b * b;
        }
        const double k = static_cast<double>(dgp.intercepts.size());
        mean += m / k;
        var += m2 / k - (m / k) * (m / k);
    }
    {
        const double n = dgp.age_max - dgp.age_min + 1;
        const double b = dgp.coefficients.count("age") ? dgp.coefficients.at("age") : 0.0;
        mean += b * 0.5 * (dgp.age_min + dgp.age_max);
        var += b * b * (n * n - 1.0) / 12.0;
    }
    for (const auto& v : detail::synth_code_variables()) {
        const auto& d = dgp.covariates.at(v);
        double m = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < d.codes.size(); ++i) {
            const double t = detail::term(dgp, v, d.codes[i]);
            m += d.probs[i] * t;
            m2 += d.probs[i] * t * t;
        }
        mean += m;
        var += m2 - m * m;
    }
    var += dgp.noise_sd * dgp.noise_sd;
    return {mean, var};
}

/// Thresholds placing the given category shares under a normal approximation
/// of the latent index.
inline std::vector<double> thresholds_for_shares(const MicroDGP& dgp, const std::vector<double>& shares) {
    auto [mean, var] = latent_moments(dgp);
    std::vector<double> out;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < shares.size(); ++i) {
        cum += shares[i];
        out.push_back(mean + std::sqrt(var) * normal_quantile(cum));
    }
    return out;
}

/// A plausible default: coefficients of the baseline specification, common
/// covariate marginals, and thresholds giving shares near (0.13, 0.55, 0.32).
inline MicroDGP default_micro_dgp(const std::map<int, double>& intercepts) {
    MicroDGP d;
    d.intercepts = intercepts;
    d.coefficients = {
        {"age", 0.0037},      {"childs", -0.0046},  {"educ", 0.0029},     {"d_male", -0.042},
        {"d_exc", 0.389},     {"d_good", 0.188},    {"d_poor", -0.166},   {"d_married", 0.204},
        {"d_dws", -0.091},    {"d_work", -0.050},   {"d_unemp", -0.176},  {"d_income2", 0.002},
        {"d_income3", 0.022}, {"d_income4", 0.021}, {"d_income5", 0.034}, {"d_income6", 0.071},
        {"d_white", 0.032},   {"d_black", -0.078},
    };
    d.noise_sd = 0.6;
    d.covariates = {
        {"sex", {{0, 1}, {0.55, 0.45}}},
        {"race", {{1, 2, 3}, {0.82, 0.14, 0.04}}},
        {"educ", {{8, 10, 11, 12, 13, 14, 16, 18, 20}, {0.05, 0.08, 0.07, 0.35, 0.10, 0.12, 0.13, 0.06, 0.04}}},
        {"marital", {{0, 1, 2}, {0.25, 0.20, 0.55}}},
        {"health", {{1, 2, 3, 4}, {0.07, 0.20, 0.45, 0.28}}},
        {"workstatus", {{0, 1, 2}, {0.35, 0.04, 0.61}}},
        {"income", {{1, 2, 3, 4, 5, 6}, {0.08, 0.10, 0.10, 0.10, 0.10, 0.52}}},
        {"childs", {{0, 1, 2, 3, 4, 5, 6, 7, 8}, {0.28, 0.16, 0.25, 0.15, 0.08, 0.04, 0.02, 0.01, 0.01}}},
    };
    d.thresholds = thresholds_for_shares(d, {0.13, 0.55, 0.32});
    return d;
}

struct SyntheticMicro {
    MicroDataset data;
    /// Continuous outcome (the latent index) aligned with data.rows.
    std::vector<double> latent;

    /// Micro frame plus a "latent" column usable as a continuous dependent.
    Frame frame() const {
        Frame f = to_frame(data);
        f.add("latent", latent);
        return f;
    }
};

inline SyntheticMicro generate_micro(const MicroDGP& dgp, std::size_t n_per_year, std::uint64_t seed) {
    validate(dgp);
    if (n_per_year < 1)
        throw SpecError("generate_micro: n_per_year must be at least 1");
    SynthRng rng(seed);
    SyntheticMicro out;
    out.data.rows.reserve(n_per_year * dgp.intercepts.size());
    out.latent.reserve(n_per_year * dgp.intercepts.size());
    const auto& cov = dgp.covariates;
    for (const auto& [year, intercept] : dgp.intercepts) {
        for (std::size_t i = 0; i < n_per_year; ++i) {
            MicroRecord r;
            r.year = year;
            r.age = dgp.age_min + static_cast<int>(rng.uniform() * (dgp.age_max - dgp.age_min + 1));
            r.sex = cov.at("sex").draw(rng);
            r.race = cov.at("race").draw(rng);
            r.educ = cov.at("educ").draw(rng);
            r.marital = cov.at("marital").draw(rng);
            r.health = cov.at("health").draw(rng);
            r.workstatus = cov.at("workstatus").draw(rng);
            r.income = cov.at("income").draw(rng);
            r.childs = cov.at("childs").draw(rng);
            double y = intercept + detail::term(dgp, "age", r.age);
            for (const auto& [v, member] : std::initializer_list<std::pair<const char*, int MicroRecord::*>>{
                     {"sex", &MicroRecord::sex},
                     {"race", &MicroRecord::race},
                     {"educ", &MicroRecord::educ},
                     {"marital", &MicroRecord::marital},
                     {"health", &MicroRecord::health},
                     {"workstatus", &MicroRecord::workstatus},
                     {"income", &MicroRecord::income},
                     {"childs", &MicroRecord::childs}})
                y += detail::term(dgp, v, r.*member);
            y += dgp.noise_sd * rng.normal();
            r.happy = 1;
            for (double c : dgp.thresholds)
                if (y > c)
                    ++r.happy;
            out.data.rows.push_back(r);
            out.latent.push_back(y);
        }
    }
    out.data.report.data_rows = out.data.rows.size();
    return out;
}

// ---------------------------------------------------------------------------
// Macro
// ---------------------------------------------------------------------------

struct MacroDGP {
    int first_year = 1973;
    int years = 24;
    double constant = 2.9;
    double b_unemployment = -0.09;
    double b_inflation = -0.05;
    double b_gdpd = -0.00005;
    double b_trend = -0.016;
    double b_party = -0.24;
    double b_disaster = -0.06;
    double b_tech = 0.2;
    double noise_sd = 0.05;
    double noise_rho = 0.0;

    double unemployment_mean = 6.37;
    double unemployment_sd = 1.49;
    double inflation_mean = 4.86;
    double inflation_sd = 3.08;
    double gdp_start = 6461.7;
    double gdp_growth_mean = 1800.0;
    double gdp_growth_sd = 600.0;
    double p_party = 0.29;
    double p_disaster = 0.25;
    double p_tech = 0.125;
    std::optional<std::uint64_t> covariate_seed;
};

inline void validate(const MacroDGP& dgp) {
    if (dgp.years < 12)
        throw SpecError("macro DGP: need at least 12 years");
    if (!(dgp.noise_sd >= 0.0))
        throw SpecError("macro DGP: noise sd must be nonnegative");
    if (!(std::fabs(dgp.noise_rho) < 1.0))
        throw SpecError("macro DGP: |noise_rho| must be below 1");
    for (double p : {dgp.p_party, dgp.p_disaster, dgp.p_tech})
        if (!(p >= 0.0 && p <= 1.0))
            throw SpecError("macro DGP: dummy probabilities must lie in [0,1]");
    if (!(dgp.unemployment_sd >= 0.0 && dgp.inflation_sd >= 0.0 && dgp.gdp_growth_sd >= 0.0))
        throw SpecError("macro DGP: standard deviations must be nonnegative");
}

struct SyntheticMacro {
    MacroSeries macro;
    YearlyHappinessSeries series;
};

inline SyntheticMacro generate_macro(const MacroDGP& dgp, std::uint64_t seed) {
    validate(dgp);
    SynthRng cov(dgp.covariate_seed.value_or(seed));
    SynthRng noise(seed + 0x9E3779B97F4A7C15ULL);

    SyntheticMacro out;
    double gdp = dgp.gdp_start;
    for (int j = 0; j < dgp.years; ++j) {
        MacroYear m;
        m.year = dgp.first_year + j;
        m.unemployment = dgp.unemployment_mean + dgp.unemployment_sd * cov.normal();
        m.inflation = dgp.inflation_mean + dgp.inflation_sd * cov.normal();
        const double growth = dgp.gdp_growth_mean + dgp.gdp_growth_sd * cov.normal();
        if (j > 0)
            gdp += growth;
        m.gdp_per_capita = gdp;
        m.party = cov.uniform() < dgp.p_party ? 1 : 0;
        m.disaster = cov.uniform() < dgp.p_disaster ? 1 : 0;
        m.tech = cov.uniform() < dgp.p_tech ? 1 : 0;
        out.macro.years.push_back(m);
    }

    double v = 0.0;
    for (int j = 0; j < dgp.years; ++j) {
        const double z = noise.normal();
        v = j == 0 ? dgp.noise_sd * z / std::sqrt(1.0 - dgp.noise_rho * dgp.noise_rho)
                   : dgp.noise_rho * v + dgp.noise_sd * z;
        const auto& m = out.macro.years[static_cast<std::size_t>(j)];
        const double gdpd = j == 0 ? 0.0 : m.gdp_per_capita - out.macro.years[static_cast<std::size_t>(j - 1)].gdp_per_capita;
        YearEntry e;
        e.year = m.year;
        e.beta0 = dgp.constant + dgp.b_unemployment * m.unemployment + dgp.b_inflation * m.inflation +
                  dgp.b_gdpd * gdpd + dgp.b_trend * j + dgp.b_party * m.party + dgp.b_disaster * m.disaster +
                  dgp.b_tech * m.tech + v;
        out.series.entries.push_back(e);
    }
    out.macro.check();
    return out;
}

// ---------------------------------------------------------------------------
// JSON descriptions for the synth subcommand
// ---------------------------------------------------------------------------

inline MicroDGP micro_dgp_from_json(const nlohmann::json& j) {
    try {
        std::map<int, double> intercepts;
        for (const auto& [year, value] : j.at("intercepts").items()) {
            long y = 0;
            if (!parse_int(year, y))
                throw SpecError("micro DGP: intercept key '" + year + "' is not a year");
            intercepts[static_cast<int>(y)] = value.get<double>();
        }
        MicroDGP d = default_micro_dgp(intercepts);
        if (j.contains("coefficients"))
            d.coefficients = j.at("coefficients").get<std::map<std::string, double>>();
        d.noise_sd = j.value("noise_sd", d.noise_sd);
        if (j.contains("age")) {
            d.age_min = j.at("age").at(0).get<int>();
            d.age_max = j.at("age").at(1).get<int>();
        }
        if (j.contains("covariates"))
            for (const auto& [name, spec] : j.at("covariates").items())
                d.covariates[name] = {spec.at("codes").get<std::vector<int>>(),
                                      spec.at("probs").get<std::vector<double>>()};
        if (j.contains("thresholds"))
            d.thresholds = j.at("thresholds").get<std::vector<double>>();
        else
            d.thresholds = thresholds_for_shares(d, j.value("shares", std::vector<double>{0.13, 0.55, 0.32}));
        validate(d);
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("micro DGP: ") + e.what());
    }
}

inline MacroDGP macro_dgp_from_json(const nlohmann::json& j) {
    MacroDGP d;
    try {
        d.first_year = j.value("first_year", d.first_year);
        d.years = j.value("years", d.years);
        if (j.contains("coefficients")) {
            const auto& c = j.at("coefficients");
            d.constant = c.value("constant", d.constant);
            d.b_unemployment = c.value("unemployment", d.b_unemployment);
            d.b_inflation = c.value("inflation", d.b_inflation);
            d.b_gdpd = c.value("gdpd", d.b_gdpd);
            d.b_trend = c.value("trend", d.b_trend);
            d.b_party = c.value("party", d.b_party);
            d.b_disaster = c.value("disaster", d.b_disaster);
            d.b_tech = c.value("tech", d.b_tech);
        }
        d.noise_sd = j.value("noise_sd", d.noise_sd);
        d.noise_rho = j.value("noise_rho", d.noise_rho);
        d.unemployment_mean = j.value("unemployment_mean", d.unemployment_mean);
        d.unemployment_sd = j.value("unemployment_sd", d.unemployment_sd);
        d.inflation_mean = j.value("inflation_mean", d.inflation_mean);
        d.inflation_sd = j.value("inflation_sd", d.inflation_sd);
        d.gdp_start = j.value("gdp_start", d.gdp_start);
        d.gdp_growth_mean = j.value("gdp_growth_mean", d.gdp_growth_mean);
        d.gdp_growth_sd = j.value("gdp_growth_sd", d.gdp_growth_sd);
        d.p_party = j.value("p_party", d.p_party);
        d.p_disaster = j.value("p_disaster", d.p_disaster);
        d.p_tech = j.value("p_tech", d.p_tech);
        if (j.contains("covariate_seed"))
            d.covariate_seed = j.at("covariate_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("macro DGP: ") + e.what());
    }
    validate(d);
    return d;
}

} // namespace happyreg
