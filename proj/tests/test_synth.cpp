#include <gtest/gtest.h>

#include <sstream>

#include "happyreg/synth.hpp"

using namespace happyreg;

namespace {

std::string micro_csv(const MicroDataset& ds) {
    std::ostringstream out;
    write_micro_csv(out, ds);
    return out.str();
}

std::map<int, double> flat_years(int first, int count, double v) {
    std::map<int, double> m;
    for (int i = 0; i < count; ++i)
        m[first + i] = v;
    return m;
}

} // namespace

TEST(SynthRng, UniformRangeAndNormalMoments) {
    SynthRng rng(1);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(SynthRng, FollowsDocumentedRecipe) {
    std::mt19937_64 eng(99);
    SynthRng rng(99);
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    EXPECT_EQ(rng.uniform(), u);
}

TEST(GenerateMicro, SameSeedSameBytes) {
    const auto dgp = default_micro_dgp(flat_years(1990, 3, 1.7));
    EXPECT_EQ(micro_csv(generate_micro(dgp, 500, 42).data), micro_csv(generate_micro(dgp, 500, 42).data));
    EXPECT_NE(micro_csv(generate_micro(dgp, 500, 42).data), micro_csv(generate_micro(dgp, 500, 43).data));
}

TEST(GenerateMicro, RowsWithinDomainsAndOrdered) {
    const auto synth = generate_micro(default_micro_dgp(flat_years(1990, 4, 1.7)), 250, 7);
    ASSERT_EQ(synth.data.size(), 1000u);
    ASSERT_EQ(synth.latent.size(), 1000u);
    // Re-parsing applies every domain check.
    std::istringstream in(micro_csv(synth.data));
    EXPECT_EQ(parse_micro_csv(in).report.rejected_count(), 0u);
    for (std::size_t i = 1; i < synth.data.size(); ++i)
        EXPECT_LE(synth.data.rows[i - 1].year, synth.data.rows[i].year);
}

TEST(GenerateMicro, HappyThresholdsMatchLatent) {
    const auto dgp = default_micro_dgp(flat_years(1990, 1, 1.7));
    const auto synth = generate_micro(dgp, 2000, 3);
    for (std::size_t i = 0; i < synth.data.size(); ++i) {
        const double l = synth.latent[i];
        const int expect = l > dgp.thresholds[1] ? 3 : (l > dgp.thresholds[0] ? 2 : 1);
        EXPECT_EQ(synth.data.rows[i].happy, expect);
    }
}

TEST(GenerateMicro, MarginalsNearTargets) {
    const auto dgp = default_micro_dgp(flat_years(1990, 4, 1.7));
    const auto synth = generate_micro(dgp, 10000, 11);
    const double n = static_cast<double>(synth.data.size());
    double shares[3] = {0, 0, 0}, male = 0, age = 0;
    for (const auto& r : synth.data.rows) {
        shares[r.happy - 1] += 1 / n;
        male += r.sex / n;
        age += r.age / n;
    }
    // Thresholds come from a normal approximation of the latent index.
    EXPECT_NEAR(shares[0], 0.13, 0.02);
    EXPECT_NEAR(shares[1], 0.55, 0.02);
    EXPECT_NEAR(shares[2], 0.32, 0.02);
    EXPECT_NEAR(male, 0.45, 0.01);
    EXPECT_NEAR(age, 53.5, 0.5);
}

TEST(GenerateMicro, ValidationErrors) {
    auto dgp = default_micro_dgp(flat_years(1990, 1, 1.7));
    auto bad = dgp;
    bad.thresholds = {0.5};
    EXPECT_THROW(generate_micro(bad, 10, 1), SpecError);
    bad = dgp;
    bad.coefficients["d_purple"] = 1.0;
    EXPECT_THROW(generate_micro(bad, 10, 1), SpecError);
    bad = dgp;
    bad.covariates["health"].probs = {0.5, 0.5, 0.5, 0.5};
    EXPECT_THROW(generate_micro(bad, 10, 1), SpecError);
    EXPECT_THROW(generate_micro(dgp, 0, 1), SpecError);
}

TEST(GenerateMacro, DeterministicAndShaped) {
    MacroDGP dgp;
    const auto a = generate_macro(dgp, 5);
    const auto b = generate_macro(dgp, 5);
    EXPECT_EQ(a.macro.years, b.macro.years);
    ASSERT_EQ(a.series.size(), 24u);
    EXPECT_EQ(a.macro.years.front().year, 1973);
    EXPECT_EQ(a.macro.years.back().year, 1996);
    EXPECT_NO_THROW(a.macro.check());
    for (std::size_t i = 0; i < a.series.size(); ++i)
        EXPECT_EQ(a.series.entries[i].year, a.macro.years[i].year);
}

TEST(GenerateMacro, CovariateSeedFixesRegressors) {
    MacroDGP dgp;
    dgp.covariate_seed = 100;
    const auto a = generate_macro(dgp, 1);
    const auto b = generate_macro(dgp, 2);
    EXPECT_EQ(a.macro.years, b.macro.years);
    EXPECT_NE(a.series.values(), b.series.values());
}

TEST(GenerateMacro, ZeroNoiseFollowsEquation) {
    MacroDGP dgp;
    dgp.noise_sd = 0.0;
    const auto m = generate_macro(dgp, 3);
    for (std::size_t j = 0; j < m.series.size(); ++j) {
        const auto& y = m.macro.years[j];
        const double gdpd = j == 0 ? 0.0 : y.gdp_per_capita - m.macro.years[j - 1].gdp_per_capita;
        const double expect = dgp.constant + dgp.b_unemployment * y.unemployment + dgp.b_inflation * y.inflation +
                              dgp.b_gdpd * gdpd + dgp.b_trend * static_cast<double>(j) + dgp.b_party * y.party +
                              dgp.b_disaster * y.disaster + dgp.b_tech * y.tech;
        EXPECT_NEAR(m.series.entries[j].beta0, expect, 1e-12);
    }
}

TEST(GenerateMacro, ValidationErrors) {
    MacroDGP dgp;
    dgp.years = 5;
    EXPECT_THROW(generate_macro(dgp, 1), SpecError);
    dgp = MacroDGP{};
    dgp.noise_rho = 1.0;
    EXPECT_THROW(generate_macro(dgp, 1), SpecError);
}

TEST(DgpJson, MicroAndMacro) {
    const auto j = nlohmann::json::parse(R"({
        "intercepts": {"1990": 1.6, "1991": 1.8},
        "coefficients": {"age": 0.004, "d_unemp": -0.2},
        "noise_sd": 0.5,
        "age": [20, 60]
    })");
    const auto d = micro_dgp_from_json(j);
    EXPECT_EQ(d.intercepts.size(), 2u);
    EXPECT_EQ(d.intercepts.at(1991), 1.8);
    EXPECT_EQ(d.coefficients.size(), 2u);
    EXPECT_EQ(d.age_max, 60);
    EXPECT_EQ(d.thresholds.size(), 2u);
    EXPECT_THROW(micro_dgp_from_json(nlohmann::json::parse(R"({"intercepts": {"abc": 1}})")), SpecError);

    const auto m = macro_dgp_from_json(nlohmann::json::parse(R"({"years": 30, "coefficients": {"unemployment": -0.1}})"));
    EXPECT_EQ(m.years, 30);
    EXPECT_EQ(m.b_unemployment, -0.1);
    EXPECT_EQ(m.b_inflation, MacroDGP{}.b_inflation);
}

TEST(GenerateMicro, CategoricalMarginalsWithinThreeOverRootN) {
    const auto dgp = default_micro_dgp(flat_years(1990, 2, 1.7));
    const auto synth = generate_micro(dgp, 20000, 19);
    const auto frame = synth.frame();
    const double n = static_cast<double>(synth.data.size());
    for (const auto& [var, dist] : dgp.covariates) {
        const auto& col = frame.column(var);
        for (std::size_t i = 0; i < dist.codes.size(); ++i) {
            const double share = static_cast<double>(std::count(col.begin(), col.end(), dist.codes[i])) / n;
            EXPECT_NEAR(share, dist.probs[i], 3.0 / std::sqrt(n)) << var << "=" << dist.codes[i];
        }
    }
}
