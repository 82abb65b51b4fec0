#pragma once

// Columnar micro/macro datasets, CSV ingestion, dummy encoding and summary
// statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "format.hpp"
#include "model_spec.hpp"

namespace happyreg {

// ---------------------------------------------------------------------------
// Micro data
// ---------------------------------------------------------------------------

struct MicroRecord {
    int year = 0;
    int happy = 0;
    int age = 0;
    int sex = 0;
    int race = 0;
    int educ = 0;
    int marital = 0;
    int health = 0;
    int workstatus = 0;
    int income = 0;
    int childs = 0;

    bool operator==(const MicroRecord&) const = default;
};

/// Field order of micro.csv.
inline const std::vector<std::string>& micro_columns() {
    static const std::vector<std::string> cols = {"year",   "happy",   "age",    "sex",        "race",  "educ",
                                                  "marital", "health", "workstatus", "income", "childs"};
    return cols;
}

namespace detail {

struct FieldDomain {
    int MicroRecord::*member;
    bool bounded;
    int lo;
    int hi;
};

inline const std::map<std::string, FieldDomain>& micro_domains() {
    static const std::map<std::string, FieldDomain> d = {
        {"year", {&MicroRecord::year, false, 0, 0}},
        {"happy", {&MicroRecord::happy, true, 1, 3}},
        {"age", {&MicroRecord::age, true, 18, 89}},
        {"sex", {&MicroRecord::sex, true, 0, 1}},
        {"race", {&MicroRecord::race, true, 1, 3}},
        {"educ", {&MicroRecord::educ, true, 0, 20}},
        {"marital", {&MicroRecord::marital, true, 0, 2}},
        {"health", {&MicroRecord::health, true, 1, 4}},
        {"workstatus", {&MicroRecord::workstatus, true, 0, 2}},
        {"income", {&MicroRecord::income, true, 1, 6}},
        {"childs", {&MicroRecord::childs, true, 0, 8}},
    };
    return d;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return std::string(s);
}

inline bool is_missing_token(std::string_view s) {
    return s.empty() || s == "NA" || s == "." || s == "NaN" || s == "nan";
}

inline std::vector<std::size_t> locate_columns(const std::vector<std::string_view>& header,
                                               const std::vector<std::string>& wanted, const std::string& file) {
    std::vector<std::size_t> idx;
    for (const auto& name : wanted) {
        auto it = std::find_if(header.begin(), header.end(), [&](auto h) { return unquote(h) == name; });
        if (it == header.end())
            throw DataError(file + ": header is missing required column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    return idx;
}

inline bool blank_line(std::string_view line) {
    return trim(line).empty();
}

} // namespace detail

/// One row dropped at load time (listwise deletion or code outside its domain).
struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct LoadReport {
    std::size_t data_rows = 0;
    std::vector<RejectedRow> rejected;
    std::map<std::string, std::size_t> rejects_by_column;

    std::size_t rejected_count() const noexcept { return rejected.size(); }
};

/// Individual-level survey records. Immutable after load.
struct MicroDataset {
    std::vector<MicroRecord> rows;
    LoadReport report;

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }

    std::vector<int> years() const {
        std::set<int> ys;
        for (const auto& r : rows)
            ys.insert(r.year);
        return {ys.begin(), ys.end()};
    }

    MicroDataset slice_year(int year) const {
        MicroDataset out;
        std::copy_if(rows.begin(), rows.end(), std::back_inserter(out.rows),
                     [year](const auto& r) { return r.year == year; });
        return out;
    }
};

/// Maps canonical micro field names to the header names used in a particular file.
using ColumnSchema = std::map<std::string, std::string>;

/// Parse micro CSV text. Rows with missing cells or codes outside their
/// domain are rejected and accounted for; unparseable cells are errors.
inline MicroDataset parse_micro_csv(std::istream& in, const ColumnSchema& schema = {},
                                    const std::string& source = "micro.csv") {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": missing header row");
    auto header = detail::split_csv(line);

    std::vector<std::string> wanted;
    for (const auto& c : micro_columns()) {
        auto it = schema.find(c);
        wanted.push_back(it == schema.end() ? c : it->second);
    }
    const auto idx = detail::locate_columns(header, wanted, source);
    const auto& domains = detail::micro_domains();

    MicroDataset ds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank_line(line))
            continue;
        ++ds.report.data_rows;
        auto cells = detail::split_csv(line);
        MicroRecord rec;
        std::optional<std::pair<std::string, std::string>> reject;
        for (std::size_t c = 0; c < idx.size(); ++c) {
            const auto& field = micro_columns()[c];
            if (idx[c] >= cells.size())
                throw DataError(source + " line " + std::to_string(lineno) + ": too few fields");
            auto cell = cells[idx[c]];
            if (detail::is_missing_token(cell)) {
                if (!reject)
                    reject = {field, "missing " + field};
                continue;
            }
            long v = 0;
            if (!parse_int(cell, v)) {
                double d = 0.0;
                if (!parse_double(cell, d) || d != std::floor(d))
                    throw DataError(source + " line " + std::to_string(lineno) + ", column '" + field +
                                    "': cannot parse '" + std::string(cell) + "' as an integer code");
                v = static_cast<long>(d);
            }
            const auto& dom = domains.at(field);
            if (dom.bounded && (v < dom.lo || v > dom.hi)) {
                if (!reject)
                    reject = {field, field + " out of range"};
                continue;
            }
            rec.*(dom.member) = static_cast<int>(v);
        }
        if (reject) {
            ds.report.rejected.push_back({lineno, reject->second});
            ++ds.report.rejects_by_column[reject->first];
        } else {
            ds.rows.push_back(rec);
        }
    }
    return ds;
}

inline MicroDataset load_micro_csv(const std::string& path, const ColumnSchema& schema = {}) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open micro data file '" + path + "'");
    return parse_micro_csv(in, schema, path);
}

inline void write_micro_csv(std::ostream& out, const MicroDataset& ds) {
    const auto& cols = micro_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    const auto& domains = detail::micro_domains();
    for (const auto& r : ds.rows) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            out << (i ? "," : "") << r.*(domains.at(cols[i]).member);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Macro data
// ---------------------------------------------------------------------------

struct MacroYear {
    int year = 0;
    double unemployment = 0.0;
    double inflation = 0.0;
    double gdp_per_capita = 0.0;
    int party = 0;
    int disaster = 0;
    int tech = 0;

    bool operator==(const MacroYear&) const = default;
};

inline const std::vector<std::string>& macro_columns() {
    static const std::vector<std::string> cols = {"year",  "unemployment", "inflation", "gdp_per_capita",
                                                  "party", "disaster",     "tech"};
    return cols;
}

/// Year-indexed national indicators, years strictly increasing.
struct MacroSeries {
    std::vector<MacroYear> years;

    std::size_t size() const noexcept { return years.size(); }

    const MacroYear* find(int year) const {
        auto it = std::lower_bound(years.begin(), years.end(), year,
                                   [](const MacroYear& m, int y) { return m.year < y; });
        return (it != years.end() && it->year == year) ? &*it : nullptr;
    }

    void check() const {
        for (std::size_t i = 0; i < years.size(); ++i) {
            const auto& m = years[i];
            if (i > 0 && m.year <= years[i - 1].year)
                throw DataError("macro series: years must be strictly increasing (year " + std::to_string(m.year) +
                                ")");
            if (!std::isfinite(m.unemployment) || !std::isfinite(m.inflation) || !std::isfinite(m.gdp_per_capita))
                throw DataError("macro series: non-finite indicator in year " + std::to_string(m.year));
            for (int d : {m.party, m.disaster, m.tech})
                if (d != 0 && d != 1)
                    throw DataError("macro series: dummy outside {0,1} in year " + std::to_string(m.year));
        }
    }
};

inline MacroSeries parse_macro_csv(std::istream& in, const std::string& source = "macro.csv") {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": missing header row");
    const auto idx = detail::locate_columns(detail::split_csv(line), macro_columns(), source);

    MacroSeries ms;
    std::map<int, std::size_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank_line(line))
            continue;
        auto cells = detail::split_csv(line);
        double v[7];
        for (std::size_t c = 0; c < idx.size(); ++c) {
            const auto& field = macro_columns()[c];
            const std::string where = source + " line " + std::to_string(lineno) + ", column '" + field + "'";
            if (idx[c] >= cells.size() || detail::is_missing_token(cells[idx[c]]))
                throw DataError(where + ": missing value");
            if (!parse_double(cells[idx[c]], v[c]) || !std::isfinite(v[c]))
                throw DataError(where + ": cannot parse '" + std::string(cells[idx[c]]) + "'");
            if (c == 0 && v[c] != std::floor(v[c]))
                throw DataError(where + ": year must be an integer");
            if (c >= 4 && v[c] != 0.0 && v[c] != 1.0)
                throw DataError(where + ": dummy value " + std::string(cells[idx[c]]) + " not in {0,1}");
        }
        MacroYear m{static_cast<int>(v[0]), v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5]),
                    static_cast<int>(v[6])};
        if (auto it = seen.find(m.year); it != seen.end())
            throw DataError(source + " line " + std::to_string(lineno) + ": duplicate year " +
                            std::to_string(m.year) + " (first seen on line " + std::to_string(it->second) + ")");
        seen[m.year] = lineno;
        ms.years.push_back(m);
    }
    std::sort(ms.years.begin(), ms.years.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
    ms.check();
    return ms;
}

inline MacroSeries load_macro_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open macro data file '" + path + "'");
    return parse_macro_csv(in, path);
}

inline void write_macro_csv(std::ostream& out, const MacroSeries& ms) {
    const auto& cols = macro_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& m : ms.years)
        out << m.year << ',' << format_exact(m.unemployment) << ',' << format_exact(m.inflation) << ','
            << format_exact(m.gdp_per_capita) << ',' << m.party << ',' << m.disaster << ',' << m.tech << '\n';
}

// ---------------------------------------------------------------------------
// Frame: named numeric columns, the common currency of encoding and summaries
// ---------------------------------------------------------------------------

struct Frame {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }

    bool has(const std::string& name) const {
        return std::find(names.begin(), names.end(), name) != names.end();
    }

    const std::vector<double>& column(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw SpecError("unknown variable '" + name + "'");
        return columns[static_cast<std::size_t>(it - names.begin())];
    }

    void add(std::string name, std::vector<double> values) {
        if (!columns.empty() && values.size() != rows())
            throw SpecError("frame column '" + name + "' has the wrong length");
        if (has(name))
            throw SpecError("frame already has a column named '" + name + "'");
        names.push_back(std::move(name));
        columns.push_back(std::move(values));
    }
};

inline Frame to_frame(const MicroDataset& ds) {
    Frame f;
    const auto& domains = detail::micro_domains();
    for (const auto& name : micro_columns()) {
        std::vector<double> col;
        col.reserve(ds.size());
        for (const auto& r : ds.rows)
            col.push_back(r.*(domains.at(name).member));
        f.add(name, std::move(col));
    }
    return f;
}

inline Frame to_frame(const MacroSeries& ms) {
    Frame f;
    std::vector<std::vector<double>> cols(7);
    for (const auto& m : ms.years) {
        cols[0].push_back(m.year);
        cols[1].push_back(m.unemployment);
        cols[2].push_back(m.inflation);
        cols[3].push_back(m.gdp_per_capita);
        cols[4].push_back(m.party);
        cols[5].push_back(m.disaster);
        cols[6].push_back(m.tech);
    }
    for (std::size_t i = 0; i < cols.size(); ++i)
        f.add(macro_columns()[i], std::move(cols[i]));
    return f;
}

// ---------------------------------------------------------------------------
// Dummy encoding and design matrices
// ---------------------------------------------------------------------------

/// Indicator columns for one categorical variable; the base code emits none.
struct DummySpec {
    std::string variable;
    int base_code = 0;
    std::vector<std::pair<int, std::string>> columns; // code -> column name
};

inline DummySpec make_dummy_spec(const std::string& variable, int base_code) {
    const auto* var = find_categorical(variable);
    if (!var)
        throw SpecError("'" + variable + "' is not a known categorical variable");
    DummySpec ds{variable, base_code, {}};
    bool base_seen = false;
    for (std::size_t i = 0; i < var->codes.size(); ++i) {
        if (var->codes[i] == base_code) {
            base_seen = true;
            continue;
        }
        ds.columns.emplace_back(var->codes[i], "d_" + var->labels[i]);
    }
    if (!base_seen)
        throw SpecError("base code " + std::to_string(base_code) + " is not a valid code of '" + variable + "'");
    return ds;
}

enum class ColumnKind { constant, raw, dummy, time_dummy, trend };

inline const char* to_string(ColumnKind k) {
    switch (k) {
    case ColumnKind::constant: return "constant";
    case ColumnKind::raw: return "raw";
    case ColumnKind::dummy: return "dummy";
    case ColumnKind::time_dummy: return "time_dummy";
    case ColumnKind::trend: return "trend";
    }
    return "?";
}

struct DesignMatrix {
    std::vector<std::string> names;
    std::vector<ColumnKind> kinds;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::string dependent;
    /// Dummy columns dropped because they were identically zero in this data slice.
    std::vector<std::string> dropped;

    Eigen::Index rows() const noexcept { return x.rows(); }
    Eigen::Index cols() const noexcept { return x.cols(); }

    bool has_constant() const {
        return std::find(kinds.begin(), kinds.end(), ColumnKind::constant) != kinds.end();
    }

    std::optional<Eigen::Index> index_of(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            return std::nullopt;
        return static_cast<Eigen::Index>(it - names.begin());
    }
};

struct EncodeOptions {
    /// Drop (and record) dummy columns that are identically zero instead of failing.
    bool drop_empty_dummies = false;
};

inline std::string time_dummy_name(int year, bool two_digit) {
    if (!two_digit)
        return "d_" + std::to_string(year);
    const int yy = ((year % 100) + 100) % 100;
    return std::string("d_") + (yy < 10 ? "0" : "") + std::to_string(yy);
}

/// Build the regression design for `spec` from the columns of `frame`.
inline DesignMatrix encode_design_matrix(const Frame& frame, const ModelSpec& spec, const EncodeOptions& opts = {}) {
    validate(spec);
    const std::size_t n = frame.rows();
    DesignMatrix dm;
    dm.dependent = spec.dependent;

    std::vector<std::vector<double>> cols;
    auto push = [&](std::string name, ColumnKind kind, std::vector<double> values) {
        dm.names.push_back(std::move(name));
        dm.kinds.push_back(kind);
        cols.push_back(std::move(values));
    };
    auto all_zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };

    if (spec.include_constant)
        push("Constant", ColumnKind::constant, std::vector<double>(n, 1.0));
    for (const auto& name : spec.continuous)
        push(name, ColumnKind::raw, frame.column(name));

    for (const auto& term : spec.categorical) {
        const auto& src = frame.column(term.name);
        const auto ds = make_dummy_spec(term.name, term.base);
        for (const auto& [code, cname] : ds.columns) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = src[i] == code ? 1.0 : 0.0;
            if (n > 0 && all_zero(v)) {
                if (!opts.drop_empty_dummies)
                    throw SpecError("dummy column '" + cname + "' is identically zero in this data");
                dm.dropped.push_back(cname);
                continue;
            }
            push(cname, ColumnKind::dummy, std::move(v));
        }
    }

    for (const auto& name : spec.macro)
        push(name, ColumnKind::raw, frame.column(name));

    if (spec.include_time_dummies || spec.include_trend) {
        const auto& year = frame.column("year");
        std::set<int> distinct;
        for (double y : year)
            distinct.insert(static_cast<int>(y));
        if (spec.include_time_dummies && distinct.size() > 1) {
            std::set<int> yy;
            for (int y : distinct)
                yy.insert(((y % 100) + 100) % 100);
            const bool two_digit = yy.size() == distinct.size();
            for (auto it = std::next(distinct.begin()); it != distinct.end(); ++it) {
                std::vector<double> v(n);
                for (std::size_t i = 0; i < n; ++i)
                    v[i] = static_cast<int>(year[i]) == *it ? 1.0 : 0.0;
                push(time_dummy_name(*it, two_digit), ColumnKind::time_dummy, std::move(v));
            }
        }
        if (spec.include_trend) {
            const int first = distinct.empty() ? 0 : *distinct.begin();
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = year[i] - first + 1;
            push("trend", ColumnKind::trend, std::move(v));
        }
    }

    if (n > 0) {
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (all_zero(cols[j]))
                throw SpecError("column '" + dm.names[j] + "' is identically zero in this data");
        for (std::size_t a = 0; a < cols.size(); ++a)
            for (std::size_t b = a + 1; b < cols.size(); ++b)
                if (cols[a] == cols[b])
                    throw RankError("columns '" + dm.names[a] + "' and '" + dm.names[b] + "' are identical",
                                    dm.names[b], dm.names[a]);
    }

    dm.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            dm.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    const auto& dep = frame.column(spec.dependent);
    dm.y = Eigen::Map<const Eigen::VectorXd>(dep.data(), static_cast<Eigen::Index>(n));
    return dm;
}

inline DesignMatrix encode_design_matrix(const MicroDataset& ds, const ModelSpec& spec,
                                         const EncodeOptions& opts = {}) {
    return encode_design_matrix(to_frame(ds), spec, opts);
}

inline DesignMatrix encode_design_matrix(const MacroSeries& ms, const ModelSpec& spec,
                                         const EncodeOptions& opts = {}) {
    return encode_design_matrix(to_frame(ms), spec, opts);
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string variable;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation, n-1 denominator
    double min = 0.0;
    double max = 0.0;
};

inline SummaryRow summarize_values(const std::string& name, const std::vector<double>& v) {
    if (v.empty())
        throw DataError("summary of '" + name + "': no observations");
    SummaryRow row{name, v.size(), 0.0, 0.0, v.front(), v.front()};
    // Two-pass for the variance; the mean of 30k small integers is exact enough.
    row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - row.mean) * (x - row.mean);
        row.min = std::min(row.min, x);
        row.max = std::max(row.max, x);
    }
    row.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : std::nan("");
    return row;
}

inline std::vector<SummaryRow> summarize(const Frame& f, const std::vector<std::string>& skip = {"year"}) {
    if (f.rows() == 0)
        throw DataError("cannot summarize an empty dataset");
    std::vector<SummaryRow> out;
    for (std::size_t j = 0; j < f.names.size(); ++j)
        if (std::find(skip.begin(), skip.end(), f.names[j]) == skip.end())
            out.push_back(summarize_values(f.names[j], f.columns[j]));
    return out;
}

inline std::vector<SummaryRow> summarize(const MicroDataset& ds) {
    return summarize(to_frame(ds));
}

inline std::vector<SummaryRow> summarize(const MacroSeries& ms) {
    return summarize(to_frame(ms));
}

inline std::vector<SummaryRow> summarize(const DesignMatrix& dm) {
    if (dm.rows() == 0)
        throw DataError("cannot summarize an empty design");
    std::vector<SummaryRow> out;
    std::vector<double> col(static_cast<std::size_t>(dm.rows()));
    Eigen::Map<Eigen::VectorXd>(col.data(), dm.rows()) = dm.y;
    out.push_back(summarize_values(dm.dependent, col));
    for (Eigen::Index j = 0; j < dm.cols(); ++j) {
        if (dm.kinds[static_cast<std::size_t>(j)] == ColumnKind::constant)
            continue;
        Eigen::Map<Eigen::VectorXd>(col.data(), dm.rows()) = dm.x.col(j);
        out.push_back(summarize_values(dm.names[static_cast<std::size_t>(j)], col));
    }
    return out;
}

} // namespace happyreg
