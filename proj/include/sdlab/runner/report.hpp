#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdlab/core/error.hpp"

namespace sdlab::runner {

using Json = nlohmann::ordered_json;

/// One claim checked by an experiment.
struct Check {
    std::string name;
    /// consistent, violated or inconclusive.
    std::string verdict;
    Json details = Json::object();
};

/// A plot-ready table; columns[0] is the abscissa.
struct Curve {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Report {
    std::string experiment;
    std::string name;
    std::uint64_t seed = 0;
    std::string build;
    std::string config_digest;
    Json config = Json::object();
    std::vector<Check> checks;
    std::vector<Curve> curves;
    Json results = Json::object();
    std::string timestamp;

    /// violated if any check is, else inconclusive if any is, else
    /// consistent; "none" when nothing was checked.
    std::string verdict() const {
        if (checks.empty()) return "none";
        bool inconclusive = false;
        for (const auto& c : checks) {
            if (c.verdict == "violated") return "violated";
            inconclusive = inconclusive || c.verdict == "inconclusive";
        }
        return inconclusive ? "inconclusive" : "consistent";
    }
};

/// Process exit status for a verdict: 0 consistent or none, 3 violated,
/// 4 inconclusive.
inline int exit_code(const std::string& verdict) {
    if (verdict == "violated") return 3;
    if (verdict == "inconclusive") return 4;
    return 0;
}

namespace detail {

inline std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    // keep floats floats on re-parse (-0 would come back as integer 0)
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

// Pretty printer with 17 significant digits for floats; arrays of scalars
// stay on one line.
inline void write_json(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' '), inner(static_cast<std::size_t>(indent + 2), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += inner + Json(it.key()).dump() + ": ";
            write_json(it.value(), out, indent + 2);
        }
        out += "\n" + pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool flat = true;
        for (const auto& e : j) flat = flat && !e.is_structured();
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                write_json(j[i], out, 0);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += inner;
            write_json(j[i], out, indent + 2);
        }
        out += "\n" + pad + "]";
        return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
    }
}

inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline double read_number(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace detail

inline Json to_json(const Report& r) {
    Json j = Json::object();
    j["experiment"] = r.experiment;
    j["name"] = r.name;
    j["seed"] = r.seed;
    j["build"] = r.build;
    j["config_digest"] = r.config_digest;
    j["verdict"] = r.verdict();
    j["config"] = r.config;
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(Json{{"name", c.name}, {"verdict", c.verdict}, {"details", c.details}});
    j["checks"] = checks;
    j["results"] = r.results;
    Json curves = Json::array();
    for (const auto& c : r.curves) {
        Json rows = Json::array();
        for (const auto& row : c.rows) {
            Json a = Json::array();
            for (double x : row) a.push_back(detail::number(x));
            rows.push_back(a);
        }
        curves.push_back(Json{{"name", c.name}, {"columns", c.columns}, {"rows", rows}});
    }
    j["curves"] = curves;
    j["timestamp"] = r.timestamp;
    return j;
}

inline std::string emit_json(const Report& r) {
    std::string out;
    detail::write_json(to_json(r), out, 0);
    out += "\n";
    return out;
}

/// Inverse of emit_json.
inline Report report_from_json(const std::string& text) {
    const Json j = Json::parse(text);
    Report r;
    r.experiment = j.at("experiment").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.build = j.at("build").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.config = j.at("config");
    for (const auto& c : j.at("checks")) r.checks.push_back({c.at("name"), c.at("verdict"), c.at("details")});
    r.results = j.at("results");
    for (const auto& c : j.at("curves")) {
        Curve cv;
        cv.name = c.at("name").get<std::string>();
        cv.columns = c.at("columns").get<std::vector<std::string>>();
        for (const auto& row : c.at("rows")) {
            std::vector<double> v;
            for (const auto& x : row) v.push_back(detail::read_number(x));
            cv.rows.push_back(std::move(v));
        }
        r.curves.push_back(std::move(cv));
    }
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
}

/// Long format: curve,row,x,y1,y2,y3,y4. Column meanings per curve are in
/// report.json; unused columns are empty.
inline std::string emit_csv(const Report& r) {
    std::string out = "curve,row,x,y1,y2,y3,y4\n";
    for (const auto& c : r.curves) {
        if (c.columns.size() > 5) throw DimensionError("curve " + c.name + " has more than 5 columns");
        for (std::size_t i = 0; i < c.rows.size(); ++i) {
            out += c.name + "," + std::to_string(i);
            for (std::size_t k = 0; k < 5; ++k) {
                out += ",";
                if (k < c.rows[i].size() && std::isfinite(c.rows[i][k])) out += detail::format_double(c.rows[i][k]);
            }
            out += "\n";
        }
    }
    return out;
}

inline std::string emit_text(const Report& r) {
    std::ostringstream os;
    os << "experiment: " << r.experiment;
    if (!r.name.empty()) os << " (" << r.name << ")";
    os << "\nseed: " << r.seed << "\nbuild: " << r.build << "\nconfig digest: " << r.config_digest
       << "\nverdict: " << r.verdict() << "\n";
    if (!r.checks.empty()) os << "\nchecks:\n";
    for (const auto& c : r.checks) {
        os << "  " << c.verdict << "  " << c.name << "\n";
        for (auto it = c.details.begin(); it != c.details.end(); ++it)
            if (!it.value().is_structured()) {
                std::string v;
                detail::write_json(it.value(), v, 0);
                os << "      " << it.key() << " = " << v << "\n";
            }
    }
    if (!r.results.empty()) {
        os << "\nresults:\n";
        for (auto it = r.results.begin(); it != r.results.end(); ++it) {
            std::string v = it.value().dump();
            if (!it.value().is_structured()) {
                v.clear();
                detail::write_json(it.value(), v, 0);
            }
            os << "  " << it.key() << " = " << v << "\n";
        }
    }
    if (!r.curves.empty()) {
        os << "\ncurves (curves.csv):\n";
        for (const auto& c : r.curves) {
            os << "  " << c.name << ": " << c.rows.size() << " rows [";
            for (std::size_t k = 0; k < c.columns.size(); ++k) os << (k ? ", " : "") << c.columns[k];
            os << "]\n";
        }
    }
    os << "\ntimestamp: " << r.timestamp << "\n";
    return os.str();
}

} // namespace sdlab::runner
