#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "interval.hpp"
#include "mesh.hpp"
#include "shape_derivative.hpp"
#include "subspace_error.hpp"
#include "verified_bounds.hpp"

namespace eigshape {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "eigshape-report/1";

enum class RoundDir { down, up };

/// Decimal string with 17 significant digits, rounded toward -inf or +inf.
inline std::string directed_decimal(double x, RoundDir dir)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (x == 0) {
        return "0";
    }
    // glibc prints the exact binary value; 766 fractional digits cover every double.
    std::vector<char> buf(1024);
    std::snprintf(buf.data(), buf.size(), "%.766e", std::abs(x));
    const std::string full(buf.data());
    const std::size_t epos = full.find('e');
    std::string digits = full.substr(0, 1) + full.substr(2, epos - 2);
    int exponent = std::stoi(full.substr(epos + 1));
    constexpr std::size_t kSig = 17;
    const bool exact = digits.find_first_not_of('0', kSig) == std::string::npos;
    digits.resize(kSig);
    // Magnitude rounds up when the target direction points away from zero.
    const bool away = (x > 0) == (dir == RoundDir::up);
    if (!exact && away) {
        int i = static_cast<int>(kSig) - 1;
        while (i >= 0 && digits[static_cast<std::size_t>(i)] == '9') {
            digits[static_cast<std::size_t>(i)] = '0';
            --i;
        }
        if (i < 0) {
            digits.insert(digits.begin(), '1');
            digits.pop_back();
            ++exponent;
        } else {
            ++digits[static_cast<std::size_t>(i)];
        }
    }
    const std::size_t last = digits.find_last_not_of('0');
    std::string mant = digits.substr(0, 1);
    if (last != std::string::npos && last > 0) {
        mant += "." + digits.substr(1, last);
    }
    std::string out = (x < 0 ? "-" : "") + mant;
    if (exponent != 0) {
        out += "e" + std::to_string(exponent);
    }
    return out;
}

inline Json to_json(const Interval& x)
{
    return Json{{"lo", directed_decimal(x.lo(), RoundDir::down)},
                {"hi", directed_decimal(x.hi(), RoundDir::up)}};
}

inline Json to_json(const IntervalSymMatrix& m)
{
    Json rows = Json::array();
    for (int i = 0; i < m.size(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.size(); ++j) {
            row.push_back(to_json(m(i, j)));
        }
        rows.push_back(row);
    }
    return rows;
}

inline Json to_json(const ShapeParam& p)
{
    return Json{{"r", directed_decimal(p.r(), RoundDir::down)},
                {"theta", directed_decimal(p.theta(), RoundDir::down)}};
}

inline Json to_json(const EigenBounds& b)
{
    Json out = Json::array();
    for (int k = 1; k <= b.k_max(); ++k) {
        Json e = to_json(b[k]);
        e["k"] = k;
        out.push_back(e);
    }
    return Json{{"provenance", to_string(b.provenance())}, {"bounds", out}};
}

inline Json to_json(const SubspaceErrorBounds& s)
{
    return Json{{"delta_b", to_json(s.delta_b)},       {"delta_a", to_json(s.delta_a)},
                {"bar_delta_a", to_json(s.bar_delta_a)}, {"bar_delta_b", to_json(s.bar_delta_b)},
                {"err_star_a", to_json(s.err_star_a)},   {"err_star_b", to_json(s.err_star_b)},
                {"tau", to_json(s.tau)},                 {"tau_h", to_json(s.tau_h)},
                {"xi", to_json(s.xi)},                   {"beta", to_json(s.beta_amp)},
                {"delta_b_method", s.projection_bound ? "projection" : "first_cluster_quotient"}};
}

inline Json to_json(const DerivativeMatrix& m)
{
    return Json{{"m_hat", to_json(m.m_hat)},     {"p_norm", to_json(m.p_norm)},
                {"err_M", to_json(m.err_m)},     {"err_N", to_json(m.err_n)},
                {"eta", to_json(m.eta)},         {"rotation_radius", to_json(m.rotation_radius)}};
}

inline Json interval_list(const std::vector<Interval>& v)
{
    Json out = Json::array();
    for (const Interval& x : v) {
        out.push_back(to_json(x));
    }
    return out;
}

inline Json assumptions()
{
    return Json::array({
        "projection constants C_h <= 0.493 h (CG) and 0.1893 h (CR) for the uniform triangle refinement",
        "discrete eigenpairs come from a floating-point solver; their enclosures are residual inflations "
        "(radius 10 ||K x - lambda M x|| / sqrt(lambda_min(M)) + 4 eps lambda), not a verified solve",
        "matrix entries F_P(u_i, u_j) are enclosed with an a priori rounding-error radius of the floating-point dot products",
        "quantities downstream of the discrete eigensolve inherit the residual-inflation assumption",
    });
}

inline Json report_header(const std::string& command, const Json& config)
{
    return Json{{"schema", kReportSchema}, {"command", command}, {"config", config}, {"assumptions", assumptions()}};
}

inline Json to_json(const QuotientReport& q)
{
    Json ranges = Json::array();
    for (std::size_t i = 0; i < q.enclosure.quotient_range.size(); ++i) {
        ranges.push_back(Json{{"index", q.enclosure.cluster.first + static_cast<int>(i)},
                              {"mu_hat", to_json(q.enclosure.mu_hat[i])},
                              {"range", to_json(q.enclosure.quotient_range[i])}});
    }
    return Json{{"p", to_json(q.p)},
                {"endpoint", to_json(q.endpoint)},
                {"direction", q.enclosure.direction.name()},
                {"epsilon", directed_decimal(q.enclosure.epsilon, RoundDir::up)},
                {"mesh_n", q.mesh_n},
                {"h", directed_decimal(q.h, RoundDir::up)},
                {"endpoint_bounds", to_json(q.endpoint_bounds)},
                {"segment_bounds", to_json(q.segment_bounds)},
                {"discrete_cg", interval_list(q.discrete_cg)},
                {"symmetry_adapted", q.symmetry_adapted},
                {"lambda_hat_top", to_json(q.lambda_hat_top)},
                {"subspace", to_json(q.subspace)},
                {"matrix", to_json(q.matrix)},
                {"quotients", ranges},
                {"certified", Json{{"linear_independence", q.linear_independence},
                                   {"cluster_isolated", q.cluster_isolated},
                                   {"separation", q.separation_certified}}},
                {"unverified", q.failure.empty() ? Json(nullptr) : Json(q.failure)}};
}

inline Json to_json(const DerivativeRangeReport& d)
{
    return Json{{"p", to_json(d.p)},
                {"mesh_n", d.mesh_n},
                {"h", directed_decimal(d.h, RoundDir::up)},
                {"bounds", to_json(d.bounds)},
                {"symmetry_adapted", d.symmetry_adapted},
                {"lambda_hat_top", to_json(d.lambda_hat_top)},
                {"subspace", to_json(d.subspace)},
                {"matrix", to_json(d.matrix)},
                {"derivative_values", interval_list(d.value_range)},
                {"unverified", d.failure.empty() ? Json(nullptr) : Json(d.failure)}};
}

inline Json to_json(const SimpleDerivativeReport& s)
{
    return Json{{"index", s.index},
                {"value", to_json(s.value)},
                {"eta", to_json(s.eta)},
                {"range", to_json(s.range)},
                {"bounds", to_json(s.bounds)}};
}

inline Json mesh_dump(const Mesh& mesh)
{
    Json nodes = Json::array();
    for (const Point2& p : mesh.nodes()) {
        nodes.push_back(Json::array({p.x, p.y}));
    }
    Json elements = Json::array();
    for (const auto& e : mesh.elements()) {
        elements.push_back(Json::array({e[0], e[1], e[2]}));
    }
    return Json{{"nodes", nodes}, {"elements", elements}};
}

namespace detail {

inline void flatten(const Json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& out)
{
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            flatten(v, path.empty() ? k : path + "." + k, out);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], path + "[" + std::to_string(i) + "]", out);
        }
    } else if (j.is_string()) {
        out.emplace_back(path, j.get<std::string>());
    } else {
        out.emplace_back(path, j.dump());
    }
}

} // namespace detail

/// One "key = value" line per leaf.
inline std::string to_text(const Json& j)
{
    std::vector<std::pair<std::string, std::string>> rows;
    detail::flatten(j, "", rows);
    std::ostringstream os;
    for (const auto& [k, v] : rows) {
        os << k << " = " << v << '\n';
    }
    return os.str();
}

/// Two-column CSV (key,value) of every leaf.
inline std::string to_csv(const Json& j)
{
    std::vector<std::pair<std::string, std::string>> rows;
    detail::flatten(j, "", rows);
    std::ostringstream os;
    os << "key,value\n";
    for (const auto& [k, v] : rows) {
        os << '"' << k << "\",\"" << v << "\"\n";
    }
    return os.str();
}

} // namespace eigshape
