#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eigshape/eigshape.hpp"

namespace es = eigshape;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kLongThreshold = 256;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double r = 1.0;
    double theta = M_PI / 3.0;
    std::string direction = "r";
    double epsilon = 1e-7;
    int mesh_n = 64;
    std::vector<int> cluster{2, 3};
    int k_max = 4;
    std::string output = "json";
    std::string out;
    bool allow_long = false;
    bool require_certified = false;
    std::vector<int> sweep_n{8, 16, 32, 64};

    es::ShapeParam shape() const { return {r, theta}; }

    es::Direction dir() const
    {
        if (direction == "r") {
            return es::Direction::radial();
        }
        if (direction == "theta") {
            return es::Direction::angular();
        }
        throw UsageError("--direction must be r or theta");
    }

    es::Cluster clus() const
    {
        if (cluster.size() != 2) {
            throw UsageError("--cluster takes two indices n,N");
        }
        return {cluster[0], cluster[1]};
    }

    void check_mesh(int n) const
    {
        if (n < 1) {
            throw UsageError("--mesh-n must be positive");
        }
        if (n > kLongThreshold && !allow_long) {
            throw UsageError("mesh sizes above 256 need --allow-long");
        }
    }

    es::Json echo() const
    {
        return es::Json{{"r", r},           {"theta", theta},   {"direction", direction},
                        {"epsilon", epsilon}, {"mesh_n", mesh_n}, {"cluster", cluster},
                        {"k_max", k_max}};
    }
};

void emit(const RunConfig& cfg, const es::Json& report)
{
    std::string text;
    if (cfg.output == "json") {
        text = report.dump(2) + "\n";
    } else if (cfg.output == "csv") {
        text = es::to_csv(report);
    } else {
        text = es::to_text(report);
    }
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
        throw UsageError("cannot open output file " + cfg.out);
    }
    f << text;
}

es::Json cmd_bounds(const RunConfig& cfg)
{
    cfg.check_mesh(cfg.mesh_n);
    if (cfg.k_max < 1) {
        throw UsageError("--k-max must be positive");
    }
    const es::BoundsComputation b = es::compute_bounds(cfg.shape(), cfg.mesh_n, cfg.k_max);
    es::Json rep = es::report_header("bounds", cfg.echo());
    rep["h"] = es::directed_decimal(b.h, es::RoundDir::up);
    rep["eigen_bounds"] = es::to_json(b.bounds);
    rep["discrete_cg"] = es::Json::array();
    rep["discrete_cr"] = es::Json::array();
    for (int i = 0; i < b.cg.eig.size(); ++i) {
        rep["discrete_cg"].push_back(es::to_json(b.cg.eig.enclosure(i)));
        rep["discrete_cr"].push_back(es::to_json(b.cr.eig.enclosure(i)));
    }
    return rep;
}

es::Json cmd_quotients(const RunConfig& cfg, bool& certified)
{
    cfg.check_mesh(cfg.mesh_n);
    const es::QuotientReport q = es::quotient_ranges(cfg.shape(), cfg.dir(), cfg.epsilon, cfg.mesh_n, cfg.clus());
    certified = q.separation_certified && q.cluster_isolated;
    es::Json rep = es::report_header("quotients", cfg.echo());
    rep["result"] = es::to_json(q);
    return rep;
}

es::Json cmd_derivative_range(const RunConfig& cfg)
{
    cfg.check_mesh(cfg.mesh_n);
    const es::DerivativeRangeReport d =
        es::derivative_range_near_multiple(cfg.shape(), cfg.dir(), cfg.mesh_n, cfg.clus());
    es::Json rep = es::report_header("derivative-range", cfg.echo());
    rep["result"] = es::to_json(d);
    return rep;
}

struct PaperTable {
    const char* direction;
    double mu2, mu3;
    double f2_lo, f2_hi, f3_lo, f3_hi;
    double err_m, eta;
    double m11, m12_abs, m22, rotation;
};

constexpr PaperTable kPaper[] = {
    {"r", 84.943, 160.71, 59.425, 110.46, 135.18, 186.23, 25.466, 25.517, 89.1793, 17.4075, 156.4683, 20.1898},
    {"theta", 33.032, 108.79, 12.525, 53.538, 88.287, 129.30, 20.472, 20.506, 53.5043, 33.6434, 88.3205, 16.2295},
};

es::Json cmd_reproduce_tables(const RunConfig& cfg, bool& certified)
{
    cfg.check_mesh(cfg.mesh_n);
    es::Json rep = es::report_header("reproduce-tables", cfg.echo());
    rep["tables"] = es::Json::array();
    certified = true;
    for (const PaperTable& t : kPaper) {
        RunConfig c = cfg;
        c.direction = t.direction;
        const es::QuotientReport q = es::quotient_ranges(c.shape(), c.dir(), c.epsilon, c.mesh_n, c.clus());
        const es::DerivativeRangeReport d = es::derivative_range_near_multiple(c.shape(), c.dir(), c.mesh_n, c.clus());
        certified = certified && q.separation_certified && q.cluster_isolated;
        const auto& f = q.enclosure.quotient_range;
        const auto mid = [](const es::Interval& x) { return x.mid(); };
        const es::IntervalSymMatrix& m = d.matrix.m_hat;
        es::Json entry{
            {"direction", t.direction},
            {"quotients", es::to_json(q)},
            {"derivative_range", es::to_json(d)},
            {"comparison",
             es::Json{{"mu2", es::Json{{"paper", t.mu2}, {"computed", mid(q.enclosure.mu_hat[0])},
                                       {"paper_value_enclosed", f[0].contains(t.mu2)}}},
                      {"mu3", es::Json{{"paper", t.mu3}, {"computed", mid(q.enclosure.mu_hat[1])},
                                       {"paper_value_enclosed", f[1].contains(t.mu3)}}},
                      {"F2", es::Json{{"paper", {t.f2_lo, t.f2_hi}}, {"computed", es::to_json(f[0])},
                                      {"computed_within_paper", es::Interval(t.f2_lo, t.f2_hi).contains(f[0])}}},
                      {"F3", es::Json{{"paper", {t.f3_lo, t.f3_hi}}, {"computed", es::to_json(f[1])},
                                      {"computed_within_paper", es::Interval(t.f3_lo, t.f3_hi).contains(f[1])}}},
                      {"err_M", es::Json{{"paper", t.err_m}, {"computed", q.matrix.err_m.hi()}}},
                      {"eta", es::Json{{"paper", t.eta}, {"computed", q.matrix.eta.hi()}}},
                      {"M_hat", es::Json{{"paper", {t.m11, t.m12_abs, t.m22}},
                                         {"computed", {m(0, 0).mid(), std::abs(m(0, 1).mid()), m(1, 1).mid()}}}},
                      {"rotation_radius",
                       es::Json{{"paper", t.rotation}, {"computed", d.matrix.rotation_radius.hi()}}}}},
        };
        rep["tables"].push_back(entry);
    }
    return rep;
}

std::string cmd_plotdata(const RunConfig& cfg)
{
    std::ostringstream os;
    os << "mesh_n,k,lower,upper,width\n";
    for (int n : cfg.sweep_n) {
        cfg.check_mesh(n);
        const es::EigenBounds b = es::eigenvalue_bounds(cfg.shape(), n, cfg.k_max);
        for (int k = 1; k <= b.k_max(); ++k) {
            os << n << ',' << k << ',' << es::directed_decimal(b.lower(k), es::RoundDir::down) << ','
               << es::directed_decimal(b.upper(k), es::RoundDir::up) << ','
               << es::directed_decimal(b[k].width(), es::RoundDir::up) << '\n';
        }
    }
    return os.str();
}

void add_shape_options(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--r", cfg.r, "length of side OB");
    sub->add_option("--theta", cfg.theta, "angle at O in radians");
    sub->add_option("--mesh-n", cfg.mesh_n, "subdivisions per edge");
    sub->add_option("--output", cfg.output, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--out", cfg.out, "write to this file instead of stdout");
    sub->add_flag("--allow-long", cfg.allow_long, "permit mesh sizes above 256");
}

void add_derivative_options(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--direction", cfg.direction, "r or theta")->check(CLI::IsMember({"r", "theta"}));
    sub->add_option("--cluster", cfg.cluster, "cluster indices n N")->expected(2)->delimiter(',');
    sub->add_flag("--require-certified", cfg.require_certified, "exit 3 unless separation is certified");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Guaranteed eigenvalue bounds and shape-derivative enclosures on triangles"};
    app.require_subcommand(1);
    RunConfig cfg;

    CLI::App* bounds = app.add_subcommand("bounds", "two-sided eigenvalue bounds");
    add_shape_options(bounds, cfg);
    bounds->add_option("--k-max", cfg.k_max, "number of eigenvalues");

    CLI::App* quot = app.add_subcommand("quotients", "difference-quotient ranges over (0, eps]");
    add_shape_options(quot, cfg);
    add_derivative_options(quot, cfg);
    quot->add_option("--epsilon", cfg.epsilon, "segment length");

    CLI::App* range = app.add_subcommand("derivative-range", "directional-derivative range near a multiple eigenvalue");
    add_shape_options(range, cfg);
    add_derivative_options(range, cfg);

    CLI::App* tables = app.add_subcommand("reproduce-tables", "recompute both difference-quotient tables");
    add_shape_options(tables, cfg);
    tables->add_option("--epsilon", cfg.epsilon, "segment length");
    tables->add_option("--cluster", cfg.cluster, "cluster indices n N")->expected(2)->delimiter(',');
    tables->add_flag("--require-certified", cfg.require_certified, "exit 3 unless separation is certified");

    CLI::App* plot = app.add_subcommand("plotdata", "CSV of bound widths against mesh size");
    plot->add_option("--r", cfg.r, "length of side OB");
    plot->add_option("--theta", cfg.theta, "angle at O in radians");
    plot->add_option("--k-max", cfg.k_max, "number of eigenvalues");
    plot->add_option("--sweep-n", cfg.sweep_n, "mesh sizes")->delimiter(',');
    plot->add_option("--out", cfg.out, "write to this file instead of stdout");
    plot->add_flag("--allow-long", cfg.allow_long, "permit mesh sizes above 256");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        (void)cfg.shape();
        if (!(cfg.epsilon > 0)) {
            throw UsageError("--epsilon must be positive");
        }
        bool certified = true;
        if (bounds->parsed()) {
            emit(cfg, cmd_bounds(cfg));
        } else if (quot->parsed()) {
            emit(cfg, cmd_quotients(cfg, certified));
        } else if (range->parsed()) {
            emit(cfg, cmd_derivative_range(cfg));
        } else if (tables->parsed()) {
            emit(cfg, cmd_reproduce_tables(cfg, certified));
        } else if (plot->parsed()) {
            const std::string csv = cmd_plotdata(cfg);
            if (cfg.out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream(cfg.out, std::ios::binary) << csv;
            }
        }
        if (cfg.require_certified && !certified) {
            std::cerr << "separation not certified\n";
            return kExitNumeric;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const es::DegenerateShape& e) {
        std::cerr << "DegenerateShape: " << e.what() << '\n';
        return kExitUsage;
    } catch (const es::Error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
