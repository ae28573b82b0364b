// expanse: simulate registered flows and probe expansivity-type properties
// at sampling scale.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>

#include "expanse/flow_zoo.hpp"
#include "expanse/matcher.hpp"
#include "expanse/property_lab.hpp"
#include "expanse/report.hpp"
#include "expanse/rescaled_metric.hpp"

namespace ex = expanse;

namespace {

ex::Vec parse_vec(const std::string& s) {
    std::vector<double> vals;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    if (vals.size() == 2) return ex::Vec(vals[0], vals[1]);
    if (vals.size() == 3) return ex::Vec(vals[0], vals[1], vals[2]);
    throw ex::DomainError("expected 2 or 3 comma-separated coordinates, got '" + s + "'");
}

struct CheckOptions {
    std::string config_path;
    double delta = -1.0;
    double delta_star = -1.0;
    double delta_sep = -1.0;
    double horizon = -1.0;
    double time = -1.0;  // xi displacement time
    double r2 = -1.0;
    int mesh = -1;
    int samples = -1;

    ex::ToolConfig cfg;
    void load_config() {
        if (!config_path.empty()) cfg = ex::ToolConfig::load(config_path);
    }
    double eff_delta() const { return delta > 0 ? delta : cfg.get_double("delta", 0.3); }
    double eff_delta_star() const {
        return delta_star > 0 ? delta_star : cfg.get_double("delta_star", 1.0);
    }
    double eff_delta_sep() const {
        return delta_sep > 0 ? delta_sep : cfg.get_double("delta_sep", 0.05);
    }
    double eff_horizon(const ex::FlowInstance& f) const {
        return horizon > 0 ? horizon : cfg.get_double("horizon", f.plan.default_horizon);
    }
    double eff_time() const { return time > 0 ? time : cfg.get_double("time", 1.0); }
    double eff_r2() const { return r2 > 0 ? r2 : cfg.get_double("r2", 0.5); }
    int eff_mesh(const ex::FlowInstance& f) const {
        if (mesh > 0) return mesh;
        const int fallback = f.space.kind() == ex::SpaceKind::UnitSphere2 ? 20000 : 40000;
        return cfg.get_int("mesh", fallback);
    }
    int eff_samples() const { return samples > 0 ? samples : cfg.get_int("samples", 1000); }

    nlohmann::ordered_json environment(const ex::FlowInstance& f) const {
        return {{"config", config_path},         {"delta", eff_delta()},
                {"delta_star", eff_delta_star()}, {"delta_sep", eff_delta_sep()},
                {"horizon", eff_horizon(f)},      {"time", eff_time()},
                {"r2", eff_r2()},                 {"mesh", eff_mesh(f)},
                {"samples", eff_samples()}};
    }
};

ex::PropertyVerdict run_check(const ex::FlowInstance& flow, const std::string& prop,
                              const CheckOptions& o, std::uint64_t seed) {
    using ex::Verdict;
    const int mesh_target = o.eff_mesh(flow);

    if (prop == "separating")
        return ex::separating_scan(flow, o.eff_horizon(flow), o.eff_delta_sep());

    if (prop == "kh") {
        const auto fix = ex::find_fixed_points(flow, mesh_target);
        const auto sep = ex::separating_scan(flow, o.eff_horizon(flow), o.eff_delta_sep());
        return ex::kh_classify(flow, sep, fix);
    }

    if (prop == "efficiency") {
        ex::EfficiencyParams params;
        const bool star_explicit = o.delta_star > 0 || o.cfg.values.count("delta_star");
        std::string star_source = "explicit";
        if (star_explicit) {
            params.delta_star = o.eff_delta_star();
        } else {
            // prefer the arc cap the constants pipeline derives; cap the
            // fallback by the space diameter so wrap-around arcs are not
            // mistaken for tight ones
            params.delta_star = -1.0;
            try {
                const auto ds = ex::delta_star(flow, mesh_target, o.eff_r2());
                if (std::isfinite(ds.value)) {
                    params.delta_star = ds.value;
                    star_source = "pipeline";
                }
            } catch (const ex::PipelineUnavailableError&) {
            }
            if (params.delta_star <= 0.0) {
                params.delta_star = std::min(1.0, 0.45 * flow.space.diameter_hint());
                star_source = "diameter_cap";
            }
        }
        const bool delta_explicit = o.delta > 0 || o.cfg.values.count("delta");
        params.delta = delta_explicit ? o.eff_delta() : 0.3 * params.delta_star;
        if (delta_explicit && params.delta >= params.delta_star)
            throw ex::DomainError("--delta must stay below delta_star (" +
                                  std::to_string(params.delta_star) +
                                  ", source: " + star_source +
                                  "); pass --delta-star explicitly");
        auto v = ex::efficiency_scan(flow, flow.plan.regular_points, params);
        v.parameters["delta_star_source"] = star_source;
        return v;
    }

    if (prop == "curvature") {
        ex::PropertyVerdict v;
        v.property = "curvature";
        v.parameters = {{"tolerance", 1e-4}, {"tau", 1e-3}};
        double worst = 0.0;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const ex::Vec& p : flow.plan.regular_points) {
            if (flow.field.value(p).norm() <= 1e-8) continue;
            const double kf = ex::curvature(flow.field, p);
            const double ko = ex::osculating_curvature(flow, p, 1e-3);
            const double err = std::abs(kf - ko) / std::max({kf, ko, 1e-2});
            worst = std::max(worst, err);
            rows.push_back({{"p", ex::vec_json(p)}, {"formula", kf}, {"osculating", ko}});
        }
        if (rows.empty()) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "no regular sample points"}};
            return v;
        }
        v.verdict = worst <= 1e-4 ? Verdict::HoldsAtScale : Verdict::Violated;
        v.witness = {{"max_relative_error", worst}, {"rows", rows}};
        return v;
    }

    if (prop == "constants") {
        ex::PropertyVerdict v;
        v.property = "constants";
        v.parameters = {{"mesh", mesh_target}};
        const auto fix = ex::find_fixed_points(flow, mesh_target);
        if (fix.whole_space_fixed || fix.points.empty()) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", fix.whole_space_fixed ? "every point fixed"
                                                          : "no fixed points"}};
            return v;
        }
        const auto sb = ex::constants_BC(flow, fix.locations(), mesh_target);
        bool invertible = true;
        for (const auto& fp : fix.points) invertible &= fp.jacobian_invertible;
        v.witness = {{"B", sb.B},
                     {"C", sb.c_diverged ? -1.0 : sb.C},
                     {"C_coarse", sb.c_coarse},
                     {"C_fine", sb.c_fine},
                     {"diverged", sb.c_diverged},
                     {"all_fixed_points_invertible", invertible}};
        v.verdict = (sb.c_diverged || !invertible) ? Verdict::Inconclusive
                                                   : Verdict::HoldsAtScale;
        return v;
    }

    if (prop == "delta-star") {
        ex::PropertyVerdict v;
        v.property = "delta-star";
        v.parameters = {{"mesh", mesh_target}, {"r2", o.eff_r2()}};
        try {
            const auto ds = ex::delta_star(flow, mesh_target, o.eff_r2());
            v.verdict = Verdict::HoldsAtScale;
            v.witness = {{"delta_star", std::isfinite(ds.value) ? ds.value : -1.0},
                         {"unbounded", !std::isfinite(ds.value)},
                         {"via_curvature_only", ds.via_curvature_only},
                         {"term_r2_half", std::isfinite(ds.term_r2_half) ? ds.term_r2_half : -1.0},
                         {"term_speed_bound",
                          std::isfinite(ds.term_speed_bound) ? ds.term_speed_bound : -1.0},
                         {"term_min_inv_kappa",
                          std::isfinite(ds.term_min_inv_kappa) ? ds.term_min_inv_kappa : -1.0}};
        } catch (const ex::PipelineUnavailableError& e) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "pipeline unavailable"}, {"detail", e.what()}};
        }
        return v;
    }

    if (prop == "rescaled-ratio") {
        const double h = o.eff_horizon(flow);
        return ex::rescaled_ratio_check(flow, std::min(10.0, h), h);
    }

    if (prop == "ball-time") {
        ex::PropertyVerdict v;
        v.property = "ball-time";
        const double delta = o.delta > 0 ? o.delta : 0.1;
        v.parameters = {{"delta", delta}, {"starts", flow.plan.regular_points.size()}};
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        Verdict agg = Verdict::HoldsAtScale;
        for (const ex::Vec& p : flow.plan.regular_points) {
            if (flow.field.value(p).norm() <= 1e-12) continue;
            const auto one = ex::ball_time_scan(flow, p, delta);
            rows.push_back(ex::verdict_to_json(one, 0.0));
            if (one.verdict == Verdict::Violated) {
                v.parameters = one.parameters;
                v.verdict = Verdict::Violated;
                v.witness = one.witness;
                return v;
            }
            if (one.verdict == Verdict::Inconclusive) agg = Verdict::Inconclusive;
        }
        if (rows.empty()) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "no regular starts"}};
            return v;
        }
        v.verdict = agg;
        v.witness = {{"scans", rows}};
        return v;
    }

    if (prop == "beta0") {
        ex::PropertyVerdict v;
        v.property = "beta0";
        const double h = o.eff_horizon(flow);
        v.parameters = {{"horizon", h}, {"samples", flow.plan.regular_points.size()}};
        if (flow.plan.regular_points.empty()) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "no regular starts"}};
            return v;
        }
        const auto b = ex::beta0_estimate(flow, flow.plan.regular_points, h);
        if (b) {
            v.verdict = Verdict::HoldsAtScale;
            v.witness = {{"beta0", *b}};
        } else {
            // report the sample whose full-orbit diameter collapsed
            const ex::Vec worst = flow.plan.regular_points.back();
            v.verdict = Verdict::Violated;
            v.witness = {{"reason", "orbit diameters fall below the floor"},
                         {"sample", ex::vec_json(worst)}};
        }
        return v;
    }

    if (prop == "xi") {
        ex::PropertyVerdict v;
        v.property = "xi";
        const double T = o.eff_time();
        const double floor = o.cfg.get_double("xi_floor", 1e-4);
        v.parameters = {{"T", T}, {"mesh", mesh_target}, {"xi_floor", floor}};
        const auto mesh = ex::mesh_points(flow.space, mesh_target);
        const auto scan = ex::xi_scan(flow, T, mesh);
        if (!scan.any_regular) {
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "no regular mesh points"}};
            return v;
        }
        v.verdict = scan.xi >= floor ? Verdict::HoldsAtScale : Verdict::Violated;
        v.witness = {{"xi", scan.xi}, {"argmin", ex::vec_json(scan.argmin)}};
        return v;
    }

    if (prop == "speed-profile") return ex::speed_profile_check(flow, mesh_target);

    if (prop == "isometry") return ex::cylinder_isometry_check(o.eff_samples(), seed);

    if (prop == "k-star-evidence")
        return ex::k_star_evidence(flow, std::min(o.eff_horizon(flow), 30.0), 0.05);

    if (prop == "rescaled-near-miss")
        return ex::rescaled_near_miss(flow, std::min(o.eff_horizon(flow), 30.0), 0.05);

    throw ex::DomainError("unknown property '" + prop + "'");
}

const std::vector<std::string> kReportProps = {
    "separating",     "kh",        "efficiency",    "curvature",
    "constants",      "delta-star", "rescaled-ratio", "ball-time",
    "beta0",          "xi",        "speed-profile", "isometry",
    "k-star-evidence", "rescaled-near-miss"};

int cmd_report(const std::string& flow_name, const std::string& out_dir,
               CheckOptions& o) {
    const auto& flow = ex::zoo::get(flow_name);
    std::filesystem::create_directories(out_dir);

    ex::Report rep;
    rep.flow = flow_name;
    rep.seed = ex::seed_from_env();
    rep.environment = o.environment(flow);

    // Checks about speed bounds near fixed points have nothing to measure
    // when the flow has none; skip them rather than diluting the verdict.
    std::vector<std::string> props = kReportProps;
    const auto fscan = ex::find_fixed_points(flow, o.eff_mesh(flow));
    if (fscan.points.empty() && !fscan.whole_space_fixed) {
        std::erase(props, "constants");
        std::erase(props, "speed-profile");
        rep.environment["skipped"] = {"constants", "speed-profile"};
        rep.environment["skipped_reason"] = "no fixed points";
    }

    for (const std::string& prop : props) {
        const auto t0 = std::chrono::steady_clock::now();
        ex::PropertyVerdict v;
        try {
            v = run_check(flow, prop, o, rep.seed);
        } catch (const std::exception& e) {
            v.property = prop;
            v.verdict = ex::Verdict::Inconclusive;
            v.witness = {{"reason", "check failed"}, {"detail", e.what()}};
        }
        const auto t1 = std::chrono::steady_clock::now();
        rep.checks.push_back(v);
        rep.millis.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        std::cout << prop << ": " << ex::verdict_name(v.verdict) << "\n";
        ex::render_verdict_svg(v, out_dir + "/" + prop + ".svg");
    }

    // consistency flag: matching evidence + efficiency must not coexist
    // with a rescaled near miss
    {
        const ex::PropertyVerdict* kstar = nullptr;
        const ex::PropertyVerdict* resc = nullptr;
        const ex::PropertyVerdict* eff = nullptr;
        for (const auto& c : rep.checks) {
            if (c.property == "k-star-evidence") kstar = &c;
            if (c.property == "rescaled-near-miss") resc = &c;
            if (c.property == "efficiency") eff = &c;
        }
        ex::PropertyVerdict flag;
        flag.property = "consistency";
        flag.parameters = {{"components", "k-star-evidence, efficiency, rescaled-near-miss"}};
        const bool fired =
            kstar && resc && eff && ex::forbidden_conjunction(*kstar, *eff, *resc);
        flag.verdict = fired ? ex::Verdict::Violated : ex::Verdict::HoldsAtScale;
        flag.witness = {{"fired", fired}};
        rep.checks.push_back(flag);
        rep.millis.push_back(0.0);
        std::cout << "consistency: " << ex::verdict_name(flag.verdict) << "\n";
    }

    if (!flow.plan.regular_points.empty()) {
        ex::IntegrateOptions io;
        io.sample_dt = 1e-2;
        const auto orbit = ex::integrate_orbit(flow, flow.plan.regular_points.front(),
                                               0.0, flow.plan.default_horizon, io);
        ex::render_orbit_svg(orbit, out_dir + "/orbit.svg");
    }
    ex::write_report(rep, out_dir + "/report.json");
    return ex::aggregate_exit_code(rep.checks);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expanse: flow simulation and expansivity property checks"};
    app.require_subcommand(1);

    // zoo
    auto* zoo_cmd = app.add_subcommand("zoo", "registered flows");
    bool zoo_list = false;
    zoo_cmd->add_subcommand("list", "list registered flow names")
        ->callback([&] { zoo_list = true; });

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate one orbit and write a CSV");
    std::string sim_flow, sim_x0, sim_out;
    double sim_t0 = 0.0, sim_t1 = 10.0, sim_dt = 0.0;
    sim->add_option("--flow", sim_flow, "flow name")->required();
    sim->add_option("--x0", sim_x0, "initial point a,b[,c]")->required();
    sim->add_option("--t0", sim_t0, "start time")->required();
    sim->add_option("--t1", sim_t1, "end time")->required();
    sim->add_option("--dt", sim_dt, "uniform output step (0: adaptive nodes)");
    sim->add_option("--out", sim_out, "output CSV path")->required();

    // match
    auto* match = app.add_subcommand("match", "minimal matching threshold for two orbits");
    std::string m_flow, m_x, m_y, m_mode = "uniform", m_json;
    double m_horizon = 10.0, m_dt = 0.05;
    match->add_option("--flow", m_flow)->required();
    match->add_option("--x", m_x, "first start a,b[,c]")->required();
    match->add_option("--y", m_y, "second start a,b[,c]")->required();
    match->add_option("--horizon", m_horizon, "two-sided time horizon");
    match->add_option("--dt", m_dt, "sample step");
    match->add_option("--mode", m_mode)->check(CLI::IsMember({"uniform", "rescaled"}));
    match->add_option("--json", m_json, "write the result as JSON");

    // check
    auto* check = app.add_subcommand("check", "run one property check");
    std::string c_prop, c_flow, c_json, c_plot;
    CheckOptions copts;
    check->add_option("prop", c_prop, "property name")
        ->required()
        ->check(CLI::IsMember({"separating", "kh", "efficiency", "curvature", "constants",
                               "delta-star", "rescaled-ratio", "ball-time", "beta0", "xi",
                               "speed-profile", "isometry", "k-star-evidence",
                               "rescaled-near-miss"}));
    check->add_option("--flow", c_flow)->required();
    check->add_option("--delta", copts.delta);
    check->add_option("--delta-star", copts.delta_star);
    check->add_option("--delta-sep", copts.delta_sep);
    check->add_option("--horizon", copts.horizon);
    check->add_option("--time", copts.time, "displacement time for xi");
    check->add_option("--r2", copts.r2, "isolation radius for delta-star");
    check->add_option("--mesh", copts.mesh);
    check->add_option("--samples", copts.samples);
    check->add_option("--config", copts.config_path, "key=value defaults file");
    check->add_option("--json", c_json, "write a one-check report");
    check->add_option("--plot", c_plot, "write a verdict SVG");

    // report
    auto* rep = app.add_subcommand("report", "run the full check suite");
    std::string r_flow, r_out;
    bool r_all = false;
    CheckOptions ropts;
    rep->add_option("--flow", r_flow)->required();
    rep->add_flag("--all", r_all, "run every check");
    rep->add_option("--out", r_out, "output directory")->required();
    rep->add_option("--config", ropts.config_path);
    rep->add_option("--mesh", ropts.mesh);
    rep->add_option("--horizon", ropts.horizon);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (zoo_cmd->parsed()) {
            if (!zoo_list) {
                std::cerr << "usage: expanse zoo list\n";
                return 1;
            }
            for (const auto& n : ex::zoo::list()) std::cout << n << "\n";
            return 0;
        }

        if (sim->parsed()) {
            const auto& flow = ex::zoo::get(sim_flow);
            ex::IntegrateOptions o;
            if (sim_dt > 0) o.sample_dt = sim_dt;
            const auto seg =
                ex::integrate_orbit(flow, parse_vec(sim_x0), sim_t0, sim_t1, o);
            ex::write_orbit_csv(seg, sim_out);
            std::cout << "wrote " << seg.size() << " samples to " << sim_out;
            if (seg.stalled) std::cout << " (stalled near a fixed point)";
            if (seg.exited_domain) std::cout << " (left the region)";
            std::cout << "\n";
            return 0;
        }

        if (match->parsed()) {
            const auto& flow = ex::zoo::get(m_flow);
            const ex::MatchMode mode =
                m_mode == "uniform" ? ex::MatchMode::Uniform : ex::MatchMode::Rescaled;
            const auto r = ex::min_match_delta_two_sided(flow, parse_vec(m_x),
                                                         parse_vec(m_y), m_horizon, m_dt,
                                                         mode);
            std::cout << "min_delta = " << (r.feasible ? r.min_delta : -1.0)
                      << " feasible = " << (r.feasible ? "yes" : "no") << "\n";
            if (!m_json.empty()) {
                nlohmann::ordered_json cj = nlohmann::ordered_json::array();
                for (const auto& [i, j] : r.coupling.steps) cj.push_back({i, j});
                nlohmann::ordered_json out = {
                    {"flow", m_flow},        {"x", m_x},
                    {"y", m_y},              {"horizon", m_horizon},
                    {"dt", m_dt},            {"mode", m_mode},
                    {"min_delta", r.feasible ? r.min_delta : -1.0},
                    {"feasible", r.feasible}, {"coupling", cj}};
                std::ofstream f(m_json);
                if (!f) throw ex::DomainError("cannot write " + m_json);
                f << out.dump(2) << "\n";
            }
            return 0;
        }

        if (check->parsed()) {
            copts.load_config();
            const auto& flow = ex::zoo::get(c_flow);
            const std::uint64_t seed = ex::seed_from_env();
            const auto t0 = std::chrono::steady_clock::now();
            const auto v = run_check(flow, c_prop, copts, seed);
            const auto t1 = std::chrono::steady_clock::now();
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            std::cout << v.property << ": " << ex::verdict_name(v.verdict) << "\n";
            if (!c_json.empty()) {
                ex::Report one;
                one.flow = c_flow;
                one.seed = seed;
                one.environment = copts.environment(flow);
                one.checks.push_back(v);
                one.millis.push_back(ms);
                ex::write_report(one, c_json);
            }
            if (!c_plot.empty()) ex::render_verdict_svg(v, c_plot);
            return ex::aggregate_exit_code({v});
        }

        if (rep->parsed()) {
            if (!r_all) {
                std::cerr << "report requires --all\n";
                return 1;
            }
            ropts.load_config();
            return cmd_report(r_flow, r_out, ropts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
