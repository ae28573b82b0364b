#include "expanse/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace expanse {

std::uint64_t seed_from_env() {
    if (const char* s = std::getenv("EXPANSE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0') return v;
    }
    return kDefaultSeed;
}

nlohmann::ordered_json verdict_to_json(const PropertyVerdict& v, double millis) {
    return {{"property", v.property},
            {"verdict", verdict_name(v.verdict)},
            {"witness", v.witness},
            {"parameters", v.parameters},
            {"millis", millis}};
}

PropertyVerdict verdict_from_json(const nlohmann::ordered_json& j) {
    PropertyVerdict v;
    v.property = j.at("property").get<std::string>();
    const std::string name = j.at("verdict").get<std::string>();
    if (name == "holds_at_scale")
        v.verdict = Verdict::HoldsAtScale;
    else if (name == "violated")
        v.verdict = Verdict::Violated;
    else
        v.verdict = Verdict::Inconclusive;
    v.witness = j.at("witness");
    v.parameters = j.at("parameters");
    return v;
}

nlohmann::ordered_json report_to_json(const Report& r) {
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.checks.size(); ++i)
        checks.push_back(verdict_to_json(r.checks[i], i < r.millis.size() ? r.millis[i] : 0.0));
    return {{"version", r.version},
            {"flow", r.flow},
            {"seed", r.seed},
            {"environment", r.environment},
            {"checks", checks}};
}

void write_report(const Report& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write report to " + path);
    out << report_to_json(r).dump(2) << "\n";
    if (!out) throw DomainError("I/O error while writing " + path);
}

int aggregate_exit_code(const std::vector<PropertyVerdict>& checks) {
    bool violated = false, inconclusive = false;
    for (const auto& c : checks) {
        violated |= c.verdict == Verdict::Violated;
        inconclusive |= c.verdict == Verdict::Inconclusive;
    }
    if (violated) return 2;
    if (inconclusive) return 3;
    return 0;
}

// ---------------------------------------------------------------------------
// Orbit CSV
// ---------------------------------------------------------------------------

namespace {

void append_g17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::string orbit_csv_string(const OrbitSegment& seg) {
    const int d = seg.space.dim();
    std::string out = "t";
    for (int i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= d; ++i) out += ",v" + std::to_string(i);
    out += "\n";
    for (int k = 0; k < seg.size(); ++k) {
        append_g17(out, seg.times[static_cast<std::size_t>(k)]);
        for (int i = 0; i < d; ++i) {
            out += ',';
            append_g17(out, seg.points[static_cast<std::size_t>(k)][i]);
        }
        for (int i = 0; i < d; ++i) {
            out += ',';
            append_g17(out, seg.velocities[static_cast<std::size_t>(k)][i]);
        }
        out += '\n';
    }
    return out;
}

void write_orbit_csv(const OrbitSegment& seg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write orbit CSV to " + path);
    out << orbit_csv_string(seg);
    if (!out) throw DomainError("I/O error while writing " + path);
}

OrbitSegment read_orbit_csv(const std::string& path, const Space& space,
                            const std::string& flow_id) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read orbit CSV " + path);
    OrbitSegment seg;
    seg.space = space;
    seg.flow_id = flow_id;
    const int d = space.dim();
    std::string line;
    if (!std::getline(in, line)) throw DomainError("empty orbit CSV " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<int>(vals.size()) != 1 + 2 * d)
            throw DomainError("malformed orbit CSV row: " + line);
        seg.times.push_back(vals[0]);
        Vec p = Vec::zero(d), v = Vec::zero(d);
        for (int i = 0; i < d; ++i) {
            p[i] = vals[static_cast<std::size_t>(1 + i)];
            v[i] = vals[static_cast<std::size_t>(1 + d + i)];
        }
        seg.points.push_back(p);
        seg.velocities.push_back(v);
    }
    return seg;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

void append_g6(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    out += buf;
}

struct Box {
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
};

std::string svg_polyline(const std::vector<Vec>& pts, const Box& b, int w, int h) {
    std::string s = "<polyline fill=\"none\" stroke=\"#1f3b70\" stroke-width=\"1\" points=\"";
    const double sx = w / (b.xhi - b.xlo), sy = h / (b.yhi - b.ylo);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        append_g6(s, (pts[i][0] - b.xlo) * sx);
        s += ',';
        append_g6(s, h - (pts[i][1] - b.ylo) * sy);
    }
    s += "\"/>\n";
    return s;
}

}  // namespace

std::string orbit_svg_string(const OrbitSegment& seg) {
    const int w = 640, h = 640;
    Box b;
    if (seg.size() > 0) {
        b = {seg.points[0][0], seg.points[0][0], seg.points[0][1], seg.points[0][1]};
        for (const Vec& p : seg.points) {
            b.xlo = std::min(b.xlo, p[0]);
            b.xhi = std::max(b.xhi, p[0]);
            b.ylo = std::min(b.ylo, p[1]);
            b.yhi = std::max(b.yhi, p[1]);
        }
    }
    const double padx = std::max(1e-6, 0.05 * (b.xhi - b.xlo));
    const double pady = std::max(1e-6, 0.05 * (b.yhi - b.ylo));
    b.xlo -= padx;
    b.xhi += padx;
    b.ylo -= pady;
    b.yhi += pady;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
    s += "<title>orbit " + seg.flow_id + " (xy projection)</title>\n";
    s += svg_polyline(seg.points, b, w, h);
    s += "</svg>\n";
    return s;
}

void render_orbit_svg(const OrbitSegment& seg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write SVG to " + path);
    out << orbit_svg_string(seg);
    if (!out) throw DomainError("I/O error while writing " + path);
}

std::string verdict_svg_string(const PropertyVerdict& v) {
    const int w = 640, h = 200;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
    const char* color = v.verdict == Verdict::HoldsAtScale ? "#2e7d32"
                        : v.verdict == Verdict::Violated   ? "#c62828"
                                                           : "#f9a825";
    s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) +
         "\" height=\"40\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"10\" y=\"26\" font-family=\"monospace\" font-size=\"16\" "
         "fill=\"white\">" +
         v.property + ": " + verdict_name(v.verdict) + "</text>\n";
    // witness annotation, line-wrapped
    const std::string wtxt = v.witness.dump();
    int y = 70;
    for (std::size_t off = 0; off < wtxt.size() && y < h - 10; off += 70, y += 20) {
        std::string chunk = wtxt.substr(off, 70);
        std::string esc;
        for (const char c : chunk) {
            if (c == '<') esc += "&lt;";
            else if (c == '>') esc += "&gt;";
            else if (c == '&') esc += "&amp;";
            else if (c == '"') esc += "&quot;";
            else esc += c;
        }
        s += "<text x=\"10\" y=\"" + std::to_string(y) +
             "\" font-family=\"monospace\" font-size=\"12\">" + esc + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

void render_verdict_svg(const PropertyVerdict& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write SVG to " + path);
    out << verdict_svg_string(v);
    if (!out) throw DomainError("I/O error while writing " + path);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ToolConfig ToolConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read config file " + path);
    ToolConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.values[key] = val;
    }
    return cfg;
}

double ToolConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    return std::strtod(it->second.c_str(), nullptr);
}

int ToolConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    return static_cast<int>(std::strtol(it->second.c_str(), nullptr, 10));
}

}  // namespace expanse
