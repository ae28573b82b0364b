#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "expanse/property_lab.hpp"

namespace expanse {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 1729;

/// Seed from EXPANSE_SEED, else the default.
std::uint64_t seed_from_env();

struct Report {
    std::string version = kToolVersion;
    std::string flow;
    std::uint64_t seed = kDefaultSeed;
    nlohmann::ordered_json environment;  // effective tolerances/meshes/horizons
    std::vector<PropertyVerdict> checks;
    std::vector<double> millis;  // one entry per check
};

nlohmann::ordered_json verdict_to_json(const PropertyVerdict& v, double millis);
/// Rehydrate a stored check, e.g. to re-run its witness.
PropertyVerdict verdict_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json report_to_json(const Report& r);
void write_report(const Report& r, const std::string& path);

/// Exit code aggregation: 0 all holds, 2 some violated, 3 inconclusive
/// present (and none violated).
int aggregate_exit_code(const std::vector<PropertyVerdict>& checks);

// ---------------------------------------------------------------------------
// Orbit CSV: header `t,x1,..,xd,v1,..,vd`, 17 significant digits.
// ---------------------------------------------------------------------------

void write_orbit_csv(const OrbitSegment& seg, const std::string& path);
std::string orbit_csv_string(const OrbitSegment& seg);
OrbitSegment read_orbit_csv(const std::string& path, const Space& space,
                            const std::string& flow_id);

// ---------------------------------------------------------------------------
// Static SVG output (deterministic bytes for fixed input).
// ---------------------------------------------------------------------------

std::string orbit_svg_string(const OrbitSegment& seg);
void render_orbit_svg(const OrbitSegment& seg, const std::string& path);
std::string verdict_svg_string(const PropertyVerdict& v);
void render_verdict_svg(const PropertyVerdict& v, const std::string& path);

// ---------------------------------------------------------------------------
// key=value config file; '#' starts a comment line.
// ---------------------------------------------------------------------------

struct ToolConfig {
    std::map<std::string, std::string> values;

    static ToolConfig load(const std::string& path);  // I/O error -> DomainError
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
};

}  // namespace expanse
