#pragma once

// Experiment reports and their JSON form.
//
// Top-level fields (schema_version 1):
//   schema, schema_version, kind, seed, params, config, estimates, overlays,
//   verdicts[{criterion, passed, statistic, relation, threshold, margin, detail}],
//   warnings, all_passed, timing{wall_clock_seconds}
//
// Everything except `timing` is a deterministic function of the command line.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssjl/montecarlo.hpp"
#include "ssjl/params.hpp"

namespace ssjl {

inline constexpr const char* kReportSchema = "ssjl.experiment-report";
inline constexpr int kReportSchemaVersion = 1;

struct Verdict {
  std::string criterion;
  bool passed = false;
  double statistic = 0.0;
  /// Always "<=": passed iff statistic <= threshold.
  std::string relation = "<=";
  double threshold = 0.0;
  std::string detail;

  static Verdict at_most(std::string criterion, double statistic, double threshold,
                         std::string detail = {}) {
    Verdict v;
    v.criterion = std::move(criterion);
    v.statistic = statistic;
    v.threshold = threshold;
    v.passed = statistic <= threshold;
    v.detail = std::move(detail);
    return v;
  }
  double margin() const { return threshold - statistic; }
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t seed = 0;
  std::optional<JLParams> params;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json overlays = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;

  bool all_passed() const {
    for (const auto& v : verdicts)
      if (!v.passed) return false;
    return true;
  }

  const Verdict* find(const std::string& criterion) const {
    for (const auto& v : verdicts)
      if (v.criterion == criterion) return &v;
    return nullptr;
  }
};

inline nlohmann::json params_to_json(const JLParams& p) {
  nlohmann::json j;
  if (p.epsilon != 0.0 || p.delta != 0.0) {
    j["epsilon"] = p.epsilon;
    j["delta"] = p.delta;
  }
  j["d"] = p.d;
  j["s"] = p.s;
  j["p_nominal"] = p.p_nominal;
  j["p_actual"] = p.p_actual();
  j["feasible"] = p.feasible();
  j["clamped"] = p.clamped;
  return j;
}

namespace mc {

inline void to_json(nlohmann::json& j, const TailCurve& c) {
  j = {{"eps_grid", c.eps_grid}, {"counts", c.counts},     {"trials", c.trials},
       {"confidence", c.confidence}, {"ci_lower", c.ci_lower}, {"ci_upper", c.ci_upper}};
}

inline void to_json(nlohmann::json& j, const MgfPoint& p) {
  j = {{"t", p.t}, {"mean", p.mean}, {"se", p.se}, {"bound", p.bound}};
}

inline void to_json(nlohmann::json& j, const DistortionSummary& s) {
  j = {{"quantile_levels", baseline_quantile_levels()},
       {"abs_energy_quantiles", s.abs_quantiles},
       {"mean_abs_energy", s.mean_abs}};
}

}  // namespace mc

inline void to_json(nlohmann::json& j, const Verdict& v) {
  j = {{"criterion", v.criterion}, {"passed", v.passed},       {"statistic", v.statistic},
       {"relation", v.relation},   {"threshold", v.threshold}, {"margin", v.margin()},
       {"detail", v.detail}};
}

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["params"] = r.params ? params_to_json(*r.params) : nlohmann::json(nullptr);
  j["config"] = r.config;
  j["estimates"] = r.estimates;
  j["overlays"] = r.overlays;
  j["verdicts"] = r.verdicts;
  j["warnings"] = r.warnings;
  j["all_passed"] = r.all_passed();
  j["timing"] = {{"wall_clock_seconds", r.wall_clock_seconds}};
  return j;
}

/// The report without its timing block, for run-to-run comparison.
inline nlohmann::json deterministic_part(nlohmann::json report) {
  report.erase("timing");
  return report;
}

/// Newline-delimited per-trial records: {"trial":k,"energy":E}.
inline void write_raw_dump(std::ostream& out, std::span<const double> energies) {
  for (std::size_t k = 0; k < energies.size(); ++k)
    out << nlohmann::json{{"trial", k}, {"energy", energies[k]}}.dump() << '\n';
}

}  // namespace ssjl
