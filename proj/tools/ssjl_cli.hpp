#pragma once

// Command-line front end. `run_cli` takes argv-style arguments and streams so
// the same code path serves the executable and the tests.
//
// Exit codes: 0 pass, 1 verdict failure, 2 parameter error, 3 input error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssjl/ssjl.hpp"

namespace ssjl::cli {

enum ExitCode : int { kPass = 0, kVerdictFailure = 1, kParameterError = 2, kInputError = 3 };

namespace detail {

struct GeometryFlags {
  std::optional<double> eps;
  std::optional<double> delta;
  std::optional<std::uint64_t> d;
  std::optional<std::uint64_t> s;

  void attach(CLI::App* app) {
    app->add_option("--eps", eps, "target distortion in (0,1)");
    app->add_option("--delta", delta, "failure probability in (0,1)");
    app->add_option("--d", d, "explicit output dimension");
    app->add_option("--s", s, "explicit nonzeros per column");
  }

  /// Exactly one of (eps, delta) and (d, s) must be given.
  JLParams resolve() const {
    const bool derived = eps || delta;
    const bool explicit_ds = d || s;
    if (derived == explicit_ds)
      throw ParameterError("give exactly one of (--eps, --delta) or (--d, --s)");
    if (derived) {
      if (!eps || !delta) throw ParameterError("--eps and --delta must be given together");
      return compute_parameters(*eps, *delta);
    }
    if (!d || !s) throw ParameterError("--d and --s must be given together");
    return explicit_parameters(*d, *s);
  }
};

struct CommonFlags {
  std::string seed = std::to_string(mc::kDefaultSeed);
  unsigned threads = 0;
  std::string report_path;
  std::string raw_dump_path;

  void attach(CLI::App* app, bool with_dump) {
    app->add_option("--seed", seed, "master seed (integer) or 'entropy'")->capture_default_str();
    app->add_option("--threads", threads, "worker cap, 0 = all cores");
    app->add_option("--report", report_path, "write the JSON report here instead of stdout");
    if (with_dump)
      app->add_option("--raw-dump", raw_dump_path, "write per-trial energies as NDJSON");
  }

  mc::RunOptions options() const {
    mc::RunOptions opt;
    opt.seed = parse_seed(seed);
    opt.threads = threads;
    return opt;
  }

  static std::uint64_t parse_seed(const std::string& text) {
    if (text == "entropy") {
      std::random_device rd;
      return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    try {
      std::size_t used = 0;
      const auto value = std::stoull(text, &used, 0);
      if (used != text.size()) throw std::invalid_argument(text);
      return value;
    } catch (const std::exception&) {
      throw ParameterError("--seed must be an unsigned integer or 'entropy', got '" + text + "'");
    }
  }
};

inline experiments::VectorKind parse_vector(const std::string& text) {
  if (text == "uniform") return experiments::VectorKind::uniform;
  if (text == "random") return experiments::VectorKind::random;
  if (text == "basis") return experiments::VectorKind::basis;
  throw ParameterError("--x must be uniform, random or basis");
}

inline void emit_report(const ExperimentReport& report, const CommonFlags& flags, std::ostream& out) {
  const auto json = report_to_json(report);
  if (flags.report_path.empty()) {
    out << json.dump(2) << '\n';
  } else {
    std::ofstream file(flags.report_path);
    if (!file) throw Error("cannot open " + flags.report_path + " for writing");
    file << json.dump(2) << '\n';
    for (const auto& v : report.verdicts)
      out << (v.passed ? "PASS " : "FAIL ") << v.criterion << ": " << v.statistic << " <= "
          << v.threshold << '\n';
  }
}

inline void emit_raw(const CommonFlags& flags, std::span<const double> energies) {
  if (flags.raw_dump_path.empty()) return;
  std::ofstream file(flags.raw_dump_path);
  if (!file) throw Error("cannot open " + flags.raw_dump_path + " for writing");
  write_raw_dump(file, energies);
}

inline int verdict_code(const ExperimentReport& report) {
  return report.all_passed() ? kPass : kVerdictFailure;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse sign-consistent Johnson-Lindenstrauss transform and verification lab", "ssjl"};
  app.require_subcommand(1);

  // params
  auto* params_cmd = app.add_subcommand("params", "matrix parameters for (eps, delta)");
  double p_eps = 0, p_delta = 0;
  bool p_json = false;
  params_cmd->add_option("--eps", p_eps, "target distortion in (0,1)")->required();
  params_cmd->add_option("--delta", p_delta, "failure probability in (0,1)")->required();
  params_cmd->add_flag("--json", p_json, "machine-readable output");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "sample a matrix and write it in binary form");
  detail::GeometryFlags sample_geo;
  sample_geo.attach(sample_cmd);
  std::uint64_t sample_m = 0;
  std::string sample_seed = std::to_string(mc::kDefaultSeed);
  std::string sample_out;
  sample_cmd->add_option("--m", sample_m, "input dimension")->required();
  sample_cmd->add_option("--seed", sample_seed, "master seed or 'entropy'");
  sample_cmd->add_option("--out", sample_out, "output matrix file")->required();

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed a delimited vector file");
  detail::GeometryFlags embed_geo;
  embed_geo.attach(embed_cmd);
  std::string embed_in, embed_out, embed_matrix, embed_seed = std::to_string(mc::kDefaultSeed);
  std::string embed_delim = ",";
  bool embed_labels = false;
  embed_cmd->add_option("--input", embed_in, "input vectors, one per line")->required();
  embed_cmd->add_option("--output", embed_out, "output embedded vectors")->required();
  embed_cmd->add_option("--matrix", embed_matrix, "use a saved matrix instead of sampling");
  embed_cmd->add_option("--seed", embed_seed, "master seed or 'entropy'");
  embed_cmd->add_option("--delimiter", embed_delim, "field delimiter (single character)");
  embed_cmd->add_flag("--labels", embed_labels, "first field of each row is a label");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run a verification experiment");
  verify_cmd->require_subcommand(1);

  auto* tails_cmd = verify_cmd->add_subcommand("tails", "tail probabilities of E(x) against the bound");
  detail::GeometryFlags tails_geo;
  detail::CommonFlags tails_common;
  experiments::TailsConfig tails_cfg;
  tails_cfg.geometry.m = 50;
  std::string tails_x = "uniform";
  tails_geo.attach(tails_cmd);
  tails_common.attach(tails_cmd, true);
  tails_cmd->add_option("--m", tails_cfg.geometry.m, "input dimension")->capture_default_str();
  tails_cmd->add_option("--trials", tails_cfg.trials)->capture_default_str();
  tails_cmd->add_option("--grid-points", tails_cfg.grid_points)->capture_default_str();
  tails_cmd->add_option("--x", tails_x, "test vector: uniform, random or basis")->capture_default_str();
  tails_cmd->add_flag("--exact", tails_cfg.exact, "compare against exhaustive enumeration");

  auto* djl_cmd = verify_cmd->add_subcommand("djl", "distributional JL failure rate");
  double djl_eps = 0, djl_delta = 0;
  detail::CommonFlags djl_common;
  experiments::DjlConfig djl_cfg;
  std::string djl_x = "random";
  djl_cmd->add_option("--eps", djl_eps)->required();
  djl_cmd->add_option("--delta", djl_delta)->required();
  djl_common.attach(djl_cmd, true);
  djl_cmd->add_option("--m", djl_cfg.m)->capture_default_str();
  djl_cmd->add_option("--trials", djl_cfg.trials)->capture_default_str();
  djl_cmd->add_option("--x", djl_x, "random (fresh per trial), uniform or basis")->capture_default_str();

  auto* moments_cmd = verify_cmd->add_subcommand("moments", "moments of the column overlap Q");
  detail::GeometryFlags moments_geo;
  detail::CommonFlags moments_common;
  experiments::MomentsConfig moments_cfg;
  moments_geo.attach(moments_cmd);
  moments_common.attach(moments_cmd, false);
  moments_cmd->add_option("--trials", moments_cfg.trials)->capture_default_str();

  auto* mgf_cmd = verify_cmd->add_subcommand("mgf", "moment generating function of E(x)");
  detail::GeometryFlags mgf_geo;
  detail::CommonFlags mgf_common;
  experiments::MgfConfig mgf_cfg;
  mgf_cfg.geometry.m = 50;
  std::string mgf_x = "uniform";
  mgf_geo.attach(mgf_cmd);
  mgf_common.attach(mgf_cmd, true);
  mgf_cmd->add_option("--m", mgf_cfg.geometry.m)->capture_default_str();
  mgf_cmd->add_option("--trials", mgf_cfg.trials)->capture_default_str();
  mgf_cmd->add_option("--t-points", mgf_cfg.t_points)->capture_default_str();
  mgf_cmd->add_option("--x", mgf_x)->capture_default_str();
  mgf_cmd->add_flag("--exact", mgf_cfg.exact, "compare against exhaustive enumeration");

  auto* baseline_cmd = verify_cmd->add_subcommand("baseline", "dense Rademacher comparison");
  detail::CommonFlags baseline_common;
  experiments::BaselineConfig baseline_cfg;
  std::string baseline_x = "uniform";
  baseline_common.attach(baseline_cmd, false);
  baseline_cmd->add_option("--d", baseline_cfg.d)->capture_default_str();
  baseline_cmd->add_option("--m", baseline_cfg.m)->capture_default_str();
  baseline_cmd->add_option("--s", baseline_cfg.s, "0 = ceil(sqrt(d))")->capture_default_str();
  baseline_cmd->add_option("--trials", baseline_cfg.trials)->capture_default_str();
  baseline_cmd->add_option("--x", baseline_x)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kParameterError;
  }

  try {
    if (*params_cmd) {
      const auto params = compute_parameters(p_eps, p_delta);
      const auto violations = validate_params(params);
      if (p_json) {
        out << params_to_json(params).dump(2) << '\n';
      } else {
        out << "epsilon    " << params.epsilon << "\n"
            << "delta      " << params.delta << "\n"
            << "d          " << params.d << "\n"
            << "s          " << params.s << "\n"
            << "p_nominal  " << params.p_nominal << "\n"
            << "p_actual   " << params.p_actual() << "\n"
            << "feasible   " << (params.feasible() ? "yes" : "no") << "\n";
        for (const auto& v : violations) out << "violation  " << v << "\n";
      }
      return kPass;
    }

    if (*sample_cmd) {
      const auto params = sample_geo.resolve();
      const auto seed = detail::CommonFlags::parse_seed(sample_seed);
      const auto A = sample_matrix(params.d, sample_m, params.s, {seed, 0});
      save_matrix(sample_out, A);
      out << "d=" << A.rows() << " m=" << A.cols() << " s=" << A.nnz_per_col() << " seed=" << seed
          << '\n';
      return kPass;
    }

    if (*embed_cmd) {
      if (embed_delim.size() != 1) throw ParameterError("--delimiter must be a single character");
      std::ifstream in(embed_in);
      if (!in) throw InputError("cannot open " + embed_in);
      const auto batch = parse_vector_batch(in, {embed_delim[0], embed_labels});
      SSCMatrix A;
      if (!embed_matrix.empty()) {
        if (embed_geo.eps || embed_geo.delta || embed_geo.d || embed_geo.s)
          throw ParameterError("--matrix excludes --eps/--delta/--d/--s");
        A = load_matrix(embed_matrix);
        if (A.cols() != batch.m)
          throw InputError("matrix has " + std::to_string(A.cols()) + " columns, input vectors have " +
                           std::to_string(batch.m));
      } else {
        const auto params = embed_geo.resolve();
        A = sample_matrix(params.d, batch.m, params.s,
                          {detail::CommonFlags::parse_seed(embed_seed), 0});
      }
      const auto embedded = embed_batch(A, batch);
      std::ofstream file(embed_out);
      if (!file) throw Error("cannot open " + embed_out + " for writing");
      write_vector_batch(file, embedded, embed_delim[0]);
      out << "d=" << A.rows() << " m=" << A.cols() << " s=" << A.nnz_per_col()
          << " seed=" << A.seed().master_seed << " vectors=" << embedded.size() << '\n';
      return kPass;
    }

    if (*tails_cmd) {
      tails_cfg.geometry.params = tails_geo.resolve();
      tails_cfg.vector = detail::parse_vector(tails_x);
      tails_cfg.options = tails_common.options();
      const auto outcome = experiments::run_tails(tails_cfg);
      detail::emit_raw(tails_common, outcome.estimate.energies);
      detail::emit_report(outcome.report, tails_common, out);
      return detail::verdict_code(outcome.report);
    }

    if (*djl_cmd) {
      djl_cfg.params = compute_parameters(djl_eps, djl_delta);
      if (djl_x != "random") djl_cfg.fixed_vector = detail::parse_vector(djl_x);
      djl_cfg.options = djl_common.options();
      const auto outcome = experiments::run_djl(djl_cfg);
      detail::emit_raw(djl_common, outcome.result.energies);
      detail::emit_report(outcome.report, djl_common, out);
      return detail::verdict_code(outcome.report);
    }

    if (*moments_cmd) {
      moments_cfg.params = moments_geo.resolve();
      moments_cfg.options = moments_common.options();
      const auto outcome = experiments::run_moments(moments_cfg);
      detail::emit_report(outcome.report, moments_common, out);
      return detail::verdict_code(outcome.report);
    }

    if (*mgf_cmd) {
      mgf_cfg.geometry.params = mgf_geo.resolve();
      mgf_cfg.vector = detail::parse_vector(mgf_x);
      mgf_cfg.options = mgf_common.options();
      const auto outcome = experiments::run_mgf(mgf_cfg);
      detail::emit_raw(mgf_common, outcome.estimate.energies);
      detail::emit_report(outcome.report, mgf_common, out);
      return detail::verdict_code(outcome.report);
    }

    if (*baseline_cmd) {
      baseline_cfg.vector = detail::parse_vector(baseline_x);
      baseline_cfg.options = baseline_common.options();
      const auto report = experiments::run_baseline(baseline_cfg);
      detail::emit_report(report, baseline_common, out);
      return detail::verdict_code(report);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DataError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kParameterError;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kParameterError;
  } catch (const ShapeError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kParameterError;
  } catch (const NormalizationError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kParameterError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kParameterError;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ssjl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ssjl::cli
