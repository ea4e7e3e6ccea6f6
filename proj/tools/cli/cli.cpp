#include "cli/cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chameleon/analysis.hpp"
#include "chameleon/contextual.hpp"
#include "chameleon/dynamics.hpp"
#include "chameleon/error.hpp"
#include "chameleon/netsim/session.hpp"
#include "chameleon/protocols.hpp"
#include "chameleon/rng.hpp"
#include "chameleon/serialize.hpp"

namespace chameleon::cli {

namespace {

using Json = nlohmann::ordered_json;

struct CommonFlags {
  std::string protocol = "direct";
  std::string mode = "D";
  std::uint64_t n_grid = 1000;
  std::uint64_t n_total = 1'000'000;
  std::uint64_t k1 = 10;
  std::uint64_t k2 = 10;
  std::optional<std::uint64_t> seed;
  std::string transport = "inproc";
  std::string station_a;
  std::string station_b;
  std::string out_path;
  std::string format;
  std::string transcript_path;
};

void add_experiment_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--mode", f.mode, "sigma sequence: D (deterministic grid) or R (random)")
      ->check(CLI::IsMember({"D", "R"}))
      ->capture_default_str();
  cmd->add_option("--n", f.n_grid, "sigma grid size N")->capture_default_str();
  cmd->add_option("--n-total", f.n_total, "total number of trials")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (drawn at random and echoed when omitted)");
  cmd->add_option("--out", f.out_path, "write output to this file instead of stdout");
}

std::uint64_t resolve_seed(const CommonFlags& f) {
  if (f.seed) {
    return *f.seed;
  }
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) | rd();
}

ExperimentConfig make_config(const CommonFlags& f, Angle a, Angle b, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.a = a;
  cfg.b = b;
  cfg.n_grid = f.n_grid;
  cfg.n_total = f.n_total;
  cfg.sigma_mode = f.mode == "R" ? SigmaMode::Random : SigmaMode::Deterministic;
  cfg.protocol = f.protocol == "old" ? ProtocolKind::Old : ProtocolKind::Direct;
  cfg.seed = seed;
  cfg.k1 = f.k1;
  cfg.k2 = f.k2;
  cfg.validate();
  return cfg;
}

Json config_json(const ExperimentConfig& cfg) {
  Json j;
  j["mode"] = cfg.sigma_mode == SigmaMode::Random ? "R" : "D";
  j["n_grid"] = cfg.n_grid;
  j["n_total"] = cfg.n_total;
  j["seed"] = cfg.seed;
  if (cfg.protocol == ProtocolKind::Old) {
    j["k1"] = cfg.k1;
    j["k2"] = cfg.k2;
  }
  return j;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw Error(fmt::format("cannot open '{}' for writing", path));
  }
  file << text;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

netsim::SessionOptions session_options(const CommonFlags& f) {
  netsim::SessionOptions opts;
  opts.transport = f.transport == "tcp" ? netsim::TransportKind::Tcp : netsim::TransportKind::InProcess;
  if (!f.station_a.empty()) {
    opts.station_a = netsim::Endpoint::parse(f.station_a);
  }
  if (!f.station_b.empty()) {
    opts.station_b = netsim::Endpoint::parse(f.station_b);
  }
  return opts;
}

int cmd_run(const CommonFlags& f, Angle a, Angle b, std::ostream& out) {
  const ExperimentConfig cfg = make_config(f, a, b, resolve_seed(f));
  const double exact = dynamics::exact_correlation(a, b);

  Json j;
  j["command"] = "run";
  j["protocol"] = f.protocol;
  j["a"] = angle_json(a);
  j["b"] = angle_json(b);
  j["config"] = config_json(cfg);
  j["exact"] = exact;

  if (cfg.protocol == ProtocolKind::Old) {
    const OldResult r = run_old(cfg);
    j["raw_mean"] = r.raw_mean;
    j["scaled_mean"] = r.scaled_mean;
    j["difference"] = r.scaled_mean - exact;
    if (f.format == "csv") {
      emit(f.out_path,
           csv_line({"a", "b", "raw_mean", "scaled_mean", "exact", "difference"}) +
               csv_line({format_double(a.rad()), format_double(b.rad()), format_double(r.raw_mean),
                         format_double(r.scaled_mean), format_double(exact), format_double(r.scaled_mean - exact)}),
           out);
    } else {
      emit(f.out_path, dump(j) + '\n', out);
    }
    return kExitOk;
  }

  analysis::CorrelationReport report;
  if (f.transport == "none") {
    report = analysis::estimate_correlation(run_direct(cfg));
  } else {
    j["transport"] = f.transport;
    auto session = netsim::run_session(cfg, session_options(f));
    report = session.report;
    if (!f.transcript_path.empty()) {
      emit(f.transcript_path, session.transcript.to_ndjson(), out);
    }
    j["locality_verified"] = netsim::verify_locality(session.transcript, a, b);
  }
  j["report"] = to_json(report);
  j["coincidence_fraction"] = report.coincidence_fraction();
  j["difference"] = report.correlation - exact;

  if (f.format == "csv") {
    emit(f.out_path,
         csv_line({"a", "b", "correlation", "std_error", "n_coincidences", "n_trials", "exact", "difference"}) +
             csv_line({format_double(a.rad()), format_double(b.rad()), format_double(report.correlation),
                       format_double(report.std_error), std::to_string(report.n_coincidences),
                       std::to_string(report.n_trials), format_double(exact),
                       format_double(report.correlation - exact)}),
         out);
  } else {
    emit(f.out_path, dump(j) + '\n', out);
  }
  return kExitOk;
}

int cmd_scan(const CommonFlags& f, Angle b, std::uint64_t steps, std::ostream& out) {
  if (steps < 2) {
    throw ConfigError("--steps must be at least 2");
  }
  const std::uint64_t seed = resolve_seed(f);
  make_config(f, b, b, seed);

  std::string csv = csv_line({"delta", "estimate", "std_error", "exact", "coincidence_fraction"});
  Json rows = Json::array();
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double delta = kTwoPi * static_cast<double>(k) / static_cast<double>(steps);
    const Angle a(b.rad() + delta);
    const ExperimentConfig cfg = make_config(f, a, b, rng::derive_seed(seed, fmt::format("scan/{}", k)));
    const auto report = analysis::estimate_correlation(run_direct(cfg));
    const double exact = -std::cos(delta);
    csv += csv_line({format_double(delta), format_double(report.correlation), format_double(report.std_error),
                     format_double(exact), format_double(report.coincidence_fraction())});
    Json row;
    row["delta"] = delta;
    row["estimate"] = report.correlation;
    row["std_error"] = report.std_error;
    row["exact"] = exact;
    row["coincidence_fraction"] = report.coincidence_fraction();
    rows.push_back(row);
  }
  if (f.format == "json") {
    Json j;
    j["command"] = "scan";
    j["b"] = angle_json(b);
    j["seed"] = seed;
    j["points"] = rows;
    emit(f.out_path, dump(j) + '\n', out);
  } else {
    emit(f.out_path, csv, out);
  }
  return kExitOk;
}

int cmd_bell(const CommonFlags& f, Angle a, Angle b, Angle c, std::ostream& out) {
  const ExperimentConfig cfg = make_config(f, a, b, resolve_seed(f));
  const analysis::BellReport report = analysis::run_bell_experiment(a, b, c, cfg);
  Json j;
  j["command"] = "bell";
  j["config"] = config_json(cfg);
  j["bell"] = to_json(report);
  j["violates_unconditioned_bound"] = report.violates_unconditioned_bound();
  emit(f.out_path, dump(j) + '\n', out);
  return kExitOk;
}

int cmd_contextual(const contextual::BatchOptions& opts, const std::string& out_path, const std::string& jsonl_path,
                   std::ostream& out) {
  const contextual::BatchSummary summary = contextual::run_batch(opts);
  if (!jsonl_path.empty()) {
    std::string lines;
    for (const auto& line : summary.lines) {
      lines += dump(to_json(line));
      lines += '\n';
    }
    emit(jsonl_path, lines, out);
  }
  Json j;
  j["command"] = "contextual";
  j["seed"] = opts.seed;
  j["models"] = summary.models;
  j["omega_min"] = opts.omega_min;
  j["omega_max"] = opts.omega_max;
  j["settings"] = opts.n_settings;
  j["checks"] = summary.checks;
  j["violations"] = summary.violations;
  j["worst_quantity"] = summary.worst_quantity;
  j["epr_checked"] = summary.epr_checked;
  j["epr_matches"] = summary.epr_matches;
  j["all_hold"] = summary.all_hold();
  emit(out_path, dump(j) + '\n', out);
  return summary.all_hold() ? kExitOk : kExitFailure;
}

Angle angle_flag(const std::string& text) { return parse_angle(text); }

}  // namespace

Angle parse_angle(std::string_view text) {
  bool degrees = false;
  if (text.size() > 3 && text.substr(text.size() - 3) == "deg") {
    degrees = true;
    text.remove_suffix(3);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("invalid angle '{}'", text));
  }
  try {
    return degrees ? Angle::degrees(value) : Angle(value);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"EPR-chameleon simulator: coincidence-conditioned correlations from local deterministic dynamics"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string a_text, b_text = "0", c_text;
  std::uint64_t steps = 17;

  auto* run_cmd = app.add_subcommand("run", "run one direct or old protocol session");
  run_cmd->add_option("--protocol", flags.protocol, "direct or old")
      ->check(CLI::IsMember({"direct", "old"}))
      ->capture_default_str();
  run_cmd->add_option("--a", a_text, "station 1 setting (radians, or e.g. 60deg)")->required();
  run_cmd->add_option("--b", b_text, "station 2 setting")->required();
  run_cmd->add_option("--k1", flags.k1, "inner samples at station 1 (old protocol)")->capture_default_str();
  run_cmd->add_option("--k2", flags.k2, "inner samples at station 2 (old protocol)")->capture_default_str();
  run_cmd->add_option("--transport", flags.transport, "inproc, tcp, or none (single-process loop)")
      ->check(CLI::IsMember({"inproc", "tcp", "none"}))
      ->capture_default_str();
  run_cmd->add_option("--station-a", flags.station_a, "host:port of a running station A (tcp)");
  run_cmd->add_option("--station-b", flags.station_b, "host:port of a running station B (tcp)");
  run_cmd->add_option("--transcript", flags.transcript_path, "write the NDJSON transcript here");
  run_cmd->add_option("--format", flags.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  add_experiment_flags(run_cmd, flags);

  auto* scan_cmd = app.add_subcommand("scan", "sweep a - b over a uniform grid on [0, 2pi)");
  scan_cmd->add_option("--b", b_text, "fixed station 2 setting")->capture_default_str();
  scan_cmd->add_option("--steps", steps, "number of grid points")->capture_default_str();
  scan_cmd->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
  add_experiment_flags(scan_cmd, flags);

  auto* bell_cmd = app.add_subcommand("bell", "three-term Bell quantity with the conditioning bound");
  bell_cmd->add_option("--a", a_text, "setting a")->required();
  bell_cmd->add_option("--b", b_text, "setting b")->required();
  bell_cmd->add_option("--c", c_text, "setting c")->required();
  add_experiment_flags(bell_cmd, flags);

  contextual::BatchOptions batch;
  std::string jsonl_path;
  std::uint64_t ctx_seed = 0;
  auto* ctx_cmd = app.add_subcommand("contextual", "check random normalized contextual models against Bell");
  ctx_cmd->add_option("--models", batch.models, "number of models")->capture_default_str();
  ctx_cmd->add_option("--omega-min", batch.omega_min, "smallest hidden-state space")->capture_default_str();
  ctx_cmd->add_option("--omega-max", batch.omega_max, "largest hidden-state space")->capture_default_str();
  ctx_cmd->add_option("--settings", batch.n_settings, "settings on the uniform grid")->capture_default_str();
  ctx_cmd->add_option("--seed", ctx_seed, "master seed")->capture_default_str();
  ctx_cmd->add_option("--jsonl", jsonl_path, "write one JSON line per model here");
  ctx_cmd->add_option("--out", flags.out_path, "write the summary here instead of stdout");

  std::string role, setting_text, listen = "127.0.0.1:7001";
  std::optional<std::uint64_t> fail_after;
  auto* serve_cmd = app.add_subcommand("serve-station", "serve one session as measurement station A or B over TCP");
  serve_cmd->add_option("--role", role, "a or b")->required()->check(CLI::IsMember({"a", "b"}));
  serve_cmd->add_option("--setting", setting_text, "this station's setting")->required();
  serve_cmd->add_option("--listen", listen, "host:port to listen on")->capture_default_str();
  serve_cmd->add_option("--fail-after", fail_after, "hang up after this many trials (fault injection)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(flags, angle_flag(a_text), angle_flag(b_text), out);
    }
    if (scan_cmd->parsed()) {
      return cmd_scan(flags, angle_flag(b_text), steps, out);
    }
    if (bell_cmd->parsed()) {
      return cmd_bell(flags, angle_flag(a_text), angle_flag(b_text), angle_flag(c_text), out);
    }
    if (ctx_cmd->parsed()) {
      batch.seed = ctx_seed;
      return cmd_contextual(batch, flags.out_path, jsonl_path, out);
    }
    if (serve_cmd->parsed()) {
      netsim::StationOptions opts;
      opts.expected_setting = angle_flag(setting_text);
      opts.fail_after_trials = fail_after;
      netsim::TcpListener listener(netsim::Endpoint::parse(listen));
      err << "station " << role << " listening on " << listener.local().str() << std::endl;
      auto link = listener.accept();
      netsim::serve_station(*link, role == "a" ? netsim::RoleKind::StationA : netsim::RoleKind::StationB, opts);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace chameleon::cli
