#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "quakealarm/alarm.hpp"
#include "quakealarm/catalog.hpp"
#include "quakealarm/decluster.hpp"
#include "quakealarm/errors.hpp"
#include "quakealarm/nullmodels.hpp"
#include "quakealarm/sigtests.hpp"

namespace quakealarm::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  RunConfig rc;
  bool deterministic = false;
  unsigned threads = 0;
  std::string alarms_out;
  std::string windows;
  std::string stats_out;
  std::string hole_mode = "all";
  std::string model = "permute";
  double shape = 0.5;
  double mean_days = 0.0;
  double cell_deg = 10.0;
  double rate_per_year = 0.0;
  bool json = false;
};

std::string resolved_format(const std::string& flag, const std::string& path) {
  if (!flag.empty()) return flag;
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".ndk") return "ndk";
  return "csv";
}

Catalog load_catalog(Options& o) {
  const std::string& path = o.rc.inputs.at(0);
  o.rc.format = resolved_format(o.rc.format, path);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read input file '" + path + "'");
  const MagnitudeKind kind = o.rc.magnitude == "ms" ? MagnitudeKind::Ms : MagnitudeKind::Mb;
  return o.rc.format == "ndk" ? parse_ndk(in, kind) : parse_csv(in, kind);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write output file '" + path + "'");
  file << text;
}

std::string with_envelope(nlohmann::json body, const Options& o) {
  body["run_config"] = o.rc.to_json();
  if (!o.deterministic) {
    const auto now = std::chrono::floor<Duration>(std::chrono::system_clock::now());
    body["generated_at"] = format_iso8601(Instant{now.time_since_epoch()});
  }
  return body.dump(2) + "\n";
}

TimeInterval study_window(const Catalog& c, const RunConfig& rc) {
  TimeInterval w = c.span().interval;
  if (!rc.from.empty()) w.start = parse_date_or_instant(rc.from);
  if (!rc.to.empty()) w.end = parse_date_or_instant(rc.to);
  if (!(w.start < w.end)) throw UsageError("--from must be earlier than --to");
  return w;
}

PredictorMode predictor(const RunConfig& rc) {
  return rc.predictor == "ii" ? PredictorMode::II : PredictorMode::I;
}

AlarmConfig alarm_config(const RunConfig& rc) {
  AlarmConfig config{rc.mag_threshold, rc.window_days, rc.radius_km};
  config.validate();
  return config;
}

unsigned worker_count(const Options& o) {
  if (o.threads > 0) return o.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json score_json(const ScoreSummary& s) {
  return {{"Q", s.Q}, {"A", s.A}, {"S", s.S}, {"P", s.P}, {"F", s.F}, {"M", s.M},
          {"s", s.s}, {"p", s.p}, {"f", s.f}, {"m", s.m}, {"v_upper", s.v_upper}};
}

// ---------------------------------------------------------------------------

int cmd_ingest(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog parsed = load_catalog(o);
  // Canonical CSV cannot carry an event with neither magnitude.
  std::vector<Event> kept;
  for (const Event& e : parsed) {
    if (e.mb || e.ms) kept.push_back(e);
  }
  const std::size_t dropped = parsed.size() - kept.size();
  const Catalog c(std::move(kept), parsed.span(), parsed.magnitude_selector());
  emit(o.rc.out, to_csv(c), out);
  if (dropped > 0) err << "warning: dropped " << dropped << " events with no magnitude\n";
  err << "ingested " << c.size() << " events";
  if (!c.empty()) {
    err << " from " << format_iso8601(c.events().front().time) << " to "
        << format_iso8601(c.events().back().time);
  }
  err << '\n';
  return kSuccess;
}

int cmd_eval(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog c = load_catalog(o);
  const AlarmConfig config = alarm_config(o.rc);
  const Catalog targets = filter(c, config.mag_threshold, study_window(c, o.rc));
  if (targets.empty()) err << "warning: no events at or above the threshold in the study window\n";
  const AlarmSet alarms = generate_alarms(targets, config, predictor(o.rc));
  const ScoreSummary summary = score(targets, alarms, targets.span());

  nlohmann::json body = score_json(summary);
  body["v_upper_truncated"] =
      alarm_volume_fraction(alarms, targets.span(), VolumeConvention::Truncated);
  emit(o.rc.out, with_envelope(std::move(body), o), out);
  if (!o.alarms_out.empty()) {
    std::ostringstream csv;
    write_alarm_csv(csv, alarms);
    emit(o.alarms_out, csv.str(), out);
  }
  err << "events " << summary.Q << ", predicted " << summary.P << ", successful alarms "
      << summary.S << ", v " << summary.v_upper << '\n';
  return kSuccess;
}

TestReport run_test(const Catalog& targets, const AlarmConfig& config, PredictorMode mode,
                    const Options& o) {
  const AlarmSet alarms = generate_alarms(targets, config, mode);
  return permutation_test_fixed(targets, alarms, o.rc.n_reps, o.rc.seed, worker_count(o));
}

int cmd_test(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog c = load_catalog(o);
  const AlarmConfig config = alarm_config(o.rc);
  const Catalog targets = filter(c, config.mag_threshold, study_window(c, o.rc));
  const TestReport report = run_test(targets, config, predictor(o.rc), o);
  emit(o.rc.out, with_envelope(report.to_json(), o), out);
  err << "observed " << report.observed << ", max sim " << report.max_sim << ", p "
      << report.p_display() << '\n';
  return kSuccess;
}

struct Table1Row {
  const char* years;
  Instant start;
  Instant end;
  double mag_threshold;
};

int cmd_table1(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog c = load_catalog(o);
  const Instant y2000 = make_instant(2000, 1, 1);
  const Instant y2004 = make_instant(2004, 1, 1);
  const Instant y2005 = make_instant(2005, 1, 1);
  if (!c.span().interval.contains(TimeInterval{y2000, y2005})) {
    throw UsageError("catalog spans " + format_iso8601(c.span().interval.start) + " to " +
                     format_iso8601(c.span().interval.end) +
                     " but must cover 2000-01-01 through 2004-12-31");
  }
  const Table1Row rows[] = {{"2004", y2004, y2005, 5.5},
                            {"2004", y2004, y2005, 5.8},
                            {"2000-2004", y2000, y2005, 5.5},
                            {"2000-2004", y2000, y2005, 5.8}};

  std::string csv = "years,mag_threshold,events,succ,succ_wo,max_sim,p_est,v,seed\n";
  nlohmann::json json_rows = nlohmann::json::array();
  for (const auto& row : rows) {
    const AlarmConfig config{row.mag_threshold, o.rc.window_days, o.rc.radius_km};
    config.validate();
    const Catalog targets = filter(c, row.mag_threshold, {row.start, row.end});
    const AlarmSet alarms_i = generate_alarms(targets, config, PredictorMode::I);
    const AlarmSet alarms_ii = generate_alarms(targets, config, PredictorMode::II);
    const ScoreSummary s_i = score(targets, alarms_i, targets.span());
    const ScoreSummary s_ii = score(targets, alarms_ii, targets.span());
    const TestReport test =
        permutation_test_fixed(targets, alarms_ii, o.rc.n_reps, o.rc.seed, worker_count(o));

    char line[256];
    std::snprintf(line, sizeof line, "%s,%g,%zu,%zu,%zu,%g,%s,%.6g,%llu\n", row.years,
                  row.mag_threshold, s_i.Q, s_i.P, s_ii.P, test.max_sim, test.p_display().c_str(),
                  s_i.v_upper, static_cast<unsigned long long>(o.rc.seed));
    csv += line;
    json_rows.push_back({{"years", row.years},
                         {"mag_threshold", row.mag_threshold},
                         {"events", s_i.Q},
                         {"succ", s_i.P},
                         {"succ_wo", s_ii.P},
                         {"v", s_i.v_upper},
                         {"test", test.to_json()}});
    err << row.years << " M>=" << row.mag_threshold << ": events " << s_i.Q << ", succ "
        << s_i.P << ", succ w/o " << s_ii.P << ", p " << test.p_display() << '\n';
  }
  if (o.json) {
    emit(o.rc.out, with_envelope({{"rows", json_rows}}, o), out);
  } else {
    emit(o.rc.out, csv, out);
  }
  return kSuccess;
}

int cmd_decluster(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog c = load_catalog(o);
  std::ifstream table_in(o.windows);
  if (!table_in) throw UsageError("cannot read window table '" + o.windows + "'");
  std::optional<WindowTable> windows;
  try {
    windows = parse_window_table(table_in);
  } catch (const ParseError& e) {
    throw UsageError(std::string("bad window table: ") + e.what());
  }
  const HoleMode mode = o.hole_mode == "retained" ? HoleMode::RetainedOnly : HoleMode::AllEvents;
  const DeclusterResult result = decluster(c, *windows, mode);
  const DeclusterStats stats = decluster_stats(c, result.retained);
  emit(o.rc.out, to_csv(result.retained), out);

  nlohmann::json body = {{"n_input", c.size()},
                         {"n_retained", result.retained.size()},
                         {"n_deleted", stats.n_deleted},
                         {"fraction_deleted", stats.fraction_deleted},
                         {"hole_mode", o.hole_mode},
                         {"windows", o.windows}};
  const std::string report = with_envelope(std::move(body), o);
  if (o.stats_out.empty()) {
    err << report;
  } else {
    emit(o.stats_out, report, out);
    err << "deleted " << stats.n_deleted << " of " << c.size() << " events\n";
  }
  return kSuccess;
}

Catalog gamma_catalog(const Catalog& marks, const TimeInterval& interval, const Options& o,
                      Rng& rng) {
  if (marks.empty()) throw UsageError("the gamma model needs a non-empty mark catalog");
  const double mean_s = o.mean_days > 0.0
                            ? o.mean_days * kSecondsPerDay
                            : interval.seconds() / static_cast<double>(marks.size());
  const auto times = gen_gamma_renewal(o.shape, mean_s, interval, rng);
  std::vector<Event> events;
  events.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Event e = marks[rng.uniform_index(marks.size())];
    e.time = times[i];
    e.source_id = "sim-" + std::to_string(i);
    events.push_back(std::move(e));
  }
  return Catalog(std::move(events), {marks.span().region, interval}, marks.magnitude_selector());
}

int cmd_simulate(Options& o, std::ostream& out, std::ostream& err) {
  const Catalog marks = load_catalog(o);
  const TimeInterval interval = study_window(marks, o.rc);
  Rng rng(o.rc.seed, 0);

  Catalog sim;
  if (o.model == "permute" || o.model == "uniform") {
    const Catalog windowed = filter(marks, -std::numeric_limits<double>::max(), interval);
    sim = o.model == "permute" ? permute_times(windowed, rng) : randomize_times_uniform(windowed, rng);
  } else if (o.model == "poisson") {
    const double rate = o.rate_per_year > 0.0
                            ? o.rate_per_year / (365.25 * kSecondsPerDay)
                            : static_cast<double>(marks.size()) / marks.span().duration_s();
    sim = gen_homogeneous_poisson(rate, {marks.span().region, interval}, marks, rng);
  } else if (o.model == "hetpoisson") {
    CellGrid grid = historical_cell_rates(marks, lat_lon_grid(o.cell_deg));
    sim = gen_heterogeneous_poisson(grid, interval, marks, rng);
  } else {
    sim = gamma_catalog(marks, interval, o, rng);
  }
  emit(o.rc.out, to_csv(sim), out);
  err << "simulated " << sim.size() << " events with model " << o.model << ", seed " << o.rc.seed
      << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------

void add_input(CLI::App* sub, Options& o) {
  sub->add_option("input", o.rc.inputs, "Catalog file (canonical CSV or NDK)")
      ->required()
      ->expected(1);
  sub->add_option("--format", o.rc.format, "Input format; inferred from the extension if omitted")
      ->check(CLI::IsMember({"csv", "ndk"}));
  sub->add_option("--magnitude", o.rc.magnitude, "Magnitude used for thresholds: mb or ms")
      ->check(CLI::IsMember({"mb", "ms"}))
      ->capture_default_str();
  sub->add_option("--out", o.rc.out, "Write the primary output here instead of stdout");
  sub->add_flag("--deterministic", o.deterministic, "Omit the timestamp from JSON reports");
}

void add_window(CLI::App* sub, Options& o) {
  sub->add_option("--from", o.rc.from, "Study window start (ISO date or instant, inclusive)");
  sub->add_option("--to", o.rc.to, "Study window end (ISO date or instant, exclusive)");
}

void add_alarm(CLI::App* sub, Options& o) {
  sub->add_option("--mag-threshold", o.rc.mag_threshold, "Threshold magnitude M_tau")
      ->capture_default_str();
  sub->add_option("--window-days", o.rc.window_days, "Alarm duration in days")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--radius-km", o.rc.radius_km, "Alarm radius in km")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_replicates(CLI::App* sub, Options& o) {
  sub->add_option("--reps", o.rc.n_reps, "Number of random replicates")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  sub->add_option("--seed", o.rc.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  auto optional_text = [](const std::string& s) -> nlohmann::json {
    return s.empty() ? nlohmann::json(nullptr) : nlohmann::json(s);
  };
  return {{"subcommand", subcommand},
          {"inputs", inputs},
          {"format", format},
          {"magnitude", magnitude},
          {"mag_threshold", mag_threshold},
          {"window_days", window_days},
          {"radius_km", radius_km},
          {"predictor", predictor},
          {"n_reps", n_reps},
          {"seed", seed},
          {"out", optional_text(out)},
          {"from", optional_text(from)},
          {"to", optional_text(to)}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Alarm-based earthquake prediction evaluation", "quakealarm"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Convert a catalog to canonical CSV");
  add_input(ingest, o);

  auto* eval = app.add_subcommand("eval", "Generate automatic alarms and score them");
  add_input(eval, o);
  add_window(eval, o);
  add_alarm(eval, o);
  eval->add_option("--predictor", o.rc.predictor, "Alarm magnitude floor: i or ii")
      ->check(CLI::IsMember({"i", "ii"}))
      ->capture_default_str();
  eval->add_option("--alarms", o.alarms_out, "Also write the alarm set as CSV");

  auto* test = app.add_subcommand("test", "Permutation test of the number of predicted events");
  add_input(test, o);
  add_window(test, o);
  add_alarm(test, o);
  test->add_option("--predictor", o.rc.predictor, "Alarm magnitude floor: i or ii")
      ->check(CLI::IsMember({"i", "ii"}))
      ->capture_default_str();
  add_replicates(test, o);

  auto* table1 = app.add_subcommand("table1", "Four-row summary for 2004 and 2000-2004 at M 5.5 and 5.8");
  add_input(table1, o);
  add_replicates(table1, o);
  table1->add_flag("--json", o.json, "Emit a JSON report instead of CSV");

  auto* declust = app.add_subcommand("decluster", "Remove events inside the windows of larger events");
  add_input(declust, o);
  declust->add_option("--windows", o.windows, "Window table CSV (mag_min,time_days,distance_km)")
      ->required();
  declust->add_option("--hole-mode", o.hole_mode, "Which events punch holes: all or retained")
      ->check(CLI::IsMember({"all", "retained"}))
      ->capture_default_str();
  declust->add_option("--stats", o.stats_out, "Write the stats JSON here instead of stderr");

  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic catalog from a null model");
  add_input(simulate, o);
  add_window(simulate, o);
  simulate->add_option("--seed", o.rc.seed, "Random seed")->capture_default_str();
  simulate->add_option("--model", o.model, "permute, uniform, poisson, hetpoisson or gamma")
      ->check(CLI::IsMember({"permute", "uniform", "poisson", "hetpoisson", "gamma"}))
      ->capture_default_str();
  simulate->add_option("--rate-per-year", o.rate_per_year, "Poisson rate (default: catalog rate)");
  simulate->add_option("--cell-deg", o.cell_deg, "Cell size for hetpoisson")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--shape", o.shape, "Gamma shape for the gamma model")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--mean-days", o.mean_days, "Mean inter-event time for the gamma model");

  std::vector<std::string> argv_storage{"quakealarm"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  o.rc.subcommand = chosen->get_name();
  try {
    if (chosen == ingest) return cmd_ingest(o, out, err);
    if (chosen == eval) return cmd_eval(o, out, err);
    if (chosen == test) return cmd_test(o, out, err);
    if (chosen == table1) return cmd_table1(o, out, err);
    if (chosen == declust) return cmd_decluster(o, out, err);
    return cmd_simulate(o, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace quakealarm::cli
