#include "quakealarm/alarm.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "quakealarm/errors.hpp"

namespace quakealarm {

namespace {

// Kilometres per degree of latitude; a cheap lower bound on distance.
constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

std::string number_text(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

bool Alarm::covers(const GeoPoint& p, Instant t) const {
  if (!(t_start < t && t <= t_end)) return false;
  if (std::abs(p.lat() - center.lat()) * kKmPerDegree > radius_km * (1 + 1e-9)) {
    return false;
  }
  return great_circle_km(center, p) <= radius_km;
}

void AlarmConfig::validate() const {
  if (!std::isfinite(mag_threshold)) {
    throw ArgumentError("alarm magnitude threshold must be finite");
  }
  if (!(window_days > 0.0) || !std::isfinite(window_days)) {
    throw ArgumentError("alarm window_days must be > 0");
  }
  if (!(radius_km > 0.0) || radius_km > std::numbers::pi * kEarthRadiusKm) {
    throw ArgumentError("alarm radius_km must lie in (0, pi R_E]");
  }
}

AlarmSet::AlarmSet(std::vector<Alarm> alarms, PredictorMode mode,
                   std::optional<AlarmConfig> config)
    : alarms_(std::move(alarms)), mode_(mode), config_(std::move(config)) {
  for (auto& a : alarms_) {
    if (a.nominal_end < a.t_end) a.nominal_end = a.t_end;
    if (!(a.radius_km > 0.0) || a.radius_km > std::numbers::pi * kEarthRadiusKm) {
      throw ArgumentError("alarm radius must lie in (0, pi R_E]");
    }
    if (!(a.t_start < a.t_end)) {
      throw ArgumentError("alarm interval must satisfy t_start < t_end");
    }
    if (!std::isfinite(a.mag_floor)) throw ArgumentError("alarm magnitude floor must be finite");
  }
  if (config_) config_->validate();
}

AlarmSet generate_alarms(const Catalog& catalog, const AlarmConfig& config,
                         PredictorMode mode) {
  config.validate();
  if (mode == PredictorMode::External) {
    throw ArgumentError("generate_alarms needs predictor mode I or II");
  }
  const Duration window = days_to_duration(config.window_days);
  const Instant span_end = catalog.span().interval.end;

  std::vector<Alarm> alarms;
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    const auto m = catalog.magnitude(j);
    if (!m || *m < config.mag_threshold) continue;
    const Event& e = catalog[j];
    Alarm a;
    a.center = e.epicenter;
    a.radius_km = config.radius_km;
    a.t_start = e.time;
    a.nominal_end = e.time + window;
    a.t_end = std::min(a.nominal_end, span_end);
    a.mag_floor = mode == PredictorMode::I ? config.mag_threshold : *m;
    a.trigger_index = j;
    alarms.push_back(a);
  }
  return AlarmSet(std::move(alarms), mode, config);
}

AlarmLookup::AlarmLookup(const AlarmSet& alarms) : alarms_(&alarms) {
  order_.resize(alarms.size());
  for (std::size_t j = 0; j < order_.size(); ++j) order_[j] = j;
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return alarms[a].t_start < alarms[b].t_start;
  });
  starts_.reserve(order_.size());
  for (const std::size_t j : order_) {
    starts_.push_back(alarms[j].t_start);
    max_length_ = std::max(max_length_, alarms[j].t_end - alarms[j].t_start);
    max_radius_km_ = std::max(max_radius_km_, alarms[j].radius_km);
  }
}

bool AlarmLookup::covers_any(const GeoPoint& p, Instant t) const {
  bool hit = false;
  for_each_covering(p, t, [&](std::size_t) { hit = true; });
  return hit;
}

bool is_predicted(const GeoPoint& epicenter, Instant time, double magnitude,
                  std::optional<std::size_t> self_index, const AlarmSet& alarms,
                  const AlarmLookup& lookup) {
  bool covered = false;
  double max_floor = -std::numeric_limits<double>::infinity();
  lookup.for_each_covering(epicenter, time, [&](std::size_t j) {
    if (self_index && alarms[j].trigger_index == self_index) return;
    covered = true;
    max_floor = std::max(max_floor, alarms[j].mag_floor);
  });
  return covered && magnitude >= max_floor;
}

bool is_predicted(const GeoPoint& epicenter, Instant time, double magnitude,
                  std::optional<std::size_t> self_index, const AlarmSet& alarms) {
  return is_predicted(epicenter, time, magnitude, self_index, alarms, AlarmLookup(alarms));
}

bool is_predicted(const Catalog& targets, std::size_t k, const AlarmSet& alarms) {
  const auto m = targets.magnitude(k);
  if (!m) return false;
  return is_predicted(targets[k].epicenter, targets[k].time, *m, k, alarms);
}

std::vector<bool> predicted_flags(const Catalog& targets, const AlarmSet& alarms) {
  const AlarmLookup lookup(alarms);
  std::vector<bool> flags(targets.size(), false);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto m = targets.magnitude(k);
    if (!m) continue;
    flags[k] = is_predicted(targets[k].epicenter, targets[k].time, *m, k, alarms, lookup);
  }
  return flags;
}

std::size_t count_predicted(const Catalog& targets, const AlarmSet& alarms) {
  const auto flags = predicted_flags(targets, alarms);
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

std::size_t count_successful_alarms(const AlarmSet& alarms, const Catalog& targets) {
  const AlarmLookup lookup(alarms);
  std::vector<bool> success(alarms.size(), false);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto m = targets.magnitude(k);
    if (!m) continue;
    lookup.for_each_covering(targets[k].epicenter, targets[k].time, [&](std::size_t j) {
      if (alarms[j].trigger_index == k) return;
      if (*m >= alarms[j].mag_floor) success[j] = true;
    });
  }
  return static_cast<std::size_t>(std::count(success.begin(), success.end(), true));
}

ScoreSummary ScoreSummary::from_counts(std::size_t Q, std::size_t A, std::size_t S,
                                       std::size_t P, double v_upper) {
  if (S > A || P > Q) {
    throw ArgumentError("score counts violate S <= A and P <= Q");
  }
  ScoreSummary r;
  r.Q = Q;
  r.A = A;
  r.S = S;
  r.P = P;
  r.F = A - S;
  r.M = Q - P;
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.s = ratio(S, A);
  r.p = ratio(P, Q);
  r.f = ratio(r.F, A);
  r.m = ratio(r.M, Q);
  r.v_upper = v_upper;
  return r;
}

ScoreSummary score(const Catalog& targets, const AlarmSet& alarms,
                   const StudyVolume& volume) {
  return ScoreSummary::from_counts(targets.size(), alarms.size(),
                                   count_successful_alarms(alarms, targets),
                                   count_predicted(targets, alarms),
                                   alarm_volume_fraction(alarms, volume));
}

double alarm_volume_fraction(const AlarmSet& alarms, const StudyVolume& volume,
                             VolumeConvention convention) {
  double total = 0.0;
  for (const auto& a : alarms) {
    double duration_s = 0.0;
    if (convention == VolumeConvention::Nominal) {
      duration_s = to_seconds(a.nominal_end - a.t_start);
    } else {
      const Instant lo = std::max(a.t_start, volume.interval.start);
      const Instant hi = std::min(a.t_end, volume.interval.end);
      duration_s = hi > lo ? to_seconds(hi - lo) : 0.0;
    }
    total += cap_area_km2(a.radius_km) * duration_s;
  }
  return total / (volume.area_km2() * volume.duration_s());
}

McEstimate union_volume_fraction_mc(const AlarmSet& alarms, const StudyVolume& volume,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ArgumentError("n_samples must be >= 1");
  const AlarmLookup lookup(alarms);
  Rng rng(seed);
  const double span_s = volume.duration_s();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const GeoPoint p = sample_uniform(volume.region, rng);
    const Instant t = volume.interval.start + seconds_to_duration(rng.uniform01() * span_s);
    if (lookup.covers_any(p, t)) ++hits;
  }
  McEstimate est;
  est.n_samples = n_samples;
  est.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(n_samples));
  return est;
}

void write_alarm_csv(std::ostream& out, const AlarmSet& alarms) {
  out << kAlarmCsvHeader << '\n';
  for (const auto& a : alarms) {
    out << format_iso8601(a.t_start) << ',' << number_text(a.center.lat()) << ','
        << number_text(a.center.lon()) << ',' << number_text(a.radius_km) << ','
        << format_iso8601(a.t_start) << ',' << format_iso8601(a.t_end) << ','
        << number_text(a.mag_floor) << '\n';
  }
}

AlarmSet parse_alarm_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing alarm CSV header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kAlarmCsvHeader) {
    throw ParseError("line 1: expected header '" + std::string(kAlarmCsvHeader) + "'", 1);
  }
  std::vector<Alarm> alarms;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.push_back(cell);
    if (f.size() != 7) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 7 fields", lineno);
    }
    try {
      Alarm a;
      a.center = GeoPoint(std::stod(f[1]), std::stod(f[2]));
      a.radius_km = std::stod(f[3]);
      a.t_start = parse_iso8601(f[4]);
      a.t_end = parse_iso8601(f[5]);
      a.nominal_end = a.t_end;
      a.mag_floor = std::stod(f[6]);
      alarms.push_back(a);
    } catch (const std::exception& err) {
      throw ParseError("line " + std::to_string(lineno) + ": " + err.what(), lineno);
    }
  }
  return AlarmSet(std::move(alarms), PredictorMode::External);
}

}  // namespace quakealarm
