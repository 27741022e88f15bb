#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "quakealarm/catalog.hpp"

namespace quakealarm {

enum class PredictorMode {
  I,        ///< floor = threshold magnitude
  II,       ///< floor = trigger magnitude
  External  ///< supplied from outside, not generated here
};

/// One deterministic prediction: spherical cap x (t_start, t_end] x [mag_floor, inf).
struct Alarm {
  GeoPoint center;
  double radius_km = 0.0;
  Instant t_start;
  Instant t_end;
  /// End before truncation at the study end. AlarmSet raises it to t_end
  /// when it is earlier (external alarms).
  Instant nominal_end;
  double mag_floor = 0.0;
  /// Index of the triggering event in the catalog the alarm set was
  /// generated from.
  std::optional<std::size_t> trigger_index;

  bool covers(const GeoPoint& p, Instant t) const;

  friend bool operator==(const Alarm&, const Alarm&) = default;
};

struct AlarmConfig {
  double mag_threshold = 5.5;
  double window_days = 21.0;
  double radius_km = 50.0;

  /// Throws ArgumentError for non-positive window or radius or a non-finite
  /// threshold.
  void validate() const;

  friend bool operator==(const AlarmConfig&, const AlarmConfig&) = default;
};

class AlarmSet {
 public:
  AlarmSet() = default;
  /// Throws ArgumentError for a non-positive radius or an empty interval.
  explicit AlarmSet(std::vector<Alarm> alarms,
                    PredictorMode mode = PredictorMode::External,
                    std::optional<AlarmConfig> config = std::nullopt);

  const std::vector<Alarm>& alarms() const { return alarms_; }
  std::size_t size() const { return alarms_.size(); }
  bool empty() const { return alarms_.empty(); }
  const Alarm& operator[](std::size_t i) const { return alarms_[i]; }
  auto begin() const { return alarms_.begin(); }
  auto end() const { return alarms_.end(); }

  PredictorMode mode() const { return mode_; }
  const std::optional<AlarmConfig>& config() const { return config_; }

 private:
  std::vector<Alarm> alarms_;
  PredictorMode mode_ = PredictorMode::External;
  std::optional<AlarmConfig> config_;
};

/// One alarm per event whose authoritative magnitude is >= the threshold,
/// ordered by trigger time. Windows are (t_j, t_j + window] truncated at the
/// catalog's span end. `mode` must be I or II.
AlarmSet generate_alarms(const Catalog& catalog, const AlarmConfig& config,
                         PredictorMode mode);

/// Time-sorted view over an alarm set answering "which alarms cover (r, t)".
/// Candidates are found by binary search on start time bounded by the
/// longest alarm, then filtered by distance.
class AlarmLookup {
 public:
  explicit AlarmLookup(const AlarmSet& alarms);

  /// Calls fn(alarm_index) for every alarm covering (p, t).
  template <class Fn>
  void for_each_covering(const GeoPoint& p, Instant t, Fn&& fn) const;

  bool covers_any(const GeoPoint& p, Instant t) const;

 private:
  const AlarmSet* alarms_;
  std::vector<std::size_t> order_;   // alarm indices sorted by t_start
  std::vector<Instant> starts_;      // t_start in that order
  Duration max_length_{0};
  double max_radius_km_ = 0.0;
};

/// Membership rule shared by both predictors: the covering alarms (minus any
/// triggered by the event itself) must be nonempty and the magnitude must
/// reach the largest floor among them. With equal floors this is plain
/// membership in some alarm.
bool is_predicted(const GeoPoint& epicenter, Instant time, double magnitude,
                  std::optional<std::size_t> self_index, const AlarmSet& alarms);
bool is_predicted(const GeoPoint& epicenter, Instant time, double magnitude,
                  std::optional<std::size_t> self_index, const AlarmSet& alarms,
                  const AlarmLookup& lookup);

/// Event k of `targets` is matched against trigger_index k, which is correct
/// when the alarms were generated from `targets` itself.
bool is_predicted(const Catalog& targets, std::size_t k, const AlarmSet& alarms);

std::vector<bool> predicted_flags(const Catalog& targets, const AlarmSet& alarms);
std::size_t count_predicted(const Catalog& targets, const AlarmSet& alarms);
std::size_t count_successful_alarms(const AlarmSet& alarms, const Catalog& targets);

/// Counts and rates for one evaluation. Construction enforces F = A - S and
/// M = Q - P.
struct ScoreSummary {
  std::size_t Q = 0, A = 0, S = 0, P = 0, F = 0, M = 0;
  double s = 0.0, p = 0.0, f = 0.0, m = 0.0;
  double v_upper = 0.0;

  static ScoreSummary from_counts(std::size_t Q, std::size_t A, std::size_t S,
                                  std::size_t P, double v_upper);
};

ScoreSummary score(const Catalog& targets, const AlarmSet& alarms,
                   const StudyVolume& volume);

enum class VolumeConvention {
  Nominal,   ///< full configured window per alarm
  Truncated  ///< each alarm clipped to the study interval
};

/// Sum of cap area x duration over alarms divided by the study volume; an
/// upper bound on the covered fraction since overlaps are counted twice.
double alarm_volume_fraction(const AlarmSet& alarms, const StudyVolume& volume,
                             VolumeConvention convention = VolumeConvention::Nominal);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Monte-Carlo estimate of the covered fraction (union of alarms) from
/// area-uniform points and uniform times in the study volume.
McEstimate union_volume_fraction_mc(const AlarmSet& alarms, const StudyVolume& volume,
                                    std::size_t n_samples, std::uint64_t seed);

/// CSV columns `trigger_time,lat,lon,radius_km,t_start,t_end,mag_floor`.
inline constexpr std::string_view kAlarmCsvHeader =
    "trigger_time,lat,lon,radius_km,t_start,t_end,mag_floor";
void write_alarm_csv(std::ostream& out, const AlarmSet& alarms);
/// Reads an external alarm set (mode External, no trigger linkage).
AlarmSet parse_alarm_csv(std::istream& in);

// ---------------------------------------------------------------------------

template <class Fn>
void AlarmLookup::for_each_covering(const GeoPoint& p, Instant t, Fn&& fn) const {
  const auto first = std::lower_bound(starts_.begin(), starts_.end(), t - max_length_);
  for (auto it = first; it != starts_.end() && *it < t; ++it) {
    const std::size_t j = order_[static_cast<std::size_t>(it - starts_.begin())];
    if ((*alarms_)[j].covers(p, t)) fn(j);
  }
}

}  // namespace quakealarm
