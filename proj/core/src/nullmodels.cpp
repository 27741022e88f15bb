#include "quakealarm/nullmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "quakealarm/errors.hpp"

namespace quakealarm {

namespace {

std::size_t poisson_count(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<std::size_t>(dist(rng));
}

Instant uniform_instant(const TimeInterval& interval, Rng& rng) {
  const Instant t = interval.start + seconds_to_duration(rng.uniform01() * interval.seconds());
  // Rounding to microseconds can land exactly on the open end.
  return t < interval.end ? t : interval.end - Duration{1};
}

void copy_marks(Event& dst, const Event& src) {
  dst.depth_km = src.depth_km;
  dst.mb = src.mb;
  dst.ms = src.ms;
}

bool boxes_overlap(const LatLonBox& a, const LatLonBox& b) {
  return a.lat_min < b.lat_max && b.lat_min < a.lat_max && a.lon_min < b.lon_max &&
         b.lon_min < a.lon_max;
}

}  // namespace

std::vector<std::size_t> fisher_yates_permutation(
    std::size_t n, const std::function<std::size_t(std::size_t)>& draw) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j = draw(i);
    if (j > i) throw ArgumentError("Fisher-Yates draw out of range");
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

std::vector<std::size_t> fisher_yates_permutation(std::size_t n, Rng& rng) {
  return fisher_yates_permutation(n, [&rng](std::size_t i) { return rng.uniform_index(i + 1); });
}

Catalog apply_time_permutation(const Catalog& catalog, std::span<const std::size_t> perm) {
  if (perm.size() != catalog.size()) {
    throw ArgumentError("permutation length does not match catalog size");
  }
  std::vector<Event> events = catalog.events();
  for (std::size_t k = 0; k < events.size(); ++k) {
    events[k].time = catalog[perm[k]].time;
  }
  return Catalog(std::move(events), catalog.span(), catalog.magnitude_selector());
}

Catalog permute_times(const Catalog& catalog, Rng& rng) {
  const auto perm = fisher_yates_permutation(catalog.size(), rng);
  return apply_time_permutation(catalog, perm);
}

Catalog randomize_times_uniform(const Catalog& catalog, Rng& rng) {
  std::vector<Event> events = catalog.events();
  for (auto& e : events) e.time = uniform_instant(catalog.span().interval, rng);
  return Catalog(std::move(events), catalog.span(), catalog.magnitude_selector());
}

Catalog gen_homogeneous_poisson(double rate_per_s, const StudyVolume& volume,
                                const Catalog& marks, Rng& rng) {
  if (!(rate_per_s >= 0.0) || !std::isfinite(rate_per_s)) {
    throw ArgumentError("Poisson rate must be finite and >= 0");
  }
  const std::size_t n = poisson_count(rate_per_s * volume.duration_s(), rng);
  std::vector<Event> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    Event& e = events[i];
    e.time = uniform_instant(volume.interval, rng);
    if (marks.empty()) {
      e.epicenter = sample_uniform(volume.region, rng);
    } else {
      const Event& src = marks[rng.uniform_index(marks.size())];
      e.epicenter = src.epicenter;
      copy_marks(e, src);
    }
    e.source_id = "sim-" + std::to_string(i);
  }
  return Catalog(std::move(events), volume, marks.magnitude_selector());
}

void CellGrid::validate() const {
  if (cells.size() != rates_per_s.size()) {
    throw ArgumentError("cell grid has " + std::to_string(cells.size()) + " cells but " +
                        std::to_string(rates_per_s.size()) + " rates");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    quakealarm::validate(Region{cells[i]});
    if (!(rates_per_s[i] >= 0.0) || !std::isfinite(rates_per_s[i])) {
      throw ArgumentError("cell rate must be finite and >= 0");
    }
  }
  // Sweep by lat_min keeps the disjointness check near-linear on regular grids.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cells[a].lat_min < cells[b].lat_min;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t k = i + 1; k < order.size(); ++k) {
      const auto& a = cells[order[i]];
      const auto& b = cells[order[k]];
      if (b.lat_min >= a.lat_max) break;
      if (boxes_overlap(a, b)) throw ArgumentError("grid cells overlap");
    }
  }
}

std::optional<std::size_t> CellGrid::cell_of(const GeoPoint& p) const {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (contains(cells[i], p)) return i;
  }
  return std::nullopt;
}

std::vector<LatLonBox> lat_lon_grid(double cell_deg) {
  if (!(cell_deg > 0.0) || cell_deg > 180.0) {
    throw ArgumentError("grid cell size must lie in (0, 180] degrees");
  }
  std::vector<LatLonBox> boxes;
  for (double lat = -90.0; lat < 90.0 - 1e-9; lat += cell_deg) {
    for (double lon = -180.0; lon < 180.0 - 1e-9; lon += cell_deg) {
      boxes.push_back({lat, std::min(90.0, lat + cell_deg), lon, std::min(180.0, lon + cell_deg)});
    }
  }
  return boxes;
}

Catalog gen_heterogeneous_poisson(const CellGrid& grid, const TimeInterval& interval,
                                  const Catalog& marks, Rng& rng) {
  grid.validate();
  if (!(interval.start < interval.end)) throw ArgumentError("empty time interval");

  std::vector<std::vector<std::size_t>> marks_by_cell(grid.cells.size());
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (const auto c = grid.cell_of(marks[i].epicenter)) marks_by_cell[*c].push_back(i);
  }

  std::vector<Event> events;
  for (std::size_t c = 0; c < grid.cells.size(); ++c) {
    const std::size_t n = poisson_count(grid.rates_per_s[c] * interval.seconds(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      Event e;
      e.time = uniform_instant(interval, rng);
      e.epicenter = sample_uniform(grid.cells[c], rng);
      if (!marks_by_cell[c].empty()) {
        copy_marks(e, marks[marks_by_cell[c][rng.uniform_index(marks_by_cell[c].size())]]);
      } else if (!marks.empty()) {
        copy_marks(e, marks[rng.uniform_index(marks.size())]);
      }
      e.source_id = "sim-" + std::to_string(events.size());
      events.push_back(std::move(e));
    }
  }
  return Catalog(std::move(events), StudyVolume{GlobalSphere{}, interval},
                 marks.magnitude_selector());
}

std::vector<Instant> gen_gamma_renewal(double shape, double mean_interval_s,
                                       const TimeInterval& interval, Rng& rng) {
  if (!(shape > 0.0) || !(mean_interval_s > 0.0)) {
    throw ArgumentError("gamma renewal needs shape > 0 and mean interval > 0");
  }
  std::gamma_distribution<double> gap(shape, mean_interval_s / shape);
  std::vector<Instant> times;
  const double span_s = interval.seconds();
  double elapsed = 0.0;
  while (true) {
    elapsed += gap(rng);
    if (elapsed >= span_s) break;
    const Instant t = interval.start + seconds_to_duration(elapsed);
    if (t >= interval.end) break;
    times.push_back(t);
  }
  return times;
}

CellGrid historical_cell_rates(const Catalog& catalog, std::vector<LatLonBox> cells) {
  CellGrid grid{std::move(cells), {}};
  grid.rates_per_s.assign(grid.cells.size(), 0.0);
  grid.validate();
  const double duration = catalog.span().duration_s();
  for (const auto& e : catalog) {
    const auto c = grid.cell_of(e.epicenter);
    if (!c) {
      throw ArgumentError("event at " + format_iso8601(e.time) +
                          " falls in no cell; cells must partition the region");
    }
    grid.rates_per_s[*c] += 1.0;
  }
  for (auto& r : grid.rates_per_s) r /= duration;
  return grid;
}

}  // namespace quakealarm
