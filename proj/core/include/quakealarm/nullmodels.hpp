#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "quakealarm/catalog.hpp"
#include "quakealarm/rng.hpp"

namespace quakealarm {

/// Fisher-Yates shuffle of the identity permutation. For i = n-1 down to 1 it
/// swaps positions i and draw(i), where draw(i) must return a value in [0, i].
std::vector<std::size_t> fisher_yates_permutation(
    std::size_t n, const std::function<std::size_t(std::size_t)>& draw);
std::vector<std::size_t> fisher_yates_permutation(std::size_t n, Rng& rng);

/// Event k keeps its location and magnitudes and takes the time of event
/// perm[k]; the result is re-sorted by time.
Catalog apply_time_permutation(const Catalog& catalog, std::span<const std::size_t> perm);

/// Exchangeable-times null: a uniformly random reassignment of the observed
/// times to the observed (location, magnitude) marks.
Catalog permute_times(const Catalog& catalog, Rng& rng);

/// Locations and magnitudes fixed; each time iid uniform on the span. Given
/// the number of events this is also the conditional Poisson-times model.
Catalog randomize_times_uniform(const Catalog& catalog, Rng& rng);

/// Homogeneous Poisson process on `volume` with `rate_per_s` events per
/// second. Marks (location, depth, magnitudes) are resampled with replacement
/// from `marks`; with no marks, locations are area-uniform and magnitudes
/// absent.
Catalog gen_homogeneous_poisson(double rate_per_s, const StudyVolume& volume,
                                const Catalog& marks, Rng& rng);

/// Disjoint lat/lon cells with a historical rate (events per second) each.
struct CellGrid {
  std::vector<LatLonBox> cells;
  std::vector<double> rates_per_s;

  /// Throws ArgumentError for overlapping or degenerate cells, negative
  /// rates or mismatched lengths.
  void validate() const;
  std::optional<std::size_t> cell_of(const GeoPoint& p) const;
};

/// Regular grid of `cell_deg` x `cell_deg` boxes over the globe.
std::vector<LatLonBox> lat_lon_grid(double cell_deg);

/// Independent homogeneous Poisson process per cell. Locations are uniform
/// within the cell; depth and magnitudes come from a random mark inside the
/// same cell, or from the whole mark catalog when the cell has none.
Catalog gen_heterogeneous_poisson(const CellGrid& grid, const TimeInterval& interval,
                                  const Catalog& marks, Rng& rng);

/// Renewal process with Gamma(shape, mean/shape) gaps, started at
/// interval.start and truncated at interval.end. shape < 1 clusters.
std::vector<Instant> gen_gamma_renewal(double shape, double mean_interval_s,
                                       const TimeInterval& interval, Rng& rng);

/// lambda_j = (events in cell j) / span duration. Throws ArgumentError if an
/// event falls in no cell.
CellGrid historical_cell_rates(const Catalog& catalog, std::vector<LatLonBox> cells);

}  // namespace quakealarm
