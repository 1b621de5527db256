#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace estop {

// Discretized non-negative risk density W(t,s) over prediction time (rows)
// and arc length (columns). Row i lives at t0 + i*dt_grid, column j at
// j*ds_grid. Immutable after construction; concurrent reads are safe.
struct PenaltyField {
  double t0 = 0.0;       // cycle origin [s], normally 0
  double dt_grid = 0.1;  // row spacing [s]
  double ds_grid = 0.25; // column spacing [m]
  int n_t = 0;
  int n_s = 0;
  std::vector<double> values;  // row-major, n_t * n_s

  double at(int row, int col) const { return values[static_cast<size_t>(row) * n_s + col]; }
  double& at(int row, int col) { return values[static_cast<size_t>(row) * n_s + col]; }

  // Linear interpolation along s within a row; 0 outside [0, (n_s-1)*ds_grid].
  // Throws ParamError for a row index out of range.
  double sample(int row, double s) const;

  double s_extent() const { return (n_s - 1) * ds_grid; }

  // Throws ParamError when shape/spacing/values violate the invariants.
  void validate() const;
};

// Deterministic synthetic field: 2-D cumulative random walk, box-smoothed
// with a `smoothness`-cell window along both axes, then min-max normalized
// into [0,1].
PenaltyField generate_brownian(std::uint64_t seed, int n_t, int n_s, double dt_grid,
                               double ds_grid, int smoothness);

// Hand-authored scenario: moving rectangular bands plus static zones that
// apply at every row. Cell values are the sum of contributions clamped to [0,1].
struct MovingBand {
  double s_start = 0.0;  // band center at t = 0 [m]
  double speed = 0.0;    // [m/s]
  double width = 0.0;    // [m]
  double weight = 0.0;   // >= 0
};

struct StaticZone {
  double s_lo = 0.0;  // [m]
  double s_hi = 0.0;  // [m]
  double weight = 0.0;
};

struct ScenarioSpec {
  double dt_grid = 0.1;
  double ds_grid = 0.25;
  int n_t = 2;
  int n_s = 2;
  std::vector<MovingBand> bands;
  std::vector<StaticZone> zones;
};

PenaltyField generate_scenario(const ScenarioSpec& spec);

// CSV exchange format. First line:
//   # t0=<float> dt=<float> ds=<float> nt=<int> ns=<int>
// followed by nt lines of ns comma-separated values (one line per time row).
PenaltyField read_field_csv(const std::string& path);
void write_field_csv(const PenaltyField& field, const std::string& path);

// Optional overlay for renders: polylines of (row, s) samples.
struct TrajectoryFan {
  using Trajectory = std::vector<std::pair<int, double>>;
  std::vector<Trajectory> trajectories;
};

// 8-bit binary PGM (P5), width n_s, height n_t, row 0 at top; cell value is
// 255*W clamped, overlay samples drawn at max intensity.
void render_pgm(const PenaltyField& field, const TrajectoryFan* overlay,
                const std::string& path);

}  // namespace estop
