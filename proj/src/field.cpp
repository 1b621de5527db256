#include "estop/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "estop/errors.hpp"

namespace estop {

void PenaltyField::validate() const {
  if (n_t < 2 || n_s < 2) throw ParamError("field needs n_t >= 2 and n_s >= 2");
  if (!(dt_grid > 0.0) || !(ds_grid > 0.0)) throw ParamError("grid spacings must be > 0");
  if (values.size() != static_cast<size_t>(n_t) * n_s)
    throw ParamError("value array does not match n_t * n_s");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw ParamError("field values must be finite and >= 0");
  }
}

double PenaltyField::sample(int row, double s) const {
  if (row < 0 || row >= n_t) throw ParamError("row index out of range");
  if (s < 0.0 || s > s_extent()) return 0.0;
  const double x = s / ds_grid;
  int j = static_cast<int>(x);
  if (j >= n_s - 1) return at(row, n_s - 1);
  const double frac = x - j;
  return (1.0 - frac) * at(row, j) + frac * at(row, j + 1);
}

namespace {

// Uniform in [-0.5, 0.5) from the top 53 bits; keeps the generator portable
// across standard library implementations.
double step_from(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
}

// Truncated centered moving average along one axis, window w cells.
void box_smooth(std::vector<double>& v, int n_t, int n_s, int w, bool along_s) {
  if (w <= 1) return;
  const int half = w / 2;
  std::vector<double> out(v.size());
  const int outer = along_s ? n_t : n_s;
  const int inner = along_s ? n_s : n_t;
  auto idx = [&](int o, int i) {
    return along_s ? static_cast<size_t>(o) * n_s + i : static_cast<size_t>(i) * n_s + o;
  };
  for (int o = 0; o < outer; ++o) {
    double acc = 0.0;
    int lo = 0, hi = -1;  // running window [lo, hi]
    for (int i = 0; i < inner; ++i) {
      const int want_lo = std::max(0, i - half);
      const int want_hi = std::min(inner - 1, i + half);
      while (hi < want_hi) acc += v[idx(o, ++hi)];
      while (lo < want_lo) acc -= v[idx(o, lo++)];
      out[idx(o, i)] = acc / (want_hi - want_lo + 1);
    }
  }
  v.swap(out);
}

}  // namespace

PenaltyField generate_brownian(std::uint64_t seed, int n_t, int n_s, double dt_grid,
                               double ds_grid, int smoothness) {
  if (n_t < 2 || n_s < 2) throw ParamError("generate_brownian needs dimensions >= 2");
  if (!(dt_grid > 0.0) || !(ds_grid > 0.0)) throw ParamError("grid spacings must be > 0");
  if (smoothness < 1) throw ParamError("smoothness must be >= 1");

  PenaltyField f;
  f.t0 = 0.0;
  f.dt_grid = dt_grid;
  f.ds_grid = ds_grid;
  f.n_t = n_t;
  f.n_s = n_s;
  f.values.resize(static_cast<size_t>(n_t) * n_s);

  std::mt19937_64 rng(seed);
  for (double& v : f.values) v = step_from(rng);

  // Cumulative walk along s, then along t.
  for (int i = 0; i < n_t; ++i)
    for (int j = 1; j < n_s; ++j) f.at(i, j) += f.at(i, j - 1);
  for (int i = 1; i < n_t; ++i)
    for (int j = 0; j < n_s; ++j) f.at(i, j) += f.at(i - 1, j);

  box_smooth(f.values, n_t, n_s, smoothness, /*along_s=*/true);
  box_smooth(f.values, n_t, n_s, smoothness, /*along_s=*/false);

  const auto [mn_it, mx_it] = std::minmax_element(f.values.begin(), f.values.end());
  const double mn = *mn_it, range = *mx_it - *mn_it;
  if (range > 0.0) {
    for (double& v : f.values) v = (v - mn) / range;
  } else {
    std::fill(f.values.begin(), f.values.end(), 0.0);
  }
  return f;
}

PenaltyField generate_scenario(const ScenarioSpec& spec) {
  if (spec.n_t < 2 || spec.n_s < 2) throw ParamError("scenario needs dimensions >= 2");
  if (!(spec.dt_grid > 0.0) || !(spec.ds_grid > 0.0))
    throw ParamError("grid spacings must be > 0");
  for (const auto& b : spec.bands)
    if (b.weight < 0.0 || b.width < 0.0) throw ParamError("band weight/width must be >= 0");
  for (const auto& z : spec.zones)
    if (z.weight < 0.0) throw ParamError("zone weight must be >= 0");

  PenaltyField f;
  f.t0 = 0.0;
  f.dt_grid = spec.dt_grid;
  f.ds_grid = spec.ds_grid;
  f.n_t = spec.n_t;
  f.n_s = spec.n_s;
  f.values.assign(static_cast<size_t>(spec.n_t) * spec.n_s, 0.0);

  for (int i = 0; i < spec.n_t; ++i) {
    const double t = i * spec.dt_grid;
    for (int j = 0; j < spec.n_s; ++j) {
      const double s = j * spec.ds_grid;
      double v = 0.0;
      for (const auto& b : spec.bands) {
        const double center = b.s_start + b.speed * t;
        if (std::abs(s - center) <= 0.5 * b.width) v += b.weight;
      }
      for (const auto& z : spec.zones) {
        if (s >= z.s_lo && s <= z.s_hi) v += z.weight;
      }
      f.at(i, j) = std::min(v, 1.0);
    }
  }
  return f;
}

PenaltyField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open field file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty field file", 1);
  PenaltyField f;
  int nt = 0, ns = 0;
  if (std::sscanf(header.c_str(), "# t0=%lf dt=%lf ds=%lf nt=%d ns=%d", &f.t0, &f.dt_grid,
                  &f.ds_grid, &nt, &ns) != 5)
    throw FormatError("malformed header, expected '# t0=.. dt=.. ds=.. nt=.. ns=..'", 1);
  if (nt < 2 || ns < 2) throw FormatError("header dimensions must be >= 2", 1);
  if (!(f.dt_grid > 0.0) || !(f.ds_grid > 0.0))
    throw FormatError("header spacings must be > 0", 1);
  f.n_t = nt;
  f.n_s = ns;
  f.values.reserve(static_cast<size_t>(nt) * ns);

  std::string line;
  long lineno = 1;
  for (int i = 0; i < nt; ++i) {
    if (!std::getline(in, line)) throw FormatError("expected " + std::to_string(nt) + " data rows", ++lineno);
    ++lineno;
    std::stringstream ss(line);
    std::string cell;
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw FormatError("unparsable cell '" + cell + "'", lineno);
      if (!std::isfinite(v)) throw FormatError("non-finite cell value", lineno);
      if (v < 0.0) throw FormatError("negative cell value", lineno);
      f.values.push_back(v);
      ++count;
    }
    if (count != ns)
      throw FormatError("row has " + std::to_string(count) + " cells, expected " + std::to_string(ns), lineno);
  }
  return f;
}

void write_field_csv(const PenaltyField& field, const std::string& path) {
  field.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# t0=%.17g dt=%.17g ds=%.17g", field.t0, field.dt_grid,
                field.ds_grid);
  out << buf << " nt=" << field.n_t << " ns=" << field.n_s << "\n";
  for (int i = 0; i < field.n_t; ++i) {
    for (int j = 0; j < field.n_s; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", field.at(i, j));
      out << buf << (j + 1 < field.n_s ? "," : "");
    }
    out << "\n";
  }
  if (!out) throw FormatError("write failed: " + path);
}

void render_pgm(const PenaltyField& field, const TrajectoryFan* overlay,
                const std::string& path) {
  field.validate();
  std::vector<std::uint8_t> img(static_cast<size_t>(field.n_t) * field.n_s);
  for (size_t k = 0; k < img.size(); ++k) {
    const double v = std::clamp(field.values[k], 0.0, 1.0);
    img[k] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  if (overlay) {
    for (const auto& traj : overlay->trajectories) {
      for (const auto& [row, s] : traj) {
        if (row < 0 || row >= field.n_t) continue;
        const int col = static_cast<int>(std::lround(s / field.ds_grid));
        if (col < 0 || col >= field.n_s) continue;
        img[static_cast<size_t>(row) * field.n_s + col] = 255;
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << "P5\n" << field.n_s << " " << field.n_t << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace estop
