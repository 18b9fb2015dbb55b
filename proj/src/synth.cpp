#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hmr/data.hpp"
#include "hmr/error.hpp"

namespace hmr {

namespace {

// mt19937_64 is specified bit-exactly by the standard; the distributions
// are not, so uniforms and normals are derived here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::string culture_name(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "C%03zu", index + 1);
  return buffer;
}

void check_options(const SynthOptions& options) {
  if (options.cultures < 1) throw InvalidArgument("synthesize: need at least 1 culture");
  if (options.days < 3) throw InvalidArgument("synthesize: need at least 3 days");
  if (!(options.noise >= 0.0) || !std::isfinite(options.noise)) {
    throw InvalidArgument("synthesize: noise must be finite and >= 0");
  }
}

double reflect_unit(double x) {
  x = std::fmod(std::abs(x), 2.0);
  return x > 1.0 ? 2.0 - x : x;
}

}  // namespace

const std::vector<std::string>& bioprocess_parameters() {
  static const std::vector<std::string> names = {
      "ECT",     "EGN",        "VCD",         "TCD",  "Viability", "mAb",   "Glucose", "Lactate",
      "Glutamine", "Glutamate", "NH4+",       "K+",   "Na+",       "Osmolality", "Temperature", "pH",
      "pCO2",    "pO2",        "HCO3-",       "ACV",  "ACD",       "FeedVolume", "Agitation"};
  return names;
}

CultureDataset synthesize(const SynthOptions& options) {
  check_options(options);
  Rng rng(options.seed);
  const double noise = options.noise;
  const std::size_t days = options.days;

  CultureDataset data;
  data.parameters = bioprocess_parameters();
  for (std::size_t c = 0; c < options.cultures; ++c) {
    const double mu = rng.uniform(0.45, 0.75);
    const double capacity = rng.uniform(12.0, 30.0);
    const double seed_density = rng.uniform(0.3, 0.8);
    const double death_day = rng.uniform(8.0, 12.0);
    const double death_rate = rng.uniform(0.08, 0.25);
    const double productivity = rng.uniform(0.3, 1.5);
    const double shift_day = std::floor(rng.uniform(5.0, 8.0));
    const double temp_base = rng.uniform(36.5, 37.0);
    const double agitation = rng.uniform(90.0, 120.0);
    const double glutamine0 = rng.uniform(4.0, 6.0);
    const double glucose0 = rng.uniform(5.0, 7.0);
    const double sodium0 = rng.uniform(115.0, 125.0);

    double vcd = seed_density;
    double dead = 0.02 * seed_density;
    double titer = rng.uniform(0.0, 0.05);
    double generations = 0.0;
    double glucose = glucose0;
    double lactate = rng.uniform(0.2, 0.5);
    double glutamine = glutamine0;
    int feeds = 0;

    CultureSeries series;
    series.culture_id = culture_name(c);
    for (std::size_t d = 0; d < days; ++d) {
      const double t = static_cast<double>(d + 1);
      const bool shifted = t >= shift_day;
      const double temperature = shifted ? temp_base - 3.5 : temp_base;
      const double acv = 1.8 + 0.05 * (t - 1.0) + (t >= death_day ? 0.1 : 0.0);
      const double osmolality = 290.0 + 6.0 * feeds + 2.0 * lactate;
      const double pco2 = 35.0 + 0.8 * vcd;
      auto observe = [&](double value) { return value * (1.0 + noise * rng.normal()); };

      std::vector<double> row = {
          24.0 * (t - 1.0),
          generations,
          observe(vcd),
          observe(vcd + dead),
          observe(100.0 * vcd / (vcd + dead)),
          observe(titer),
          observe(glucose),
          observe(lactate),
          observe(glutamine),
          observe(1.0 + 0.3 * (glutamine0 - glutamine)),
          observe(0.5 + 0.4 * (glutamine0 - glutamine)),
          observe(4.0 + 0.08 * (t - 1.0) + 0.02 * feeds),
          observe(sodium0 + 0.4 * (osmolality - 290.0)),
          observe(osmolality),
          temperature + 3.0 * noise * rng.normal(),
          7.1 - 0.03 * lactate + 0.2 * noise * rng.normal(),
          observe(pco2),
          observe(60.0 - 0.8 * vcd),
          observe(20.0 + 0.25 * pco2),
          observe(acv),
          observe(12.0 * std::cbrt(acv / 1.8)),
          30.0 * feeds,
          agitation + noise * rng.normal(),
      };
      series.days.push_back(static_cast<int>(d + 1));
      series.values.push_back(std::move(row));

      // Advance the hidden state to the next day.
      const double growth = mu * (1.0 - vcd / capacity) * (shifted ? 0.7 : 1.0);
      const double death = t >= death_day ? death_rate : 0.02;
      const double shock = noise > 0.0 ? std::exp(noise * rng.normal()) : 1.0;
      const double next_vcd = vcd * std::exp(growth - death) * shock;
      const double mean_vcd = 0.5 * (vcd + next_vcd);
      dead += vcd * (1.0 - std::exp(-death)) + 0.01 * vcd;
      titer += 0.02 * productivity * mean_vcd;
      if (next_vcd > vcd) generations += std::log2(next_vcd / vcd);
      if (d >= 2 && d % 2 == 0) {
        ++feeds;
        glucose += 2.0;
      }
      glucose = std::max(0.5, glucose - 0.03 * mean_vcd);
      lactate = t < 6.0 ? lactate + 0.02 * mean_vcd : std::max(0.2, lactate - 0.1);
      glutamine = std::max(0.05, glutamine * std::exp(-0.02 * mean_vcd));
      vcd = next_vcd;
    }
    data.cultures.push_back(std::move(series));
  }
  return data;
}

CultureDataset synthesize_benchmark(const SynthOptions& options) {
  check_options(options);
  Rng rng(options.seed);

  // Triangle wave with three linear pieces on [0, 1].
  auto triangle = [](double z) {
    const double s = 1.5 * z;
    return 1.0 - std::abs(2.0 * (s - std::floor(s)) - 1.0);
  };
  auto response = [&](double u1, double u2) {
    return 1.2 * triangle(u1) + (u2 > 0.5 ? 0.6 * u2 : -0.3 * u2);
  };

  CultureDataset data;
  data.parameters = {"u1", "u2", "u3", "y"};
  for (std::size_t c = 0; c < options.cultures; ++c) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    double y = rng.uniform(0.0, 1.5);
    CultureSeries series;
    series.culture_id = culture_name(c);
    for (std::size_t d = 0; d < options.days; ++d) {
      series.days.push_back(static_cast<int>(d + 1));
      series.values.push_back({u1, u2, rng.uniform(), y});
      y = response(u1, u2) + 0.3 * y + options.noise * rng.normal();
      u1 = reflect_unit(u1 + 0.25 * rng.normal());
      u2 = reflect_unit(u2 + 0.25 * rng.normal());
    }
    data.cultures.push_back(std::move(series));
  }
  return data;
}

}  // namespace hmr
