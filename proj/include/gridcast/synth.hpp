#ifndef GRIDCAST_SYNTH_HPP
#define GRIDCAST_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gridcast/common.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

// NEM-flavoured synthetic market: demand carries daily/weekly cycles and a
// temperature response, solar follows a daytime bell, wind is a slow
// autocorrelated process, and price couples to demand net of a merit-order
// renewable discount, with Gaussian noise and Pareto-tailed spikes.
// Every stochastic term scales with noise_sd and every cycle with the two
// amplitudes, so zeroing those knobs yields an exactly constant price.
struct SynthConfig {
  std::size_t n_hours = 8760;
  std::uint64_t seed = 42;
  double daily_amplitude = 800.0;   // MW
  double weekly_amplitude = 400.0;  // MW
  double base_price = 60.0;         // AUD/MWh
  double demand_coupling = 0.03;    // AUD/MWh per MW of demand deviation
  double spike_prob = 0.01;         // per-hour probability
  double spike_scale = 300.0;       // Pareto tail scale, AUD/MWh
  double noise_sd = 4.0;            // AUD/MWh
  double price_cap = 17500.0;       // market cap clamp
  double price_floor = -1000.0;     // negative prices allowed

  void validate() const {
    if (n_hours == 0) throw ConfigError("synth: n_hours must be positive");
    if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) {
      throw ConfigError("synth: spike_prob must be in [0, 1]");
    }
    if (spike_scale < 0.0) throw ConfigError("synth: spike_scale must be >= 0");
    if (noise_sd < 0.0) throw ConfigError("synth: noise_sd must be >= 0");
    if (daily_amplitude < 0.0 || weekly_amplitude < 0.0) {
      throw ConfigError("synth: amplitudes must be >= 0");
    }
    if (!(price_floor < price_cap)) {
      throw ConfigError("synth: price_floor must be below price_cap");
    }
  }
};

inline Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_hours;

  // first hour of 2024-04-01, the start of the NEM financial-year flavour
  const HourStamp start = detail::days_from_civil(2024, 4, 1) * 24;

  rng::SplitMix64 rng_temp(rng::derive_seed(cfg.seed, 1));
  rng::SplitMix64 rng_demand(rng::derive_seed(cfg.seed, 2));
  rng::SplitMix64 rng_cloud(rng::derive_seed(cfg.seed, 3));
  rng::SplitMix64 rng_wind(rng::derive_seed(cfg.seed, 4));
  rng::SplitMix64 rng_price(rng::derive_seed(cfg.seed, 5));
  rng::SplitMix64 rng_spike(rng::derive_seed(cfg.seed, 6));

  std::vector<double> temperature(n), demand(n), solar(n), wind(n), price(n);

  constexpr double kBaseDemand = 7000.0;  // MW
  constexpr double kTempMean = 17.0;      // deg C
  constexpr double kTwoPi = 2.0 * M_PI;

  double ar_temp = 0.0, ar_demand = 0.0, ar_cloud = 0.0, ar_wind = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double hour_of_day = static_cast<double>(t % 24);
    const double td = static_cast<double>(t);

    ar_temp = 0.95 * ar_temp + rng_temp.next_gaussian();
    temperature[t] = kTempMean +
                     0.010 * cfg.daily_amplitude *
                         std::sin(kTwoPi * (hour_of_day - 14.0) / 24.0) +
                     0.008 * cfg.weekly_amplitude *
                         std::sin(kTwoPi * td / 8760.0) +
                     0.05 * cfg.noise_sd * ar_temp;

    ar_demand = 0.8 * ar_demand + rng_demand.next_gaussian();
    demand[t] = kBaseDemand +
                cfg.daily_amplitude * std::sin(kTwoPi * (hour_of_day - 9.0) / 24.0) +
                cfg.weekly_amplitude * std::sin(kTwoPi * td / 168.0) +
                30.0 * (temperature[t] - kTempMean) +
                15.0 * cfg.noise_sd * ar_demand;

    ar_cloud = 0.9 * ar_cloud + rng_cloud.next_gaussian();
    const double day_angle = (hour_of_day - 6.0) / 12.0;
    const double bell = (day_angle > 0.0 && day_angle < 1.0)
                            ? std::sin(M_PI * day_angle)
                            : 0.0;
    const double season = 1.0 + 0.25 * std::sin(kTwoPi * td / 8760.0);
    const double cloud = std::clamp(
        1.0 - 0.03 * cfg.noise_sd * std::abs(ar_cloud), 0.2, 1.0);
    solar[t] = 0.9 * cfg.daily_amplitude * bell * bell * season * cloud;

    ar_wind = 0.97 * ar_wind + rng_wind.next_gaussian();
    wind[t] = std::max(
        0.0, 0.6 * cfg.weekly_amplitude + 10.0 * cfg.noise_sd * ar_wind);

    double p = cfg.base_price +
               cfg.demand_coupling * (demand[t] - kBaseDemand) -
               0.008 * (solar[t] + wind[t]) +
               cfg.noise_sd * rng_price.next_gaussian();
    if (rng_spike.next_double() < cfg.spike_prob) {
      p += cfg.spike_scale * (rng_spike.next_pareto(1.5) - 1.0);
    }
    price[t] = std::clamp(p, cfg.price_floor, cfg.price_cap);
  }

  Dataset ds;
  ds.region = "synthetic";
  ds.price = TimeSeries(start, std::move(price));
  ds.exog.add("demand", TimeSeries(start, std::move(demand)));
  ds.exog.add("solar_forecast", TimeSeries(start, std::move(solar)));
  ds.exog.add("wind_forecast", TimeSeries(start, std::move(wind)));
  ds.exog.add("temperature", TimeSeries(start, std::move(temperature)));
  return ds;
}

}  // namespace gridcast

#endif  // GRIDCAST_SYNTH_HPP
