#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ilash {

inline constexpr double kDefaultPue = 1.58;
inline constexpr double kCo2LbsPerKwh = 0.954;

struct PowerProfile {
  std::string name;
  double p_c = 0.0;  // average CPU watts
  double p_r = 0.0;  // average RAM watts
  double p_g = 0.0;  // average watts per GPU
  int g = 0;         // GPU count
};

struct EnergyReport {
  std::string profile;
  double hours = 0.0;
  double kwh_pue = 0.0;
  double co2_lbs = 0.0;
};

// PUE-adjusted energy in kWh: pue * t * (p_c + p_r + g * p_g) / 1000.
double kwh_pue(double hours, const PowerProfile& p, double pue = kDefaultPue);

// Pounds of CO2-equivalent: 0.954 * kwh.
double co2_lbs(double kwh);

EnergyReport make_energy_report(double hours, const PowerProfile& p,
                                double pue = kDefaultPue);

// Wall-clock meter (monotonic clock). Meters are independent values; nesting
// is fine.
class EnergyMeter {
 public:
  explicit EnergyMeter(PowerProfile profile, double pue = kDefaultPue)
      : profile_(std::move(profile)), pue_(pue),
        start_(std::chrono::steady_clock::now()) {}

  double elapsed_hours() const {
    const auto dt = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double>(dt).count() / 3600.0;
  }

  EnergyReport report() const { return make_energy_report(elapsed_hours(), profile_, pue_); }

 private:
  PowerProfile profile_;
  double pue_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto metered(const PowerProfile& profile, EnergyReport* report, Fn&& fn,
             double pue = kDefaultPue) {
  EnergyMeter meter(profile, pue);
  auto result = std::forward<Fn>(fn)();
  if (report) *report = meter.report();
  return result;
}

// Stock profiles: the four reference GPUs at 1.5x TDP plus a CPU-only desk
// profile used as the default.
std::vector<PowerProfile> builtin_profiles();

std::vector<PowerProfile> load_profiles(const std::filesystem::path& path);
void save_profiles(const std::filesystem::path& path,
                   const std::vector<PowerProfile>& profiles);
// Searches `profiles` first, then the built-ins. Throws if absent.
PowerProfile find_profile(const std::string& name,
                          const std::vector<PowerProfile>& profiles = {});

nlohmann::ordered_json to_json(const EnergyReport& r);

}  // namespace ilash
