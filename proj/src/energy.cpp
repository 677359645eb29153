#include "ilash/energy.hpp"

#include <fstream>
#include <stdexcept>

namespace ilash {

double kwh_pue(double hours, const PowerProfile& p, double pue) {
  if (hours < 0.0) throw std::invalid_argument("kwh_pue: negative runtime");
  if (p.p_c < 0.0 || p.p_r < 0.0 || p.p_g < 0.0 || p.g < 0) {
    throw std::invalid_argument("kwh_pue: negative power profile entry");
  }
  return pue * hours * (p.p_c + p.p_r + p.g * p.p_g) / 1000.0;
}

double co2_lbs(double kwh) {
  if (kwh < 0.0) throw std::invalid_argument("co2_lbs: negative energy");
  return kCo2LbsPerKwh * kwh;
}

EnergyReport make_energy_report(double hours, const PowerProfile& p, double pue) {
  EnergyReport r;
  r.profile = p.name;
  r.hours = hours;
  r.kwh_pue = kwh_pue(hours, p, pue);
  r.co2_lbs = co2_lbs(r.kwh_pue);
  return r;
}

std::vector<PowerProfile> builtin_profiles() {
  return {
      {"desk-cpu", 65.0, 10.0, 0.0, 0},
      {"gtx-1080", 0.0, 0.0, 270.0, 1},
      {"gtx-1080-ti", 0.0, 0.0, 375.0, 1},
      {"rtx-2080-ti", 0.0, 0.0, 375.0, 1},
      {"tesla-titanxp", 0.0, 0.0, 375.0, 1},
  };
}

std::vector<PowerProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read profile registry " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<PowerProfile> profiles;
  for (const auto& e : j) {
    PowerProfile p;
    p.name = e.at("name").get<std::string>();
    p.p_c = e.at("p_c").get<double>();
    p.p_r = e.at("p_r").get<double>();
    p.p_g = e.at("p_g").get<double>();
    p.g = e.at("g").get<int>();
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void save_profiles(const std::filesystem::path& path,
                   const std::vector<PowerProfile>& profiles) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const PowerProfile& p : profiles) {
    j.push_back({{"name", p.name}, {"p_c", p.p_c}, {"p_r", p.p_r}, {"p_g", p.p_g}, {"g", p.g}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile registry " + path.string());
  out << j.dump(2) << '\n';
}

PowerProfile find_profile(const std::string& name,
                          const std::vector<PowerProfile>& profiles) {
  for (const PowerProfile& p : profiles) {
    if (p.name == name) return p;
  }
  for (const PowerProfile& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown power profile: " + name);
}

nlohmann::ordered_json to_json(const EnergyReport& r) {
  return {{"profile", r.profile},
          {"runtime_hours", r.hours},
          {"kwh_pue", r.kwh_pue},
          {"co2_lbs", r.co2_lbs}};
}

}  // namespace ilash
