#include "uwb/presets.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace uwb {

std::filesystem::path PresetLibrary::default_path() {
  return std::filesystem::path(UWBINV_DATA_DIR) / "tissue_presets.json";
}

PresetLibrary PresetLibrary::load_default() { return load(default_path()); }

PresetLibrary PresetLibrary::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open preset file " + file.string());
  PresetLibrary lib;
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported preset version");
    for (const auto& [name, t] : j.at("tissues").items())
      lib.tissues_[name] = {t.at("eps").get<double>(), t.at("sigma").get<double>()};
    for (const auto& [name, p] : j.at("profiles").items()) {
      ProfilePreset pr;
      pr.tissues = p.at("tissues").get<std::vector<std::string>>();
      pr.standoff = p.at("standoff").get<double>();
      pr.thickness = p.at("thickness").get<std::vector<double>>();
      if (pr.tissues.empty() || pr.thickness.size() + 1 != pr.tissues.size())
        throw std::runtime_error("profile '" + name + "' needs M tissues and M-1 thicknesses");
      for (const std::string& t : pr.tissues)
        if (!lib.tissues_.count(t))
          throw std::runtime_error("profile '" + name + "' uses unknown tissue '" + t + "'");
      lib.profiles_[name] = pr;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
  return lib;
}

const TissueProperties& PresetLibrary::tissue(const std::string& name) const {
  const auto it = tissues_.find(name);
  if (it == tissues_.end()) throw std::out_of_range("unknown tissue '" + name + "'");
  return it->second;
}

const ProfilePreset& PresetLibrary::preset(const std::string& name) const {
  const auto it = profiles_.find(name);
  if (it == profiles_.end()) throw std::out_of_range("unknown profile preset '" + name + "'");
  return it->second;
}

std::vector<std::string> PresetLibrary::profile_names() const {
  std::vector<std::string> names;
  for (const auto& kv : profiles_) names.push_back(kv.first);
  return names;
}

LayerProfile PresetLibrary::profile(const std::string& name, double eps_medium,
                                    double sigma_medium) const {
  const ProfilePreset& p = preset(name);
  LayerProfile lp;
  lp.eps_medium = eps_medium;
  lp.sigma_medium = sigma_medium;
  for (const std::string& t : p.tissues) {
    lp.eps.push_back(tissue(t).eps);
    lp.sigma.push_back(tissue(t).sigma);
  }
  lp.d.push_back(p.standoff);
  lp.d.insert(lp.d.end(), p.thickness.begin(), p.thickness.end());
  lp.validate();
  return lp;
}

}  // namespace uwb
