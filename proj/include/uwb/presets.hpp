#pragma once

// Named tissue properties and layered profiles loaded from a JSON data file.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uwb/em_forward.hpp"

namespace uwb {

struct TissueProperties {
  double eps = 1.0;
  double sigma = 0.0;
};

struct ProfilePreset {
  std::vector<std::string> tissues;  // layers 1..M, last one semi-infinite
  double standoff = 0.0;             // d_0
  std::vector<double> thickness;     // d_1..d_{M-1}
};

class PresetLibrary {
 public:
  static PresetLibrary load(const std::filesystem::path& file);
  /// The data file shipped with the library.
  static PresetLibrary load_default();
  static std::filesystem::path default_path();

  const TissueProperties& tissue(const std::string& name) const;
  const ProfilePreset& preset(const std::string& name) const;
  bool has_profile(const std::string& name) const { return profiles_.count(name) > 0; }
  std::vector<std::string> profile_names() const;

  LayerProfile profile(const std::string& name, double eps_medium = 1.0,
                       double sigma_medium = 0.0) const;

 private:
  std::map<std::string, TissueProperties> tissues_;
  std::map<std::string, ProfilePreset> profiles_;
};

}  // namespace uwb
