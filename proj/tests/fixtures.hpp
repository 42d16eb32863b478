#pragma once

#include "uwb/config.hpp"

namespace fixture {

/// Two-layer fat/muscle experiment on a small grid.
inline uwb::ExperimentConfig desk_config(int n_freq = 64, double snr_db = 40.0) {
  uwb::ExperimentConfig c;
  c.preset = "fat_muscle";
  c.n_freq = n_freq;
  c.snr_db = snr_db;
  c.pipeline.levels = 4;
  c.pipeline.t_last = 20.0;
  c.pipeline.adapt.j_t = 20;
  c.pipeline.adapt.n_t = 3;
  c.pipeline.adapt.j_eps = 20;
  c.pipeline.stage1_max = 400;
  c.pipeline.stage2_length = 100;
  c.pipeline.stage3_max = 400;
  c.pipeline.stage4_length = 50;
  return c;
}

}  // namespace fixture
