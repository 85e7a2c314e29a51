#pragma once

#include <string>

#include "mvet/dataset.hpp"
#include "mvet/generator.hpp"

#ifndef MVET_TEST_DATA
#error "MVET_TEST_DATA must point at the fixture directory"
#endif

inline std::string data_file(const std::string& name) {
  return std::string(MVET_TEST_DATA) + "/" + name;
}

// Small dataset shared by trainer/eval tests: 2 languages x 2 reprs,
// moderate noise, full determinism from the seed.
inline mvet::GenConfig tiny_gen_config(std::uint64_t seed = 7) {
  mvet::GenConfig cfg;
  cfg.seed = seed;
  cfg.n_entities = 160;
  cfg.n_types = 6;
  cfg.latent_dim = 8;
  cfg.min_per_type = 4;
  cfg.languages = {{"en", 1.0, 0.4}, {"de", 0.6, 0.8}};
  cfg.representations = {{mvet::Representation::Ctxt, 10}, {mvet::Representation::Name, 6}};
  return cfg;
}
