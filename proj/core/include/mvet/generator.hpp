#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvet/dataset.hpp"

namespace mvet {

struct LanguageProfile {
  std::string name;
  double availability = 1.0;  // per-view presence probability
  double noise = 0.0;         // additive Gaussian noise scale
};

struct ReprProfile {
  Representation repr = Representation::Ctxt;
  std::size_t dim = 0;
};

// Synthetic multiview dataset. Each entity has a latent signature (sum of
// its type prototypes); every present view observes a per-view random
// projection of that signature plus language-scaled noise. Name views are
// swapped for another entity's projection with probability `ambiguity`.
struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t n_entities = 5000;
  std::size_t n_types = 20;
  std::size_t latent_dim = 16;
  std::size_t max_types_per_entity = 3;
  std::size_t min_per_type = 5;
  double ambiguity = 0.05;
  double zipf_exponent = 1.5;
  std::uint64_t freq_max = 2000;
  std::vector<LanguageProfile> languages;
  std::vector<ReprProfile> representations;

  void validate() const;

  // 4 languages x 3 representations = 12 views; availability 1.0/0.6/0.5/0.3
  // with per-language noise increasing.
  static GenConfig default_profile();

  // Same shape with mean availability pushed below 0.4 (missing rate > 60%).
  static GenConfig sparse_profile();

  // Same shape with one language at <=10% availability, so its three views
  // are low-resource.
  static GenConfig low_resource_profile();
};

Dataset generate(const GenConfig& cfg);

}  // namespace mvet
