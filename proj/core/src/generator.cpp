#include "mvet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mvet {

void GenConfig::validate() const {
  if (n_entities == 0) throw ConfigInvalid("n_entities must be positive");
  if (n_types == 0) throw ConfigInvalid("n_types must be positive");
  if (latent_dim == 0) throw ConfigInvalid("latent_dim must be positive");
  if (max_types_per_entity == 0 || max_types_per_entity > n_types) {
    throw ConfigInvalid("max_types_per_entity out of range");
  }
  if (ambiguity < 0.0 || ambiguity > 1.0) throw ConfigInvalid("ambiguity must be in [0,1]");
  if (zipf_exponent <= 0.0) throw ConfigInvalid("zipf_exponent must be positive");
  if (freq_max == 0) throw ConfigInvalid("freq_max must be positive");
  if (languages.empty()) throw ConfigInvalid("at least one language required");
  if (representations.empty()) throw ConfigInvalid("at least one representation required");
  for (const auto& l : languages) {
    if (l.availability < 0.0 || l.availability > 1.0) {
      throw ConfigInvalid("lang." + l.name + ".availability must be in [0,1]");
    }
    if (l.noise < 0.0) throw ConfigInvalid("lang." + l.name + ".noise must be >= 0");
  }
  for (const auto& r : representations) {
    if (r.dim == 0) throw ConfigInvalid("representation dim must be positive");
  }
  if (min_per_type * n_types > n_entities) {
    throw ConfigInvalid("min_per_type * n_types exceeds n_entities");
  }
}

GenConfig GenConfig::default_profile() {
  GenConfig cfg;
  cfg.languages = {
      {"en", 1.0, 0.4},
      {"de", 0.6, 0.55},
      {"es", 0.5, 0.7},
      {"fa", 0.3, 0.85},
  };
  cfg.representations = {
      {Representation::Ctxt, 32},
      {Representation::Name, 24},
      {Representation::Desc, 28},
  };
  return cfg;
}

GenConfig GenConfig::sparse_profile() {
  GenConfig cfg = default_profile();
  cfg.languages = {
      {"en", 0.7, 0.4},
      {"de", 0.35, 0.55},
      {"es", 0.25, 0.7},
      {"fa", 0.15, 0.85},
  };
  return cfg;
}

GenConfig GenConfig::low_resource_profile() {
  GenConfig cfg = default_profile();
  cfg.languages = {
      {"en", 1.0, 0.4},
      {"de", 0.8, 0.55},
      {"es", 0.6, 0.7},
      {"fa", 0.05, 0.95},
  };
  return cfg;
}

namespace {

std::string entity_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "e%06zu", i);
  return buf;
}

std::string type_name(std::size_t t) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "type_%02zu", t);
  return buf;
}

// Discrete power law P(f) proportional to f^-s on {1..freq_max}.
class ZipfSampler {
 public:
  ZipfSampler(double s, std::uint64_t fmax) : cdf_(fmax) {
    double acc = 0.0;
    for (std::uint64_t f = 1; f <= fmax; ++f) {
      acc += std::pow(static_cast<double>(f), -s);
      cdf_[f - 1] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }

  std::uint64_t sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

Dataset generate(const GenConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, "generate"));

  Dataset ds;
  std::vector<std::string> names;
  names.reserve(cfg.n_types);
  for (std::size_t t = 0; t < cfg.n_types; ++t) names.push_back(type_name(t));
  ds.types = TypeVocab(std::move(names));
  for (const auto& lang : cfg.languages) {
    for (const auto& repr : cfg.representations) {
      ds.views.push_back({lang.name, repr.repr, repr.dim});
    }
  }

  const std::size_t L = cfg.latent_dim;
  std::vector<Vec> prototypes(cfg.n_types);
  for (auto& proto : prototypes) {
    proto = Vec(L);
    for (std::size_t k = 0; k < L; ++k) proto[k] = rng.normal();
  }

  // Per-view projection from latent space. Each view sees only a contiguous
  // (wrap-around) window of latent coordinates, with window starts spread
  // across views: views are complementary, no single view recovers the whole
  // signature, and fusing views genuinely adds information instead of
  // averaging redundant copies. When n_types <= L the window is floored at
  // n_types, so a noise-free view keeps one-vs-rest linear separability
  // whenever the latent space itself allows it; when n_types > L no
  // projection could separate the types anyway and the floor is dropped.
  std::vector<Mat> projections(ds.views.size());
  const std::size_t window =
      cfg.n_types <= L ? std::max(L / 4 + 1, cfg.n_types) : std::min(L, L / 4 + 1);
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(window));
  for (ViewId j = 0; j < ds.views.size(); ++j) {
    const std::size_t start = j * L / ds.views.size();
    Mat proj(ds.views[j].dim, L);
    for (std::size_t r = 0; r < proj.rows(); ++r) {
      for (std::size_t c = 0; c < window; ++c) {
        proj(r, (start + c) % L) = rng.normal() * proj_scale;
      }
    }
    projections[j] = std::move(proj);
  }

  // Pass 1: types, signatures, frequencies.
  ZipfSampler zipf(cfg.zipf_exponent, cfg.freq_max);
  std::vector<Vec> signatures(cfg.n_entities);
  ds.entities.resize(cfg.n_entities);
  for (std::size_t i = 0; i < cfg.n_entities; ++i) {
    auto& e = ds.entities[i];
    e.id = entity_name(i);
    e.types = Bitset(cfg.n_types);

    const std::size_t n_wanted =
        1 + static_cast<std::size_t>(rng.below(cfg.max_types_per_entity));
    if (i < cfg.min_per_type * cfg.n_types) {
      e.types.set(i % cfg.n_types);  // per-type floor
    }
    while (e.types.count() < n_wanted) {
      e.types.set(static_cast<std::size_t>(rng.below(cfg.n_types)));
    }

    signatures[i] = Vec(L);
    e.types.for_each_set([&](std::size_t t) { axpy(1.0, prototypes[t], signatures[i]); });
    e.freq = zipf.sample(rng);
  }

  // Pass 2: views.
  for (std::size_t i = 0; i < cfg.n_entities; ++i) {
    auto& e = ds.entities[i];
    e.views.resize(ds.views.size());
    e.mask.assign(ds.views.size(), 0);
    ViewId j = 0;
    for (const auto& lang : cfg.languages) {
      for (const auto& repr : cfg.representations) {
        const bool present = rng.uniform() < lang.availability;
        const bool swap_name = repr.repr == Representation::Name && rng.uniform() < cfg.ambiguity;
        std::size_t source = i;
        if (swap_name && cfg.n_entities > 1) {
          source = static_cast<std::size_t>(rng.below(cfg.n_entities - 1));
          if (source >= i) ++source;
        }
        if (present) {
          Vec v = matvec(projections[j], signatures[source]);
          for (std::size_t k = 0; k < v.len(); ++k) {
            v[k] = quantize_g9(v[k] + lang.noise * rng.normal());
          }
          e.views[j] = std::move(v);
          e.mask[j] = 1;
        }
        ++j;
      }
    }
    bool any = false;
    for (auto m : e.mask) any = any || m;
    if (!any) {
      // Rare when every availability < 1; force the first declared view so
      // the record stays valid.
      Vec v = matvec(projections[0], signatures[i]);
      for (std::size_t k = 0; k < v.len(); ++k) {
        v[k] = quantize_g9(v[k] + cfg.languages[0].noise * rng.normal());
      }
      e.views[0] = std::move(v);
      e.mask[0] = 1;
    }
  }

  ds.validate();
  return ds;
}

}  // namespace mvet
