#include "mvet/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace mvet {

std::size_t Bitset::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool Bitset::any() const {
  for (auto w : words_) {
    if (w) return true;
  }
  return false;
}

TypeVocab::TypeVocab(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto [it, inserted] = index_.emplace(names_[i], i);
    if (!inserted) throw ConfigInvalid("duplicate type name: " + names_[i]);
  }
}

std::optional<std::size_t> TypeVocab::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::Ctxt: return "ctxt";
    case Representation::Name: return "name";
    case Representation::Desc: return "desc";
  }
  return "?";
}

std::optional<Representation> representation_from(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ctxt") return Representation::Ctxt;
  if (lower == "name") return Representation::Name;
  if (lower == "desc") return Representation::Desc;
  return std::nullopt;
}

std::string ViewSpec::label() const {
  return language + ":" + std::string(to_string(repr));
}

std::optional<ViewId> Dataset::view_id(std::string_view language, Representation repr) const {
  for (ViewId j = 0; j < views.size(); ++j) {
    if (views[j].language == language && views[j].repr == repr) return j;
  }
  return std::nullopt;
}

std::optional<ViewId> Dataset::view_id(std::string_view label) const {
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto repr = representation_from(label.substr(colon + 1));
  if (!repr) return std::nullopt;
  return view_id(label.substr(0, colon), *repr);
}

void Dataset::validate() const {
  for (ViewId j = 0; j < views.size(); ++j) {
    if (views[j].dim == 0) throw ConfigInvalid("view " + views[j].label() + " has dim 0");
    for (ViewId k = j + 1; k < views.size(); ++k) {
      if (views[j].language == views[k].language && views[j].repr == views[k].repr) {
        throw ConfigInvalid("duplicate view " + views[j].label());
      }
    }
  }
  for (const auto& e : entities) {
    if (e.mask.size() != views.size() || e.views.size() != views.size()) {
      throw DimMismatch("entity " + e.id + ": view slots do not match declared views");
    }
    bool any_view = false;
    for (ViewId j = 0; j < views.size(); ++j) {
      if (!e.mask[j]) continue;
      any_view = true;
      if (e.views[j].len() != views[j].dim) {
        throw DimMismatch("entity " + e.id + ": view " + views[j].label() +
                          " has length " + std::to_string(e.views[j].len()));
      }
    }
    if (!any_view) throw ConfigInvalid("entity " + e.id + " has no available view");
    if (!e.types.any()) throw ConfigInvalid("entity " + e.id + " has no gold type");
    if (e.types.size() != types.size()) {
      throw DimMismatch("entity " + e.id + ": type bitset size mismatch");
    }
  }
}

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(dev > 0.0) || !(test > 0.0)) {
    throw ConfigInvalid("split fractions must be positive");
  }
  if (std::abs(train + dev + test - 1.0) > 1e-9) {
    throw ConfigInvalid("split fractions must sum to 1");
  }
}

Split stratified_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (ds.entities.empty()) throw EmptyDataset("stratified_split: no entities");

  const std::size_t n_types = ds.types.size();
  std::vector<std::vector<std::size_t>> strata(n_types);
  for (std::size_t i = 0; i < ds.entities.size(); ++i) {
    ds.entities[i].types.for_each_set([&](std::size_t t) { strata[t].push_back(i); });
  }

  // Rarest types first; ties by type index.
  std::vector<std::size_t> type_order(n_types);
  for (std::size_t t = 0; t < n_types; ++t) type_order[t] = t;
  std::stable_sort(type_order.begin(), type_order.end(),
                   [&](std::size_t a, std::size_t b) { return strata[a].size() < strata[b].size(); });

  constexpr int kUnassigned = -1;
  std::vector<int> assigned(ds.entities.size(), kUnassigned);
  const double fractions[3] = {spec.train, spec.dev, spec.test};

  Rng rng(derive_seed(seed, "stratified_split"));
  for (std::size_t t : type_order) {
    auto& stratum = strata[t];
    if (stratum.empty()) continue;
    rng.shuffle(stratum);

    double target[3];
    std::size_t have[3] = {0, 0, 0};
    for (int s = 0; s < 3; ++s) target[s] = fractions[s] * static_cast<double>(stratum.size());
    for (std::size_t i : stratum) {
      if (assigned[i] != kUnassigned) ++have[assigned[i]];
    }
    for (std::size_t i : stratum) {
      if (assigned[i] != kUnassigned) continue;
      int best = 0;
      double best_deficit = target[0] - static_cast<double>(have[0]);
      for (int s = 1; s < 3; ++s) {
        const double deficit = target[s] - static_cast<double>(have[s]);
        if (deficit > best_deficit) {
          best = s;
          best_deficit = deficit;
        }
      }
      assigned[i] = best;
      ++have[best];
    }
  }

  Split out;
  std::vector<std::size_t>* splits[3] = {&out.train, &out.dev, &out.test};
  for (std::size_t i = 0; i < ds.entities.size(); ++i) {
    if (assigned[i] == kUnassigned) {
      // Entity with no gold type; validate() rejects these earlier.
      throw EmptyDataset("stratified_split: entity without stratum");
    }
    splits[assigned[i]]->push_back(i);
  }
  if (out.train.empty() || out.dev.empty() || out.test.empty()) {
    throw EmptyStratumViolation("stratified_split: cannot fill three nonempty splits");
  }
  return out;
}

}  // namespace mvet
