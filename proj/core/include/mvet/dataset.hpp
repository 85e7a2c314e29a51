#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mvet/numeric.hpp"

namespace mvet {

// Fixed-width bitset used for gold/predicted type sets.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  void set(std::size_t i) { words_[i >> 6] |= (1ULL << (i & 63)); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  std::size_t count() const;
  bool any() const;

  template <typename Fn>
  void for_each_set(Fn&& fn) const {
    for (std::size_t i = 0; i < size_; ++i) {
      if (test(i)) fn(i);
    }
  }

  bool operator==(const Bitset&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Ordered, duplicate-free type inventory. Indices are stable and serialized
// with the dataset.
class TypeVocab {
 public:
  TypeVocab() = default;
  explicit TypeVocab(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index(std::string_view name) const;

  bool operator==(const TypeVocab& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Representation { Ctxt, Name, Desc };

std::string_view to_string(Representation r);
std::optional<Representation> representation_from(std::string_view s);

// One view: a (language, representation) pair with its dimensionality.
struct ViewSpec {
  std::string language;
  Representation repr = Representation::Ctxt;
  std::size_t dim = 0;

  std::string label() const;  // "en:ctxt"
  bool operator==(const ViewSpec&) const = default;
};

using ViewId = std::size_t;

struct EntityRecord {
  std::string id;
  Bitset types;
  std::vector<Vec> views;  // indexed by ViewId; empty when absent
  Mask mask;               // 1 = view available
  std::uint64_t freq = 0;

  bool operator==(const EntityRecord&) const = default;
};

struct Dataset {
  TypeVocab types;
  std::vector<ViewSpec> views;
  std::vector<EntityRecord> entities;

  std::optional<ViewId> view_id(std::string_view language, Representation repr) const;
  std::optional<ViewId> view_id(std::string_view label) const;

  // Enforces the per-record invariants: declared dims, >=1 view, >=1 type.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

struct SplitSpec {
  double train = 0.5;
  double dev = 0.2;
  double test = 0.3;

  void validate() const;  // positive fractions summing to 1 +- 1e-9
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

// Type-stratified partition. Types are visited from rarest to most
// frequent; within a stratum entities are shuffled by the seed and each
// still-unassigned entity goes to the split currently furthest below its
// per-stratum target. Multi-type entities are assigned once, at their
// rarest type's turn.
Split stratified_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed);

enum class Bucket { Tail, Mid, Head };

// Tail: freq < 10. Head: freq > 100. Mid counts only toward "all".
inline Bucket bucket(std::uint64_t freq) {
  if (freq < 10) return Bucket::Tail;
  if (freq > 100) return Bucket::Head;
  return Bucket::Mid;
}

// Line-oriented UTF-8 dataset format:
//   type <name>
//   view <lang> <repr> <dim>
//   entity <id> <freq> types=<t1,t2,...> view:<lang>:<repr>=<f1,f2,...> ...
// Absent views are omitted. Numbers carry 9 significant digits.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, std::ostream& out);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// 9-significant-digit formatting used by every text artifact.
std::string format_g9(double x);
double parse_double(std::string_view s, std::size_t line_for_errors);
// Projection onto the values representable in the file format.
double quantize_g9(double x);

}  // namespace mvet
