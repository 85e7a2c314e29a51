#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mvet/dataset.hpp"

namespace mvet {

std::string format_g9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

double parse_double(std::string_view s, std::size_t line_for_errors) {
  double x = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, x);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line_for_errors, "bad number '" + std::string(s) + "'");
  }
  if (!std::isfinite(x)) {
    throw ParseError(line_for_errors, "non-finite number '" + std::string(s) + "'");
  }
  return x;
}

double quantize_g9(double x) {
  const std::string s = format_g9(x);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint64_t parse_u64(std::string_view s, std::size_t line) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "bad integer '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::vector<std::string> type_names;
  bool records_started = false;
  std::vector<std::string> seen_ids;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;

    if (toks[0] == "type") {
      if (records_started) throw ParseError(lineno, "type declaration after records");
      if (toks.size() != 2) throw ParseError(lineno, "expected 'type <name>'");
      type_names.emplace_back(toks[1]);
      continue;
    }
    if (toks[0] == "view") {
      if (records_started) throw ParseError(lineno, "view declaration after records");
      if (toks.size() != 4) throw ParseError(lineno, "expected 'view <lang> <repr> <dim>'");
      const auto repr = representation_from(toks[2]);
      if (!repr) throw ParseError(lineno, "unknown representation '" + std::string(toks[2]) + "'");
      const auto dim = parse_u64(toks[3], lineno);
      if (dim == 0) throw ParseError(lineno, "view dim must be positive");
      ds.views.push_back({std::string(toks[1]), *repr, static_cast<std::size_t>(dim)});
      continue;
    }
    if (toks[0] != "entity") {
      throw ParseError(lineno, "unknown directive '" + std::string(toks[0]) + "'");
    }

    if (!records_started) {
      try {
        ds.types = TypeVocab(type_names);
      } catch (const ConfigInvalid& e) {
        throw ParseError(lineno, e.what());
      }
      records_started = true;
    }
    if (toks.size() < 4) {
      throw ParseError(lineno, "expected 'entity <id> <freq> types=... [view:...=...]'");
    }

    EntityRecord rec;
    rec.id = std::string(toks[1]);
    rec.freq = parse_u64(toks[2], lineno);
    rec.types = Bitset(ds.types.size());
    rec.views.resize(ds.views.size());
    rec.mask.assign(ds.views.size(), 0);

    bool have_types = false;
    for (std::size_t f = 3; f < toks.size(); ++f) {
      const auto field = toks[f];
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "field missing '='");
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);

      if (key == "types") {
        if (have_types) throw ParseError(lineno, "duplicate types field");
        have_types = true;
        for (auto name : split_on(value, ',')) {
          const auto idx = ds.types.index(name);
          if (!idx) throw UnknownType("line " + std::to_string(lineno) + ": unknown type '" +
                                      std::string(name) + "'");
          rec.types.set(*idx);
        }
        continue;
      }
      if (key.substr(0, 5) == "view:") {
        const auto parts = split_on(key, ':');
        if (parts.size() != 3) throw ParseError(lineno, "expected view:<lang>:<repr>");
        const auto repr = representation_from(parts[2]);
        if (!repr) throw ParseError(lineno, "unknown representation in '" + std::string(key) + "'");
        const auto id = ds.view_id(parts[1], *repr);
        if (!id) throw ParseError(lineno, "undeclared view '" + std::string(key) + "'");
        if (rec.mask[*id]) throw ParseError(lineno, "duplicate view field '" + std::string(key) + "'");

        const auto nums = split_on(value, ',');
        if (nums.size() != ds.views[*id].dim) {
          throw DimMismatch("line " + std::to_string(lineno) + ": view " + ds.views[*id].label() +
                            " has " + std::to_string(nums.size()) + " values, expected " +
                            std::to_string(ds.views[*id].dim));
        }
        Vec v(nums.size());
        for (std::size_t k = 0; k < nums.size(); ++k) v[k] = parse_double(nums[k], lineno);
        rec.views[*id] = std::move(v);
        rec.mask[*id] = 1;
        continue;
      }
      throw ParseError(lineno, "unknown field '" + std::string(key) + "'");
    }
    if (!have_types || !rec.types.any()) throw ParseError(lineno, "entity without gold types");
    bool any_view = false;
    for (auto m : rec.mask) any_view = any_view || m;
    if (!any_view) throw ParseError(lineno, "entity without available views");
    seen_ids.push_back(rec.id);
    ds.entities.push_back(std::move(rec));
  }
  if (!records_started) {
    // Header-only files still need a valid (possibly empty) vocabulary.
    ds.types = TypeVocab(type_names);
  }

  std::sort(seen_ids.begin(), seen_ids.end());
  for (std::size_t i = 1; i < seen_ids.size(); ++i) {
    if (seen_ids[i] == seen_ids[i - 1]) {
      throw ParseError(0, "duplicate entity id '" + seen_ids[i] + "'");
    }
  }
  ds.validate();
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path.string());
  return read_dataset(in);
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  for (const auto& name : ds.types.names()) out << "type " << name << "\n";
  for (const auto& v : ds.views) {
    out << "view " << v.language << " " << to_string(v.repr) << " " << v.dim << "\n";
  }
  for (const auto& e : ds.entities) {
    out << "entity " << e.id << " " << e.freq << " types=";
    bool first = true;
    e.types.for_each_set([&](std::size_t t) {
      if (!first) out << ",";
      out << ds.types.name(t);
      first = false;
    });
    for (ViewId j = 0; j < ds.views.size(); ++j) {
      if (!e.mask[j]) continue;
      out << " view:" << ds.views[j].language << ":" << to_string(ds.views[j].repr) << "=";
      const Vec& v = e.views[j];
      for (std::size_t k = 0; k < v.len(); ++k) {
        if (k) out << ",";
        out << format_g9(v[k]);
      }
    }
    out << "\n";
  }
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path.string());
  write_dataset(ds, out);
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace mvet
