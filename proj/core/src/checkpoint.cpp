#include <cstring>
#include <fstream>
#include <sstream>

#include "mvet/model.hpp"

namespace mvet {

namespace {

constexpr char kMagic[8] = {'M', 'V', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

std::string config_echo(const ModelConfig& cfg) {
  std::ostringstream out;
  out << "fusion=" << to_string(cfg.fusion) << '\n';
  out << "d=" << cfg.shared_dim << '\n';
  out << "h=" << cfg.hidden_dim << '\n';
  out << "types=" << cfg.n_types << '\n';
  out << "slope=" << format_g9(cfg.slope) << '\n';
  out << "bias=" << (cfg.bias ? 1 : 0) << '\n';
  out << "views=";
  for (std::size_t j = 0; j < cfg.views.size(); ++j) {
    if (j) out << ',';
    out << cfg.views[j].label() << ':' << cfg.views[j].dim;
  }
  out << '\n';
  return out.str();
}

ModelConfig config_from_echo(const std::string& blob) {
  ModelConfig cfg;
  std::istringstream in(blob);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "checkpoint config line lacks '='");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "fusion") {
      cfg.fusion = fusion_mode_from(value);
    } else if (key == "d") {
      cfg.shared_dim = std::stoull(value);
    } else if (key == "h") {
      cfg.hidden_dim = std::stoull(value);
    } else if (key == "types") {
      cfg.n_types = std::stoull(value);
    } else if (key == "slope") {
      cfg.slope = parse_double(value, lineno);
    } else if (key == "bias") {
      cfg.bias = value == "1";
    } else if (key == "views") {
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        // lang:repr:dim
        const auto c1 = item.find(':');
        const auto c2 = item.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
          throw ParseError(lineno, "bad view entry '" + item + "'");
        }
        ViewSpec vs;
        vs.language = item.substr(0, c1);
        const auto repr = representation_from(item.substr(c1 + 1, c2 - c1 - 1));
        if (!repr) throw ParseError(lineno, "bad representation in '" + item + "'");
        vs.repr = *repr;
        vs.dim = std::stoull(item.substr(c2 + 1));
        cfg.views.push_back(std::move(vs));
      }
    } else {
      throw ParseError(lineno, "unknown checkpoint config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const Parameters& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, 8);
  put_u32(out, kVersion);
  const std::string echo = config_echo(cfg);
  put_u32(out, static_cast<std::uint32_t>(echo.size()));
  out.write(echo.data(), static_cast<std::streamsize>(echo.size()));

  auto refs = tensor_refs(const_cast<Parameters&>(params));
  put_u32(out, static_cast<std::uint32_t>(refs.size()));
  for (const auto& ref : refs) {
    put_u32(out, static_cast<std::uint32_t>(ref.name.size()));
    out.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
    put_u64(out, ref.size);
    for (std::size_t i = 0; i < ref.size; ++i) put_f64(out, ref.data[i]);
  }
  if (!out) throw Error("checkpoint write failed: " + path.string());
}

std::pair<ModelConfig, Parameters> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error("not a checkpoint file: " + path.string());
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t echo_len = get_u32(in);
  std::string echo(echo_len, '\0');
  if (!in.read(echo.data(), echo_len)) throw Error("checkpoint truncated");
  ModelConfig cfg = config_from_echo(echo);

  Parameters params = zero_parameters(cfg);
  auto refs = tensor_refs(params);
  const std::uint32_t count = get_u32(in);
  if (count != refs.size()) throw DimensionMismatch("checkpoint tensor count mismatch");
  for (auto& ref : refs) {
    const std::uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw Error("checkpoint truncated");
    if (name != ref.name) throw DimensionMismatch("checkpoint tensor order mismatch: " + name);
    const std::uint64_t n = get_u64(in);
    if (n != ref.size) throw DimensionMismatch("checkpoint tensor size mismatch: " + name);
    for (std::size_t i = 0; i < ref.size; ++i) ref.data[i] = get_f64(in);
  }
  return {std::move(cfg), std::move(params)};
}

}  // namespace mvet
