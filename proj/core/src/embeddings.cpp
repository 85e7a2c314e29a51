#include <cmath>
#include <fstream>
#include <sstream>

#include "mvet/views.hpp"

namespace mvet {

const Vec* WordEmbeddings::find(std::string_view token) const {
  auto it = table.find(std::string(token));
  return it == table.end() ? nullptr : &it->second;
}

WordEmbeddings load_embeddings(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing embedding header");
  ++lineno;
  std::istringstream header(line);
  std::size_t count = 0, dim = 0;
  if (!(header >> count >> dim) || dim == 0) {
    throw ParseError(lineno, "expected header '<count> <dim>'");
  }

  WordEmbeddings emb;
  emb.dim = dim;
  emb.table.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "fewer rows than header count");
    ++lineno;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) throw ParseError(lineno, "empty embedding row");
    Vec v(dim);
    std::string num;
    for (std::size_t k = 0; k < dim; ++k) {
      if (!(row >> num)) {
        throw DimMismatch("line " + std::to_string(lineno) + ": expected " +
                          std::to_string(dim) + " values for '" + token + "'");
      }
      v[k] = parse_double(num, lineno);
    }
    if (row >> num) {
      throw DimMismatch("line " + std::to_string(lineno) + ": too many values for '" + token + "'");
    }
    auto [it, inserted] = emb.table.emplace(std::move(token), std::move(v));
    if (!inserted) {
      throw DuplicateToken("line " + std::to_string(lineno) + ": duplicate token '" + it->first + "'");
    }
  }
  return emb;
}

WordEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path.string());
  return load_embeddings(in);
}

void write_embeddings(const WordEmbeddings& emb,
                      const std::vector<std::string>& token_order, std::ostream& out) {
  out << token_order.size() << " " << emb.dim << "\n";
  for (const auto& token : token_order) {
    const Vec* v = emb.find(token);
    if (!v) throw Error("write_embeddings: token not in table: " + token);
    out << token;
    for (std::size_t k = 0; k < v->len(); ++k) out << " " << format_g9((*v)[k]);
    out << "\n";
  }
}

Vec oov_vector(std::string_view token, std::size_t dim) {
  Rng rng(derive_seed(0x6f6f76ULL /* "oov" */, token));
  Vec v(dim);
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    v[k] = rng.normal();
    norm_sq += v[k] * v[k];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0) {
    for (std::size_t k = 0; k < dim; ++k) v[k] /= norm;
  } else {
    v[0] = 1.0;
  }
  return v;
}

}  // namespace mvet
