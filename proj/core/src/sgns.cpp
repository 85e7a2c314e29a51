#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mvet/views.hpp"

namespace mvet {

EntityCorpus read_corpus(std::istream& in) {
  EntityCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (row >> tok) {
      const auto at = tok.find(EntityCorpus::kEntityPrefix);
      if (at != std::string::npos && at != 0) {
        throw ParseError(lineno, "reserved prefix inside ordinary token '" + tok + "'");
      }
      if (at == 0 && tok.size() == EntityCorpus::kEntityPrefix.size()) {
        throw ParseError(lineno, "entity token without id");
      }
      tokens.push_back(std::move(tok));
    }
    if (!tokens.empty()) corpus.sentences.push_back(std::move(tokens));
  }
  return corpus;
}

EntityCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path.string());
  return read_corpus(in);
}

void SgnsConfig::validate() const {
  if (dim == 0 || window == 0 || negatives == 0 || epochs == 0) {
    throw ConfigInvalid("sgns dim/window/negatives/epochs must be positive");
  }
  if (!(lr > 0.0)) throw ConfigInvalid("sgns lr must be positive");
  if (subsample < 0.0) throw ConfigInvalid("sgns subsample must be >= 0");
}

double sgns_pair_step(Vec& center_in, Vec& context_out,
                      const std::vector<Vec*>& negatives_out, double lr) {
  const std::size_t dim = center_in.len();
  Vec center_delta(dim);
  double objective = 0.0;

  const auto update = [&](Vec& out, double label) {
    const double score = dot(out, center_in);
    const double s = sigmoid(score);
    objective += label > 0.5 ? std::log(std::max(s, 1e-300))
                             : std::log(std::max(1.0 - s, 1e-300));
    const double g = (label - s) * lr;
    axpy(g, out, center_delta);
    axpy(g, center_in, out);
  };

  update(context_out, 1.0);
  for (Vec* neg : negatives_out) update(*neg, 0.0);
  axpy(1.0, center_delta, center_in);
  return objective;
}

namespace {

struct Vocab {
  std::vector<std::string> tokens;  // by id, frequency-sorted
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::size_t> index;
  std::uint64_t total = 0;
};

Vocab build_vocab(const EntityCorpus& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& tok : sentence) {
      ++counts[tok];
      ++total;
    }
  }
  Vocab v;
  v.total = total;
  v.tokens.reserve(counts.size());
  for (const auto& [tok, n] : counts) v.tokens.push_back(tok);
  std::sort(v.tokens.begin(), v.tokens.end(), [&](const auto& a, const auto& b) {
    const auto ca = counts.at(a), cb = counts.at(b);
    return ca != cb ? ca > cb : a < b;
  });
  v.counts.reserve(v.tokens.size());
  for (std::size_t i = 0; i < v.tokens.size(); ++i) {
    v.counts.push_back(counts.at(v.tokens[i]));
    v.index.emplace(v.tokens[i], i);
  }
  return v;
}

// Cumulative unigram^0.75 table for negative sampling.
std::vector<double> negative_cdf(const Vocab& vocab) {
  std::vector<double> cdf(vocab.counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.counts.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.counts[i]), 0.75);
    cdf[i] = acc;
  }
  for (auto& c : cdf) c /= acc;
  return cdf;
}

}  // namespace

SgnsResult train_ctxt(const EntityCorpus& corpus, const SgnsConfig& cfg) {
  cfg.validate();
  if (corpus.sentences.empty()) throw EmptyCorpus("ctxt training corpus is empty");

  const Vocab vocab = build_vocab(corpus);
  const std::vector<double> cdf = negative_cdf(vocab);
  const std::size_t n = vocab.tokens.size();

  Rng rng(derive_seed(cfg.seed, "sgns"));
  std::vector<Vec> in_vecs(n), out_vecs(n);
  const double span = 1.0 / static_cast<double>(cfg.dim);
  for (std::size_t i = 0; i < n; ++i) {
    in_vecs[i] = Vec(cfg.dim);
    out_vecs[i] = Vec(cfg.dim);
    for (std::size_t k = 0; k < cfg.dim; ++k) in_vecs[i][k] = rng.uniform(-0.5 * span, 0.5 * span);
  }

  const auto sample_negative = [&](std::size_t exclude) -> std::size_t {
    for (int attempt = 0; attempt < 16; ++attempt) {
      const double u = rng.uniform();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const auto id = static_cast<std::size_t>(it - cdf.begin());
      if (id != exclude) return id;
    }
    return exclude;  // single-token corpora; caller skips this case
  };

  SgnsResult result;
  std::vector<std::size_t> kept;
  std::vector<Vec*> negatives;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    std::uint64_t pairs = 0;
    for (const auto& sentence : corpus.sentences) {
      kept.clear();
      for (const auto& tok : sentence) {
        const std::size_t id = vocab.index.at(tok);
        if (cfg.subsample > 0.0) {
          const double f = static_cast<double>(vocab.counts[id]) / static_cast<double>(vocab.total);
          const double discard = 1.0 - std::sqrt(cfg.subsample / f);
          if (discard > 0.0 && rng.uniform() < discard) continue;
        }
        kept.push_back(id);
      }
      for (std::size_t c = 0; c < kept.size(); ++c) {
        const std::size_t reach = 1 + static_cast<std::size_t>(rng.below(cfg.window));
        const std::size_t lo = c >= reach ? c - reach : 0;
        const std::size_t hi = std::min(kept.size(), c + reach + 1);
        for (std::size_t x = lo; x < hi; ++x) {
          if (x == c) continue;
          const std::size_t center = kept[c];
          const std::size_t context = kept[x];
          negatives.clear();
          if (n > 1) {
            for (std::size_t k = 0; k < cfg.negatives; ++k) {
              const std::size_t neg = sample_negative(context);
              if (neg != context) negatives.push_back(&out_vecs[neg]);
            }
          }
          loss -= sgns_pair_step(in_vecs[center], out_vecs[context], negatives, cfg.lr);
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }

  result.embeddings.dim = cfg.dim;
  for (std::size_t i = 0; i < n; ++i) {
    result.embeddings.table.emplace(vocab.tokens[i], std::move(in_vecs[i]));
    result.counts.emplace(vocab.tokens[i], vocab.counts[i]);
  }
  return result;
}

}  // namespace mvet
