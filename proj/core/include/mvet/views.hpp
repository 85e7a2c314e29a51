#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mvet/dataset.hpp"
#include "mvet/numeric.hpp"

namespace mvet {

// Whitespace tokenization with edge punctuation stripped and lowercasing.
std::vector<std::string> tokenize(std::string_view text);

// Removes every parenthesized substring (nesting included), collapses
// whitespace and trims. Idempotent.
std::string strip_parenthetical(std::string_view title);

struct WordEmbeddings {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vec> table;

  const Vec* find(std::string_view token) const;
};

// word2vec text format: header "<count> <dim>", then "<token> <floats...>".
WordEmbeddings load_embeddings(std::istream& in);
WordEmbeddings load_embeddings(const std::filesystem::path& path);
void write_embeddings(const WordEmbeddings& emb,
                      const std::vector<std::string>& token_order, std::ostream& out);

enum class OovRule { HashedUnit, Zero };

// Deterministic stand-in vector for out-of-vocabulary tokens: unit-norm,
// seeded by a 64-bit hash of the token.
Vec oov_vector(std::string_view token, std::size_t dim);

// Mean (or sum) of the word vectors of the stripped, tokenized title.
Vec name_embedding(std::string_view title, const WordEmbeddings& emb,
                   OovRule oov = OovRule::HashedUnit, bool sum_words = false);

struct DocFrequencies {
  std::size_t n_docs = 0;
  std::unordered_map<std::string, std::size_t> df;

  void add_doc(const std::vector<std::string>& tokens);
};

// score(w) = tf(w) * (ln((1+N)/(1+df(w))) + 1), ties broken by token order.
std::vector<std::pair<std::string, double>> tfidf_keywords(
    const std::vector<std::string>& paragraph, const DocFrequencies& corpus,
    std::size_t k);

Vec desc_embedding(const std::vector<std::string>& paragraph, const DocFrequencies& corpus,
                   const WordEmbeddings& emb, std::size_t k,
                   OovRule oov = OovRule::HashedUnit);

// Tokenized sentences; entity mentions are reserved "@ENT:<id>" tokens.
struct EntityCorpus {
  static constexpr std::string_view kEntityPrefix = "@ENT:";

  std::vector<std::vector<std::string>> sentences;

  static std::string entity_token(std::string_view id);
  static std::optional<std::string_view> entity_id(std::string_view token);
};

// One sentence per line, space-separated tokens.
EntityCorpus read_corpus(std::istream& in);
EntityCorpus read_corpus(const std::filesystem::path& path);

struct SgnsConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double lr = 0.025;
  std::size_t epochs = 5;
  double subsample = 0.0;  // 0 disables frequent-word subsampling
  std::uint64_t seed = 1;

  void validate() const;
};

// One skip-gram update for a (center, context) pair plus negatives.
// Returns the pair objective ln s(u_ctx.v) + sum ln s(-u_neg.v) before the
// update. Exposed so tests can drive single steps.
double sgns_pair_step(Vec& center_in, Vec& context_out,
                      const std::vector<Vec*>& negatives_out, double lr);

struct SgnsResult {
  WordEmbeddings embeddings;             // input vectors, token -> Vec
  std::vector<double> epoch_loss;        // mean negative objective per epoch
  std::unordered_map<std::string, std::uint64_t> counts;
};

// Skip-gram with negative sampling over the corpus; entity-ID tokens train
// like any other token. Single-threaded, deterministic given cfg.seed.
SgnsResult train_ctxt(const EntityCorpus& corpus, const SgnsConfig& cfg);

// Per-language raw material for view construction.
struct LanguageSources {
  std::optional<EntityCorpus> corpus;                          // CTXT
  std::map<std::string, std::string> titles;                   // NAME: id -> title
  std::map<std::string, std::vector<std::string>> descriptions;  // DESC: id -> tokens
  std::optional<WordEmbeddings> word_vectors;                  // NAME/DESC lookups
};

// id<TAB>text, one entity per line.
std::map<std::string, std::string> read_tsv(std::istream& in);
std::map<std::string, std::string> read_tsv(const std::filesystem::path& path);

struct AssembleOptions {
  SgnsConfig sgns;
  std::size_t keywords = 20;
  OovRule oov = OovRule::HashedUnit;
  bool name_sum = false;
};

// Fills every declared view of the skeleton from the per-language sources.
// Mask bits reflect genuine availability: an entity absent from a corpus,
// without a title, or without a description keeps the bit off. freq is the
// mention count in the first declared language's corpus.
Dataset assemble_views(Dataset skeleton,
                       const std::map<std::string, LanguageSources>& sources,
                       const AssembleOptions& opts);

}  // namespace mvet
