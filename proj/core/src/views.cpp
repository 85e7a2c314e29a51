#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mvet/views.hpp"

namespace mvet {

namespace {

Vec lookup_or_oov(const std::string& token, const WordEmbeddings& emb, OovRule rule) {
  if (const Vec* v = emb.find(token)) return *v;
  switch (rule) {
    case OovRule::HashedUnit: return oov_vector(token, emb.dim);
    case OovRule::Zero: return Vec(emb.dim);
  }
  return Vec(emb.dim);
}

}  // namespace

Vec name_embedding(std::string_view title, const WordEmbeddings& emb, OovRule oov,
                   bool sum_words) {
  const std::string stripped = strip_parenthetical(title);
  const auto words = tokenize(stripped);
  if (words.empty()) throw EmptyName("name empty after stripping: '" + std::string(title) + "'");

  Vec acc(emb.dim);
  for (const auto& w : words) axpy(1.0, lookup_or_oov(w, emb, oov), acc);
  if (!sum_words) {
    const double inv = 1.0 / static_cast<double>(words.size());
    for (std::size_t k = 0; k < acc.len(); ++k) acc[k] *= inv;
  }
  return acc;
}

void DocFrequencies::add_doc(const std::vector<std::string>& tokens) {
  ++n_docs;
  std::vector<std::string> distinct(tokens);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (auto& t : distinct) ++df[t];
}

std::vector<std::pair<std::string, double>> tfidf_keywords(
    const std::vector<std::string>& paragraph, const DocFrequencies& corpus, std::size_t k) {
  if (paragraph.empty()) throw EmptyDescription("empty paragraph");
  if (k == 0) throw ConfigInvalid("keyword count must be >= 1");

  std::map<std::string, std::size_t> tf;
  for (const auto& t : paragraph) ++tf[t];

  const double n = static_cast<double>(corpus.n_docs);
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(tf.size());
  for (const auto& [token, count] : tf) {
    const auto it = corpus.df.find(token);
    const double df = it == corpus.df.end() ? 0.0 : static_cast<double>(it->second);
    const double idf = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    scored.emplace_back(token, static_cast<double>(count) * idf);
  }
  // Highest score first; equal scores keep lexicographic token order, which
  // the map iteration above already provides.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

Vec desc_embedding(const std::vector<std::string>& paragraph, const DocFrequencies& corpus,
                   const WordEmbeddings& emb, std::size_t k, OovRule oov) {
  const auto keywords = tfidf_keywords(paragraph, corpus, k);
  Vec acc(emb.dim);
  for (const auto& [token, score] : keywords) axpy(1.0, lookup_or_oov(token, emb, oov), acc);
  const double inv = 1.0 / static_cast<double>(keywords.size());
  for (std::size_t i = 0; i < acc.len(); ++i) acc[i] *= inv;
  return acc;
}

std::map<std::string, std::string> read_tsv(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected <id>\\t<text>");
    const std::string id = line.substr(0, tab);
    if (id.empty()) throw ParseError(lineno, "empty entity id");
    if (!out.emplace(id, line.substr(tab + 1)).second) {
      throw ParseError(lineno, "duplicate entity id '" + id + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  return read_tsv(in);
}

Dataset assemble_views(Dataset skeleton,
                       const std::map<std::string, LanguageSources>& sources,
                       const AssembleOptions& opts) {
  // Every declared view needs a source before any training starts.
  for (const auto& view : skeleton.views) {
    const auto it = sources.find(view.language);
    if (it == sources.end()) {
      throw SourceMissing("no sources for language '" + view.language + "'");
    }
    const auto& src = it->second;
    switch (view.repr) {
      case Representation::Ctxt:
        if (!src.corpus) throw SourceMissing("no corpus for view " + view.label());
        break;
      case Representation::Name:
        if (src.titles.empty()) throw SourceMissing("no titles for view " + view.label());
        if (!src.word_vectors) throw SourceMissing("no word vectors for view " + view.label());
        break;
      case Representation::Desc:
        if (src.descriptions.empty()) throw SourceMissing("no descriptions for view " + view.label());
        if (!src.word_vectors) throw SourceMissing("no word vectors for view " + view.label());
        break;
    }
    if (view.repr != Representation::Ctxt && it->second.word_vectors->dim != view.dim) {
      throw DimMismatch("view " + view.label() + " declares dim " + std::to_string(view.dim) +
                        " but word vectors have dim " +
                        std::to_string(it->second.word_vectors->dim));
    }
  }

  // Train one CTXT embedding per language that declares a ctxt view.
  std::map<std::string, WordEmbeddings> ctxt;
  for (const auto& view : skeleton.views) {
    if (view.repr != Representation::Ctxt || ctxt.count(view.language)) continue;
    SgnsConfig cfg = opts.sgns;
    cfg.dim = view.dim;
    cfg.seed = derive_seed(opts.sgns.seed, "ctxt:" + view.language);
    ctxt.emplace(view.language, train_ctxt(*sources.at(view.language).corpus, cfg).embeddings);
  }

  // Document frequencies per language, over that language's description set.
  std::map<std::string, DocFrequencies> dfs;
  for (const auto& [lang, src] : sources) {
    DocFrequencies d;
    for (const auto& [id, tokens] : src.descriptions) d.add_doc(tokens);
    dfs.emplace(lang, std::move(d));
  }

  for (auto& e : skeleton.entities) {
    e.views.assign(skeleton.views.size(), Vec());
    e.mask.assign(skeleton.views.size(), 0);
    for (ViewId j = 0; j < skeleton.views.size(); ++j) {
      const auto& view = skeleton.views[j];
      const auto& src = sources.at(view.language);
      switch (view.repr) {
        case Representation::Ctxt: {
          const Vec* v = ctxt.at(view.language).find(EntityCorpus::entity_token(e.id));
          if (v) {
            e.views[j] = *v;
            e.mask[j] = 1;
          }
          break;
        }
        case Representation::Name: {
          const auto it = src.titles.find(e.id);
          if (it == src.titles.end()) break;
          try {
            e.views[j] = name_embedding(it->second, *src.word_vectors, opts.oov, opts.name_sum);
            e.mask[j] = 1;
          } catch (const EmptyName&) {
            // Title collapses to nothing; the view is genuinely unavailable.
          }
          break;
        }
        case Representation::Desc: {
          const auto it = src.descriptions.find(e.id);
          if (it == src.descriptions.end() || it->second.empty()) break;
          e.views[j] = desc_embedding(it->second, dfs.at(view.language), *src.word_vectors,
                                      opts.keywords, opts.oov);
          e.mask[j] = 1;
          break;
        }
      }
    }
  }

  // freq = mention count in the first declared language's corpus.
  if (!skeleton.views.empty()) {
    const auto& first_lang = skeleton.views.front().language;
    const auto it = sources.find(first_lang);
    if (it != sources.end() && it->second.corpus) {
      std::unordered_map<std::string, std::uint64_t> mentions;
      for (const auto& sentence : it->second.corpus->sentences) {
        for (const auto& tok : sentence) {
          if (auto id = EntityCorpus::entity_id(tok)) ++mentions[std::string(*id)];
        }
      }
      for (auto& e : skeleton.entities) {
        const auto m = mentions.find(e.id);
        e.freq = m == mentions.end() ? 0 : m->second;
      }
    }
  }

  skeleton.validate();
  return skeleton;
}

}  // namespace mvet
