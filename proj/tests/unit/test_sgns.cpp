#include <cmath>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "mvet/views.hpp"

using namespace mvet;

namespace {

double cosine(const Vec& a, const Vec& b) {
  const double d = dot(a, b);
  return d / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b)));
}

}  // namespace

TEST_CASE("sgns_pair_step matches a hand-rolled word2vec update") {
  Vec center{1.0, 0.0};
  Vec context{0.5, 0.5};
  Vec negative{-0.25, 0.5};
  const double objective = sgns_pair_step(center, context, {&negative}, 0.1);

  // The accumulator reads pre-update output vectors; outputs update against
  // the pre-update center; the center moves last.
  CHECK(objective == doctest::Approx(-1.0500164040589504).epsilon(1e-15));
  CHECK(center[0] == doctest::Approx(1.0298226209177623).epsilon(1e-15));
  CHECK(center[1] == doctest::Approx(-0.0030141415158028255).epsilon(1e-12));
  CHECK(context[0] == doctest::Approx(0.53775406687981453).epsilon(1e-15));
  CHECK(context[1] == 0.5);
  CHECK(negative[0] == doctest::Approx(-0.29378234991142022).epsilon(1e-15));
  CHECK(negative[1] == 0.5);
}

TEST_CASE("sgns config validation") {
  SgnsConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
  cfg.dim = 8;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
}

TEST_CASE("train_ctxt counts tokens and refuses empty corpora") {
  std::istringstream in("a b a\n");
  const EntityCorpus corpus = read_corpus(in);
  SgnsConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 1;
  cfg.window = 1;
  const SgnsResult res = train_ctxt(corpus, cfg);
  CHECK(res.counts.at("a") == 2);
  CHECK(res.counts.at("b") == 1);
  CHECK(res.embeddings.dim == 4);
  CHECK(res.embeddings.table.size() == 2);

  CHECK_THROWS_AS(train_ctxt(EntityCorpus{}, cfg), EmptyCorpus);
}

TEST_CASE("train_ctxt is deterministic and the loss trends down") {
  const EntityCorpus corpus = read_corpus(data_file("toy_corpus.txt"));
  SgnsConfig cfg;
  cfg.dim = 12;
  cfg.window = 3;
  cfg.epochs = 6;
  cfg.lr = 0.05;
  cfg.seed = 9;

  const SgnsResult a = train_ctxt(corpus, cfg);
  const SgnsResult b = train_ctxt(corpus, cfg);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(*a.embeddings.find("river") == *b.embeddings.find("river"));

  REQUIRE(a.epoch_loss.size() == 6);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());

  SgnsConfig reseeded = cfg;
  reseeded.seed = 10;
  const SgnsResult c = train_ctxt(corpus, reseeded);
  CHECK_FALSE(*c.embeddings.find("river") == *a.embeddings.find("river"));
}

TEST_CASE("planted clusters separate in embedding space") {
  const EntityCorpus corpus = read_corpus(data_file("toy_corpus.txt"));
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.window = 3;
  cfg.epochs = 10;
  cfg.lr = 0.05;
  cfg.seed = 1;
  const SgnsResult res = train_ctxt(corpus, cfg);

  const auto centroid = [&](const char* prefix) {
    Vec c(cfg.dim);
    for (int i = 0; i < 5; ++i) {
      const std::string tok = EntityCorpus::entity_token(prefix + std::to_string(i));
      REQUIRE(res.embeddings.find(tok) != nullptr);
      axpy(1.0, *res.embeddings.find(tok), c);
    }
    return scale(c, 0.2);
  };
  const Vec river = centroid("riv");
  const Vec music = centroid("mus");

  for (int i = 0; i < 5; ++i) {
    const Vec& r = *res.embeddings.find(EntityCorpus::entity_token("riv" + std::to_string(i)));
    const Vec& m = *res.embeddings.find(EntityCorpus::entity_token("mus" + std::to_string(i)));
    CHECK(cosine(r, river) > cosine(r, music));
    CHECK(cosine(m, music) > cosine(m, river));
  }
}
