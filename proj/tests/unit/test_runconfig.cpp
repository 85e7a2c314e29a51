#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "mvet/runconfig.hpp"

using namespace mvet;

TEST_CASE("from_stream parses pairs, comments and blank lines") {
  std::istringstream in(
      "# run settings\n"
      "\n"
      "seed = 42\n"
      "views=en:ctxt, de:name\n"
      "  lr = 1e-3  \n");
  const RunConfig cfg = RunConfig::from_stream(in);
  CHECK(cfg.get_u64("seed", 0) == 42);
  CHECK(cfg.get_string("views", "") == "en:ctxt, de:name");
  CHECK(cfg.get_double("lr", 0.0) == 1e-3);
  CHECK(cfg.entries().size() == 3);
}

TEST_CASE("from_stream rejects malformed lines with line numbers") {
  {
    std::istringstream in("a=1\nnot a pair\n");
    CHECK_THROWS_WITH_AS(RunConfig::from_stream(in), doctest::Contains("line 2"), ParseError);
  }
  {
    std::istringstream in("=value\n");
    CHECK_THROWS_AS(RunConfig::from_stream(in), ParseError);
  }
  {
    std::istringstream in("a=1\na=2\n");
    CHECK_THROWS_WITH_AS(RunConfig::from_stream(in), doctest::Contains("duplicate"), ParseError);
  }
}

TEST_CASE("set and set_kv override file values") {
  std::istringstream in("seed=1\nlr=0.1\n");
  RunConfig cfg = RunConfig::from_stream(in);
  cfg.set("seed", "7");
  cfg.set_kv("lr = 0.5");
  cfg.set_kv("extra=x");
  CHECK(cfg.get_u64("seed", 0) == 7);
  CHECK(cfg.get_double("lr", 0.0) == 0.5);
  CHECK(cfg.get_string("extra", "") == "x");

  CHECK_THROWS_AS(cfg.set_kv("novalue"), ConfigInvalid);
  CHECK_THROWS_AS(cfg.set_kv("=x"), ConfigInvalid);
}

TEST_CASE("typed getters fall back when absent and name the key on bad values") {
  RunConfig cfg;
  cfg.set("n", "12");
  cfg.set("x", "2.5");
  cfg.set("flag", "TRUE");
  cfg.set("off", "0");
  cfg.set("bad", "twelve");

  CHECK(cfg.get_u64("n", 0) == 12);
  CHECK(cfg.get_u64("missing", 9) == 9);
  CHECK(cfg.get_double("x", 0.0) == 2.5);
  CHECK(cfg.get_double("missing", 1.5) == 1.5);
  CHECK(cfg.get_bool("flag", false));
  CHECK_FALSE(cfg.get_bool("off", true));
  CHECK(cfg.get_bool("missing", true));
  CHECK(cfg.get_string("missing", "dflt") == "dflt");

  CHECK_THROWS_WITH_AS(cfg.get_u64("bad", 0), doctest::Contains("bad"), ConfigInvalid);
  CHECK_THROWS_WITH_AS(cfg.get_double("bad", 0.0), doctest::Contains("bad"), ConfigInvalid);
  CHECK_THROWS_AS(cfg.get_bool("bad", false), ConfigInvalid);
  CHECK_THROWS_AS(cfg.get_u64("x", 0), ConfigInvalid);  // trailing ".5"
}

TEST_CASE("get_list splits on commas and trims") {
  RunConfig cfg;
  cfg.set("views", "en:ctxt, de:name ,fr:desc");
  cfg.set("empty", "");
  const auto xs = cfg.get_list("views");
  REQUIRE(xs.size() == 3);
  CHECK(xs[0] == "en:ctxt");
  CHECK(xs[1] == "de:name");
  CHECK(xs[2] == "fr:desc");
  CHECK(cfg.get_list("empty").empty());
  CHECK(cfg.get_list("missing").empty());
}

TEST_CASE("require_known names the offending key") {
  RunConfig cfg;
  cfg.set("seed", "1");
  cfg.set("mystery", "2");
  CHECK_NOTHROW(cfg.require_known({"seed", "mystery"}));
  CHECK_THROWS_WITH_AS(cfg.require_known({"seed"}), doctest::Contains("mystery"), ConfigInvalid);
}

TEST_CASE("echo is sorted and round trips") {
  RunConfig cfg;
  cfg.set("zeta", "3");
  cfg.set("alpha", "1");
  cfg.set("mid", "2");
  const std::string echo = cfg.echo();
  CHECK(echo == "alpha=1\nmid=2\nzeta=3\n");

  std::istringstream in(echo);
  const RunConfig again = RunConfig::from_stream(in);
  CHECK(again.entries() == cfg.entries());
}
