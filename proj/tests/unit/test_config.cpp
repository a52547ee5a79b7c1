#include <doctest.h>

#include <sstream>

#include "scatterhsd/config.hpp"
#include "scatterhsd/error.hpp"

using namespace scatterhsd;

TEST_CASE("config parsing and overrides") {
  std::istringstream in(
      "# comment\n"
      "[train]\n"
      "epochs = 12   ; trailing\n"
      "gamma = 1.0\n"
      "\n"
      "[scatter]\n"
      "seeds = 32\n"
      "neighbors = 16\n");
  auto cfg = config::Config::parse(in);
  CHECK(cfg.get_uint("train.epochs") == 12);
  CHECK(cfg.train().weights.gamma == 1.0);
  CHECK(cfg.scatter().output_size() == 512);

  cfg.apply_override("train.epochs=3");
  CHECK(cfg.train().epochs == 3);
  CHECK_THROWS_AS(cfg.apply_override("train.nope=1"), InvalidInput);
  CHECK_THROWS_AS(cfg.apply_override("train.epochs"), InvalidInput);

  std::ostringstream out;
  cfg.dump(out);
  std::istringstream back(out.str());
  CHECK(config::Config::parse(back) == cfg);

  std::istringstream unknown("[model]\nwidth = 3\n");
  CHECK_THROWS_AS(config::Config::parse(unknown), InvalidInput);
  std::istringstream broken("[train\n");
  CHECK_THROWS_AS(config::Config::parse(broken), ParseError);

  cfg.set("train.schedule", "linear");
  CHECK_THROWS_AS(cfg.train(), InvalidInput);
}

TEST_CASE("model sizes follow the config") {
  config::Config cfg;
  cfg.set("model.coarse_points", "64");
  cfg.set("model.split_ratios", "1,2,2");
  const auto m = cfg.model();
  CHECK(m.upstream.target_points == 256);
  CHECK(m.hfe.levels == 3);
  CHECK(config::parse_size_list("8, 16,24") == std::vector<std::size_t>{8, 16, 24});
  CHECK_THROWS_AS(config::parse_size_list("8,x"), InvalidInput);
}
