#include <doctest.h>

#include <cstdlib>

#include "stefan/config.hpp"

using namespace stefan;

TEST_CASE("config text round trip") {
  const std::string text =
      "# comment\n"
      "domain.sigma = 3.5\n"
      "grid.nx = 8   # trailing comment\n"
      "region.kind = rectangle\n"
      "region.a = 0.25\n"
      "control.backend = gramian_cg\n"
      "seed = 99\n";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.domain.sigma == 3.5);
  CHECK(cfg.grid.nx == 8);
  CHECK(cfg.region.kind == ControlRegion::Kind::rectangle);
  CHECK(cfg.region.a == 0.25);
  CHECK(cfg.backend == Backend::gramian_cg);
  CHECK(cfg.seed == 99);

  // the emitted schema parses back to the same values
  const ExperimentConfig cfg2 = parse_config_text(config_schema_text(cfg));
  CHECK(config_schema_text(cfg2) == config_schema_text(cfg));
}

TEST_CASE("unknown keys and malformed values are rejected") {
  CHECK_THROWS_AS(parse_config_text("nope.key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("domain.sigma = abc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("grid.nx = 2.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("region.kind = circle\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("domain.sigma 3\n"), std::invalid_argument);
}

TEST_CASE("validation produces field-level errors") {
  ExperimentConfig cfg;
  cfg.domain.sigma = -1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "domain: sigma must be >= 0", std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.initial = "bogus";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.domain.period = 1.7;  // breaks the equal-mesh constraint
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("environment overrides win over file values") {
  setenv("STEFANCTL_DOMAIN_SIGMA", "7.25", 1);
  ExperimentConfig cfg = parse_config_text("domain.sigma = 1\n");
  apply_env_overrides(cfg);
  CHECK(cfg.domain.sigma == 7.25);
  unsetenv("STEFANCTL_DOMAIN_SIGMA");
}

TEST_CASE("default config validates and builds its preset") {
  ExperimentConfig cfg;
  cfg.validate();
  const State z0 = cfg.make_initial();
  CHECK(z0.matches(cfg.grid));
}
