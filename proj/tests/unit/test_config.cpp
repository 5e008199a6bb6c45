#include <doctest.h>

#include <cstdlib>

#include "emosura/config.hpp"
#include "test_support.hpp"

using namespace emosura;

TEST_CASE("layer precedence: defaults < file < env < cli") {
  const ConfigLayer file{{"timeout_s", "30"}, {"jobs", "2"}, {"text_model", "file-model"}};
  const ConfigLayer env{{"timeout_s", "45"}, {"jobs", "3"}};
  const ConfigLayer cli{{"jobs", "4"}};
  const auto cfg = EffectiveConfig::merge(file, env, cli);
  CHECK(cfg.get("max_inflight") == "8");
  CHECK(cfg.source("max_inflight") == "default");
  CHECK(cfg.get("text_model") == "file-model");
  CHECK(cfg.source("text_model") == "file");
  CHECK(cfg.get_double("timeout_s") == 45.0);
  CHECK(cfg.source("timeout_s") == "env");
  CHECK(cfg.get_size("jobs") == 4);
  CHECK(cfg.source("jobs") == "cli");
}

TEST_CASE("config file syntax") {
  const auto layer = parse_config_text(
      "# comment\n[backend]\ntext_endpoint = \"http://h:8000/v1\"\ntimeout_s = 12 # inline\n\nmock=\n");
  CHECK(layer.at("text_endpoint") == "http://h:8000/v1");
  CHECK(layer.at("timeout_s") == "12");
  CHECK(layer.at("mock").empty());
  CHECK_THROWS_AS(parse_config_text("api_key = sk-123\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/emosura.conf"), ConfigError);
}

TEST_CASE("environment layer") {
  ::setenv("EMOSURA_MAX_INFLIGHT", "2", 1);
  const auto env = config_from_env();
  CHECK(env.at("max_inflight") == "2");
  ::unsetenv("EMOSURA_MAX_INFLIGHT");
  CHECK_FALSE(config_from_env().contains("max_inflight"));
}

TEST_CASE("typed accessors validate") {
  const auto cfg = EffectiveConfig::merge({{"timeout_s", "soon"}, {"jobs", "-1"}, {"gt_context", "maybe"}}, {}, {});
  CHECK_THROWS_AS(cfg.get_double("timeout_s"), ConfigError);
  CHECK_THROWS_AS(cfg.get_size("jobs"), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("gt_context"), ConfigError);
  CHECK_THROWS_AS(cfg.get("no_such_key"), ConfigError);
  CHECK(EffectiveConfig::merge({}, {}, {}).get_bool("gt_context"));
}

TEST_CASE("digest tracks values, never key material") {
  const auto base = EffectiveConfig::merge({}, {}, {});
  CHECK(base.digest() == EffectiveConfig::merge({}, {}, {}).digest());
  CHECK(base.digest() != EffectiveConfig::merge({}, {}, {{"jobs", "3"}}).digest());
  ::setenv("EMOSURA_API_KEY", "sk-should-not-matter", 1);
  const auto with_key = EffectiveConfig::merge({}, config_from_env(), {});
  CHECK(with_key.digest() == base.digest());
  CHECK(with_key.to_json().dump().find("sk-should-not-matter") == std::string::npos);
  ::unsetenv("EMOSURA_API_KEY");
}

TEST_CASE("endpoint host extraction") {
  CHECK(endpoint_host("https://api.example.com:8443/v1/chat/completions") == "api.example.com:8443");
  CHECK(endpoint_host("http://user:secret@h/v1") == "h");
  CHECK(endpoint_host("").empty());
}
