#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "octree/error.hpp"
#include "octree/eval.hpp"
#include "octree/model_io.hpp"

using namespace octree;
using nlohmann::json;

namespace {

OcTree blob_tree() {
  auto ds = inject_uniform_outliers(eval::three_blobs(600, RngSeed{5}), 0.05, RngSeed{6});
  Hyperparams p;
  p.alpha = 0.8;
  return fit(ds, p);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("octree_io_" + name);
}

}  // namespace

TEST_CASE("save then load preserves every prediction") {
  const auto tree = blob_tree();
  REQUIRE(tree.leaf_count() >= 3);
  const auto path = temp_path("model.json");
  io::save_model(tree, path);
  const auto back = io::load_model(path);

  CHECK(back.attribute_names() == tree.attribute_names());
  CHECK(back.params() == tree.params());
  CHECK(back.training_accuracy() == tree.training_accuracy());
  CHECK(back.levels_grown() == tree.levels_grown());
  CHECK(back.n_train() == tree.n_train());
  CHECK(back.leaf_count() == tree.leaf_count());
  CHECK(io::model_to_json(back) == io::model_to_json(tree));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{u(rng), u(rng)};
    CHECK(back.predict(x) == tree.predict(x));
  }
}

TEST_CASE("document header") {
  const auto doc = io::model_to_json(blob_tree());
  CHECK(doc["format"] == "octree-model");
  CHECK(doc["format_version"] == io::kModelFormatVersion);
  CHECK(doc["tree"]["kind"] == "internal");
  CHECK(doc["params"]["alpha"] == 0.8);
}

TEST_CASE("load rejects malformed models") {
  auto doc = io::model_to_json(blob_tree());

  auto future = doc;
  future["format_version"] = 2;
  CHECK_THROWS_WITH_AS(io::model_from_json(future), doctest::Contains("format_version 2"), Error);

  auto foreign = doc;
  foreign["format"] = "something-else";
  CHECK_THROWS_AS(io::model_from_json(foreign), Error);

  auto no_tree = doc;
  no_tree.erase("tree");
  CHECK_THROWS_AS(io::model_from_json(no_tree), Error);

  auto bad_kind = doc;
  bad_kind["tree"]["kind"] = "shrub";
  CHECK_THROWS_AS(io::model_from_json(bad_kind), Error);

  auto overlapping = doc;
  auto& branches = overlapping["tree"]["branches"];
  REQUIRE(branches.size() >= 2);
  branches[1]["low"] = branches[0]["low"];
  CHECK_THROWS_AS(io::model_from_json(overlapping), Error);

  auto bad_params = doc;
  bad_params["params"]["nu"] = 1.5;
  CHECK_THROWS_AS(io::model_from_json(bad_params), Error);

  auto wrong_type = doc;
  wrong_type["n_train"] = "many";
  CHECK_THROWS_AS(io::model_from_json(wrong_type), Error);

  const auto garbage = temp_path("garbage.json");
  std::ofstream(garbage) << "{ not json";
  CHECK_THROWS_AS(io::load_model(garbage), Error);
  CHECK_THROWS_AS(io::load_model(temp_path("absent.json")), Error);
}

TEST_CASE("rules text and json") {
  RuleSet rules;
  rules.attribute_names = {"a1", "a2"};
  rules.rules.push_back({{{1, {5.4, 6.6}}, {0, {3.5, 4.5}}}});
  rules.rules.push_back({{{1, {-4.7, 0.7}}}});
  CHECK(io::rules_to_text(rules) ==
        "a2 ∈ [5.4, 6.6] AND a1 ∈ [3.5, 4.5]\n"
        "a2 ∈ [-4.7, 0.7]\n");

  const auto j = io::rules_to_json(rules);
  REQUIRE(j["rules"].size() == 2);
  CHECK(j["rules"][0]["terms"][1]["attribute"] == "a1");
  CHECK(j["rules"][0]["terms"][1]["low"] == 3.5);
  CHECK(j["rules"][1]["terms"][0]["high"] == 0.7);

  CHECK(io::rules_to_text(RuleSet{}).empty());
}
