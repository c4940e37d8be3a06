#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "octree");
  std::ostringstream out, err;
  const int status = octree::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string temp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("octree_cli_" + name)).string();
}

std::string write(const std::string& name, const std::string& body) {
  const auto path = temp(name);
  std::ofstream(path) << body;
  return path;
}

// Fits a model on the synthetic blobs once for the tests that need one.
const std::string& blob_model() {
  static const std::string path = [] {
    const auto data = temp("blobs.csv");
    REQUIRE(run({"blobs", "--out", data, "--n", "600", "--seed", "3"}).status == 0);
    const auto model = temp("blobs_model.json");
    REQUIRE(run({"train", "--input", data, "--label-column", "label", "--output", model})
                .status == 0);
    return model;
  }();
  return path;
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
  CHECK(run({}).status != 0);
  CHECK(run({"frobnicate"}).status != 0);
}

TEST_CASE("train validates hyperparameters") {
  const auto data = write("small.csv", "a1,a2\n1,2\n3,4\n5,6\n");
  auto r = run({"train", "--input", data, "--output", temp("never.json"), "--nu", "1.5"});
  CHECK(r.status == 1);
  CHECK(r.err.find("nu") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(temp("never.json")));
}

TEST_CASE("train reports the fitted tree") {
  const auto data = temp("blobs_train.csv");
  REQUIRE(run({"blobs", "--out", data, "--n", "300", "--seed", "8"}).status == 0);
  auto r = run({"train", "--input", data, "--label-column", "label", "--output",
                temp("train_model.json")});
  CHECK(r.status == 0);
  CHECK(r.out.find("training accuracy:") != std::string::npos);
  CHECK(r.out.find("target leaves: 3") != std::string::npos);
}

TEST_CASE("train with cross-validation prints the selection") {
  const auto data = temp("blobs_cv.csv");
  REQUIRE(run({"blobs", "--out", data, "--n", "300", "--noise", "5", "--seed", "4"}).status == 0);
  auto r = run({"train", "--input", data, "--label-column", "label", "--output",
                temp("cv_model.json"), "--cv", "default", "--folds", "3"});
  CHECK(r.status == 0);
  CHECK(r.out.find("cv: 48 fits over 16 parameter sets, 3 folds") != std::string::npos);
  CHECK(r.out.find("selected: gamma=0.05 alpha=") != std::string::npos);

  auto custom = run({"train", "--input", data, "--label-column", "label", "--output",
                     temp("cv_model2.json"), "--cv", "alpha=0.5,0.9;nu=0.1", "--folds", "3"});
  CHECK(custom.status == 0);
  CHECK(custom.out.find("cv: 6 fits over 2 parameter sets") != std::string::npos);

  auto bad = run({"train", "--input", data, "--label-column", "label", "--output",
                  temp("cv_model3.json"), "--cv", "delta=1"});
  CHECK(bad.status == 1);
  CHECK(bad.err.find("unknown grid key") != std::string::npos);
}

TEST_CASE("predict") {
  const auto& model = blob_model();
  const auto probe = write("probe.csv", "a2,a1\n-6,-6\n6,0\n-20,30\n");  // columns reordered
  auto r = run({"predict", "--model", model, "--input", probe});
  CHECK(r.status == 0);
  CHECK(r.out == "target\ntarget\noutlier\n");

  const auto missing = write("missing.csv", "a1\n0\n");
  auto m = run({"predict", "--model", model, "--input", missing});
  CHECK(m.status == 1);
  CHECK(m.err.find("\"a2\"") != std::string::npos);

  const auto empty = write("empty.csv", "a1,a2\n");
  auto e = run({"predict", "--model", model, "--input", empty});
  CHECK(e.status == 0);
  CHECK(e.out.empty());

  const auto labelled = write("labelled.csv", "a1,a2,label\n-6,-6,target\n");
  auto l = run({"predict", "--model", model, "--input", labelled, "--label-column", "label",
                "--out", temp("labels.txt")});
  CHECK(l.status == 0);
  std::ifstream in(temp("labels.txt"));
  std::string first;
  std::getline(in, first);
  CHECK(first == "target");

  CHECK(run({"predict", "--model", temp("nope.json"), "--input", probe}).status == 1);
}

TEST_CASE("rules") {
  const auto& model = blob_model();
  auto text = run({"rules", "--model", model});
  CHECK(text.status == 0);
  CHECK(lines(text.out) == 3);
  CHECK(text.out.find(" ∈ [") != std::string::npos);

  auto json = run({"rules", "--model", model, "--format", "json"});
  CHECK(json.status == 0);
  CHECK(json.out.find("\"rules\"") != std::string::npos);

  auto yaml = run({"rules", "--model", model, "--format", "yaml"});
  CHECK(yaml.status == 1);
  CHECK(yaml.err.find("supported: text, json") != std::string::npos);
}

TEST_CASE("evaluate") {
  const auto& model = blob_model();
  const auto perfect = write("perfect.csv", "a1,a2,label\n-6,-6,target\n0,6,target\n30,30,outlier\n");
  auto r = run({"evaluate", "--model", model, "--input", perfect});
  CHECK(r.status == 0);
  CHECK(r.out.find("rows: 3") != std::string::npos);
  CHECK(r.out.find("TT: 2  FT: 0  FO: 0  TO: 1") != std::string::npos);
  CHECK(r.out.find("precision: 1\nrecall: 1\nf1: 1\n") != std::string::npos);

  const auto unlabelled = write("unlabelled.csv", "a1,a2\n0,0\n");
  CHECK(run({"evaluate", "--model", model, "--input", unlabelled}).status == 1);
}

TEST_CASE("benchmark") {
  const std::string iris = OCTREE_DATA_DIR "/iris.csv";
  CHECK(run({"benchmark", "--input", iris, "--approach", "C"}).status != 0);

  const std::vector<std::string> args{"benchmark", "--input", iris,   "--approach",
                                      "B",         "--noise", "5",    "--folds",
                                      "3",         "--grid",  "alpha=0.5;nu=0.1",
                                      "--no-timing"};
  auto r = run(args);
  CHECK(r.status == 0);
  CHECK(lines(r.out) == 4);  // header + one row per class
  CHECK(r.out.find("iris,B:setosa,0.05,") != std::string::npos);
  CHECK(run(args).out == r.out);

  auto to_file = run({"benchmark", "--input", iris, "--noise", "2", "--folds", "3", "--grid",
                      "alpha=0.5;nu=0.1", "--out", temp("report.csv"), "--name", "flowers"});
  CHECK(to_file.status == 0);
  std::ifstream in(temp("report.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.rfind("flowers,A,0.02,", 0) == 0);

  CHECK(run({"benchmark", "--input", iris, "--seeds", "-1"}).status == 1);
}

TEST_CASE("blobs") {
  auto r = run({"blobs", "--out", temp("b.csv"), "--n", "90", "--noise", "10"});
  CHECK(r.status == 0);
  CHECK(r.out.find("wrote 99 rows") != std::string::npos);
}
