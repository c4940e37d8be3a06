#include "octree/model_io.hpp"

#include <fstream>
#include <sstream>

#include "octree/error.hpp"
#include "octree/format.hpp"

namespace octree::io {

using nlohmann::json;

namespace {

json interval_json(const Interval& iv) { return json::array({iv.low, iv.high}); }

Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("model: interval must be [low, high]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.low <= iv.high)) throw Error("model: interval with low > high");
  return iv;
}

json node_json(const OcNode& node) {
  json out;
  out["kind"] = node.is_leaf() ? "leaf" : "internal";
  out["count"] = node.count;
  json bounds = json::array();
  for (const auto& b : node.bounds) bounds.push_back(interval_json(b));
  out["bounds"] = std::move(bounds);
  if (!node.is_leaf()) {
    out["attribute"] = *node.attribute;
    json branches = json::array();
    for (std::size_t i = 0; i < node.branches.size(); ++i) {
      branches.push_back({{"low", node.branches[i].interval.low},
                          {"high", node.branches[i].interval.high},
                          {"child", node_json(node.child(i))}});
    }
    out["branches"] = std::move(branches);
  }
  return out;
}

OcNode node_from(const json& j, std::size_t dims) {
  OcNode node;
  node.count = j.at("count").get<std::size_t>();
  for (const auto& b : j.at("bounds")) node.bounds.push_back(interval_from(b));
  if (node.bounds.size() != dims) throw Error("model: node bounds do not match attribute count");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "leaf") return node;
  if (kind != "internal") throw Error("model: unknown node kind \"" + kind + "\"");
  node.attribute = j.at("attribute").get<std::size_t>();
  if (*node.attribute >= dims) throw Error("model: split attribute out of range");
  for (const auto& b : j.at("branches")) {
    Branch branch;
    branch.interval = interval_from(json::array({b.at("low"), b.at("high")}));
    branch.child.push_back(node_from(b.at("child"), dims));
    if (!node.branches.empty() && !(node.branches.back().interval.high < branch.interval.low)) {
      throw Error("model: branch intervals must be sorted and disjoint");
    }
    node.branches.push_back(std::move(branch));
  }
  if (node.branches.empty()) throw Error("model: internal node without branches");
  return node;
}

}  // namespace

json model_to_json(const OcTree& tree) {
  const auto& p = tree.params();
  return json{
      {"format", "octree-model"},
      {"format_version", kModelFormatVersion},
      {"params",
       {{"gamma", p.gamma},
        {"alpha", p.alpha},
        {"beta", p.beta},
        {"nu", p.nu},
        {"grid_points", p.grid_points},
        {"min_leaf", p.min_leaf}}},
      {"attribute_names", tree.attribute_names()},
      {"n_train", tree.n_train()},
      {"training_accuracy", tree.training_accuracy()},
      {"levels_grown", tree.levels_grown()},
      {"tree", node_json(tree.root())},
  };
}

OcTree model_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "octree-model") {
      throw Error("not an octree model document");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format_version " + std::to_string(version) +
                  " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    const auto& jp = doc.at("params");
    Hyperparams p;
    p.gamma = jp.at("gamma").get<double>();
    p.alpha = jp.at("alpha").get<double>();
    p.beta = jp.at("beta").get<double>();
    p.nu = jp.at("nu").get<double>();
    p.grid_points = jp.at("grid_points").get<std::size_t>();
    p.min_leaf = jp.at("min_leaf").get<std::size_t>();
    p.validate();
    auto names = doc.at("attribute_names").get<std::vector<std::string>>();
    auto root = node_from(doc.at("tree"), names.size());
    return OcTree(std::move(root), std::move(names), p, doc.at("training_accuracy").get<double>(),
                  doc.at("levels_grown").get<std::size_t>(), doc.at("n_train").get<std::size_t>());
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

void save_model(const OcTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(tree).dump(2) << '\n';
}

OcTree load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

std::string rules_to_text(const RuleSet& rules) {
  std::ostringstream out;
  for (const auto& rule : rules.rules) {
    for (std::size_t t = 0; t < rule.terms.size(); ++t) {
      const auto& term = rule.terms[t];
      out << (t ? " AND " : "") << rules.attribute_names[term.attribute] << " ∈ ["
          << format_double(term.interval.low) << ", " << format_double(term.interval.high)
          << ']';
    }
    out << '\n';
  }
  return out.str();
}

json rules_to_json(const RuleSet& rules) {
  json out = json::array();
  for (const auto& rule : rules.rules) {
    json terms = json::array();
    for (const auto& term : rule.terms) {
      terms.push_back({{"attribute", rules.attribute_names[term.attribute]},
                       {"low", term.interval.low},
                       {"high", term.interval.high}});
    }
    out.push_back({{"terms", std::move(terms)}});
  }
  return json{{"rules", std::move(out)}};
}

}  // namespace octree::io
