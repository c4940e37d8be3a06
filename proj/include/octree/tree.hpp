#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "octree/dataset.hpp"
#include "octree/split.hpp"

namespace octree {

struct Hyperparams {
  double gamma = 0.05;  // clipping level, fraction of the density maximum
  double alpha = 0.5;   // significance of a local minimum for revision
  double beta = 0.02;   // minimum interval support, fraction of the root size
  double nu = 0.1;      // tolerated fraction of rejected training rows
  std::size_t grid_points = kde::kDefaultGridPoints;
  std::size_t min_leaf = 5;

  // Throws octree::Error naming the first out-of-range field.
  void validate() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct OcNode;

struct Branch {
  Interval interval;
  std::vector<OcNode> child;  // exactly one element; vector keeps OcNode a value type
};

// A node of the tree. Internal nodes test one attribute against their sorted,
// disjoint branch intervals; a value matching no branch is an outlier.
struct OcNode {
  std::vector<Interval> bounds;  // hyper-rectangle, one interval per attribute
  std::size_t count = 0;         // training rows inside `bounds`
  std::optional<std::size_t> attribute;
  std::vector<Branch> branches;

  bool is_leaf() const { return !attribute.has_value(); }
  const OcNode& child(std::size_t i) const { return branches[i].child.front(); }
};

struct RuleTerm {
  std::size_t attribute = 0;
  Interval interval;
};

// Conjunction of closed intervals; one per target leaf.
struct Rule {
  std::vector<RuleTerm> terms;
  bool matches(std::span<const double> instance) const;
};

struct RuleSet {
  std::vector<std::string> attribute_names;
  std::vector<Rule> rules;
};

class OcTree {
 public:
  OcTree(OcNode root, std::vector<std::string> attribute_names, Hyperparams params,
         double training_accuracy, std::size_t levels_grown, std::size_t n_train);

  const OcNode& root() const { return root_; }
  const std::vector<std::string>& attribute_names() const { return names_; }
  const Hyperparams& params() const { return params_; }
  double training_accuracy() const { return training_accuracy_; }
  std::size_t levels_grown() const { return levels_grown_; }
  std::size_t n_train() const { return n_train_; }
  std::size_t dimension() const { return names_.size(); }

  std::size_t leaf_count() const;
  std::size_t depth() const;
  bool root_only() const { return root_.is_leaf(); }

  // Target iff the instance lies in the root bounding box and every tested
  // attribute on some root-to-leaf path falls inside its branch interval.
  Label predict(std::span<const double> instance) const;
  std::vector<Label> predict(const Dataset& ds) const;

 private:
  OcNode root_;
  std::vector<std::string> names_;
  Hyperparams params_;
  double training_accuracy_ = 1.0;
  std::size_t levels_grown_ = 0;
  std::size_t n_train_ = 0;
};

// Attributes used on a branch since (and including) its last split into
// several target nodes.
using AttributeHistory = std::set<std::size_t>;

// An attribute is ineligible when its values are constant, it is already in
// the branch history, or its bandwidth is zero or finer than the data
// granularity (smallest gap between distinct sorted values).
bool attribute_eligible(std::span<const double> values, std::size_t attribute,
                        const AttributeHistory& history);

// Grows the tree level by level over every row of `train` (labels ignored).
OcTree fit(const Dataset& train, const Hyperparams& params);

RuleSet extract_rules(const OcTree& tree);

double training_accuracy(const OcTree& tree, const Dataset& train);

// Conjunctive ensemble: Target only when every member accepts. Members look
// their attributes up by name in `attribute_names`.
Label ensemble_predict(std::span<const OcTree> trees, std::span<const double> instance,
                       const std::vector<std::string>& attribute_names);

}  // namespace octree
