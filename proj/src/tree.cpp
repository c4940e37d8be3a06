#include "octree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "octree/error.hpp"

namespace octree {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

// Mutable node used while growing; converted to OcNode at the end.
struct GrowNode {
  std::vector<Interval> bounds;
  std::vector<std::size_t> rows;
  AttributeHistory history;
  std::optional<std::size_t> attribute;
  std::vector<std::pair<Interval, std::size_t>> branches;  // (interval, node id)
};

std::vector<double> node_column(const Dataset& ds, const std::vector<std::size_t>& rows,
                                std::size_t j) {
  std::vector<double> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = ds.at(rows[i], j);
  return v;
}

bool no_progress(const SplitCandidate& c, const GrowNode& node) {
  return c.target_intervals.size() == 1 &&
         c.target_intervals.front() == node.bounds[c.attribute] &&
         c.counts.front() == node.rows.size();
}

OcNode freeze(const std::vector<GrowNode>& nodes, std::size_t id) {
  const GrowNode& g = nodes[id];
  OcNode out;
  out.bounds = g.bounds;
  out.count = g.rows.size();
  out.attribute = g.attribute;
  for (const auto& [iv, child] : g.branches) {
    Branch b;
    b.interval = iv;
    b.child.push_back(freeze(nodes, child));
    out.branches.push_back(std::move(b));
  }
  return out;
}

std::size_t count_leaves(const OcNode& n) {
  if (n.is_leaf()) return 1;
  std::size_t total = 0;
  for (std::size_t i = 0; i < n.branches.size(); ++i) total += count_leaves(n.child(i));
  return total;
}

std::size_t node_depth(const OcNode& n) {
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < n.branches.size(); ++i) {
    deepest = std::max(deepest, node_depth(n.child(i)) + 1);
  }
  return deepest;
}

void collect_rules(const OcNode& n, std::vector<RuleTerm>& path, std::vector<Rule>& out) {
  if (n.is_leaf()) {
    Rule r;
    for (const auto& term : path) {
      auto it = std::find_if(r.terms.begin(), r.terms.end(),
                             [&](const RuleTerm& t) { return t.attribute == term.attribute; });
      // Deeper intervals on the same attribute are nested in earlier ones.
      if (it == r.terms.end()) {
        r.terms.push_back(term);
      } else {
        it->interval = term.interval;
      }
    }
    out.push_back(std::move(r));
    return;
  }
  for (std::size_t i = 0; i < n.branches.size(); ++i) {
    path.push_back({*n.attribute, n.branches[i].interval});
    collect_rules(n.child(i), path, out);
    path.pop_back();
  }
}

}  // namespace

void Hyperparams::validate() const {
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
  require(nu >= 0.0 && nu < 1.0, "nu must lie in [0, 1)");
  require(grid_points >= kde::kMinGridPoints,
          "grid points must be at least " + std::to_string(kde::kMinGridPoints));
}

bool Rule::matches(std::span<const double> instance) const {
  return std::all_of(terms.begin(), terms.end(), [&](const RuleTerm& t) {
    return t.interval.contains(instance[t.attribute]);
  });
}

OcTree::OcTree(OcNode root, std::vector<std::string> attribute_names, Hyperparams params,
               double training_accuracy, std::size_t levels_grown, std::size_t n_train)
    : root_(std::move(root)),
      names_(std::move(attribute_names)),
      params_(params),
      training_accuracy_(training_accuracy),
      levels_grown_(levels_grown),
      n_train_(n_train) {
  require(root_.bounds.size() == names_.size(), "root bounds must cover every attribute");
}

std::size_t OcTree::leaf_count() const { return count_leaves(root_); }

std::size_t OcTree::depth() const { return node_depth(root_); }

Label OcTree::predict(std::span<const double> instance) const {
  require(instance.size() == dimension(),
          "instance has " + std::to_string(instance.size()) + " values, model expects " +
              std::to_string(dimension()));
  for (std::size_t j = 0; j < instance.size(); ++j) {
    require(std::isfinite(instance[j]), "instance value for \"" + names_[j] + "\" is not finite");
    if (!root_.bounds[j].contains(instance[j])) return Label::kOutlier;
  }
  const OcNode* node = &root_;
  while (!node->is_leaf()) {
    const double v = instance[*node->attribute];
    const auto& br = node->branches;
    // branches are sorted by low and disjoint
    auto it = std::upper_bound(br.begin(), br.end(), v,
                               [](double x, const Branch& b) { return x < b.interval.low; });
    if (it == br.begin()) return Label::kOutlier;
    --it;
    if (!it->interval.contains(v)) return Label::kOutlier;
    node = &it->child.front();
  }
  return Label::kTarget;
}

std::vector<Label> OcTree::predict(const Dataset& ds) const {
  require(ds.cols() == dimension(), "dataset has " + std::to_string(ds.cols()) +
                                        " attributes, model expects " +
                                        std::to_string(dimension()));
  std::vector<Label> out(ds.rows());
  for (std::size_t i = 0; i < ds.rows(); ++i) out[i] = predict(ds.row(i));
  return out;
}

bool attribute_eligible(std::span<const double> values, std::size_t attribute,
                        const AttributeHistory& history) {
  if (values.empty()) return false;
  if (history.count(attribute) != 0) return false;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return false;

  double granularity = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) granularity = std::min(granularity, sorted[i] - sorted[i - 1]);
  }
  const double h = kde::silverman_bandwidth(sorted);
  return h > 0.0 && !(h < granularity);
}

OcTree fit(const Dataset& train, const Hyperparams& params) {
  require(!train.empty(), "cannot fit a tree on an empty dataset");
  params.validate();
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();

  SplitParams sp;
  sp.gamma = params.gamma;
  sp.alpha = params.alpha;
  sp.beta = params.beta;
  sp.n_root = n;
  sp.min_leaf = params.min_leaf;
  sp.grid_points = params.grid_points;

  std::vector<GrowNode> nodes(1);
  nodes[0].rows.resize(n);
  std::iota(nodes[0].rows.begin(), nodes[0].rows.end(), std::size_t{0});
  for (std::size_t j = 0; j < d; ++j) {
    double lo = train.at(0, j), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, train.at(i, j));
      hi = std::max(hi, train.at(i, j));
    }
    nodes[0].bounds.push_back({lo, hi});
  }

  std::vector<std::size_t> frontier{0};
  std::size_t accepted = n;
  std::size_t leaves = 1;
  std::size_t levels = 0;

  while (!frontier.empty()) {
    // Every (frontier node, attribute) pair is an independent job.
    const std::size_t jobs = frontier.size() * d;
    std::vector<std::optional<SplitCandidate>> candidates(jobs);
    const auto job_count = static_cast<std::ptrdiff_t>(jobs);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t job = 0; job < job_count; ++job) {
      const auto u = static_cast<std::size_t>(job);
      const GrowNode& node = nodes[frontier[u / d]];
      const std::size_t j = u % d;
      const auto values = node_column(train, node.rows, j);
      if (!attribute_eligible(values, j, node.history)) continue;
      auto c = split::propose_split(values, j, node.bounds[j], sp);
      if (c && !no_progress(*c, node)) candidates[u] = std::move(c);
    }

    const std::size_t level_start = nodes.size();
    std::vector<std::size_t> next;
    std::vector<std::size_t> split_nodes;
    std::size_t level_accepted = accepted;
    std::size_t level_leaves = leaves;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const SplitCandidate* best = nullptr;
      for (std::size_t j = 0; j < d; ++j) {
        const auto& c = candidates[f * d + j];
        if (c && (best == nullptr || c->proxy < best->proxy)) best = &*c;
      }
      if (best == nullptr) continue;

      const std::size_t parent = frontier[f];
      split_nodes.push_back(parent);
      nodes[parent].attribute = best->attribute;
      const bool multiplied = best->target_intervals.size() >= 2;
      std::size_t kept = 0;
      for (const auto& iv : best->target_intervals) {
        GrowNode child;
        child.bounds = nodes[parent].bounds;
        child.bounds[best->attribute] = iv;
        for (std::size_t r : nodes[parent].rows) {
          if (iv.contains(train.at(r, best->attribute))) child.rows.push_back(r);
        }
        // A multiplying split restarts the history with its own attribute.
        if (multiplied) {
          child.history = {best->attribute};
        } else {
          child.history = nodes[parent].history;
          child.history.insert(best->attribute);
        }
        kept += child.rows.size();
        nodes[parent].branches.emplace_back(iv, nodes.size());
        next.push_back(nodes.size());
        nodes.push_back(std::move(child));
      }
      level_accepted = level_accepted - nodes[parent].rows.size() + kept;
      level_leaves = level_leaves - 1 + best->target_intervals.size();
    }
    if (split_nodes.empty()) break;

    const double prev_accuracy = static_cast<double>(accepted) / static_cast<double>(n);
    const double accuracy = static_cast<double>(level_accepted) / static_cast<double>(n);
    if (accuracy < 1.0 - params.nu) {
      for (std::size_t id : split_nodes) {
        nodes[id].attribute.reset();
        nodes[id].branches.clear();
      }
      nodes.resize(level_start);
      break;
    }
    ++levels;
    const bool stable = accuracy == prev_accuracy && level_leaves <= leaves;
    accepted = level_accepted;
    leaves = level_leaves;
    if (stable) break;
    frontier = std::move(next);
  }

  return OcTree(freeze(nodes, 0), train.attribute_names(), params,
                static_cast<double>(accepted) / static_cast<double>(n), levels, n);
}

RuleSet extract_rules(const OcTree& tree) {
  RuleSet out;
  out.attribute_names = tree.attribute_names();
  if (tree.root_only()) {
    Rule r;
    for (std::size_t j = 0; j < tree.dimension(); ++j) {
      r.terms.push_back({j, tree.root().bounds[j]});
    }
    out.rules.push_back(std::move(r));
    return out;
  }
  std::vector<RuleTerm> path;
  collect_rules(tree.root(), path, out.rules);
  return out;
}

double training_accuracy(const OcTree& tree, const Dataset& train) {
  require(!train.empty(), "training accuracy of an empty dataset");
  const auto labels = tree.predict(train);
  const auto hits = std::count(labels.begin(), labels.end(), Label::kTarget);
  return static_cast<double>(hits) / static_cast<double>(train.rows());
}

Label ensemble_predict(std::span<const OcTree> trees, std::span<const double> instance,
                       const std::vector<std::string>& attribute_names) {
  require(!trees.empty(), "ensemble needs at least one tree");
  require(instance.size() == attribute_names.size(),
          "instance and attribute name counts differ");
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < attribute_names.size(); ++j) position[attribute_names[j]] = j;

  Label verdict = Label::kTarget;
  std::vector<double> projected;
  for (const auto& tree : trees) {
    projected.clear();
    for (const auto& name : tree.attribute_names()) {
      auto it = position.find(name);
      require(it != position.end(), "ensemble member needs attribute \"" + name + "\"");
      projected.push_back(instance[it->second]);
    }
    if (tree.predict(projected) == Label::kOutlier) verdict = Label::kOutlier;
  }
  return verdict;
}

}  // namespace octree
