#include "budget/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "budget/parallel.hpp"
#include "budget/rng.hpp"

namespace budget {

namespace {
std::size_t g_jobs = 1;
}

void set_jobs(std::size_t j) { g_jobs = j < 1 ? 1 : j; }
std::size_t jobs() { return g_jobs; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(g_jobs, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct TreeBuilder {
    const DataView& X;
    const int* labels = nullptr;      // classifier mode
    const double* targets = nullptr;  // regressor mode
    int n_classes = 0;
    const ForestParams& params;
    Rng rng;

    std::size_t k = 0;  // features examined per node
    std::vector<std::size_t> indices;
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, std::size_t>> scratch;
    std::vector<std::size_t> feat_order;
    std::vector<std::size_t> cls_left, cls_right, cls_node;

    TreeBuilder(const DataView& x, const ForestParams& p, std::uint64_t seed)
        : X(x), params(p), rng(seed) {
        k = p.features_per_split > 0
                ? std::min(p.features_per_split, X.d)
                : std::size_t(std::ceil(std::sqrt(double(X.d))));
        feat_order.resize(X.d);
        for (std::size_t f = 0; f < X.d; ++f) feat_order[f] = f;
    }

    void bootstrap() {
        indices.resize(X.n);
        for (auto& i : indices) i = rng.uniform_index(X.n);
    }

    int make_leaf(std::size_t begin, std::size_t end) {
        TreeNode leaf;
        if (labels) {
            leaf.counts.assign(std::size_t(n_classes), 0);
            for (std::size_t i = begin; i < end; ++i) leaf.counts[std::size_t(labels[indices[i]])]++;
            int best = 0;
            for (int c = 1; c < n_classes; ++c) {
                if (leaf.counts[std::size_t(c)] > leaf.counts[std::size_t(best)]) best = c;
            }
            leaf.leaf_class = best;
        } else {
            double sum = 0.0;
            for (std::size_t i = begin; i < end; ++i) sum += targets[indices[i]];
            leaf.value = sum / double(end - begin);
        }
        nodes.push_back(std::move(leaf));
        return int(nodes.size()) - 1;
    }

    int build(std::size_t begin, std::size_t end, int depth) {
        const std::size_t n = end - begin;
        bool pure = true;
        if (labels) {
            for (std::size_t i = begin + 1; i < end && pure; ++i) {
                pure = labels[indices[i]] == labels[indices[begin]];
            }
        } else {
            for (std::size_t i = begin + 1; i < end && pure; ++i) {
                pure = targets[indices[i]] == targets[indices[begin]];
            }
        }
        if (pure || n < params.min_samples_split ||
            (params.max_depth >= 0 && depth >= params.max_depth)) {
            return make_leaf(begin, end);
        }

        rng.shuffle(feat_order);
        std::size_t best_feature = X.d;
        double best_threshold = 0.0;
        double best_score = -1.0;
        std::size_t tried = 0;

        if (labels) {
            cls_node.assign(std::size_t(n_classes), 0);
            for (std::size_t i = begin; i < end; ++i) cls_node[std::size_t(labels[indices[i]])]++;
        }
        double target_sum = 0.0;
        if (targets) {
            for (std::size_t i = begin; i < end; ++i) target_sum += targets[indices[i]];
        }

        for (std::size_t fi = 0; fi < X.d && tried < k; ++fi) {
            const std::size_t f = feat_order[fi];
            scratch.clear();
            for (std::size_t i = begin; i < end; ++i) {
                scratch.emplace_back(X.at(indices[i], f), indices[i]);
            }
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;  // constant feature
            ++tried;

            if (labels) {
                // Maximize sum_c(count^2)/size over the two children; this is
                // equivalent to minimizing the weighted Gini impurity.
                cls_left.assign(std::size_t(n_classes), 0);
                cls_right = cls_node;
                double ssl = 0.0, ssr = 0.0;
                for (std::size_t c = 0; c < std::size_t(n_classes); ++c) {
                    ssr += double(cls_right[c]) * double(cls_right[c]);
                }
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const std::size_t c = std::size_t(labels[scratch[i].second]);
                    ssl += 2.0 * double(cls_left[c]) + 1.0;
                    ssr -= 2.0 * double(cls_right[c]) - 1.0;
                    cls_left[c]++;
                    cls_right[c]--;
                    if (scratch[i + 1].first > scratch[i].first) {
                        const double nl = double(i + 1), nr = double(n - i - 1);
                        const double score = ssl / nl + ssr / nr;
                        if (score > best_score) {
                            best_score = score;
                            best_feature = f;
                            best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                        }
                    }
                }
            } else {
                // Maximize suml^2/nl + sumr^2/nr (variance reduction).
                double suml = 0.0, sumr = target_sum;
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const double t = targets[scratch[i].second];
                    suml += t;
                    sumr -= t;
                    if (scratch[i + 1].first > scratch[i].first) {
                        const double nl = double(i + 1), nr = double(n - i - 1);
                        const double score = suml * suml / nl + sumr * sumr / nr;
                        if (score > best_score) {
                            best_score = score;
                            best_feature = f;
                            best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                        }
                    }
                }
            }
        }
        if (best_feature == X.d) return make_leaf(begin, end);  // nothing splittable

        auto mid_it = std::partition(indices.begin() + long(begin), indices.begin() + long(end),
                                     [&](std::size_t idx) {
                                         return X.at(idx, best_feature) <= best_threshold;
                                     });
        const std::size_t mid = std::size_t(mid_it - indices.begin());
        // A valid candidate always leaves both sides non-empty.
        TreeNode inner;
        inner.feature = int(best_feature);
        inner.threshold = best_threshold;
        nodes.push_back(std::move(inner));
        const int self = int(nodes.size()) - 1;
        const int left = build(begin, mid, depth + 1);
        const int right = build(mid, end, depth + 1);
        nodes[std::size_t(self)].left = left;
        nodes[std::size_t(self)].right = right;
        return self;
    }

    Tree release() {
        Tree t;
        t.nodes = std::move(nodes);
        return t;
    }
};

Tree build_tree(const DataView& X, const int* labels, const double* targets, int n_classes,
                const ForestParams& params, std::uint64_t tree_seed) {
    TreeBuilder b(X, params, tree_seed);
    b.labels = labels;
    b.targets = targets;
    b.n_classes = n_classes;
    b.bootstrap();
    b.build(0, X.n, 0);  // root always lands at node 0
    return b.release();
}

}  // namespace

const TreeNode& Tree::leaf_for(const DataView& X, std::size_t row) const {
    const TreeNode* node = &nodes[0];
    while (node->feature >= 0) {
        node = X.at(row, std::size_t(node->feature)) <= node->threshold
                   ? &nodes[std::size_t(node->left)]
                   : &nodes[std::size_t(node->right)];
    }
    return *node;
}

ForestModel ForestModel::train(const DataView& X, const std::vector<int>& y, int n_classes,
                               const ForestParams& params) {
    if (X.n == 0 || y.empty()) throw std::runtime_error("train_forest: empty input");
    if (y.size() != X.n) throw std::runtime_error("train_forest: row/label count mismatch");
    if (params.n_trees < 1) throw std::runtime_error("train_forest: n_trees must be >= 1");
    if (params.min_samples_split < 2) {
        throw std::runtime_error("train_forest: min_samples_split must be >= 2");
    }
    ForestModel model;
    model.n_classes_ = n_classes;
    model.d_ = X.d;
    model.trees_.resize(params.n_trees);
    parallel_for(params.n_trees, [&](std::size_t t) {
        model.trees_[t] = build_tree(X, y.data(), nullptr, n_classes, params,
                                     params.seed + std::uint64_t(t));
    });
    return model;
}

ForestModel ForestModel::deserialize(std::size_t d, int n_classes, std::vector<Tree> trees) {
    ForestModel model;
    model.d_ = d;
    model.n_classes_ = n_classes;
    model.trees_ = std::move(trees);
    return model;
}

int ForestModel::predict_one(const DataView& X, std::size_t row) const {
    std::vector<int> votes(std::size_t(n_classes_), 0);
    for (const auto& tree : trees_) votes[std::size_t(tree.leaf_for(X, row).leaf_class)]++;
    int best = 0;
    for (int c = 1; c < n_classes_; ++c) {
        if (votes[std::size_t(c)] > votes[std::size_t(best)]) best = c;
    }
    return best;
}

std::vector<int> ForestModel::predict(const DataView& X) const {
    if (X.n > 0 && X.d != d_) throw std::runtime_error("forest predict: feature count mismatch");
    std::vector<int> out(X.n);
    for (std::size_t r = 0; r < X.n; ++r) out[r] = predict_one(X, r);
    return out;
}

ForestRegressor ForestRegressor::train(const DataView& X, const std::vector<double>& y,
                                       const ForestParams& params) {
    if (X.n == 0 || y.empty()) throw std::runtime_error("forest regressor: empty input");
    if (y.size() != X.n) throw std::runtime_error("forest regressor: row/target count mismatch");
    ForestRegressor model;
    model.d_ = X.d;
    model.trees_.resize(params.n_trees);
    parallel_for(params.n_trees, [&](std::size_t t) {
        model.trees_[t] =
            build_tree(X, nullptr, y.data(), 0, params, params.seed + std::uint64_t(t));
    });
    return model;
}

ForestRegressor ForestRegressor::deserialize(std::size_t d, std::vector<Tree> trees) {
    ForestRegressor model;
    model.d_ = d;
    model.trees_ = std::move(trees);
    return model;
}

double ForestRegressor::predict_one(const DataView& X, std::size_t row) const {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.leaf_for(X, row).value;
    return sum / double(trees_.size());
}

std::vector<double> ForestRegressor::predict(const DataView& X) const {
    if (X.n > 0 && X.d != d_) throw std::runtime_error("forest predict: feature count mismatch");
    std::vector<double> out(X.n);
    for (std::size_t r = 0; r < X.n; ++r) out[r] = predict_one(X, r);
    return out;
}

}  // namespace budget
