#pragma once

#include <cstdint>
#include <vector>

namespace budget {

// Row-major matrix view shared by all learners.
struct DataView {
    const double* data = nullptr;
    std::size_t n = 0;
    std::size_t d = 0;
    double at(std::size_t r, std::size_t c) const { return data[r * d + c]; }
};

struct ForestParams {
    std::size_t n_trees = 100;
    int max_depth = -1;  // -1 = unlimited
    std::size_t min_samples_split = 2;
    std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<int> counts;  // classifier leaf class counts
    double value = 0.0;       // regressor leaf mean
    int leaf_class = 0;       // cached argmax of counts, ties to lowest id
};

struct Tree {
    std::vector<TreeNode> nodes;
    const TreeNode& leaf_for(const DataView& X, std::size_t row) const;
};

// CART forest: bootstrap resamples, Gini splits over a random feature
// subset per node, per-tree seed = params.seed + tree index.
class ForestModel {
public:
    static ForestModel train(const DataView& X, const std::vector<int>& y, int n_classes,
                             const ForestParams& params);

    std::vector<int> predict(const DataView& X) const;
    int predict_one(const DataView& X, std::size_t row) const;

    static ForestModel deserialize(std::size_t d, int n_classes, std::vector<Tree> trees);

    int n_classes() const { return n_classes_; }
    std::size_t n_features() const { return d_; }
    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::vector<Tree> trees_;
    int n_classes_ = 0;
    std::size_t d_ = 0;
};

// Same construction with variance-reduction splits; leaves store target
// means and predictions average over trees.
class ForestRegressor {
public:
    static ForestRegressor train(const DataView& X, const std::vector<double>& y,
                                 const ForestParams& params);

    static ForestRegressor deserialize(std::size_t d, std::vector<Tree> trees);

    std::vector<double> predict(const DataView& X) const;
    double predict_one(const DataView& X, std::size_t row) const;

    std::size_t n_features() const { return d_; }
    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::vector<Tree> trees_;
    std::size_t d_ = 0;
};

}  // namespace budget
