#pragma once

#include <string>
#include <vector>

#include "budget/curves.hpp"
#include "budget/tabular.hpp"

namespace budget {

std::string sanitize_id(const std::string& name);

// On-disk layout used by the CLI: datasets/ (CSV + schema sidecar),
// groundtruth/ (JSON record + reference-curve CSV), models/, reports/.
class Store {
public:
    explicit Store(std::string root);

    const std::string& root() const { return root_; }
    std::string datasets_dir() const;
    std::string groundtruth_dir() const;
    std::string models_dir() const;
    std::string reports_dir() const;

    std::vector<std::string> list_datasets() const;
    bool has_dataset(const std::string& id) const;
    void put_dataset(const TabularDataset& dataset, const std::string& id);
    TabularDataset get_dataset(const std::string& id) const;

    bool has_ground_truth(const std::string& id) const;
    void put_ground_truth(const std::string& id, const GroundTruth& gt);
    GroundTruth get_ground_truth(const std::string& id) const;  // throws when corrupt

private:
    std::string root_;
};

}  // namespace budget
