#include "budget/store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace budget {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sanitize_id(const std::string& name) {
    std::string id;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        id += ok ? c : '_';
    }
    if (id.empty()) id = "dataset";
    return id;
}

Store::Store(std::string root) : root_(std::move(root)) {
    fs::create_directories(datasets_dir());
    fs::create_directories(groundtruth_dir());
    fs::create_directories(models_dir());
    fs::create_directories(reports_dir());
}

std::string Store::datasets_dir() const { return root_ + "/datasets"; }
std::string Store::groundtruth_dir() const { return root_ + "/groundtruth"; }
std::string Store::models_dir() const { return root_ + "/models"; }
std::string Store::reports_dir() const { return root_ + "/reports"; }

std::vector<std::string> Store::list_datasets() const {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(datasets_dir())) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
            ids.push_back(name.substr(0, name.size() - 4));
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

bool Store::has_dataset(const std::string& id) const {
    return fs::exists(datasets_dir() + "/" + id + ".csv");
}

void Store::put_dataset(const TabularDataset& dataset, const std::string& id) {
    save_dataset(dataset, datasets_dir() + "/" + id + ".csv");
}

TabularDataset Store::get_dataset(const std::string& id) const {
    const std::string path = datasets_dir() + "/" + id + ".csv";
    if (!fs::exists(path)) throw std::runtime_error("no such dataset in store: " + id);
    return load_dataset(path);
}

bool Store::has_ground_truth(const std::string& id) const {
    return fs::exists(groundtruth_dir() + "/" + id + ".json");
}

void Store::put_ground_truth(const std::string& id, const GroundTruth& gt) {
    json doc;
    doc["format"] = "ground-truth";
    doc["version"] = 1;
    doc["final_performance"] = gt.final_performance;
    doc["needed_amount"] = gt.needed_amount;
    doc["needed_satisfied"] = gt.needed_satisfied;
    std::ofstream out(groundtruth_dir() + "/" + id + ".json");
    if (!out) throw std::runtime_error("cannot write ground truth for " + id);
    out << doc.dump(2) << '\n';
    save_curve_csv(gt.reference_curve, groundtruth_dir() + "/" + id + ".curve.csv");
}

GroundTruth Store::get_ground_truth(const std::string& id) const {
    std::ifstream in(groundtruth_dir() + "/" + id + ".json");
    if (!in) throw std::runtime_error("no cached ground truth for " + id);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || doc.value("format", "") != "ground-truth") {
        throw std::runtime_error("corrupted ground truth record for " + id);
    }
    GroundTruth gt;
    gt.final_performance = doc.at("final_performance").get<double>();
    gt.needed_amount = doc.at("needed_amount").get<std::size_t>();
    gt.needed_satisfied = doc.at("needed_satisfied").get<bool>();
    gt.reference_curve = load_curve_csv(groundtruth_dir() + "/" + id + ".curve.csv");
    return gt;
}

}  // namespace budget
