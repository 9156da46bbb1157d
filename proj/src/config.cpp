#include "picdesc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "picdesc/errors.hpp"
#include "picdesc/hashing.hpp"

namespace picdesc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

// "1|1,2|1,2,3" -> {{1},{1,2},{1,2,3}}
std::vector<std::vector<int>> parse_subsets(const std::string& value) {
    std::vector<std::vector<int>> out;
    std::stringstream stream(value);
    std::string group;
    while (std::getline(stream, group, '|')) {
        auto ranks = parse_int_list(group);
        if (!ranks.empty()) out.push_back(std::move(ranks));
    }
    return out;
}

std::string format_subsets(const std::vector<std::vector<int>>& subsets) {
    std::string out;
    for (const auto& subset : subsets) {
        if (!out.empty()) out += "|";
        for (size_t i = 0; i < subset.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(subset[i]);
        }
    }
    return out;
}

std::string format_ints(const std::vector<int>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

std::string format_real(double value) {
    std::ostringstream stream;
    stream.precision(17);
    stream << value;
    return stream.str();
}

}  // namespace

void apply_override(RunConfig& config, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "dataset_dir") config.dataset_dir = value;
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "cache_dir") config.cache_dir = value;
    else if (key == "backend") config.backend = value;
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "dim") config.dim = std::stoi(value);
    else if (key == "logit_scale") config.logit_scale = std::stod(value);
    else if (key == "max_text_tokens") config.max_text_tokens = std::stoi(value);
    else if (key == "segmentation_scale") config.regions.segmentation_scale = std::stod(value);
    else if (key == "smoothing_sigma") config.regions.smoothing_sigma = std::stod(value);
    else if (key == "min_component_size") config.regions.min_component_size = std::stoi(value);
    else if (key == "min_box_area_fraction")
        config.regions.min_box_area_fraction = std::stod(value);
    else if (key == "max_proposals") config.regions.max_proposals = std::stoi(value);
    else if (key == "proposals") config.proposals = value;
    else if (key == "nms_iou_threshold") config.nms_iou_threshold = std::stod(value);
    else if (key == "k_t_max") config.k_t_max = std::stoi(value);
    else if (key == "k_b_max") config.k_b_max = std::stoi(value);
    else if (key == "k_f") config.k_f = std::stoi(value);
    else if (key == "area_subsets") config.area_subsets = parse_subsets(value);
    else if (key == "shots") config.shots = parse_int_list(value);
    else if (key == "test_per_class") config.test_per_class = std::stoi(value);
    else if (key == "rounds") config.rounds = std::stoi(value);
    else if (key == "classifier") config.classifier.kind = classifier_kind_from_string(value);
    else if (key == "regularization") config.classifier.regularization = std::stod(value);
    else if (key == "figures") config.figures = (value == "true" || value == "1");
    else throw Error("unknown config key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw Error("cannot open config file '" + path + "'");
    RunConfig config;
    std::string line;
    int line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(line_number) + " is not key=value");
        apply_override(config, line.substr(0, eq), line.substr(eq + 1));
    }
    return config;
}

std::string serialize_config(const RunConfig& c) {
    std::map<std::string, std::string> kv = {
        {"area_subsets", format_subsets(c.area_subsets)},
        {"backend", c.backend},
        {"cache_dir", c.cache_dir},
        {"classifier", to_string(c.classifier.kind)},
        {"dataset_dir", c.dataset_dir},
        {"dim", std::to_string(c.dim)},
        {"figures", c.figures ? "true" : "false"},
        {"k_b_max", std::to_string(c.k_b_max)},
        {"k_f", std::to_string(c.k_f)},
        {"k_t_max", std::to_string(c.k_t_max)},
        {"logit_scale", format_real(c.logit_scale)},
        {"max_proposals", std::to_string(c.regions.max_proposals)},
        {"max_text_tokens", std::to_string(c.max_text_tokens)},
        {"min_box_area_fraction", format_real(c.regions.min_box_area_fraction)},
        {"min_component_size", std::to_string(c.regions.min_component_size)},
        {"nms_iou_threshold", format_real(c.nms_iou_threshold)},
        {"proposals", c.proposals},
        {"regularization", format_real(c.classifier.regularization)},
        {"rounds", std::to_string(c.rounds)},
        {"seed", std::to_string(c.seed)},
        {"segmentation_scale", format_real(c.regions.segmentation_scale)},
        {"shots", format_ints(c.shots)},
        {"smoothing_sigma", format_real(c.regions.smoothing_sigma)},
        {"test_per_class", std::to_string(c.test_per_class)},
    };
    std::string out;
    for (const auto& [key, value] : kv) {
        out += key;
        out += "=";
        out += value;
        out += "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& config) {
    return hex64(fnv1a64(serialize_config(config)));
}

std::string effective_cache_dir(const RunConfig& config) {
    if (const char* env = std::getenv("PICDESC_CACHE_DIR"); env && *env) return env;
    if (!config.cache_dir.empty()) return config.cache_dir;
    return config.output_dir + "/cache";
}

}  // namespace picdesc
