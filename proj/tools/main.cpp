// Command-line front end. Every subcommand is a thin wrapper over the
// library; the shared --config/--set plumbing keeps all knobs in RunConfig.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>

#include "picdesc/classify.hpp"
#include "picdesc/config.hpp"
#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/experiment.hpp"
#include "picdesc/filtering.hpp"
#include "picdesc/focused_areas.hpp"
#include "picdesc/regions.hpp"
#include "picdesc/relevance.hpp"
#include "picdesc/subimage.hpp"
#include "picdesc/viz.hpp"

namespace fs = std::filesystem;
using namespace picdesc;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string dataset_dir;
    std::string output_dir;
};

RunConfig build_config(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) config = parse_config_file(args.config_path);
    for (const auto& entry : args.overrides) {
        const auto split = entry.find('=');
        if (split == std::string::npos)
            throw Error("--set expects key=value, got '" + entry + "'");
        apply_override(config, entry.substr(0, split), entry.substr(split + 1));
    }
    if (!args.dataset_dir.empty()) config.dataset_dir = args.dataset_dir;
    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    return config;
}

Dataset load_dataset(const RunConfig& config) {
    if (config.dataset_dir.empty())
        throw Error("no dataset directory; pass --dataset or set dataset_dir");
    return load_manifest(config.dataset_dir);
}

cv::Mat load_picture(const Dataset& dataset) {
    const cv::Mat picture = cv::imread(dataset.picture_path, cv::IMREAD_COLOR);
    if (picture.empty()) throw MissingPicture("cannot read " + dataset.picture_path);
    return picture;
}

FilterSpec parse_filter_suffix(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw Error("expected k_t,k_b but got '" + text + "'");
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

int run_ingest(const RunConfig& config, const std::string& rewrite_dir, bool segment) {
    Dataset dataset = load_dataset(config);
    if (segment) {
        for (auto& sample : dataset.samples) {
            std::vector<Sentence> resegmented;
            for (const auto& sentence : sample.sentences)
                for (auto& piece : segment_sentences(sentence.text))
                    resegmented.push_back({sample.sample_id,
                                           static_cast<int>(resegmented.size()),
                                           std::move(piece)});
            if (resegmented.empty())
                throw EmptySample("sample '" + sample.sample_id +
                                  "' has no sentences after segmentation");
            sample.sentences = std::move(resegmented);
        }
    }
    std::cout << "samples\t" << dataset.samples.size() << "\n"
              << "hc\t" << dataset.count_label(Label::HC) << "\n"
              << "ad\t" << dataset.count_label(Label::AD) << "\n"
              << "sentences\t" << dataset.total_sentences() << "\n"
              << "picture\t" << dataset.picture_path << "\n"
              << "split_column\t" << (dataset.split_tags.has_value() ? "yes" : "no") << "\n";
    if (!rewrite_dir.empty()) {
        write_manifest(dataset, rewrite_dir);
        std::cout << "rewritten\t" << rewrite_dir << "\n";
    }
    return 0;
}

int run_score(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);
    const PictureInfo info = picture_info_from_file(dataset.picture_path);
    const JointVector picture = embed_image_joint(info.full(), *backends.joint);

    std::cout << "sample_id\tlabel\tc_i\n";
    for (const auto& relevance : corpus_relevance(picture, dataset.samples, *backends.joint)) {
        const auto* sample = dataset.find(relevance.sample_id);
        std::cout << relevance.sample_id << "\t" << to_string(sample->label) << "\t"
                  << relevance.total << "\n";
    }
    const GroupStats stats = group_stats(dataset, picture, *backends.joint);
    std::cout << "# c_hc\t" << stats.c_hc << "\n# c_ad\t" << stats.c_ad << "\n"
              << "# mean_sentences_hc\t" << stats.mean_sentences_hc << "\n"
              << "# mean_sentences_ad\t" << stats.mean_sentences_ad << "\n"
              << "# mean_words_hc\t" << stats.mean_words_hc << "\n"
              << "# mean_words_ad\t" << stats.mean_words_ad << "\n"
              << "# scale_factor\t" << stats.scale_factor << "\n";
    return 0;
}

int run_regions(const RunConfig& config, const std::string& save_path) {
    const Dataset dataset = load_dataset(config);
    const auto proposals = make_proposals(load_picture(dataset), config);

    std::ofstream file;
    if (!save_path.empty()) {
        file.open(save_path);
        if (!file) throw Error("cannot write " + save_path);
    }
    std::ostream& out = save_path.empty() ? std::cout : file;
    out << "order\tx0\ty0\tx1\ty1\n";
    for (size_t i = 0; i < proposals.size(); ++i)
        out << i << "\t" << proposals[i].x0 << "\t" << proposals[i].y0 << "\t"
            << proposals[i].x1 << "\t" << proposals[i].y1 << "\n";
    std::cerr << proposals.size() << " proposals\n";
    return 0;
}

int run_filter(const RunConfig& config, const FilterSpec& spec) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);
    const PictureInfo info = picture_info_from_file(dataset.picture_path);

    std::cout << "sample_id\tkept\ttext\n";
    for (const auto& processed :
         process_dataset(dataset, info.full(), spec, *backends.joint)) {
        std::cout << processed.sample_id << "\t";
        for (size_t i = 0; i < processed.kept_sentence_indices.size(); ++i)
            std::cout << (i ? "," : "") << processed.kept_sentence_indices[i];
        std::cout << "\t" << processed.text << "\n";
    }
    return 0;
}

int run_subimage_search(const RunConfig& config, const FilterSpec& spec) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);
    const PictureInfo info = picture_info_from_file(dataset.picture_path);
    const auto proposals = make_proposals(load_picture(dataset), config);

    const auto result = search_dementia_sensitive(dataset, info, proposals, spec,
                                                  *backends.joint, *backends.text);
    std::cout << "x0\ty0\tx1\ty1\td_s\n";
    for (const auto& score : result.all_scores)
        std::cout << score.box.x0 << "\t" << score.box.y0 << "\t" << score.box.x1 << "\t"
                  << score.box.y1 << "\t" << score.d_s << "\n";
    std::cout << "# best\t" << result.best.box.x0 << "," << result.best.box.y0 << ","
              << result.best.box.x1 << "," << result.best.box.y1 << "\t" << result.best.d_s
              << "\n";
    return 0;
}

int run_focused_areas(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);
    const PictureInfo info = picture_info_from_file(dataset.picture_path);
    const auto proposals = make_proposals(load_picture(dataset), config);

    const auto scored = accumulate_area_scores(dataset, info, proposals, *backends.joint);
    const auto areas = select_focused_areas(scored, config.k_f, config.nms_iou_threshold);
    std::cout << "rank\tx0\ty0\tx1\ty1\tsummed_score\n";
    for (size_t i = 0; i < areas.areas.size(); ++i)
        std::cout << i + 1 << "\t" << areas.areas[i].x0 << "\t" << areas.areas[i].y0 << "\t"
                  << areas.areas[i].x1 << "\t" << areas.areas[i].y1 << "\t"
                  << areas.summed_scores[i] << "\n";
    std::cout << "sample_id\tsentence_index\tarea_rank\n";
    for (const auto& assignment : assign_sentences(dataset, info, areas, *backends.joint))
        std::cout << assignment.sample_id << "\t" << assignment.sentence_index << "\t"
                  << assignment.area_rank << "\n";
    return 0;
}

int run_evaluate(const RunConfig& config, const std::string& pipeline) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);

    std::vector<std::pair<std::string, Label>> texts;
    if (pipeline == "baseline") {
        for (const auto& sample : dataset.samples)
            texts.emplace_back(sample.joined_text(), sample.label);
    } else if (pipeline.rfind("picture:", 0) == 0) {
        const PictureInfo info = picture_info_from_file(dataset.picture_path);
        const FilterSpec spec = parse_filter_suffix(pipeline.substr(8));
        for (const auto& processed :
             process_dataset(dataset, info.full(), spec, *backends.joint))
            texts.emplace_back(processed.text, processed.label);
    } else if (pipeline.rfind("subimage:", 0) == 0) {
        const PictureInfo info = picture_info_from_file(dataset.picture_path);
        const FilterSpec spec = parse_filter_suffix(pipeline.substr(9));
        const auto proposals = make_proposals(load_picture(dataset), config);
        const auto result = search_dementia_sensitive(dataset, info, proposals, spec,
                                                      *backends.joint, *backends.text);
        for (const auto& processed : result.processed)
            texts.emplace_back(processed.text, processed.label);
    } else {
        throw Error("unknown pipeline '" + pipeline +
                    "' (expected baseline, picture:KT,KB or subimage:KT,KB)");
    }

    std::vector<LabeledVector> features;
    for (const auto& [text, label] : texts)
        features.emplace_back(embed_text_for_classifier(text, *backends.text).values, label);

    FewShotConfig few_shot;
    few_shot.test_per_class = config.test_per_class;
    few_shot.rounds = config.rounds;
    few_shot.rng_seed = config.seed;
    std::cout << "pipeline";
    for (int k : config.shots) std::cout << "\tk=" << k;
    std::cout << "\n" << pipeline;
    for (int k : config.shots) {
        few_shot.k = k;
        const auto report = few_shot_evaluate(features, few_shot, config.classifier, pipeline);
        std::cout << "\t" << format_mean_std(report.mean, report.std_dev);
    }
    std::cout << "\n";
    return 0;
}

int run_visualize(const RunConfig& config) {
    const Dataset dataset = load_dataset(config);
    auto backends = make_backends(config);
    const PictureInfo info = picture_info_from_file(dataset.picture_path);
    const cv::Mat picture = load_picture(dataset);
    const auto proposals = make_proposals(picture, config);

    fs::create_directories(config.output_dir);
    const std::string comment = "config_hash=" + config_hash(config);
    for (const Label group : {Label::HC, Label::AD}) {
        const auto grid = relevance_heatmap(dataset, info, proposals, *backends.joint, group);
        const fs::path path =
            fs::path(config.output_dir) / ("heatmap_" + to_string(group) + ".ppm");
        write_ppm(path.string(), render_heatmap(grid, picture), comment);
        std::cout << path.string() << "\n";
    }
    const fs::path overlay = fs::path(config.output_dir) / "proposals_overlay.ppm";
    write_ppm(overlay.string(), render_box_overlay(picture, proposals), comment);
    std::cout << overlay.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Picture-description screening pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--config", args.config_path, "flat key=value config file");
    app.add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
    app.add_option("--dataset", args.dataset_dir, "dataset directory (manifest.tsv layout)");
    app.add_option("--out", args.output_dir, "output directory");

    auto* ingest = app.add_subcommand("ingest", "load a dataset and print a summary");
    std::string rewrite_dir;
    bool segment = false;
    auto* rewrite_opt =
        ingest->add_option("--rewrite", rewrite_dir, "rewrite the dataset to this directory");
    ingest->add_flag("--segment", segment, "re-split sentences on terminators before rewriting")
        ->needs(rewrite_opt);

    auto* score = app.add_subcommand("score", "per-sample picture relevance and group stats");

    auto* regions = app.add_subcommand("regions", "region proposals for the dataset picture");
    std::string save_path;
    regions->add_option("--save", save_path, "write the proposal table here instead of stdout");

    auto* filter = app.add_subcommand("filter", "keep top/bottom picture-relevant sentences");
    int k_t = 0, k_b = 0;
    filter->add_option("--k-t", k_t, "sentences to keep from the top of the ranking");
    filter->add_option("--k-b", k_b, "sentences to keep from the bottom of the ranking");

    auto* subimage = app.add_subcommand("subimage-search",
                                        "find the most dementia-sensitive sub-image");
    int search_k_t = 1, search_k_b = 0;
    subimage->add_option("--k-t", search_k_t, "filter parameter k_t used per proposal");
    subimage->add_option("--k-b", search_k_b, "filter parameter k_b used per proposal");

    auto* focused = app.add_subcommand("focused-areas",
                                       "select focused areas and assign sentences");

    auto* evaluate = app.add_subcommand("evaluate", "few-shot evaluation of one pipeline");
    std::string pipeline = "baseline";
    evaluate->add_option("--pipeline", pipeline,
                         "baseline, picture:KT,KB or subimage:KT,KB");

    auto* visualize = app.add_subcommand("visualize", "heatmaps and proposal overlays");

    auto* run = app.add_subcommand("run", "full experiment sweep");

    // let --config/--set/--dataset/--out appear after the subcommand name too
    for (auto* sub : {ingest, score, regions, filter, subimage, focused, evaluate,
                      visualize, run})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig config = build_config(args);
        if (ingest->parsed()) return run_ingest(config, rewrite_dir, segment);
        if (score->parsed()) return run_score(config);
        if (regions->parsed()) return run_regions(config, save_path);
        if (filter->parsed()) return run_filter(config, {k_t, k_b});
        if (subimage->parsed()) return run_subimage_search(config, {search_k_t, search_k_b});
        if (focused->parsed()) return run_focused_areas(config);
        if (evaluate->parsed()) return run_evaluate(config, pipeline);
        if (visualize->parsed()) return run_visualize(config);
        if (run->parsed()) {
            std::cout << run_experiment(config).string() << "\n";
            return 0;
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
