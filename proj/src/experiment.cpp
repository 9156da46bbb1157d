#include "picdesc/experiment.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "picdesc/filtering.hpp"
#include "picdesc/focused_areas.hpp"
#include "picdesc/relevance.hpp"
#include "picdesc/subimage.hpp"
#include "picdesc/viz.hpp"

namespace fs = std::filesystem;

namespace picdesc {

namespace {

std::pair<std::string, std::string> split_backend_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path.string() + "' for writing");
    file << content;
    if (!file) throw Error("failed writing '" + path.string() + "'");
}

std::string format_box(const BoundingBox& box, char sep = '\t') {
    std::ostringstream out;
    out << box.x0 << sep << box.y0 << sep << box.x1 << sep << box.y1;
    return out.str();
}

std::string format_real(double value, int precision = 6) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << value;
    return out.str();
}

// Keeps only the sentences the processed samples retained, re-indexed from 0,
// so the result can be written back out in the corpus manifest layout.
Dataset filtered_dataset(const Dataset& base, const std::vector<ProcessedSample>& processed) {
    Dataset out;
    out.picture_path = base.picture_path;
    out.split_tags = base.split_tags;
    for (const auto& sample : processed) {
        const TranscriptSample* original = base.find(sample.sample_id);
        if (!original) throw IndexOutOfRange("processed sample '" + sample.sample_id +
                                             "' missing from the dataset");
        TranscriptSample kept;
        kept.sample_id = sample.sample_id;
        kept.label = sample.label;
        for (int index : sample.kept_sentence_indices) {
            Sentence sentence = original->sentences[static_cast<size_t>(index)];
            sentence.index = static_cast<int>(kept.sentences.size());
            kept.sentences.push_back(std::move(sentence));
        }
        out.samples.push_back(std::move(kept));
    }
    return out;
}

}  // namespace

BackendBundle make_backends(const RunConfig& config) {
    const auto [family, detail] = split_backend_spec(config.backend);
    BackendBundle bundle;
    if (family == "synthetic") {
        auto backend = std::make_shared<SyntheticBackend>(
            config.seed, config.dim, SyntheticPlant{}, config.logit_scale,
            config.max_text_tokens);
        bundle.joint = backend;
        bundle.text = backend;
        return bundle;
    }
    bundle.cache = std::make_shared<CacheStore>(effective_cache_dir(config));
    if (family == "fixture") {
        BackendDescriptor descriptor;
        descriptor.kind = BackendKind::Fixture;
        descriptor.model_id = detail.empty() ? "fixture" : detail;
        descriptor.max_text_tokens = config.max_text_tokens;
        descriptor.logit_scale = config.logit_scale;
        auto backend = std::make_shared<StoredVectorBackend>(descriptor, bundle.cache);
        bundle.joint = backend;
        bundle.text = backend;
        return bundle;
    }
    if (family == "pretrained") {
        std::string joint_model = "clip-vit-base-patch32";
        std::string text_model = "bert-base-uncased";
        if (!detail.empty()) {
            const auto comma = detail.find(',');
            joint_model = detail.substr(0, comma);
            if (comma != std::string::npos) text_model = detail.substr(comma + 1);
        }
        BackendDescriptor joint_descriptor;
        joint_descriptor.kind = BackendKind::JointPretrained;
        joint_descriptor.model_id = joint_model;
        joint_descriptor.max_text_tokens = config.max_text_tokens;
        joint_descriptor.logit_scale = config.logit_scale;
        BackendDescriptor text_descriptor;
        text_descriptor.kind = BackendKind::TextPretrained;
        text_descriptor.model_id = text_model;
        text_descriptor.max_text_tokens = config.max_text_tokens;
        text_descriptor.logit_scale = config.logit_scale;
        bundle.joint = std::make_shared<StoredVectorBackend>(joint_descriptor, bundle.cache);
        bundle.text = std::make_shared<StoredVectorBackend>(text_descriptor, bundle.cache);
        return bundle;
    }
    throw Error("unknown backend '" + config.backend +
                "' (expected synthetic, fixture:<id> or pretrained[:<joint>,<text>])");
}

std::vector<BoundingBox> make_proposals(const cv::Mat& picture, const RunConfig& config) {
    if (config.proposals == "selective_search") return selective_search(picture, config.regions);
    if (config.proposals == "grid")
        return sliding_grid_proposals(picture.cols, picture.rows, config.regions);
    throw Error("unknown proposal strategy '" + config.proposals + "'");
}

std::string format_mean_std(double mean, double std_dev) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << mean * 100.0 << "_" << std_dev * 100.0;
    return out.str();
}

std::filesystem::path run_experiment(const RunConfig& config) {
    const std::string hash = config_hash(config);
    const std::string header = "# config_hash=" + hash + "\n";

    Dataset dataset = load_manifest(config.dataset_dir);
    const fs::path out_dir(config.output_dir);
    fs::create_directories(out_dir);

    BackendBundle backends = make_backends(config);
    cv::Mat picture = cv::imread(dataset.picture_path, cv::IMREAD_COLOR);
    if (picture.empty())
        throw MissingPicture("cannot read picture '" + dataset.picture_path + "'");
    const PictureInfo info = picture_info_from_file(dataset.picture_path);

    // --- proposals ------------------------------------------------------
    const auto proposals = make_proposals(picture, config);
    {
        std::string tsv = header + "order\tx0\ty0\tx1\ty1\n";
        for (size_t i = 0; i < proposals.size(); ++i)
            tsv += std::to_string(i) + "\t" + format_box(proposals[i]) + "\n";
        write_text_file(out_dir / "proposals.tsv", tsv);
    }

    // --- corpus relevance and group statistics ---------------------------
    const JointVector picture_vector = embed_image_joint(info.full(), *backends.joint);
    {
        const auto scores = corpus_relevance(picture_vector, dataset.samples, *backends.joint);
        std::string tsv = header + "sample_id\tlabel\tc_i\tper_sentence\n";
        for (size_t i = 0; i < scores.size(); ++i) {
            nlohmann::json per_sentence(scores[i].per_sentence);
            tsv += scores[i].sample_id + "\t" + to_string(dataset.samples[i].label) + "\t" +
                   format_real(scores[i].total, 9) + "\t" + per_sentence.dump() + "\n";
        }
        write_text_file(out_dir / "relevance.tsv", tsv);

        const GroupStats stats = group_stats(dataset, picture_vector, *backends.joint);
        std::string stats_tsv = header;
        stats_tsv += "c_HC\t" + format_real(stats.c_hc) + "\n";
        stats_tsv += "c_AD\t" + format_real(stats.c_ad) + "\n";
        stats_tsv += "mean_sentences_HC\t" + format_real(stats.mean_sentences_hc) + "\n";
        stats_tsv += "mean_sentences_AD\t" + format_real(stats.mean_sentences_ad) + "\n";
        stats_tsv += "mean_words_HC\t" + format_real(stats.mean_words_hc) + "\n";
        stats_tsv += "mean_words_AD\t" + format_real(stats.mean_words_ad) + "\n";
        stats_tsv += "scale_factor\t" + format_real(stats.scale_factor) + "\n";
        write_text_file(out_dir / "stats.tsv", stats_tsv);
    }

    // --- picture-relevance grid ------------------------------------------
    // Sentence ranking against the full picture is shared by every grid cell.
    std::vector<std::vector<std::pair<int, double>>> ranked_full;
    ranked_full.reserve(dataset.samples.size());
    for (const auto& sample : dataset.samples)
        ranked_full.push_back(rank_sentences(sample, picture_vector, *backends.joint));

    std::map<std::string, std::vector<double>> text_memo;
    auto features_for = [&](const std::vector<ProcessedSample>& processed) {
        std::vector<LabeledVector> features;
        features.reserve(processed.size());
        for (const auto& sample : processed) {
            auto it = text_memo.find(sample.text);
            if (it == text_memo.end())
                it = text_memo
                         .emplace(sample.text,
                                  embed_text_for_classifier(sample.text, *backends.text).values)
                         .first;
            features.emplace_back(it->second, sample.label);
        }
        return features;
    };
    auto cell_processed = [&](const FilterSpec& spec) {
        std::vector<ProcessedSample> processed;
        processed.reserve(dataset.samples.size());
        for (size_t s = 0; s < dataset.samples.size(); ++s)
            processed.push_back(build_processed_sample(
                dataset.samples[s], select_top_bottom(ranked_full[s], spec)));
        return processed;
    };
    auto evaluate = [&](const std::vector<LabeledVector>& features, int k,
                        const std::string& pipeline_id) {
        FewShotConfig few_shot;
        few_shot.k = k;
        few_shot.test_per_class = config.test_per_class;
        few_shot.rounds = config.rounds;
        few_shot.rng_seed = config.seed;
        return few_shot_evaluate(features, few_shot, config.classifier, pipeline_id);
    };

    // grid_means[k][kt][kb]
    std::map<int, std::vector<std::vector<EvalReport>>> grid;
    for (int k : config.shots)
        grid[k].assign(static_cast<size_t>(config.k_t_max + 1),
                       std::vector<EvalReport>(static_cast<size_t>(config.k_b_max + 1)));
    for (int k_t = 0; k_t <= config.k_t_max; ++k_t) {
        for (int k_b = 0; k_b <= config.k_b_max; ++k_b) {
            const FilterSpec spec{k_t, k_b};
            const auto features = features_for(cell_processed(spec));
            const std::string id =
                "picture:" + std::to_string(k_t) + "," + std::to_string(k_b);
            for (int k : config.shots)
                grid[k][static_cast<size_t>(k_t)][static_cast<size_t>(k_b)] =
                    evaluate(features, k, id);
        }
    }
    for (int k : config.shots) {
        std::string tsv = header + "k_t\\k_b";
        for (int k_b = 0; k_b <= config.k_b_max; ++k_b) tsv += "\t" + std::to_string(k_b);
        tsv += "\n";
        for (int k_t = 0; k_t <= config.k_t_max; ++k_t) {
            tsv += std::to_string(k_t);
            for (int k_b = 0; k_b <= config.k_b_max; ++k_b) {
                const auto& report = grid[k][static_cast<size_t>(k_t)][static_cast<size_t>(k_b)];
                tsv += "\t" + format_mean_std(report.mean, report.std_dev);
            }
            tsv += "\n";
        }
        write_text_file(out_dir / ("grid_shots_" + std::to_string(k) + ".tsv"), tsv);
    }

    // best cell at the largest shot count; ties go to the smaller (k_t, k_b)
    const int k_star = config.shots.back();
    FilterSpec best_spec{0, 0};
    double best_mean = grid[k_star][0][0].mean;
    for (int k_t = 0; k_t <= config.k_t_max; ++k_t)
        for (int k_b = 0; k_b <= config.k_b_max; ++k_b)
            if (grid[k_star][static_cast<size_t>(k_t)][static_cast<size_t>(k_b)].mean >
                best_mean) {
                best_mean = grid[k_star][static_cast<size_t>(k_t)][static_cast<size_t>(k_b)].mean;
                best_spec = {k_t, k_b};
            }

    // --- pipeline table ---------------------------------------------------
    std::vector<std::pair<std::string, std::vector<LabeledVector>>> pipelines;
    pipelines.emplace_back("baseline", features_for(cell_processed({0, 0})));
    const std::string best_suffix =
        std::to_string(best_spec.k_t) + "," + std::to_string(best_spec.k_b);
    pipelines.emplace_back("picture:" + best_suffix, features_for(cell_processed(best_spec)));

    const SubImageSearchResult search = search_dementia_sensitive(
        dataset, info, proposals, best_spec, *backends.joint, *backends.text);
    {
        std::string tsv = header + "x0\ty0\tx1\ty1\td_s\n";
        for (const auto& score : search.all_scores)
            tsv += format_box(score.box) + "\t" + format_real(score.d_s, 9) + "\n";
        tsv += "# best\t" + format_box(search.best.box, ',') + "\n";
        write_text_file(out_dir / "subimage_scores.tsv", tsv);
    }
    pipelines.emplace_back("subimage:" + best_suffix, features_for(search.processed));

    bool areas_available = true;
    FocusedAreaSet areas;
    std::vector<TopicAssignment> assignments;
    try {
        const auto scored = accumulate_area_scores(dataset, info, proposals, *backends.joint);
        areas = select_focused_areas(scored, config.k_f, config.nms_iou_threshold);
        assignments = assign_sentences(dataset, info, areas, *backends.joint);
    } catch (const InsufficientAreas&) {
        areas_available = false;
    }
    if (areas_available) {
        std::string tsv = header + "rank\tx0\ty0\tx1\ty1\tsummed_score\n";
        for (int r = 0; r < areas.k_f(); ++r)
            tsv += std::to_string(r + 1) + "\t" + format_box(areas.areas[static_cast<size_t>(r)]) +
                   "\t" + format_real(areas.summed_scores[static_cast<size_t>(r)], 9) + "\n";
        write_text_file(out_dir / "areas.tsv", tsv);

        std::string assignment_tsv = header + "sample_id\tsentence_index\tarea_rank\n";
        for (const auto& assignment : assignments)
            assignment_tsv += assignment.sample_id + "\t" +
                              std::to_string(assignment.sentence_index) + "\t" +
                              std::to_string(assignment.area_rank) + "\n";
        write_text_file(out_dir / "assignments.tsv", assignment_tsv);

        for (const auto& subset : config.area_subsets) {
            bool valid = true;
            for (int rank : subset)
                if (rank < 1 || rank > areas.k_f()) valid = false;
            if (!valid) continue;
            const auto features =
                topic_features(dataset, assignments, areas, *backends.text, subset);
            std::vector<LabeledVector> labeled;
            labeled.reserve(features.size());
            for (const auto& feature : features) {
                const TranscriptSample* sample = dataset.find(feature.sample_id);
                labeled.emplace_back(feature.vector.values, sample->label);
            }
            std::string name = "areas:";
            for (size_t i = 0; i < subset.size(); ++i)
                name += (i ? "," : "") + std::to_string(subset[i]);
            pipelines.emplace_back(name, std::move(labeled));
        }
    }

    {
        std::string tsv = header + "pipeline";
        for (int k : config.shots) tsv += "\tk=" + std::to_string(k);
        tsv += "\n";
        for (const auto& [name, features] : pipelines) {
            tsv += name;
            for (int k : config.shots) {
                const EvalReport report = evaluate(features, k, name);
                tsv += "\t" + format_mean_std(report.mean, report.std_dev);
            }
            tsv += "\n";
        }
        write_text_file(out_dir / "pipelines.tsv", tsv);
    }

    // --- processed manifests ----------------------------------------------
    write_manifest(filtered_dataset(dataset, cell_processed(best_spec)),
                   out_dir / "processed_picture");
    write_manifest(filtered_dataset(dataset, search.processed), out_dir / "processed_subimage");
    for (const char* name : {"processed_picture", "processed_subimage"}) {
        std::ofstream append(out_dir / name / "manifest.tsv", std::ios::app);
        append << "# config_hash=" << hash << "\n";
    }

    // --- figures ------------------------------------------------------------
    if (config.figures) {
        const std::string comment = "config_hash=" + hash;
        for (Label group : {Label::HC, Label::AD}) {
            const HeatmapGrid grid_map =
                relevance_heatmap(dataset, info, proposals, *backends.joint, group);
            write_ppm((out_dir / ("heatmap_" + to_string(group) + ".ppm")).string(),
                      render_heatmap(grid_map, picture), comment);
        }
        write_ppm((out_dir / "subimage_overlay.ppm").string(),
                  render_box_overlay(picture, {search.best.box}), comment);
        if (areas_available)
            write_ppm((out_dir / "areas_overlay.ppm").string(),
                      render_box_overlay(picture, areas.areas), comment);
    }

    // --- run manifest -------------------------------------------------------
    nlohmann::json manifest;
    manifest["config_hash"] = hash;
    manifest["config"] = serialize_config(config);
    manifest["backend"] = {{"joint", backends.joint->descriptor().backend_id()},
                           {"text", backends.text->descriptor().backend_id()}};
    manifest["dataset"] = {{"samples", dataset.samples.size()},
                           {"hc", dataset.count_label(Label::HC)},
                           {"ad", dataset.count_label(Label::AD)},
                           {"sentences", dataset.total_sentences()},
                           {"picture", info.id}};
    manifest["best_picture_spec"] = {{"k_t", best_spec.k_t}, {"k_b", best_spec.k_b}};
    manifest["best_subimage_box"] = {search.best.box.x0, search.best.box.y0,
                                     search.best.box.x1, search.best.box.y1};
    manifest["areas_available"] = areas_available;
    manifest["library_version"] = "0.1.0";
    manifest["opencv_version"] = CV_VERSION;
    write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");

    return out_dir;
}

}  // namespace picdesc
