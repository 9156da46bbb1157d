#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>
#include <opencv2/core.hpp>

#include "picdesc/config.hpp"
#include "picdesc/experiment.hpp"
#include "picdesc/viz.hpp"
#include "test_util.hpp"

using namespace picdesc;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, '\t')) fields.push_back(field);
    return fields;
}

// six transcripts and a 48x48 picture with two solid shapes
std::filesystem::path make_fixture(const testutil::TempDir& dir) {
    const auto picture_path = dir.path() / "source.ppm";
    const auto picture = testutil::solid_regions_picture(
        48, 48, {{{4, 4, 20, 20}, {40, 40, 200}}, {{28, 28, 44, 44}, {200, 60, 60}}});
    write_ppm(picture_path.string(), picture);

    auto dataset = testutil::make_dataset({
        {"h1", Label::HC, {"the boy reaches up", "water runs over"}},
        {"h2", Label::HC, {"a stool tips", "mother dries dishes", "the window is open"}},
        {"h3", Label::HC, {"cookies in the jar", "two cups on the counter"}},
        {"a1", Label::AD, {"something there", "i see a thing"}},
        {"a2", Label::AD, {"the kitchen maybe", "water i think", "yes water"}},
        {"a3", Label::AD, {"a lady", "that is all"}},
    });
    dataset.picture_path = picture_path.string();

    const auto fixture = dir.path() / "dataset";
    write_manifest(dataset, fixture);
    return fixture;
}

RunConfig tiny_config(const std::filesystem::path& fixture,
                      const std::filesystem::path& out_dir) {
    RunConfig config;
    config.dataset_dir = fixture.string();
    config.output_dir = out_dir.string();
    config.backend = "synthetic";
    config.seed = 3;
    config.dim = 16;
    config.k_t_max = 1;
    config.k_b_max = 1;
    config.k_f = 2;
    config.area_subsets = {{1}, {1, 2}};
    config.shots = {1};
    config.test_per_class = 1;
    config.rounds = 4;
    return config;
}

}  // namespace

TEST_SUITE("config_experiment") {

TEST_CASE("overrides set typed fields and reject unknown keys") {
    RunConfig config;
    apply_override(config, "seed", "99");
    apply_override(config, "dim", "32");
    apply_override(config, "logit_scale", "50.5");
    apply_override(config, "backend", "fixture:probe");
    apply_override(config, "shots", "1,5,20");
    apply_override(config, "area_subsets", "1|1,2|1,2,3");
    apply_override(config, "classifier", "nearest_centroid");
    apply_override(config, "figures", "false");
    apply_override(config, "segmentation_scale", "120");
    apply_override(config, "nms_iou_threshold", "0.4");

    CHECK(config.seed == 99);
    CHECK(config.dim == 32);
    CHECK(config.logit_scale == doctest::Approx(50.5));
    CHECK(config.backend == "fixture:probe");
    CHECK(config.shots == std::vector<int>{1, 5, 20});
    REQUIRE(config.area_subsets.size() == 3);
    CHECK(config.area_subsets[1] == std::vector<int>{1, 2});
    CHECK(config.classifier.kind == ClassifierKind::NearestCentroid);
    CHECK(config.figures == false);
    CHECK(config.regions.segmentation_scale == doctest::Approx(120.0));
    CHECK(config.nms_iou_threshold == doctest::Approx(0.4));

    CHECK_THROWS_AS(apply_override(config, "no_such_knob", "1"), Error);
}

TEST_CASE("config files are key=value lines with comments") {
    testutil::TempDir dir("case");
    const auto path = dir.path() / "run.conf";
    {
        std::ofstream out(path);
        out << "# picture description run\n";
        out << "seed=7\n";
        out << "\n";
        out << "rounds=100\n";
        out << "proposals=grid\n";
    }
    const RunConfig config = parse_config_file(path.string());
    CHECK(config.seed == 7);
    CHECK(config.rounds == 100);
    CHECK(config.proposals == "grid");

    const auto bad = dir.path() / "bad.conf";
    {
        std::ofstream out(bad);
        out << "this line has no equals sign\n";
    }
    CHECK_THROWS_AS(parse_config_file(bad.string()), Error);
}

TEST_CASE("the config hash pins every field") {
    RunConfig a;
    RunConfig b;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    b.seed = 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.area_subsets = {{1}};
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.regions.smoothing_sigma = 0.9;
    CHECK(config_hash(a) != config_hash(b));

    // the output location does not change what the experiment computes
    b = a;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));

    const auto serialized = serialize_config(a);
    CHECK(serialized.find("seed") != std::string::npos);
    CHECK(serialized.find("backend") != std::string::npos);
}

TEST_CASE("the cache directory obeys the environment override") {
    RunConfig config;
    config.output_dir = "runs/demo";

    unsetenv("PICDESC_CACHE_DIR");
    CHECK(effective_cache_dir(config) == "runs/demo/cache");

    config.cache_dir = "explicit";
    CHECK(effective_cache_dir(config) == "explicit");

    setenv("PICDESC_CACHE_DIR", "/tmp/forced", 1);
    CHECK(effective_cache_dir(config) == "/tmp/forced");
    unsetenv("PICDESC_CACHE_DIR");
}

TEST_CASE("backend bundles match the requested family") {
    RunConfig config;
    config.backend = "synthetic";
    config.dim = 8;
    const auto synthetic = make_backends(config);
    CHECK(synthetic.joint == synthetic.text);
    CHECK(synthetic.cache == nullptr);
    CHECK(synthetic.joint->descriptor().kind == BackendKind::Synthetic);
    CHECK(synthetic.joint->descriptor().dim == 8);

    config.backend = "unknown-family";
    CHECK_THROWS_AS(make_backends(config), Error);
}

TEST_CASE("mean/std formatting is percent with two decimals") {
    CHECK(format_mean_std(0.7991, 0.0705) == "79.91_7.05");
    CHECK(format_mean_std(1.0, 0.0) == "100.00_0.00");
    CHECK(format_mean_std(0.5, 0.25) == "50.00_25.00");
}

TEST_CASE("a full experiment run writes a coherent output tree") {
    testutil::TempDir dir("case");
    const auto fixture = make_fixture(dir);
    const auto config = tiny_config(fixture, dir.path() / "out");

    const auto out_dir = run_experiment(config);
    CHECK(out_dir == std::filesystem::path(config.output_dir));

    const auto manifest = nlohmann::json::parse(slurp(out_dir / "run_manifest.json"));
    const std::string hash = manifest["config_hash"];
    CHECK(hash == config_hash(config));
    CHECK(manifest["dataset"]["samples"] == 6);
    CHECK(manifest["dataset"]["hc"] == 3);
    CHECK(manifest["dataset"]["ad"] == 3);
    CHECK(manifest["library_version"] == "0.1.0");

    // every table carries the config hash in a comment header
    for (const char* name : {"proposals.tsv", "relevance.tsv", "stats.tsv",
                             "grid_shots_1.tsv", "subimage_scores.tsv", "pipelines.tsv"}) {
        const auto text = slurp(out_dir / name);
        REQUIRE_MESSAGE(!text.empty(), name);
        CHECK_MESSAGE(text.rfind("# config_hash=" + hash, 0) == 0, name);
    }

    SUBCASE("the unfiltered grid cell and the baseline pipeline agree") {
        const auto grid_lines = split_lines(slurp(out_dir / "grid_shots_1.tsv"));
        REQUIRE(grid_lines.size() >= 4);  // header comment, column row, two k_t rows
        const auto cell_row = split_tabs(grid_lines[2]);
        REQUIRE(cell_row.size() == 3);
        CHECK(cell_row[0] == "0");
        const std::string cell_00 = cell_row[1];

        const auto pipeline_lines = split_lines(slurp(out_dir / "pipelines.tsv"));
        REQUIRE(pipeline_lines.size() >= 4);
        const auto baseline = split_tabs(pipeline_lines[2]);
        REQUIRE(baseline.size() == 2);
        CHECK(baseline[0] == "baseline");
        CHECK(baseline[1] == cell_00);

        // pipeline rows: baseline, picture:<best>, subimage:<best>, areas...
        CHECK(split_tabs(pipeline_lines[3])[0].rfind("picture:", 0) == 0);
        REQUIRE(pipeline_lines.size() >= 5);
        CHECK(split_tabs(pipeline_lines[4])[0].rfind("subimage:", 0) == 0);
    }
    SUBCASE("processed manifests reload as valid datasets") {
        const auto picture_processed = load_manifest(out_dir / "processed_picture");
        CHECK(picture_processed.samples.size() == 6);
        CHECK(picture_processed.count_label(Label::HC) == 3);
        const auto subimage_processed = load_manifest(out_dir / "processed_subimage");
        CHECK(subimage_processed.samples.size() == 6);
        // the embedded hash trailer must not interfere with reloading
        for (const char* name : {"processed_picture", "processed_subimage"}) {
            const auto text = slurp(out_dir / name / "manifest.tsv");
            CHECK_MESSAGE(text.find("# config_hash=" + hash) != std::string::npos, name);
        }
    }
    SUBCASE("focused-area outputs are consistent with their availability flag") {
        const bool available = manifest["areas_available"];
        CHECK(std::filesystem::exists(out_dir / "areas.tsv") == available);
        CHECK(std::filesystem::exists(out_dir / "assignments.tsv") == available);
        if (available) {
            const auto area_lines = split_lines(slurp(out_dir / "areas.tsv"));
            CHECK(area_lines.size() == 2 + 2);  // header comment + columns + k_f rows
        }
    }
    SUBCASE("figures are rendered when requested") {
        CHECK(std::filesystem::exists(out_dir / "heatmap_HC.ppm"));
        CHECK(std::filesystem::exists(out_dir / "heatmap_AD.ppm"));
        CHECK(std::filesystem::exists(out_dir / "subimage_overlay.ppm"));
        const auto bytes = slurp(out_dir / "heatmap_HC.ppm");
        CHECK(bytes.find("# config_hash=" + hash) != std::string::npos);
    }
    SUBCASE("re-running the same config reproduces the same bytes") {
        std::map<std::string, std::string> before;
        for (const char* name : {"relevance.tsv", "grid_shots_1.tsv", "pipelines.tsv",
                                 "subimage_scores.tsv", "run_manifest.json"})
            before[name] = slurp(out_dir / name);
        run_experiment(config);
        for (const auto& [name, bytes] : before) CHECK(slurp(out_dir / name) == bytes);
    }
}

TEST_CASE("experiments without figures skip the rasters") {
    testutil::TempDir dir("case");
    const auto fixture = make_fixture(dir);
    auto config = tiny_config(fixture, dir.path() / "plain");
    config.figures = false;
    config.proposals = "grid";  // also exercise the second proposal strategy
    const auto out_dir = run_experiment(config);
    CHECK(!std::filesystem::exists(out_dir / "heatmap_HC.ppm"));
    CHECK(std::filesystem::exists(out_dir / "pipelines.tsv"));
}

}  // TEST_SUITE
