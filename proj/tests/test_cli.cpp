#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ugcqa/image.hpp"
#include "ugcqa/io_util.hpp"
#include "ugcqa/labeling.hpp"
#include "ugcqa/learner.hpp"
#include "ugcqa/rng.hpp"

using namespace ugcqa;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("ugcqa_cli_log_" + std::to_string(counter++));
    const std::string cmd = std::string(UGCQA_CLI_PATH) + " " + args + " > " + log.string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_text_file(log);
    return r;
}

fs::path work_dir() {
    static fs::path dir = [] {
        const fs::path p = fs::temp_directory_path() / "ugcqa_cli_work";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

// Bimodal manifest on [1,5].
fs::path write_synthetic_manifest(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::string text =
        "# name=synthetic\n# range_min=1\n# range_max=5\n# kind=image\n"
        "content_id,media_ref,mos,mos_sigma\n";
    for (int i = 0; i < n; ++i) {
        const double mos = std::clamp(
            rng.uniform() < 0.5 ? rng.normal(2.0, 0.4) : rng.normal(4.0, 0.4), 1.0, 5.0);
        text += "s" + std::to_string(i) + ",," + format_double(mos) + ",\n";
    }
    const fs::path p = work_dir() / ("manifest_" + std::to_string(seed) + ".csv");
    write_text_file(p, text);
    return p;
}

// Oracle features: MOS copied into one column.
fs::path write_oracle_features(const fs::path& manifest) {
    const Dataset d = load_manifest(manifest);
    std::string text = "content_id,f0\n";
    for (const Sample& s : d.samples) {
        text += s.content_id + "," + format_double(s.mos) + "\n";
    }
    const fs::path p = work_dir() / (manifest.stem().string() + "_features.csv");
    write_text_file(p, text);
    return p;
}

ImagePlane test_image(std::uint64_t seed) {
    Rng rng(seed);
    ImagePlane img;
    img.luma.resize(48, 48);
    for (Eigen::Index y = 0; y < 48; ++y) {
        for (Eigen::Index x = 0; x < 48; ++x) {
            img.luma(y, x) = std::clamp(0.5 + 0.15 * rng.normal(), 0.0, 1.0);
        }
    }
    return img;
}

}  // namespace

TEST_CASE("fit-labels writes a scheme, histograms and density curves") {
    const fs::path manifest = write_synthetic_manifest(400, 1);
    const fs::path out = work_dir() / "fit1";
    const RunResult r = run_cli("fit-labels --manifest " + manifest.string() +
                                " --classes 2 --out " + out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);

    const LabelingScheme scheme = load_scheme(out / "scheme.json");
    CHECK(scheme.n_classes == 2);
    CHECK(scheme.provenance == SchemeProvenance::Fitted);
    REQUIRE(scheme.thresholds.size() == 1);
    CHECK(scheme.thresholds[0] > 2.0);
    CHECK(scheme.thresholds[0] < 4.0);
    CHECK(fs::exists(out / "class_histogram.csv"));
    CHECK(fs::exists(out / "mos_histogram.csv"));
    CHECK(fs::exists(out / "config.json"));

    SUBCASE("emitted mixture density integrates to one") {
        const auto lines = split_lines(read_text_file(out / "density_curves.csv"));
        REQUIRE(lines.size() == 4098);  // header + 4097 grid points
        std::vector<double> y, mix;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = csv_split(lines[i]);
            y.push_back(parse_double(f[0], "y"));
            mix.push_back(parse_double(f.back(), "mixture"));
        }
        // composite Simpson over the uniform grid
        const double h = y[1] - y[0];
        double integral = mix.front() + mix.back();
        for (std::size_t i = 1; i + 1 < mix.size(); ++i) {
            integral += (i % 2 ? 4.0 : 2.0) * mix[i];
        }
        integral *= h / 3.0;
        CHECK(std::abs(integral - 1.0) < 1e-6);
    }
    SUBCASE("rerun is byte-identical") {
        const fs::path out2 = work_dir() / "fit1b";
        const RunResult r2 = run_cli("fit-labels --manifest " + manifest.string() +
                                     " --classes 2 --out " + out2.string());
        REQUIRE(r2.exit_code == 0);
        CHECK(read_text_file(out / "scheme.json") == read_text_file(out2 / "scheme.json"));
        CHECK(read_text_file(out / "density_curves.csv") ==
              read_text_file(out2 / "density_curves.csv"));
    }
}

TEST_CASE("fit-labels threshold override bypasses fitting") {
    const fs::path manifest = write_synthetic_manifest(50, 2);
    const fs::path out = work_dir() / "fit_override";
    const RunResult r = run_cli("fit-labels --manifest " + manifest.string() +
                                " --thresholds 2.5,3.5 --out " + out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const LabelingScheme scheme = load_scheme(out / "scheme.json");
    CHECK(scheme.provenance == SchemeProvenance::Override);
    CHECK(scheme.n_classes == 3);
    CHECK(scheme.thresholds == std::vector<double>{2.5, 3.5});
    CHECK(!fs::exists(out / "density_curves.csv"));
}

TEST_CASE("extract produces a pooled feature table and is idempotent") {
    const fs::path media = work_dir() / "media";
    fs::create_directories(media / "clip");
    save_pgm(test_image(11), media / "a.pgm");
    save_pgm(test_image(12), media / "b.pgm");
    save_pgm(test_image(13), media / "clip" / "f1.pgm");
    save_pgm(test_image(14), media / "clip" / "f2.pgm");
    save_pgm(test_image(15), media / "clip" / "f3.pgm");

    std::string text =
        "# name=extract_demo\n# range_min=1\n# range_max=5\n# kind=image\n"
        "content_id,media_ref,mos,mos_sigma\n";
    text += "a," + (media / "a.pgm").string() + ",2.0,\n";
    text += "b," + (media / "b.pgm").string() + ",4.0,\n";
    text += "clip," + (media / "clip").string() + ",3.0,\n";
    const fs::path manifest = work_dir() / "extract_manifest.csv";
    write_text_file(manifest, text);

    const fs::path out = work_dir() / "extract1";
    const RunResult r = run_cli("extract --manifest " + manifest.string() + " --workers 2 --out " +
                                out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);

    const auto lines = split_lines(read_text_file(out / "features.csv"));
    REQUIRE(lines.size() == 4);  // header + 3 rows
    CHECK(csv_split(lines[0]).size() == 37);

    SUBCASE("import-check accepts the emitted table") {
        const RunResult chk = run_cli("import-check --manifest " + manifest.string() +
                                      " --features " + (out / "features.csv").string());
        CHECK(chk.exit_code == 0);
    }
    SUBCASE("rerun on unchanged inputs is byte-identical") {
        const fs::path out2 = work_dir() / "extract2";
        const RunResult r2 = run_cli("extract --manifest " + manifest.string() +
                                     " --workers 1 --out " + out2.string());
        REQUIRE(r2.exit_code == 0);
        CHECK(read_text_file(out / "features.csv") == read_text_file(out2 / "features.csv"));
    }
}

TEST_CASE("benchmark emits per-repeat and summary tables") {
    const fs::path manifest = write_synthetic_manifest(120, 3);
    const fs::path features = write_oracle_features(manifest);
    const fs::path out = work_dir() / "bench_a";
    const RunResult r = run_cli("benchmark --manifest " + manifest.string() + " --features " +
                                features.string() +
                                " --tasks A --repeats 3 --candidates 3 --folds 3 --seed 5 --out " +
                                out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);

    SUBCASE("task A summary holds exactly the SRCC and PLCC columns") {
        const auto lines = split_lines(read_text_file(out / "summary.csv"));
        REQUIRE(lines.size() == 3);  // header + 2 metric rows
        CHECK(lines[1].find("A,SRCC") != std::string::npos);
        CHECK(lines[2].find("A,PLCC") != std::string::npos);
        const std::string table = read_text_file(out / "summary.txt");
        CHECK(table.find("A:SRCC") != std::string::npos);
        CHECK(table.find("A:PLCC") != std::string::npos);
        CHECK(table.find("B:") == std::string::npos);
        CHECK(table.find("C:") == std::string::npos);
    }
    SUBCASE("fixed seed reruns are byte-identical") {
        const fs::path out2 = work_dir() / "bench_a2";
        const RunResult r2 = run_cli(
            "benchmark --manifest " + manifest.string() + " --features " + features.string() +
            " --tasks A --repeats 3 --candidates 3 --folds 3 --seed 5 --out " + out2.string());
        REQUIRE(r2.exit_code == 0);
        CHECK(read_text_file(out / "per_repeat.csv") == read_text_file(out2 / "per_repeat.csv"));
        CHECK(read_text_file(out / "summary.txt") == read_text_file(out2 / "summary.txt"));
    }
}

TEST_CASE("benchmark all tasks with fitted labels plus report merge") {
    const fs::path manifest = write_synthetic_manifest(150, 4);
    const fs::path features = write_oracle_features(manifest);
    const fs::path out = work_dir() / "bench_all";
    const RunResult r = run_cli(
        "benchmark --manifest " + manifest.string() + " --features " + features.string() +
        " --tasks A,B,C --thresholds-binary 3.0 --thresholds-ordinal 2.4,3.6 --repeats 2" +
        " --candidates 3 --folds 3 --seed 7 --regthr-baseline --model-name oracle --out " +
        out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const std::string table = read_text_file(out / "summary.txt");
    CHECK(table.find("A:SRCC") != std::string::npos);
    CHECK(table.find("B:Acc") != std::string::npos);
    CHECK(table.find("C:MZE") != std::string::npos);
    CHECK(table.find("B-regthr:Acc") != std::string::npos);
    CHECK(fs::exists(out / "scheme_binary.json"));
    CHECK(fs::exists(out / "scheme_ordinal.json"));

    SUBCASE("report subcommand merges per-repeat tables") {
        const fs::path rep_out = work_dir() / "merged";
        const RunResult m = run_cli("report --inputs " + (out / "per_repeat.csv").string() +
                                    " --out " + rep_out.string());
        REQUIRE_MESSAGE(m.exit_code == 0, m.output);
        const std::string merged = read_text_file(rep_out / "summary.txt");
        CHECK(merged.find("oracle") != std::string::npos);
        CHECK(merged.find("Dataset: synthetic") != std::string::npos);
    }
}

TEST_CASE("train writes a reloadable model") {
    const fs::path manifest = write_synthetic_manifest(60, 8);
    const fs::path features = write_oracle_features(manifest);
    const fs::path out = work_dir() / "train_b";
    const RunResult r = run_cli("train --manifest " + manifest.string() + " --features " +
                                features.string() +
                                " --task B --thresholds 3.0 --candidates 3 --folds 3 --out " +
                                out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const TrainedModel m = load_model(out / "model.json");
    CHECK(m.task == Task::Binary);
    CHECK(m.n_samples == 60);
}

TEST_CASE("exit codes distinguish validation from usage") {
    const RunResult missing = run_cli("fit-labels --manifest /nonexistent.csv --out /tmp/x");
    CHECK(missing.exit_code == 1);

    const RunResult usage = run_cli("fit-labels");
    CHECK(usage.exit_code == 1);

    const RunResult help = run_cli("--help");
    CHECK(help.exit_code == 0);

    const fs::path manifest = write_synthetic_manifest(40, 9);
    const RunResult bad_thr = run_cli("fit-labels --manifest " + manifest.string() +
                                      " --thresholds 9.0 --out " + (work_dir() / "x").string());
    CHECK(bad_thr.exit_code == 1);
}
