#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ugcqa/dataset.hpp"
#include "ugcqa/io_util.hpp"
#include "ugcqa/metrics.hpp"

using namespace ugcqa;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "ugcqa_test_dataset";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

fs::path write_manifest(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    write_text_file(p, content);
    return p;
}

const char* kSmallManifest =
    "# name=demo\n"
    "# range_min=1\n"
    "# range_max=5\n"
    "# kind=image\n"
    "content_id,media_ref,mos,mos_sigma\n"
    "a,,1.2,\n"
    "b,,3.3,0.5\n"
    "c,,4.9,\n";

}  // namespace

TEST_CASE("load_manifest parses rows and metadata") {
    const Dataset d = load_manifest(write_manifest("small.csv", kSmallManifest));
    CHECK(d.name == "demo");
    CHECK(d.kind == MediaKind::Image);
    CHECK(d.size() == 3);
    CHECK(d.score_range.lo == 1.0);
    CHECK(d.score_range.hi == 5.0);
    CHECK(d.samples[0].mos == 1.2);
    CHECK(d.samples[1].mos_sigma == 0.5);
    CHECK(!d.samples[0].mos_sigma.has_value());
}

TEST_CASE("load_manifest rejects bad input") {
    SUBCASE("duplicate id names the offender") {
        const fs::path p = write_manifest("dup.csv",
                                          "# name=demo\n# range_min=1\n# range_max=5\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n"
                                          "a,,1.2,\na,,3.3,\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(p)),
                             doctest::Contains("duplicate content_id 'a'"), ValidationError);
    }
    SUBCASE("out-of-range MOS") {
        const fs::path p = write_manifest("range.csv",
                                          "# name=demo\n# range_min=1\n# range_max=5\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n"
                                          "a,,9.0,\n");
        CHECK_THROWS_AS(static_cast<void>(load_manifest(p)), ValidationError);
    }
    SUBCASE("empty sample set") {
        const fs::path p = write_manifest("empty.csv",
                                          "# name=demo\n# range_min=1\n# range_max=5\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n");
        CHECK_THROWS_AS(static_cast<void>(load_manifest(p)), ValidationError);
    }
    SUBCASE("degenerate range") {
        const fs::path p = write_manifest("degen.csv",
                                          "# name=demo\n# range_min=2\n# range_max=2\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n"
                                          "a,,2.0,\n");
        CHECK_THROWS_AS(static_cast<void>(load_manifest(p)), ValidationError);
    }
    SUBCASE("missing metadata") {
        const fs::path p = write_manifest("meta.csv",
                                          "# name=demo\n# range_min=1\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n"
                                          "a,,2.0,\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(p)), doctest::Contains("range_max"),
                             ValidationError);
    }
    SUBCASE("malformed number") {
        const fs::path p = write_manifest("num.csv",
                                          "# name=demo\n# range_min=1\n# range_max=5\n# kind=image\n"
                                          "content_id,media_ref,mos,mos_sigma\n"
                                          "a,,not_a_number,\n");
        CHECK_THROWS_AS(static_cast<void>(load_manifest(p)), ValidationError);
    }
}

TEST_CASE("save/load round trip") {
    const Dataset d = load_manifest(write_manifest("rt_in.csv", kSmallManifest));
    const fs::path out = temp_dir() / "rt_out.csv";
    save_manifest(d, out);
    const Dataset d2 = load_manifest(out);
    CHECK(d2.name == d.name);
    CHECK(d2.kind == d.kind);
    CHECK(d2.score_range.lo == d.score_range.lo);
    CHECK(d2.score_range.hi == d.score_range.hi);
    REQUIRE(d2.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d2.samples[i].content_id == d.samples[i].content_id);
        CHECK(d2.samples[i].media_ref == d.samples[i].media_ref);
        CHECK(d2.samples[i].mos == d.samples[i].mos);
        CHECK(d2.samples[i].mos_sigma == d.samples[i].mos_sigma);
    }
}

TEST_CASE("normalize_scores maps affinely") {
    Dataset d;
    d.name = "n";
    d.kind = MediaKind::Image;
    d.score_range = {0.0, 100.0};
    d.samples = {{"mid", "", 50.0, std::nullopt},
                 {"lo", "", 0.0, std::nullopt},
                 {"hi", "", 100.0, std::nullopt},
                 {"x", "", 57.948, std::nullopt}};

    const Dataset n = normalize_scores(d, {1.0, 5.0});
    CHECK(n.samples[0].mos == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(n.samples[1].mos == 1.0);
    CHECK(n.samples[2].mos == 5.0);
    // affine formula 1 + 4*(y-0)/100
    CHECK(n.samples[3].mos == doctest::Approx(1.0 + 4.0 * 57.948 / 100.0).epsilon(1e-15));
    CHECK(n.samples[3].mos == doctest::Approx(3.31792).epsilon(1e-12));
    CHECK(n.score_range.lo == 1.0);
    CHECK(n.score_range.hi == 5.0);

    SUBCASE("rejects nonpositive-length target") {
        CHECK_THROWS_AS(static_cast<void>(normalize_scores(d, {5.0, 5.0})), ValidationError);
        CHECK_THROWS_AS(static_cast<void>(normalize_scores(d, {5.0, 1.0})), ValidationError);
    }
}

TEST_CASE("normalization preserves ranking exactly") {
    Dataset d;
    d.name = "ranks";
    d.kind = MediaKind::Video;
    d.score_range = {0.0, 100.0};
    for (int i = 0; i < 50; ++i) {
        d.samples.push_back({"id" + std::to_string(i), "", 100.0 * (i * 37 % 53) / 53.0, std::nullopt});
    }
    const Dataset n = normalize_scores(d, {1.0, 5.0});
    CHECK(srcc(d.mos_values(), n.mos_values()) == 1.0);
}
