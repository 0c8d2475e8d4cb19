#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "generators.hpp"
#include "ugcqa/brisque.hpp"
#include "ugcqa/features.hpp"
#include "ugcqa/image.hpp"
#include "ugcqa/io_util.hpp"
#include "ugcqa/rng.hpp"

using namespace ugcqa;
namespace fs = std::filesystem;

namespace {

fs::path fixtures_dir() {
    // Resolved relative to this source file at configure time.
    return fs::path(UGCQA_TEST_FIXTURES);
}

ImagePlane noise_image(Eigen::Index h, Eigen::Index w, std::uint64_t seed) {
    Rng rng(seed);
    ImagePlane img;
    img.luma.resize(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            img.luma(y, x) = std::clamp(0.5 + 0.12 * rng.normal(), 0.0, 1.0);
        }
    }
    return img;
}

// Direct (non-separable) MSCN evaluation used as an independent check.
double mscn_direct_at(const ImagePlane& img, Eigen::Index y0, Eigen::Index x0) {
    const double sigma_w = 7.0 / 6.0;
    double wsum = 0.0;
    Eigen::Matrix<double, 7, 7> win;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            const double w = std::exp(-0.5 * (dy * dy + dx * dx) / (sigma_w * sigma_w));
            win(dy + 3, dx + 3) = w;
            wsum += w;
        }
    }
    win /= wsum;
    auto mirror = [](Eigen::Index i, Eigen::Index n) {
        if (i < 0) return -1 - i;
        if (i >= n) return 2 * n - 1 - i;
        return i;
    };
    double mu = 0.0, m2 = 0.0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            const double v = img.luma(mirror(y0 + dy, img.height()), mirror(x0 + dx, img.width()));
            mu += win(dy + 3, dx + 3) * v;
            m2 += win(dy + 3, dx + 3) * v * v;
        }
    }
    const double sd = std::sqrt(std::max(0.0, m2 - mu * mu));
    return (img.luma(y0, x0) - mu) / (sd + 1.0 / 255.0);
}

}  // namespace

TEST_CASE("mscn of a constant image is identically zero") {
    ImagePlane img;
    img.luma = Eigen::ArrayXXd::Constant(40, 48, 0.37);
    const Eigen::ArrayXXd c = mscn_coefficients(img);
    CHECK(c.abs().maxCoeff() == 0.0);
}

TEST_CASE("mscn matches a direct scalar implementation on a checkerboard") {
    ImagePlane img;
    img.luma.resize(64, 64);
    for (Eigen::Index y = 0; y < 64; ++y) {
        for (Eigen::Index x = 0; x < 64; ++x) img.luma(y, x) = static_cast<double>((x + y) % 2);
    }
    const Eigen::ArrayXXd c = mscn_coefficients(img);

    // symmetric about zero with near-zero mean
    CHECK(std::abs(c.mean()) < 1e-9);
    CHECK(std::abs(c.maxCoeff() + c.minCoeff()) < 1e-9);

    for (auto [y, x] : {std::pair<Eigen::Index, Eigen::Index>{0, 0},
                        {1, 5},
                        {31, 31},
                        {63, 0},
                        {62, 63},
                        {10, 62}}) {
        CHECK(c(y, x) == doctest::Approx(mscn_direct_at(img, y, x)).epsilon(1e-12));
    }
}

TEST_CASE("mscn of a noisy natural-like image is roughly symmetric") {
    const ImagePlane img = load_image(fixtures_dir() / "golden" / "golden_image.pgm");
    const Eigen::ArrayXXd c = mscn_coefficients(img);
    CHECK(std::abs(c.mean()) < 0.05);
    // kurtosis stays in the gaussian-like band typical of these statistics
    const double m2 = c.square().mean();
    const double kurtosis = c.pow(4).mean() / (m2 * m2);
    CHECK(kurtosis > 1.5);
    CHECK(kurtosis < 4.5);
}

TEST_CASE("ggd fit recovers known shapes") {
    SUBCASE("gaussian samples give alpha near 2") {
        Rng rng(1);
        Eigen::ArrayXd v(10000);
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal(0.0, 0.7);
        const GgdFit f = fit_ggd(v);
        CHECK(std::abs(f.shape - 2.0) < 0.1);
        CHECK(f.variance == doctest::Approx(0.49).epsilon(0.05));
    }
    SUBCASE("laplacian samples give alpha near 1") {
        Rng rng(2);
        Eigen::ArrayXd v(10000);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double e = -std::log(rng.uniform());
            v[i] = rng.uniform() < 0.5 ? -e : e;
        }
        const GgdFit f = fit_ggd(v);
        CHECK(std::abs(f.shape - 1.0) < 0.1);
    }
    SUBCASE("heavy-tailed alpha=0.6 recovered at scale") {
        Rng rng(3);
        Eigen::ArrayXd v(100000);
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = testgen::ggd_sample(rng, 0.6, 1.0);
        const GgdFit f = fit_ggd(v);
        CHECK(std::abs(f.shape - 0.6) < 0.05);
    }
    SUBCASE("errors and clamping") {
        Eigen::ArrayXd zeros = Eigen::ArrayXd::Zero(500);
        CHECK_THROWS_AS(static_cast<void>(fit_ggd(zeros)), ValidationError);
        Eigen::ArrayXd few(10);
        few.setConstant(1.0);
        CHECK_THROWS_AS(static_cast<void>(fit_ggd(few)), ValidationError);
        // near-constant nonzero samples push the ratio above the grid edge
        Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(500, 1.0);
        flat[0] = 1.000001;
        const GgdFit f = fit_ggd(flat);
        CHECK(f.clamped);
        CHECK(f.shape == doctest::Approx(10.0));
    }
}

TEST_CASE("aggd fit recovers asymmetric parameters") {
    SUBCASE("symmetric gaussian input") {
        Rng rng(4);
        Eigen::ArrayXd v(20000);
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const AggdFit f = fit_aggd(v);
        CHECK(std::abs(f.left_variance - f.right_variance) / f.right_variance < 0.05);
        CHECK(std::abs(f.mean) < 0.05);
        CHECK(std::abs(f.shape - 2.0) < 0.15);
    }
    SUBCASE("generate-and-recover with skew") {
        Rng rng(5);
        Eigen::ArrayXd v(100000);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = testgen::aggd_sample(rng, 1.5, 0.25, 1.0);
        }
        const AggdFit f = fit_aggd(v);
        CHECK(std::abs(f.shape - 1.5) / 1.5 < 0.10);
        CHECK(std::abs(f.left_variance - 0.25) / 0.25 < 0.10);
        CHECK(std::abs(f.right_variance - 1.0) / 1.0 < 0.10);
    }
    SUBCASE("single-signed input is rejected") {
        Eigen::ArrayXd pos = Eigen::ArrayXd::LinSpaced(200, 0.1, 5.0);
        CHECK_THROWS_AS(static_cast<void>(fit_aggd(pos)), ValidationError);
    }
}

TEST_CASE("brisque features: determinism and gaussian-noise shape") {
    const ImagePlane img = noise_image(96, 128, 42);
    const Eigen::VectorXd f1 = brisque_features(img);
    const Eigen::VectorXd f2 = brisque_features(img);
    REQUIRE(f1.size() == kBrisqueDim);
    CHECK((f1 - f2).cwiseAbs().maxCoeff() == 0.0);  // bit-exact repeat

    // Low-amplitude gaussian noise keeps the contrast denominator at the
    // saturation constant, so the coefficients are a linear filter of the
    // noise and the fitted shape sits at the gaussian value 2.
    Rng rng(43);
    ImagePlane faint;
    faint.luma.resize(96, 128);
    for (Eigen::Index y = 0; y < 96; ++y) {
        for (Eigen::Index x = 0; x < 128; ++x) {
            faint.luma(y, x) = std::clamp(0.5 + 0.0001 * rng.normal(), 0.0, 1.0);
        }
    }
    const Eigen::VectorXd faint_features = brisque_features(faint);
    CHECK(std::abs(faint_features[0] - 2.0) < 0.1);

    // High-contrast iid noise saturates the local normalization and lands
    // well above the gaussian shape.
    CHECK(f1[0] > 2.5);
}

TEST_CASE("brisque features match the stored reference vector") {
    const ImagePlane img = load_image(fixtures_dir() / "golden" / "golden_image.pgm");
    const Eigen::VectorXd f = brisque_features(img);

    const auto lines = split_lines(read_text_file(fixtures_dir() / "golden" / "golden_brisque.csv"));
    REQUIRE(lines.size() == kBrisqueDim + 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv_split(lines[i]);
        REQUIRE(fields.size() == 2);
        const Eigen::Index idx = parse_int(fields[0], "index");
        const double expected = parse_double(fields[1], "value");
        CHECK_MESSAGE(std::abs(f[idx] - expected) < 1e-3, "feature ", idx, ": got ", f[idx],
                      " want ", expected);
    }
}

TEST_CASE("brisque features are stable under global intensity rescaling") {
    const ImagePlane img = load_image(fixtures_dir() / "golden" / "golden_image.pgm");
    const Eigen::VectorXd base = brisque_features(img);
    const double scale_ref = base.cwiseAbs().maxCoeff();

    for (double s : {0.8, 0.9, 1.1, 1.2}) {
        ImagePlane scaled;
        scaled.luma = (img.luma * s).min(1.0).max(0.0);
        const Eigen::VectorXd f = brisque_features(scaled);
        // Exact invariance breaks only through the saturation constant:
        // every feature moves by less than 1% of the feature scale.
        CHECK((f - base).cwiseAbs().maxCoeff() < 0.01 * scale_ref);
    }
}

TEST_CASE("pool_temporal") {
    Eigen::VectorXd v(3);
    v << 1.0, -2.0, 0.5;
    SUBCASE("single frame is the identity") {
        CHECK((pool_temporal({v}) - v).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("opposite frames cancel") {
        const Eigen::VectorXd z = pool_temporal({v, (-v).eval()});
        CHECK(z.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("matches a scalar loop oracle and ignores frame order") {
        Rng rng(9);
        std::vector<Eigen::VectorXd> frames;
        for (int k = 0; k < 3; ++k) {
            Eigen::VectorXd f(5);
            for (Eigen::Index i = 0; i < 5; ++i) f[i] = rng.normal();
            frames.push_back(f);
        }
        const Eigen::VectorXd pooled = pool_temporal(frames);
        for (Eigen::Index i = 0; i < 5; ++i) {
            double s = 0.0;
            for (const auto& f : frames) s += f[i];
            CHECK(pooled[i] == doctest::Approx(s / 3.0).epsilon(1e-12));
        }
        std::swap(frames[0], frames[2]);
        CHECK((pool_temporal(frames) - pooled).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(static_cast<void>(pool_temporal({})), ValidationError);
        Eigen::VectorXd w(2);
        w << 1, 2;
        CHECK_THROWS_AS(static_cast<void>(pool_temporal({v, w})), ValidationError);
    }
}

TEST_CASE("image io") {
    const fs::path dir = fs::temp_directory_path() / "ugcqa_test_images";
    fs::create_directories(dir);

    SUBCASE("pgm round trip") {
        const ImagePlane img = noise_image(40, 52, 7);
        save_pgm(img, dir / "rt.pgm");
        const ImagePlane back = load_image(dir / "rt.pgm");
        CHECK(back.width() == 52);
        CHECK(back.height() == 40);
        CHECK((back.luma - img.luma).abs().maxCoeff() < 0.5 / 255.0 + 1e-12);
    }
    SUBCASE("color ppm reduces via bt601 luma") {
        std::ofstream out(dir / "c.ppm", std::ios::binary);
        out << "P6\n40 32\n255\n";
        for (int i = 0; i < 32 * 40; ++i) {
            out.put(static_cast<char>(200));  // R
            out.put(static_cast<char>(100));  // G
            out.put(static_cast<char>(50));   // B
        }
        out.close();
        const ImagePlane img = load_image(dir / "c.ppm");
        const double expected = (0.299 * 200 + 0.587 * 100 + 0.114 * 50) / 255.0;
        CHECK(img.luma(0, 0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(img.luma(31, 39) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("ascii and 16-bit variants") {
        {
            std::ofstream out(dir / "a.pgm");
            out << "P2\n# a comment\n32 32\n100\n";
            for (int i = 0; i < 32 * 32; ++i) out << (i % 101) << "\n";
        }
        const ImagePlane a = load_image(dir / "a.pgm");
        CHECK(a.luma(0, 1) == doctest::Approx(1.0 / 100.0).epsilon(1e-12));
        {
            std::ofstream out(dir / "w.pgm", std::ios::binary);
            out << "P5\n32 32\n65535\n";
            for (int i = 0; i < 32 * 32; ++i) {
                out.put(static_cast<char>(0x12));
                out.put(static_cast<char>(0x34));
            }
        }
        const ImagePlane w = load_image(dir / "w.pgm");
        CHECK(w.luma(5, 5) == doctest::Approx(0x1234 / 65535.0).epsilon(1e-12));
    }
    SUBCASE("undersized images are rejected") {
        const ImagePlane small = noise_image(40, 40, 1);
        ImagePlane cropped;
        cropped.luma = small.luma.block(0, 0, 16, 40);
        CHECK_THROWS_AS(validate(cropped), ValidationError);
        CHECK_THROWS_AS(static_cast<void>(brisque_features(cropped)), ValidationError);
    }
    SUBCASE("frame directory listing sorts by name") {
        const fs::path frames = dir / "frames";
        fs::create_directories(frames);
        save_pgm(noise_image(32, 32, 2), frames / "f002.pgm");
        save_pgm(noise_image(32, 32, 1), frames / "f001.pgm");
        const auto list = list_frames(frames);
        REQUIRE(list.size() == 2);
        CHECK(list[0].filename() == "f001.pgm");
        CHECK_THROWS_AS(static_cast<void>(list_frames(dir / "missing")), ValidationError);
    }
}

TEST_CASE("feature table import and export") {
    Dataset d;
    d.name = "t";
    d.kind = MediaKind::Image;
    d.score_range = {1.0, 5.0};
    d.samples = {{"a", "", 2.0, std::nullopt}, {"b", "", 3.0, std::nullopt},
                 {"c", "", 4.0, std::nullopt}};

    const fs::path dir = fs::temp_directory_path() / "ugcqa_test_features";
    fs::create_directories(dir);

    SUBCASE("aligned table imports in dataset order") {
        write_text_file(dir / "ok.csv", "content_id,f0,f1\nb,4,5\na,1,2\nc,7,8\n");
        const FeatureMatrix fm = import_features(dir / "ok.csv", d);
        CHECK(fm.dim() == 2);
        CHECK(fm.content_ids[0] == "a");
        CHECK(fm.rows(0, 0) == 1.0);
        CHECK(fm.rows(1, 1) == 5.0);
        CHECK(fm.feature_set_name == "ok");
    }
    SUBCASE("missing id is named") {
        write_text_file(dir / "missing.csv", "content_id,f0\na,1\nc,3\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(import_features(dir / "missing.csv", d)),
                             doctest::Contains("'b'"), ValidationError);
    }
    SUBCASE("extra id is rejected") {
        write_text_file(dir / "extra.csv", "content_id,f0\na,1\nb,2\nc,3\nzz,4\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(import_features(dir / "extra.csv", d)),
                             doctest::Contains("'zz'"), ValidationError);
    }
    SUBCASE("non-finite entry reports its location") {
        write_text_file(dir / "nan.csv", "content_id,f0,f1\na,1,2\nb,nan,4\nc,5,6\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(import_features(dir / "nan.csv", d)),
                             doctest::Contains("f0"), ValidationError);
    }
    SUBCASE("ragged row is rejected") {
        write_text_file(dir / "ragged.csv", "content_id,f0,f1\na,1,2\nb,3\nc,5,6\n");
        CHECK_THROWS_AS(static_cast<void>(import_features(dir / "ragged.csv", d)), ValidationError);
    }
    SUBCASE("save/import round trip") {
        FeatureMatrix fm;
        fm.feature_set_name = "rt";
        fm.content_ids = {"a", "b", "c"};
        Rng rng(10);
        fm.rows.resize(3, 4);
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 4; ++j) fm.rows(i, j) = rng.normal();
        }
        save_features(fm, dir / "rt.csv");
        const FeatureMatrix back = import_features(dir / "rt.csv", d);
        CHECK((back.rows - fm.rows).cwiseAbs().maxCoeff() == 0.0);  // exact decimals
    }
}

TEST_CASE("extraction over media and frame directories") {
    const fs::path dir = fs::temp_directory_path() / "ugcqa_test_extract";
    fs::create_directories(dir / "clip");
    save_pgm(noise_image(48, 48, 21), dir / "still.pgm");
    save_pgm(noise_image(48, 48, 22), dir / "clip" / "f1.pgm");
    save_pgm(noise_image(48, 48, 23), dir / "clip" / "f2.pgm");

    Dataset d;
    d.name = "media";
    d.kind = MediaKind::Image;
    d.score_range = {1.0, 5.0};
    d.samples = {{"still", (dir / "still.pgm").string(), 2.0, std::nullopt},
                 {"clip", (dir / "clip").string(), 3.0, std::nullopt}};

    const FeatureMatrix fm = extract_brisque(d, 2);

    SUBCASE("video datasets may not reference plain files") {
        Dataset v = d;
        v.kind = MediaKind::Video;
        CHECK_THROWS_WITH_AS(validate(v), doctest::Contains("frame directory"), ValidationError);
        v.samples = {{"clip", (dir / "clip").string(), 3.0, std::nullopt}};
        CHECK_NOTHROW(validate(v));
    }
    CHECK(fm.dim() == kBrisqueDim);
    CHECK(fm.count() == 2);

    // pooled row equals the mean of the two frame vectors
    const Eigen::VectorXd fa = brisque_features(load_image(dir / "clip" / "f1.pgm"));
    const Eigen::VectorXd fb = brisque_features(load_image(dir / "clip" / "f2.pgm"));
    CHECK((fm.rows.row(1).transpose() - 0.5 * (fa + fb)).cwiseAbs().maxCoeff() < 1e-15);

    SUBCASE("cache reuse returns identical vectors") {
        const fs::path cache = dir / "cache";
        const Eigen::VectorXd first = extract_sample_features(d.samples[0], cache);
        const Eigen::VectorXd second = extract_sample_features(d.samples[0], cache);
        CHECK((first - second).cwiseAbs().maxCoeff() == 0.0);
        CHECK(!fs::is_empty(cache));
    }
    SUBCASE("missing media errors") {
        Sample s{"gone", (dir / "nope.pgm").string(), 1.0, std::nullopt};
        CHECK_THROWS_AS(static_cast<void>(extract_sample_features(s)), ValidationError);
        Sample empty{"none", "", 1.0, std::nullopt};
        CHECK_THROWS_AS(static_cast<void>(extract_sample_features(empty)), ValidationError);
    }
}
