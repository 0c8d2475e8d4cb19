#include "ugcqa/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace ugcqa {

void validate(const ImagePlane& img) {
    if (img.width() < 32 || img.height() < 32) {
        throw ValidationError("image too small: " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " (need at least 32x32)");
    }
    if (!img.luma.isFinite().all()) throw ValidationError("image has non-finite samples");
    if (img.luma.minCoeff() < 0.0 || img.luma.maxCoeff() > 1.0) {
        throw ValidationError("image intensities outside [0,1]");
    }
}

namespace {

// Header token reader for netpbm: skips whitespace and '#' comments.
class PnmReader {
public:
    explicit PnmReader(std::ifstream& in, const std::filesystem::path& path)
        : in_(in), path_(path) {}

    std::string token() {
        skip_separators();
        std::string t;
        int c;
        while ((c = in_.get()) != EOF && !std::isspace(c)) t.push_back(static_cast<char>(c));
        if (t.empty()) fail("truncated header");
        return t;
    }

    long number() {
        const std::string t = token();
        try {
            return std::stol(t);
        } catch (...) {
            fail("expected a number, got '" + t + "'");
        }
        return 0;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError(path_.string() + ": " + msg);
    }

private:
    void skip_separators() {
        int c;
        while ((c = in_.peek()) != EOF) {
            if (c == '#') {
                while ((c = in_.get()) != EOF && c != '\n') {
                }
            } else if (std::isspace(c)) {
                in_.get();
            } else {
                break;
            }
        }
    }

    std::ifstream& in_;
    const std::filesystem::path& path_;
};

}  // namespace

ImagePlane load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open image: " + path.string());
    PnmReader r(in, path);

    const std::string magic = r.token();
    const bool ascii = (magic == "P2" || magic == "P3");
    const bool color = (magic == "P3" || magic == "P6");
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
        r.fail("unsupported format '" + magic + "' (expected PGM/PPM)");
    }

    const long w = r.number();
    const long h = r.number();
    const long maxval = r.number();
    if (w <= 0 || h <= 0) r.fail("invalid dimensions");
    if (maxval <= 0 || maxval > 65535) r.fail("unsupported maxval " + std::to_string(maxval));

    const long channels = color ? 3 : 1;
    const long n_values = w * h * channels;
    std::vector<double> values(static_cast<std::size_t>(n_values));

    if (ascii) {
        for (long i = 0; i < n_values; ++i) {
            const long v = r.number();
            if (v < 0 || v > maxval) r.fail("sample out of range");
            values[static_cast<std::size_t>(i)] = static_cast<double>(v);
        }
    } else {
        // One whitespace byte separates header from raster.
        const int bytes_per = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(static_cast<std::size_t>(n_values * bytes_per));
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size())) r.fail("truncated raster");
        for (long i = 0; i < n_values; ++i) {
            long v;
            if (bytes_per == 1) {
                v = raw[static_cast<std::size_t>(i)];
            } else {
                // big-endian per the netpbm spec
                v = (static_cast<long>(raw[static_cast<std::size_t>(2 * i)]) << 8) |
                    raw[static_cast<std::size_t>(2 * i + 1)];
            }
            if (v > maxval) r.fail("sample out of range");
            values[static_cast<std::size_t>(i)] = static_cast<double>(v);
        }
    }

    ImagePlane img;
    img.luma.resize(h, w);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            const std::size_t base = static_cast<std::size_t>((y * w + x) * channels);
            double v;
            if (color) {
                v = 0.299 * values[base] + 0.587 * values[base + 1] + 0.114 * values[base + 2];
            } else {
                v = values[base];
            }
            img.luma(y, x) = v * scale;
        }
    }
    validate(img);
    return img;
}

void save_pgm(const ImagePlane& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write image: " + path.string());
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    for (Eigen::Index y = 0; y < img.height(); ++y) {
        for (Eigen::Index x = 0; x < img.width(); ++x) {
            const double v = std::clamp(img.luma(y, x), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
    if (!out) throw ValidationError("short write: " + path.string());
}

ImagePlane downsample2x(const ImagePlane& img) {
    const Eigen::Index h = img.height() / 2;
    const Eigen::Index w = img.width() / 2;
    ImagePlane out;
    out.luma.resize(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            out.luma(y, x) = 0.25 * (img.luma(2 * y, 2 * x) + img.luma(2 * y, 2 * x + 1) +
                                     img.luma(2 * y + 1, 2 * x) + img.luma(2 * y + 1, 2 * x + 1));
        }
    }
    return out;
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ValidationError("not a frame directory: " + dir.string());
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end());
    if (frames.empty()) throw ValidationError("no PGM/PPM frames in directory: " + dir.string());
    return frames;
}

}  // namespace ugcqa
