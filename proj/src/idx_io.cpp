#include "copycat/idx_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "copycat/errors.hpp"

namespace copycat {

namespace {

constexpr std::uint32_t kMagicLabels = 0x00000801;
constexpr std::uint32_t kMagicImages3 = 0x00000803;
constexpr std::uint32_t kMagicImages4 = 0x00000804;

void put_u32_be(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

struct Reader {
    std::ifstream f;
    std::string path;
    std::size_t offset = 0;

    explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
        if (!f) throw std::runtime_error("cannot open " + p);
    }

    void read(void* dst, std::size_t n, const char* what) {
        f.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(f.gcount()) != n)
            throw ParseError("truncated", offset,
                             path + ": truncated reading " + what + " at offset " + std::to_string(offset));
        offset += n;
    }

    std::uint32_t u32_be(const char* what) {
        unsigned char b[4];
        read(b, 4, what);
        return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
               (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
    }

    void expect_eof() {
        char extra;
        f.read(&extra, 1);
        if (f.gcount() != 0)
            throw ParseError("count_mismatch", offset, path + ": trailing bytes after payload");
    }
};

unsigned char quantize(double v) {
    double q = std::nearbyint(v * 255.0);
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<unsigned char>(q);
}

}  // namespace

void save_idx(const LabeledDataset& d, const std::string& images_path, const std::string& labels_path) {
    if (d.images.rank() != 4) throw std::invalid_argument("save_idx: images must be [N,C,H,W]");
    const int n = d.size(), c = d.channels(), h = d.height(), w = d.width();

    std::ofstream fi(images_path, std::ios::binary);
    if (!fi) throw std::runtime_error("cannot open " + images_path + " for writing");
    if (c == 1) {
        put_u32_be(fi, kMagicImages3);
        put_u32_be(fi, static_cast<std::uint32_t>(n));
        put_u32_be(fi, static_cast<std::uint32_t>(h));
        put_u32_be(fi, static_cast<std::uint32_t>(w));
    } else {
        put_u32_be(fi, kMagicImages4);
        put_u32_be(fi, static_cast<std::uint32_t>(n));
        put_u32_be(fi, static_cast<std::uint32_t>(c));
        put_u32_be(fi, static_cast<std::uint32_t>(h));
        put_u32_be(fi, static_cast<std::uint32_t>(w));
    }
    std::vector<unsigned char> buf(d.images.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(d.images.data[i]);
    fi.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!fi) throw std::runtime_error("write failed: " + images_path);

    std::ofstream fl(labels_path, std::ios::binary);
    if (!fl) throw std::runtime_error("cannot open " + labels_path + " for writing");
    put_u32_be(fl, kMagicLabels);
    put_u32_be(fl, static_cast<std::uint32_t>(n));
    std::vector<unsigned char> lbuf(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int l = d.labels[static_cast<std::size_t>(i)];
        if (l == kUnlabeled)
            lbuf[static_cast<std::size_t>(i)] = 0xFF;
        else if (l < 0 || l > 254)
            throw std::invalid_argument("save_idx: label " + std::to_string(l) + " not storable as byte");
        else
            lbuf[static_cast<std::size_t>(i)] = static_cast<unsigned char>(l);
    }
    fl.write(reinterpret_cast<const char*>(lbuf.data()), static_cast<std::streamsize>(lbuf.size()));
    if (!fl) throw std::runtime_error("write failed: " + labels_path);
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path, int n_classes,
                        Provenance provenance) {
    Reader ri(images_path);
    const std::uint32_t magic = ri.u32_be("magic");
    int n, c, h, w;
    if (magic == kMagicImages3) {
        n = static_cast<int>(ri.u32_be("N"));
        c = 1;
        h = static_cast<int>(ri.u32_be("H"));
        w = static_cast<int>(ri.u32_be("W"));
    } else if (magic == kMagicImages4) {
        n = static_cast<int>(ri.u32_be("N"));
        c = static_cast<int>(ri.u32_be("C"));
        h = static_cast<int>(ri.u32_be("H"));
        w = static_cast<int>(ri.u32_be("W"));
    } else {
        throw ParseError("bad_magic", 0, images_path + ": bad magic at offset 0");
    }
    if (n < 0 || c < 1 || h < 1 || w < 1) throw ParseError("bad_header", 4, images_path + ": bad dimensions");

    const std::size_t count = static_cast<std::size_t>(n) * c * h * w;
    std::vector<unsigned char> pixels(count);
    ri.read(pixels.data(), count, "pixels");
    ri.expect_eof();

    Reader rl(labels_path);
    const std::uint32_t lmagic = rl.u32_be("magic");
    if (lmagic != kMagicLabels) throw ParseError("bad_magic", 0, labels_path + ": bad magic at offset 0");
    const int ln = static_cast<int>(rl.u32_be("N"));
    if (ln != n)
        throw ParseError("count_mismatch", 4,
                         labels_path + ": " + std::to_string(ln) + " labels for " + std::to_string(n) + " images");
    std::vector<unsigned char> lbytes(static_cast<std::size_t>(ln));
    rl.read(lbytes.data(), lbytes.size(), "labels");
    rl.expect_eof();

    LabeledDataset d;
    d.images = Tensor({n, c, h, w});
    for (std::size_t i = 0; i < count; ++i) d.images.data[i] = static_cast<double>(pixels[i]) / 255.0;
    d.labels.resize(static_cast<std::size_t>(n));
    int max_label = -1;
    for (int i = 0; i < n; ++i) {
        const unsigned char b = lbytes[static_cast<std::size_t>(i)];
        d.labels[static_cast<std::size_t>(i)] = (b == 0xFF) ? kUnlabeled : static_cast<int>(b);
        if (b != 0xFF) max_label = std::max(max_label, static_cast<int>(b));
    }
    d.n_classes = n_classes > 0 ? n_classes : std::max(max_label + 1, 1);
    d.provenance = provenance;
    d.validate();
    return d;
}

}  // namespace copycat
