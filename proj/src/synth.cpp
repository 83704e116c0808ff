#include "copycat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "copycat/rng.hpp"

namespace copycat {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// snap to the u8 grid; keeps IDX round trips and wire quantization lossless
double quantize01(double v) { return std::nearbyint(clamp01(v) * 255.0) / 255.0; }

struct Grid {
    int h, w;
    std::vector<double> v;
    Grid(int h, int w) : h(h), w(w), v(static_cast<std::size_t>(h) * w, 0.0) {}
    double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

void box_blur(Grid& g) {
    Grid out(g.h, g.w);
    for (int y = 0; y < g.h; ++y) {
        for (int x = 0; x < g.w; ++x) {
            double sum = 0.0;
            int cnt = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
                    sum += g.at(yy, xx);
                    ++cnt;
                }
            out.at(y, x) = sum / cnt;
        }
    }
    g = std::move(out);
}

// ---------------- problem-domain backgrounds ----------------

Grid render_background(int h, int w, TextureFamily tex, Rng& rng) {
    Grid g(h, w);
    switch (tex) {
        case TextureFamily::Flat: {
            const double b = rng.uniform(0.15, 0.35);
            for (auto& v : g.v) v = b;
            break;
        }
        case TextureFamily::Gradient: {
            const double b = rng.uniform(0.12, 0.30);
            const double amp = rng.uniform(0.10, 0.25);
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const double cx = std::cos(phi), cy = std::sin(phi);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    g.at(y, x) = b + amp * 0.5 * (1.0 + (x * cx / w + y * cy / h));
            break;
        }
        case TextureFamily::Speckle: {
            const double b = rng.uniform(0.15, 0.35);
            for (auto& v : g.v) v = b + rng.uniform(-0.10, 0.10);
            box_blur(g);
            break;
        }
        case TextureFamily::Stripes: {
            const double b = rng.uniform(0.18, 0.30);
            const double amp = rng.uniform(0.06, 0.12);
            const double freq = rng.uniform(2.0, 5.0);
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            const double cx = std::cos(phi), cy = std::sin(phi);
            const double side = std::min(h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    g.at(y, x) = b + amp * 0.5 * (1.0 + std::sin(2.0 * kPi * freq * (x * cx + y * cy) / side + phase));
            break;
        }
    }
    return g;
}

// ---------------- glyph shapes ----------------
// Signed distances in glyph coordinates (inside < 0); t is stroke half-width.

double sd_bar(double u, double v, double half_len, double half_thick) {
    return std::max(std::fabs(u) - half_len, std::fabs(v) - half_thick);
}

double glyph_distance(int glyph, double u, double v, double t) {
    const double r = std::hypot(u, v);
    switch (glyph) {
        case 0:  // filled disk
            return r - 0.72;
        case 1:  // ring
            return std::fabs(r - 0.66) - t;
        case 2:  // plus
            return std::min(sd_bar(u, v, 0.85, t), sd_bar(v, u, 0.85, t));
        case 3: {  // X (plus rotated 45 deg)
            const double s = 0.70710678118654752440;
            const double ru = s * (u + v), rv = s * (v - u);
            return std::min(sd_bar(ru, rv, 0.85, t), sd_bar(rv, ru, 0.85, t));
        }
        case 4: {  // three horizontal bars
            double d = 1e9;
            for (double b : {-0.60, 0.0, 0.60}) d = std::min(d, sd_bar(u, v - b, 0.80, t));
            return d;
        }
        case 5: {  // three vertical bars
            double d = 1e9;
            for (double b : {-0.60, 0.0, 0.60}) d = std::min(d, sd_bar(v, u - b, 0.80, t));
            return d;
        }
        case 6:  // filled square
            return std::max(std::fabs(u), std::fabs(v)) - 0.64;
        case 7:  // square outline
            return std::fabs(std::max(std::fabs(u), std::fabs(v)) - 0.62) - t;
        case 8: {  // filled triangle, apex up
            const double e0 = -v - 0.62;                        // below top edge region
            const double e1 = 0.866 * u + 0.5 * v - 0.55;       // right edge
            const double e2 = -0.866 * u + 0.5 * v - 0.55;      // left edge
            return std::max({e0, e1, e2});
        }
        case 9: {  // two small disks on the diagonal
            const double d1 = std::hypot(u + 0.45, v + 0.45) - 0.36;
            const double d2 = std::hypot(u - 0.45, v - 0.45) - 0.36;
            return std::min(d1, d2);
        }
        case 10:  // filled diamond
            return std::fabs(u) + std::fabs(v) - 0.85;
        case 11: {  // 2x2 checker inside a square
            const double box = std::max(std::fabs(u), std::fabs(v)) - 0.70;
            const bool on = (u >= 0.0) == (v >= 0.0);
            return on ? box : std::max(box, 0.05);
        }
        default:
            throw std::invalid_argument("glyph id out of range: " + std::to_string(glyph));
    }
}

Grid render_glyph_mask(int h, int w, int glyph, const StyleParams& style, Rng& rng) {
    const double side = std::min(h, w);
    const double cx = rng.uniform(-style.jitter, style.jitter);
    const double cy = rng.uniform(-style.jitter, style.jitter);
    const double scale = rng.uniform(0.85, 1.15) * 0.92;
    const double theta = rng.uniform(-8.0, 8.0) * kPi / 180.0;
    const double stroke_px = rng.uniform(style.stroke_min, style.stroke_max);
    // stroke half-width in glyph units, so on-image thickness tracks pixels
    const double t = std::max(0.5, stroke_px) / (side * scale * 0.5) * 0.5 * 2.0 / 2.0;
    const double edge = 2.0 / (side * scale * 0.5);  // ~1px soft edge in glyph units
    const double ct = std::cos(theta), st = std::sin(theta);

    Grid mask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // pixel center -> [-1,1] coords -> jitter/scale/rotate
            double px = ((x + 0.5) / w) * 2.0 - 1.0 - cx;
            double py = ((y + 0.5) / h) * 2.0 - 1.0 - cy;
            px /= scale;
            py /= scale;
            const double u = ct * px + st * py;
            const double v = -st * px + ct * py;
            const double d = glyph_distance(glyph, u, v, t);
            mask.at(y, x) = clamp01(0.5 - d / edge);
        }
    }
    return mask;
}

// ---------------- class-free textures (NPD) ----------------

Grid render_npd_texture(int h, int w, Rng& rng) {
    Grid g(h, w);
    const int family = rng.uniform_int(0, 5);
    switch (family) {
        case 0: {  // smoothed noise
            for (auto& v : g.v) v = rng.uniform();
            const int passes = rng.uniform_int(0, 3);
            for (int i = 0; i < passes; ++i) box_blur(g);
            const double lo = rng.uniform(0.0, 0.25), hi = rng.uniform(0.6, 1.0);
            for (auto& v : g.v) v = lo + (hi - lo) * v;
            break;
        }
        case 1: {  // oriented stripes
            const double base = rng.uniform(0.25, 0.55);
            const double amp = rng.uniform(0.15, 0.30);
            const double freq = rng.uniform(1.0, 6.0);
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            const double cx = std::cos(phi), cy = std::sin(phi);
            const double side = std::min(h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    g.at(y, x) = base + amp * std::sin(2.0 * kPi * freq * (x * cx + y * cy) / side + phase);
            break;
        }
        case 2: {  // soft blobs
            const double base = rng.uniform(0.2, 0.5);
            for (auto& v : g.v) v = base;
            const int blobs = rng.uniform_int(1, 4);
            const double side = std::min(h, w);
            for (int b = 0; b < blobs; ++b) {
                const double bx = rng.uniform(0.1, 0.9) * w;
                const double by = rng.uniform(0.1, 0.9) * h;
                const double br = rng.uniform(0.10, 0.35) * side;
                const double bi = rng.uniform(0.0, 1.0);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double d = std::hypot(x + 0.5 - bx, y + 0.5 - by);
                        const double m = clamp01(1.0 - d / br);
                        g.at(y, x) = g.at(y, x) * (1.0 - m) + bi * m;
                    }
            }
            break;
        }
        case 3: {  // gradient plus noise
            const double b = rng.uniform(0.1, 0.4);
            const double amp = rng.uniform(0.2, 0.5);
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const double cx = std::cos(phi), cy = std::sin(phi);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    g.at(y, x) = b + amp * 0.5 * (1.0 + (x * cx / w + y * cy / h)) + rng.uniform(-0.08, 0.08);
            break;
        }
        case 4: {  // checkerboard
            const int cell = rng.uniform_int(2, 6);
            const double a = rng.uniform(0.1, 0.45), bb = rng.uniform(0.55, 0.9);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) g.at(y, x) = (((x / cell) + (y / cell)) % 2 == 0) ? a : bb;
            break;
        }
        default: {  // scattered strokes
            const double base = rng.uniform(0.2, 0.6);
            for (auto& v : g.v) v = base;
            const int strokes = rng.uniform_int(2, 5);
            for (int s = 0; s < strokes; ++s) {
                const double x0 = rng.uniform(0.0, 1.0) * w, y0 = rng.uniform(0.0, 1.0) * h;
                const double x1 = rng.uniform(0.0, 1.0) * w, y1 = rng.uniform(0.0, 1.0) * h;
                const double thick = rng.uniform(0.8, 2.2);
                const double si = rng.uniform(0.0, 1.0);
                const double dx = x1 - x0, dy = y1 - y0;
                const double len2 = std::max(dx * dx + dy * dy, 1e-9);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double proj = ((x - x0) * dx + (y - y0) * dy) / len2;
                        const double tt = std::clamp(proj, 0.0, 1.0);
                        const double d = std::hypot(x - (x0 + tt * dx), y - (y0 + tt * dy));
                        const double m = clamp01(1.0 + thick * 0.5 - d);
                        g.at(y, x) = g.at(y, x) * (1.0 - m) + si * m;
                    }
            }
            break;
        }
    }
    for (auto& v : g.v) v = clamp01(v);
    return g;
}

// grayscale structure -> C channels with a mild per-sample tint
void emit_channels(const Grid& g, int channels, Rng& rng, double* dst) {
    if (channels == 1) {
        for (std::size_t i = 0; i < g.v.size(); ++i) dst[i] = quantize01(g.v[i]);
        return;
    }
    double mult[3];
    for (int c = 0; c < 3; ++c) mult[c] = rng.uniform(0.82, 1.0);
    const std::size_t plane = g.v.size();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane; ++i) dst[static_cast<std::size_t>(c) * plane + i] = quantize01(g.v[i] * mult[c]);
}

}  // namespace

std::string texture_family_name(TextureFamily t) {
    switch (t) {
        case TextureFamily::Flat: return "flat";
        case TextureFamily::Gradient: return "gradient";
        case TextureFamily::Speckle: return "speckle";
        case TextureFamily::Stripes: return "stripes";
    }
    throw std::logic_error("unreachable texture family");
}

TextureFamily texture_family_from_name(const std::string& name) {
    if (name == "flat") return TextureFamily::Flat;
    if (name == "gradient") return TextureFamily::Gradient;
    if (name == "speckle") return TextureFamily::Speckle;
    if (name == "stripes") return TextureFamily::Stripes;
    throw std::invalid_argument("unknown texture family: " + name);
}

StyleParams StyleParams::base() { return StyleParams{TextureFamily::Gradient, 1.2, 2.2, 0.06}; }

StyleParams StyleParams::default_shift() { return StyleParams{TextureFamily::Speckle, 0.8, 3.0, 0.14}; }

void SynthProblemConfig::validate() const {
    if (n_classes < 2) throw std::invalid_argument("synth: n_classes must be >= 2");
    if (n_classes > kGlyphFamilies)
        throw std::invalid_argument("synth: at most " + std::to_string(kGlyphFamilies) + " classes supported");
    if (height < 8 || width < 8) throw std::invalid_argument("synth: image size must be at least 8x8");
    if (channels != 1 && channels != 3) throw std::invalid_argument("synth: channels must be 1 or 3");
    if (odd_size < n_classes || pdd_size < n_classes || td_size < n_classes)
        throw std::invalid_argument("synth: labeled split sizes must be >= n_classes");
    if (npdd_size < 1) throw std::invalid_argument("synth: npdd_size must be >= 1");
    if (!(shift.stroke_min > 0.0 && shift.stroke_max >= shift.stroke_min))
        throw std::invalid_argument("synth: bad stroke range");
    if (!(shift.jitter >= 0.0 && shift.jitter < 0.5)) throw std::invalid_argument("synth: jitter must be in [0,0.5)");
    if (glyph_offset < 0) throw std::invalid_argument("synth: glyph_offset must be >= 0");
}

LabeledDataset synth_glyph_split(const SynthProblemConfig& config, int size, const StyleParams& style,
                                 std::uint64_t seed, Provenance provenance) {
    LabeledDataset d;
    d.images = Tensor({size, config.channels, config.height, config.width});
    d.labels.resize(static_cast<std::size_t>(size));
    d.n_classes = config.n_classes;
    d.provenance = provenance;
    const std::size_t stride = static_cast<std::size_t>(config.channels) * config.height * config.width;
    for (int i = 0; i < size; ++i) {
        const int cls = i % config.n_classes;  // balanced; remainder goes to low classes
        const int glyph = (cls + config.glyph_offset) % kGlyphFamilies;
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        Grid bg = render_background(config.height, config.width, style.texture, rng);
        Grid mask = render_glyph_mask(config.height, config.width, glyph, style, rng);
        const double fg = rng.uniform(0.65, 0.95);
        Grid img(config.height, config.width);
        for (std::size_t p = 0; p < img.v.size(); ++p) img.v[p] = bg.v[p] * (1.0 - mask.v[p]) + fg * mask.v[p];
        emit_channels(img, config.channels, rng, d.images.data.data() + stride * static_cast<std::size_t>(i));
        d.labels[static_cast<std::size_t>(i)] = cls;
    }
    return d;
}

SynthSplits synth_problem(const SynthProblemConfig& config) {
    config.validate();
    SynthSplits s;
    const StyleParams base = StyleParams::base();

    s.odd = synth_glyph_split(config, config.odd_size, base, mix_seed(config.seed, 1), Provenance::ODD);
    s.pdd = synth_glyph_split(config, config.pdd_size, config.shift, mix_seed(config.seed, 2), Provenance::PDD);
    s.td = synth_glyph_split(config, config.td_size, base, mix_seed(config.seed, 4), Provenance::TD);

    LabeledDataset npd;
    npd.images = Tensor({config.npdd_size, config.channels, config.height, config.width});
    npd.labels.assign(static_cast<std::size_t>(config.npdd_size), kUnlabeled);
    npd.n_classes = config.n_classes;  // label space of the problem; samples carry the sentinel
    npd.provenance = Provenance::NPDD;
    const std::size_t stride = static_cast<std::size_t>(config.channels) * config.height * config.width;
    const std::uint64_t npd_seed = mix_seed(config.seed, 3);
    for (int i = 0; i < config.npdd_size; ++i) {
        Rng rng(mix_seed(npd_seed, static_cast<std::uint64_t>(i)));
        Grid tex = render_npd_texture(config.height, config.width, rng);
        emit_channels(tex, config.channels, rng, npd.images.data.data() + stride * static_cast<std::size_t>(i));
    }
    s.npdd = std::move(npd);
    return s;
}

SynthProblemConfig synth_config_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    SynthProblemConfig c;
    c.n_classes = j.value("n_classes", c.n_classes);
    c.height = j.value("height", c.height);
    c.width = j.value("width", c.width);
    c.channels = j.value("channels", c.channels);
    c.odd_size = j.value("odd_size", c.odd_size);
    c.pdd_size = j.value("pdd_size", c.pdd_size);
    c.npdd_size = j.value("npdd_size", c.npdd_size);
    c.td_size = j.value("td_size", c.td_size);
    c.seed = j.value("seed", c.seed);
    c.glyph_offset = j.value("glyph_offset", c.glyph_offset);
    if (j.contains("shift")) {
        const auto& s = j.at("shift");
        c.shift.texture = texture_family_from_name(s.value("texture", texture_family_name(c.shift.texture)));
        c.shift.stroke_min = s.value("stroke_min", c.shift.stroke_min);
        c.shift.stroke_max = s.value("stroke_max", c.shift.stroke_max);
        c.shift.jitter = s.value("jitter", c.shift.jitter);
    }
    return c;
}

std::string synth_config_to_json(const SynthProblemConfig& c) {
    nlohmann::ordered_json j;
    j["n_classes"] = c.n_classes;
    j["height"] = c.height;
    j["width"] = c.width;
    j["channels"] = c.channels;
    j["odd_size"] = c.odd_size;
    j["pdd_size"] = c.pdd_size;
    j["npdd_size"] = c.npdd_size;
    j["td_size"] = c.td_size;
    j["seed"] = c.seed;
    j["glyph_offset"] = c.glyph_offset;
    j["shift"] = {{"texture", texture_family_name(c.shift.texture)},
                  {"stroke_min", c.shift.stroke_min},
                  {"stroke_max", c.shift.stroke_max},
                  {"jitter", c.shift.jitter}};
    return j.dump(2);
}

}  // namespace copycat
