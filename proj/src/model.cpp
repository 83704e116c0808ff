#include "copycat/model.hpp"

#include <cmath>
#include <stdexcept>

#include "copycat/errors.hpp"
#include "copycat/rng.hpp"

namespace copycat {

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2D: return "conv2d";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Dense: return "dense";
    }
    throw std::logic_error("unreachable layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv2d") return LayerKind::Conv2D;
    if (name == "maxpool") return LayerKind::MaxPool;
    if (name == "relu") return LayerKind::ReLU;
    if (name == "flatten") return LayerKind::Flatten;
    if (name == "dense") return LayerKind::Dense;
    throw std::invalid_argument("unknown layer kind: " + name);
}

LayerSpec LayerSpec::conv2d(int out_channels, int kernel, int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv2D;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    return s;
}

LayerSpec LayerSpec::maxpool(int kernel, int stride) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.kernel = kernel;
    s.stride = stride;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    return s;
}

LayerSpec LayerSpec::dense(int out_features) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.out_features = out_features;
    return s;
}

long long Model::param_count() const {
    long long n = 0;
    for (const auto& t : weights) n += t.numel();
    for (const auto& t : biases) n += t.numel();
    return n;
}

Tensor glorot_init(int fan_in, int fan_out, std::vector<int> shape, std::uint64_t seed) {
    if (fan_in < 1 || fan_out < 1)
        throw std::invalid_argument("glorot_init: fans must be >= 1, got fan_in=" + std::to_string(fan_in) +
                                    " fan_out=" + std::to_string(fan_out));
    double limit = std::sqrt(6.0 / (static_cast<double>(fan_in) + static_cast<double>(fan_out)));
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

namespace {

// Shape of the value flowing between layers: spatial until Flatten, flat after.
struct StageShape {
    bool flat = false;
    int c = 0, h = 0, w = 0;
    int units = 0;

    std::string str() const {
        if (flat) return "[" + std::to_string(units) + "]";
        return "[" + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + "]";
    }
};

[[noreturn]] void layer_error(int index, const LayerSpec& spec, const std::string& msg) {
    throw ShapeError("layer " + std::to_string(index) + " (" + layer_kind_name(spec.kind) + "): " + msg);
}

StageShape apply_spec(const LayerSpec& spec, const StageShape& in, int index) {
    StageShape out = in;
    switch (spec.kind) {
        case LayerKind::Conv2D: {
            if (in.flat) layer_error(index, spec, "needs spatial input, got flat " + in.str());
            if (spec.out_channels < 1 || spec.kernel < 1 || spec.stride < 1 || spec.pad < 0)
                layer_error(index, spec, "bad conv parameters");
            int oh = (in.h + 2 * spec.pad - spec.kernel) / spec.stride + 1;
            int ow = (in.w + 2 * spec.pad - spec.kernel) / spec.stride + 1;
            if (in.h + 2 * spec.pad < spec.kernel || in.w + 2 * spec.pad < spec.kernel || oh < 1 || ow < 1)
                layer_error(index, spec, "kernel " + std::to_string(spec.kernel) + " does not fit input " + in.str());
            out.c = spec.out_channels;
            out.h = oh;
            out.w = ow;
            return out;
        }
        case LayerKind::MaxPool: {
            if (in.flat) layer_error(index, spec, "needs spatial input, got flat " + in.str());
            if (spec.kernel < 1 || spec.stride < 1) layer_error(index, spec, "bad pool parameters");
            if (in.h < spec.kernel || in.w < spec.kernel)
                layer_error(index, spec, "window " + std::to_string(spec.kernel) + " does not fit input " + in.str());
            out.h = (in.h - spec.kernel) / spec.stride + 1;
            out.w = (in.w - spec.kernel) / spec.stride + 1;
            return out;
        }
        case LayerKind::ReLU:
            return out;
        case LayerKind::Flatten: {
            if (in.flat) layer_error(index, spec, "input already flat");
            out.flat = true;
            out.units = in.c * in.h * in.w;
            return out;
        }
        case LayerKind::Dense: {
            if (!in.flat) layer_error(index, spec, "needs flat input, got " + in.str() + " (missing flatten?)");
            if (spec.out_features < 1) layer_error(index, spec, "out_features must be >= 1");
            out.units = spec.out_features;
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

Model build_model(Shape3 input, std::vector<LayerSpec> layers, int n_classes, std::uint64_t seed) {
    if (input.c < 1 || input.h < 1 || input.w < 1) throw std::invalid_argument("build_model: bad input shape");
    if (n_classes < 2) throw std::invalid_argument("build_model: n_classes must be >= 2");
    if (layers.empty()) throw std::invalid_argument("build_model: empty layer stack");
    if (layers.back().kind != LayerKind::Dense || layers.back().out_features != n_classes)
        throw std::invalid_argument("build_model: final layer must be dense with out_features == n_classes");

    Model m;
    m.input = input;
    m.layers = std::move(layers);
    m.n_classes = n_classes;
    m.weights.resize(m.layers.size());
    m.biases.resize(m.layers.size());

    StageShape cur{false, input.c, input.h, input.w, 0};
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& spec = m.layers[i];
        StageShape next = apply_spec(spec, cur, static_cast<int>(i));
        if (spec.kind == LayerKind::Conv2D) {
            int fan_in = cur.c * spec.kernel * spec.kernel;
            int fan_out = spec.out_channels * spec.kernel * spec.kernel;
            m.weights[i] = glorot_init(fan_in, fan_out, {spec.out_channels, cur.c, spec.kernel, spec.kernel},
                                       mix_seed(seed, i));
            m.biases[i] = Tensor({spec.out_channels});
        } else if (spec.kind == LayerKind::Dense) {
            m.weights[i] = glorot_init(cur.units, spec.out_features, {spec.out_features, cur.units},
                                       mix_seed(seed, i));
            m.biases[i] = Tensor({spec.out_features});
        }
        cur = next;
    }

    // default group split: the final dense layer alone forms the head
    m.head_start = static_cast<int>(m.layers.size()) - 1;
    return m;
}

std::vector<LayerSpec> default_arch(int n_classes) {
    return {
        LayerSpec::conv2d(16, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2, 2),
        LayerSpec::conv2d(32, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2, 2),
        LayerSpec::flatten(),           LayerSpec::dense(64), LayerSpec::relu(),
        LayerSpec::dense(n_classes),
    };
}

namespace {

void conv_forward(const Tensor& in, const Tensor& w, const Tensor& b, const LayerSpec& s, Tensor& out) {
    const int n = in.dim(0), ic = in.dim(1), ih = in.dim(2), iw = in.dim(3);
    const int oc = out.dim(1), oh = out.dim(2), ow = out.dim(3);
    const int k = s.kernel, st = s.stride, p = s.pad;
    const double* wp = w.data.data();
    for (int ni = 0; ni < n; ++ni) {
        const double* inb = in.data.data() + static_cast<std::size_t>(ni) * ic * ih * iw;
        double* outb = out.data.data() + static_cast<std::size_t>(ni) * oc * oh * ow;
        for (int o = 0; o < oc; ++o) {
            double* outc = outb + static_cast<std::size_t>(o) * oh * ow;
            const double bias = b.data[static_cast<std::size_t>(o)];
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) outc[y * ow + x] = bias;
            for (int c = 0; c < ic; ++c) {
                const double* inc = inb + static_cast<std::size_t>(c) * ih * iw;
                const double* wk = wp + ((static_cast<std::size_t>(o) * ic + c) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wk[ky * k + kx];
                        if (wv == 0.0) continue;
                        for (int y = 0; y < oh; ++y) {
                            const int sy = y * st - p + ky;
                            if (sy < 0 || sy >= ih) continue;
                            const double* row = inc + sy * iw;
                            double* orow = outc + y * ow;
                            for (int x = 0; x < ow; ++x) {
                                const int sx = x * st - p + kx;
                                if (sx < 0 || sx >= iw) continue;
                                orow[x] += wv * row[sx];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const Tensor& in, const Tensor& w, const LayerSpec& s, const Tensor& dout, Tensor& din,
                   Tensor& dw, Tensor& db) {
    const int n = in.dim(0), ic = in.dim(1), ih = in.dim(2), iw = in.dim(3);
    const int oc = dout.dim(1), oh = dout.dim(2), ow = dout.dim(3);
    const int k = s.kernel, st = s.stride, p = s.pad;
    for (int ni = 0; ni < n; ++ni) {
        const double* inb = in.data.data() + static_cast<std::size_t>(ni) * ic * ih * iw;
        const double* doutb = dout.data.data() + static_cast<std::size_t>(ni) * oc * oh * ow;
        double* dinb = din.data.data() + static_cast<std::size_t>(ni) * ic * ih * iw;
        for (int o = 0; o < oc; ++o) {
            const double* doutc = doutb + static_cast<std::size_t>(o) * oh * ow;
            double gsum = 0.0;
            for (int i = 0; i < oh * ow; ++i) gsum += doutc[i];
            db.data[static_cast<std::size_t>(o)] += gsum;
            for (int c = 0; c < ic; ++c) {
                const double* inc = inb + static_cast<std::size_t>(c) * ih * iw;
                double* dinc = dinb + static_cast<std::size_t>(c) * ih * iw;
                const double* wk = w.data.data() + ((static_cast<std::size_t>(o) * ic + c) * k) * k;
                double* dwk = dw.data.data() + ((static_cast<std::size_t>(o) * ic + c) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wk[ky * k + kx];
                        double acc = 0.0;
                        for (int y = 0; y < oh; ++y) {
                            const int sy = y * st - p + ky;
                            if (sy < 0 || sy >= ih) continue;
                            const double* row = inc + sy * iw;
                            double* drow = dinc + sy * iw;
                            const double* dorow = doutc + y * ow;
                            for (int x = 0; x < ow; ++x) {
                                const int sx = x * st - p + kx;
                                if (sx < 0 || sx >= iw) continue;
                                acc += dorow[x] * row[sx];
                                drow[sx] += dorow[x] * wv;
                            }
                        }
                        dwk[ky * k + kx] += acc;
                    }
                }
            }
        }
    }
}

}  // namespace

ForwardTrace forward_trace(const Model& m, const Tensor& batch) {
    if (batch.rank() != 4)
        throw ShapeError("forward: batch must be rank 4 [N,C,H,W], got " + batch.shape_str());
    if (batch.dim(1) != m.input.c || batch.dim(2) != m.input.h || batch.dim(3) != m.input.w)
        throw ShapeError("forward: batch " + batch.shape_str() + " does not match model input [N," +
                         std::to_string(m.input.c) + "," + std::to_string(m.input.h) + "," +
                         std::to_string(m.input.w) + "]");

    const int n = batch.dim(0);
    ForwardTrace tr;
    tr.acts.reserve(m.layers.size() + 1);
    tr.acts.push_back(batch);
    tr.pool_argmax.resize(m.layers.size());

    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        const Tensor& in = tr.acts.back();
        switch (s.kind) {
            case LayerKind::Conv2D: {
                const int oh = (in.dim(2) + 2 * s.pad - s.kernel) / s.stride + 1;
                const int ow = (in.dim(3) + 2 * s.pad - s.kernel) / s.stride + 1;
                Tensor out({n, s.out_channels, oh, ow});
                conv_forward(in, m.weights[i], m.biases[i], s, out);
                tr.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::MaxPool: {
                const int c = in.dim(1), ih = in.dim(2), iw = in.dim(3);
                const int oh = (ih - s.kernel) / s.stride + 1;
                const int ow = (iw - s.kernel) / s.stride + 1;
                Tensor out({n, c, oh, ow});
                auto& amax = tr.pool_argmax[i];
                amax.assign(out.data.size(), 0);
                std::size_t oi = 0;
                for (int ni = 0; ni < n; ++ni) {
                    for (int ci = 0; ci < c; ++ci) {
                        const double* inc =
                            in.data.data() + (static_cast<std::size_t>(ni) * c + ci) * ih * iw;
                        const std::size_t base = (static_cast<std::size_t>(ni) * c + ci) * ih * iw;
                        for (int y = 0; y < oh; ++y) {
                            for (int x = 0; x < ow; ++x, ++oi) {
                                int by = y * s.stride, bx = x * s.stride;
                                double best = inc[by * iw + bx];
                                int besti = by * iw + bx;
                                for (int ky = 0; ky < s.kernel; ++ky)
                                    for (int kx = 0; kx < s.kernel; ++kx) {
                                        int idx = (by + ky) * iw + (bx + kx);
                                        if (inc[idx] > best) {  // first max wins ties
                                            best = inc[idx];
                                            besti = idx;
                                        }
                                    }
                                out.data[oi] = best;
                                amax[oi] = static_cast<int>(base) + besti;
                            }
                        }
                    }
                }
                tr.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::ReLU: {
                Tensor out = in;
                for (auto& v : out.data)
                    if (v < 0.0) v = 0.0;
                tr.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::Flatten: {
                Tensor out = in;
                out.shape = {n, static_cast<int>(in.numel() / n)};
                tr.acts.push_back(std::move(out));
                break;
            }
            case LayerKind::Dense: {
                if (in.rank() != 2)
                    throw ShapeError("layer " + std::to_string(i) + " (dense): expected flat input, got " +
                                     in.shape_str());
                const int fin = in.dim(1), fout = s.out_features;
                if (m.weights[i].dim(1) != fin)
                    throw ShapeError("layer " + std::to_string(i) + " (dense): weight expects " +
                                     std::to_string(m.weights[i].dim(1)) + " inputs, got " + std::to_string(fin));
                Tensor out({n, fout});
                const double* wp = m.weights[i].data.data();
                const double* bp = m.biases[i].data.data();
                for (int ni = 0; ni < n; ++ni) {
                    const double* x = in.data.data() + static_cast<std::size_t>(ni) * fin;
                    double* y = out.data.data() + static_cast<std::size_t>(ni) * fout;
                    for (int o = 0; o < fout; ++o) {
                        const double* wrow = wp + static_cast<std::size_t>(o) * fin;
                        double acc = bp[o];
                        for (int j = 0; j < fin; ++j) acc += wrow[j] * x[j];
                        y[o] = acc;
                    }
                }
                tr.acts.push_back(std::move(out));
                break;
            }
        }
    }
    return tr;
}

Tensor forward(const Model& m, const Tensor& batch) {
    ForwardTrace tr = forward_trace(m, batch);
    return std::move(tr.acts.back());
}

std::vector<int> argmax_rows(const Tensor& logits) {
    if (logits.rank() != 2) throw ShapeError("argmax_rows: want rank 2, got " + logits.shape_str());
    const int n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double* row = logits.data.data() + static_cast<std::size_t>(i) * k;
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (row[j] > row[best]) best = j;
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

std::vector<int> predict(const Model& m, const Tensor& batch) { return argmax_rows(forward(m, batch)); }

Gradients Gradients::zeros_like(const Model& m) {
    Gradients g;
    g.weights.resize(m.layers.size());
    g.biases.resize(m.layers.size());
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        if (m.weights[i].numel() > 0) {
            g.weights[i] = Tensor(m.weights[i].shape);
            g.biases[i] = Tensor(m.biases[i].shape);
        }
    }
    return g;
}

Gradients backward(const Model& m, const ForwardTrace& tr, const Tensor& dlogits) {
    Gradients g = Gradients::zeros_like(m);
    Tensor delta = dlogits;
    for (int i = static_cast<int>(m.layers.size()) - 1; i >= 0; --i) {
        const LayerSpec& s = m.layers[i];
        const Tensor& in = tr.acts[static_cast<std::size_t>(i)];
        switch (s.kind) {
            case LayerKind::Dense: {
                const int n = delta.dim(0), fout = delta.dim(1), fin = in.dim(1);
                Tensor din({n, fin});
                const double* wp = m.weights[static_cast<std::size_t>(i)].data.data();
                double* dwp = g.weights[static_cast<std::size_t>(i)].data.data();
                double* dbp = g.biases[static_cast<std::size_t>(i)].data.data();
                for (int ni = 0; ni < n; ++ni) {
                    const double* x = in.data.data() + static_cast<std::size_t>(ni) * fin;
                    const double* dy = delta.data.data() + static_cast<std::size_t>(ni) * fout;
                    double* dx = din.data.data() + static_cast<std::size_t>(ni) * fin;
                    for (int o = 0; o < fout; ++o) {
                        const double dv = dy[o];
                        dbp[o] += dv;
                        const double* wrow = wp + static_cast<std::size_t>(o) * fin;
                        double* dwrow = dwp + static_cast<std::size_t>(o) * fin;
                        for (int j = 0; j < fin; ++j) {
                            dwrow[j] += dv * x[j];
                            dx[j] += dv * wrow[j];
                        }
                    }
                }
                delta = std::move(din);
                break;
            }
            case LayerKind::Flatten: {
                delta.shape = in.shape;
                break;
            }
            case LayerKind::ReLU: {
                for (std::size_t j = 0; j < delta.data.size(); ++j)
                    if (in.data[j] <= 0.0) delta.data[j] = 0.0;
                break;
            }
            case LayerKind::MaxPool: {
                Tensor din(in.shape);
                const auto& amax = tr.pool_argmax[static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < delta.data.size(); ++j)
                    din.data[static_cast<std::size_t>(amax[j])] += delta.data[j];
                delta = std::move(din);
                break;
            }
            case LayerKind::Conv2D: {
                Tensor din(in.shape);
                conv_backward(in, m.weights[static_cast<std::size_t>(i)], s, delta, din,
                              g.weights[static_cast<std::size_t>(i)], g.biases[static_cast<std::size_t>(i)]);
                delta = std::move(din);
                break;
            }
        }
    }
    return g;
}

}  // namespace copycat
