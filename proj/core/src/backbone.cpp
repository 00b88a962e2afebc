#include "fermech/backbone.hpp"

#include <cmath>
#include <fstream>

#include "fermech/errors.hpp"
#include "fermech/numerics.hpp"
#include "fermech/param_io.hpp"
#include "fermech/rng.hpp"

namespace fermech::backbone {

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

// y = x W + b for a single sample (x: [d_in], W: [d_in x d_out], b: [d_out])
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
    Tensor y = b;
    for (std::size_t r = 0; r < w.dim(0); ++r) {
        const double xr = x[r];
        for (std::size_t c = 0; c < w.dim(1); ++c) y[c] += xr * w(r, c);
    }
    return y;
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
    return y;
}

void check_grad_finite(const Tensor& g, const char* name) {
    if (!g.all_finite()) {
        throw NumericError(std::string("sgd_step: non-finite gradient for parameter ") + name);
    }
}

}  // namespace

void Config::validate() const {
    if (input_dim == 0) throw ConfigError("backbone.input_dim must be positive");
    if (mid_channels == 0 || mid_h == 0 || mid_w == 0) {
        throw ConfigError("backbone mid dimensions must be positive");
    }
    if (high_dim == 0) throw ConfigError("backbone.high_dim must be positive");
    if (num_classes != 6) throw ConfigError("backbone.num_classes must be 6 for this task");
    if (input_kind == InputKind::image && image_h * image_w * image_c != input_dim) {
        throw ConfigError("backbone: image dims do not multiply to input_dim");
    }
}

State init(const Config& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    State s;
    s.cfg = cfg;
    const std::size_t m = cfg.mid_flat();
    const std::size_t classes = static_cast<std::size_t>(cfg.num_classes);
    s.w1 = uniform_init({cfg.input_dim, m}, cfg.input_dim, rng);
    s.b1 = uniform_init({m}, cfg.input_dim, rng);
    s.w2 = uniform_init({m, cfg.high_dim}, m, rng);
    s.b2 = uniform_init({cfg.high_dim}, m, rng);
    s.w3 = uniform_init({cfg.high_dim, classes}, cfg.high_dim, rng);
    s.b3 = uniform_init({classes}, cfg.high_dim, rng);
    return s;
}

ForwardCache forward_cached(const State& s, const Tensor& input) {
    if (input.size() != s.cfg.input_dim) {
        throw ShapeError("backbone::forward: payload " + input.shape_str() + " does not match input_dim " +
                         std::to_string(s.cfg.input_dim));
    }
    ForwardCache c;
    c.input = reshaped(input, {s.cfg.input_dim});
    c.pre1 = affine(c.input, s.w1, s.b1);
    Tensor mid_flat = relu(c.pre1);
    c.taps.mid = reshaped(mid_flat, {s.cfg.mid_channels, s.cfg.mid_h, s.cfg.mid_w});
    c.pre2 = affine(mid_flat, s.w2, s.b2);
    c.taps.high = relu(c.pre2);
    c.taps.logits = affine(c.taps.high, s.w3, s.b3);
    return c;
}

ForwardTaps forward(const State& s, const Tensor& input) {
    return forward_cached(s, input).taps;
}

Tensor gap(const Tensor& mid) {
    if (mid.rank() != 3) throw ShapeError("gap: need C x H x W map, got " + mid.shape_str());
    const std::size_t c = mid.dim(0), h = mid.dim(1), w = mid.dim(2);
    Tensor out({c});
    const double inv = 1.0 / static_cast<double>(h * w);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) s += mid(ch, y, x);
        out[ch] = s * inv;
    }
    return out;
}

Grads zero_grads(const Config& cfg) {
    const std::size_t m = cfg.mid_flat();
    const std::size_t classes = static_cast<std::size_t>(cfg.num_classes);
    Grads g;
    g.w1 = Tensor({cfg.input_dim, m});
    g.b1 = Tensor({m});
    g.w2 = Tensor({m, cfg.high_dim});
    g.b2 = Tensor({cfg.high_dim});
    g.w3 = Tensor({cfg.high_dim, classes});
    g.b3 = Tensor({classes});
    return g;
}

Tensor backward_head(const State& s, const ForwardCache& c, const Tensor& dlogits, Grads& g) {
    // affine3
    Tensor dhigh({s.cfg.high_dim});
    for (std::size_t r = 0; r < s.w3.dim(0); ++r) {
        const double hr = c.taps.high[r];
        double acc = 0.0;
        for (std::size_t col = 0; col < s.w3.dim(1); ++col) {
            g.w3(r, col) += hr * dlogits[col];
            acc += dlogits[col] * s.w3(r, col);
        }
        dhigh[r] = acc;
    }
    for (std::size_t col = 0; col < s.b3.size(); ++col) g.b3[col] += dlogits[col];

    // relu2
    Tensor dpre2 = dhigh;
    for (std::size_t i = 0; i < dpre2.size(); ++i) {
        if (c.pre2[i] <= 0.0) dpre2[i] = 0.0;
    }

    // affine2
    const Tensor mid_flat = reshaped(c.taps.mid, {s.cfg.mid_flat()});
    Tensor dmid({s.cfg.mid_flat()});
    for (std::size_t r = 0; r < s.w2.dim(0); ++r) {
        const double mr = mid_flat[r];
        double acc = 0.0;
        for (std::size_t col = 0; col < s.w2.dim(1); ++col) {
            g.w2(r, col) += mr * dpre2[col];
            acc += dpre2[col] * s.w2(r, col);
        }
        dmid[r] = acc;
    }
    for (std::size_t col = 0; col < s.b2.size(); ++col) g.b2[col] += dpre2[col];

    return reshaped(dmid, {s.cfg.mid_channels, s.cfg.mid_h, s.cfg.mid_w});
}

void backward_stem(const State& s, const ForwardCache& c, const Tensor& dmid, Grads& g) {
    Tensor dpre1 = reshaped(dmid, {s.cfg.mid_flat()});
    for (std::size_t i = 0; i < dpre1.size(); ++i) {
        if (c.pre1[i] <= 0.0) dpre1[i] = 0.0;
    }
    for (std::size_t r = 0; r < s.w1.dim(0); ++r) {
        const double xr = c.input[r];
        for (std::size_t col = 0; col < s.w1.dim(1); ++col) {
            g.w1(r, col) += xr * dpre1[col];
        }
    }
    for (std::size_t col = 0; col < s.b1.size(); ++col) g.b1[col] += dpre1[col];
}

State sgd_step(const State& s, const Grads& g, double lr) {
    if (lr < 0.0) throw DomainError("sgd_step: learning rate must be >= 0");
    check_grad_finite(g.w1, "w1");
    check_grad_finite(g.b1, "b1");
    check_grad_finite(g.w2, "w2");
    check_grad_finite(g.b2, "b2");
    check_grad_finite(g.w3, "w3");
    check_grad_finite(g.b3, "b3");
    State out = s;
    out.w1 = sub(s.w1, scaled(g.w1, lr));
    out.b1 = sub(s.b1, scaled(g.b1, lr));
    out.w2 = sub(s.w2, scaled(g.w2, lr));
    out.b2 = sub(s.b2, scaled(g.b2, lr));
    out.w3 = sub(s.w3, scaled(g.w3, lr));
    out.b3 = sub(s.b3, scaled(g.b3, lr));
    out.step = s.step + 1;
    return out;
}

void save_checkpoint(const State& s, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    write_section(os, s);
}

void write_section(std::ostream& os, const State& s) {
    using paramio::write_kv;
    write_kv(os, "fermech-backbone", std::string("v1"));
    write_kv(os, "input_kind", std::string(s.cfg.input_kind == InputKind::image ? "image" : "vector"));
    write_kv(os, "input_dim", static_cast<std::uint64_t>(s.cfg.input_dim));
    write_kv(os, "image_h", static_cast<std::uint64_t>(s.cfg.image_h));
    write_kv(os, "image_w", static_cast<std::uint64_t>(s.cfg.image_w));
    write_kv(os, "image_c", static_cast<std::uint64_t>(s.cfg.image_c));
    write_kv(os, "mid_channels", static_cast<std::uint64_t>(s.cfg.mid_channels));
    write_kv(os, "mid_h", static_cast<std::uint64_t>(s.cfg.mid_h));
    write_kv(os, "mid_w", static_cast<std::uint64_t>(s.cfg.mid_w));
    write_kv(os, "high_dim", static_cast<std::uint64_t>(s.cfg.high_dim));
    write_kv(os, "num_classes", static_cast<std::uint64_t>(s.cfg.num_classes));
    write_kv(os, "seed", s.cfg.seed);
    write_kv(os, "step", s.step);
    paramio::write_tensor(os, "w1", s.w1);
    paramio::write_tensor(os, "b1", s.b1);
    paramio::write_tensor(os, "w2", s.w2);
    paramio::write_tensor(os, "b2", s.b2);
    paramio::write_tensor(os, "w3", s.w3);
    paramio::write_tensor(os, "b3", s.b3);
}

State load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    return read_section(is);
}

State read_section(std::istream& is) {
    using paramio::read_kv;
    using paramio::read_kv_u64;
    const std::string version = read_kv(is, "fermech-backbone");
    if (version != "v1") throw DataError("unsupported backbone checkpoint version " + version);
    State s;
    const std::string kind = read_kv(is, "input_kind");
    s.cfg.input_kind = kind == "image" ? InputKind::image : InputKind::vector;
    s.cfg.input_dim = read_kv_u64(is, "input_dim");
    s.cfg.image_h = read_kv_u64(is, "image_h");
    s.cfg.image_w = read_kv_u64(is, "image_w");
    s.cfg.image_c = read_kv_u64(is, "image_c");
    s.cfg.mid_channels = read_kv_u64(is, "mid_channels");
    s.cfg.mid_h = read_kv_u64(is, "mid_h");
    s.cfg.mid_w = read_kv_u64(is, "mid_w");
    s.cfg.high_dim = read_kv_u64(is, "high_dim");
    s.cfg.num_classes = static_cast<int>(read_kv_u64(is, "num_classes"));
    s.cfg.seed = read_kv_u64(is, "seed");
    s.step = read_kv_u64(is, "step");
    s.w1 = paramio::read_tensor(is, "w1");
    s.b1 = paramio::read_tensor(is, "b1");
    s.w2 = paramio::read_tensor(is, "w2");
    s.b2 = paramio::read_tensor(is, "b2");
    s.w3 = paramio::read_tensor(is, "w3");
    s.b3 = paramio::read_tensor(is, "b3");
    s.cfg.validate();
    return s;
}

}  // namespace fermech::backbone
