#include "fermech/gus.hpp"

#include <cmath>

#include "fermech/errors.hpp"
#include "fermech/numerics.hpp"
#include "fermech/rng.hpp"

namespace fermech::gus {

void Config::validate() const {
    if (dims.size() < 2) throw ConfigError("gus.layers needs at least input and output dims");
    for (std::size_t d : dims) {
        if (d == 0) throw ConfigError("gus.layers dims must be positive");
    }
    if (!(lr > 0.0)) throw ConfigError("gus.lr must be > 0");
}

Config Config::two_layer(std::size_t feature_dim, int num_classes) {
    Config cfg;
    cfg.dims = {feature_dim, feature_dim, static_cast<std::size_t>(num_classes)};
    return cfg;
}

State init(const Config& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    State s;
    for (std::size_t l = 0; l + 1 < cfg.dims.size(); ++l) {
        Layer layer;
        layer.w = Tensor({cfg.dims[l], cfg.dims[l + 1]});
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.dims[l]));
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] = rng.uniform(-bound, bound);
        layer.relu = l + 2 < cfg.dims.size();  // ReLU between layers, linear output
        s.layers.push_back(std::move(layer));
    }
    return s;
}

void validate_graph(const Graph& g) {
    if (g.adj.rank() != 2 || g.adj.dim(0) != g.n || g.adj.dim(1) != g.n) {
        throw ShapeError("Graph: adjacency " + g.adj.shape_str() + " is not " +
                         std::to_string(g.n) + "x" + std::to_string(g.n));
    }
    for (std::size_t i = 0; i < g.n; ++i) {
        if (g.adj(i, i) != 0.0) throw DomainError("Graph: nonzero diagonal at node " + std::to_string(i));
        for (std::size_t j = i + 1; j < g.n; ++j) {
            if (std::fabs(g.adj(i, j) - g.adj(j, i)) > 1e-12) {
                throw DomainError("Graph: asymmetric at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
            }
        }
    }
}

Graph build_affinity(const std::vector<Tensor>& features, bool clamp_negative) {
    if (features.empty()) throw DomainError("build_affinity: need at least one feature");
    const std::size_t n = features.size();
    const std::size_t d = features[0].size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != d) {
            throw ShapeError("build_affinity: feature " + std::to_string(i) + " has " +
                             features[i].shape_str() + ", expected length " + std::to_string(d));
        }
        norms[i] = norm(features[i]);
        if (norms[i] <= 1e-12) {
            warn("build_affinity: feature " + std::to_string(i) +
                 " is near zero; node isolated (self-loop only)");
        }
    }
    Graph g;
    g.n = n;
    g.adj = Tensor({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sim = 0.0;
            if (norms[i] > 1e-12 && norms[j] > 1e-12) {
                sim = dot(features[i], features[j]) / (norms[i] * norms[j]);
                if (sim > 1.0) sim = 1.0;
                if (sim < -1.0) sim = -1.0;
                if (clamp_negative && sim < 0.0) sim = 0.0;
            }
            g.adj(i, j) = sim;
            g.adj(j, i) = sim;
        }
    }
    return g;
}

Tensor normalize_adjacency(const Graph& g, DegreeMode mode) {
    validate_graph(g);
    const std::size_t n = g.n;
    std::vector<double> degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = mode == DegreeMode::with_self_loop ? 1.0 : 0.0;  // self-loop weight
        for (std::size_t j = 0; j < n; ++j) s += g.adj(i, j);
        if (s <= 0.0) {
            throw NumericError("normalize_adjacency: non-positive degree at node " +
                               std::to_string(i) + " (raw_adjacency mode on an isolated node?)");
        }
        degree[i] = s;
    }
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = g.adj(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = a / std::sqrt(degree[i] * degree[j]);
        }
    }
    return out;
}

Tensor gcn_forward(const Tensor& f, const Graph& g, const Layer& layer, DegreeMode mode) {
    if (f.rank() != 2 || f.dim(0) != g.n) {
        throw ShapeError("gcn_forward: features " + f.shape_str() + " do not match graph n=" +
                         std::to_string(g.n));
    }
    if (f.dim(1) != layer.w.dim(0)) {
        throw ShapeError("gcn_forward: features " + f.shape_str() + " do not chain with weights " +
                         layer.w.shape_str());
    }
    Tensor z = matmul(matmul(normalize_adjacency(g, mode), f), layer.w);
    if (layer.relu) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
    }
    return z;
}

HeadCache head_forward(const std::vector<Tensor>& features, const Config& cfg, const State& s) {
    cfg.validate();
    if (features.empty()) throw DomainError("gus::head_forward: empty batch");
    const std::size_t n = features.size();
    const std::size_t d = cfg.dims.front();
    HeadCache c;
    c.input = Tensor({n, d});
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != d) {
            throw ShapeError("gus::head_forward: feature " + std::to_string(i) + " has " +
                             features[i].shape_str() + ", config expects length " +
                             std::to_string(d));
        }
        for (std::size_t k = 0; k < d; ++k) c.input(i, k) = features[i][k];
    }
    const Graph g = build_affinity(features, cfg.clamp_negative_sim);
    c.norm_adj = normalize_adjacency(g, cfg.degree_mode);

    Tensor cur = c.input;
    for (const Layer& layer : s.layers) {
        Tensor z = matmul(matmul(c.norm_adj, cur), layer.w);
        c.pre.push_back(z);
        if (layer.relu) {
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
        }
        c.post.push_back(z);
        cur = std::move(z);
    }
    return c;
}

Tensor head_logits(const std::vector<Tensor>& features, const Config& cfg, const State& s) {
    return head_forward(features, cfg, s).post.back();
}

Grads zero_grads(const State& s) {
    Grads g;
    for (const Layer& layer : s.layers) g.w.emplace_back(layer.w.shape());
    return g;
}

Tensor head_backward(const State& s, const HeadCache& c, const Tensor& dlogits, Grads& g) {
    if (s.layers.empty()) throw DomainError("gus::head_backward: no layers");
    Tensor dout = dlogits;
    for (std::size_t l = s.layers.size(); l-- > 0;) {
        const Layer& layer = s.layers[l];
        Tensor dz = dout;
        if (layer.relu) {
            const Tensor& pre = c.pre[l];
            for (std::size_t i = 0; i < dz.size(); ++i) {
                if (pre[i] <= 0.0) dz[i] = 0.0;
            }
        }
        const Tensor& fin = l == 0 ? c.input : c.post[l - 1];
        const Tensor nf = matmul(c.norm_adj, fin);  // n x d_in
        g.w[l] = add(g.w[l], matmul(transposed(nf), dz));
        // d/d fin of (N fin W) applied to dz: N^T dz W^T, N symmetric
        dout = matmul(c.norm_adj, matmul(dz, transposed(layer.w)));
    }
    return dout;
}

State sgd_step(const State& s, const Grads& g, double lr) {
    if (lr < 0.0) throw DomainError("gus::sgd_step: learning rate must be >= 0");
    if (g.w.size() != s.layers.size()) {
        throw ShapeError("gus::sgd_step: gradient count does not match layer count");
    }
    State out = s;
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
        if (!g.w[l].all_finite()) {
            throw NumericError("gus::sgd_step: non-finite gradient for layer " + std::to_string(l));
        }
        out.layers[l].w = sub(s.layers[l].w, scaled(g.w[l], lr));
    }
    out.step = s.step + 1;
    return out;
}

}  // namespace fermech::gus
