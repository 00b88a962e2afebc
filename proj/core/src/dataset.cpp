#include "fermech/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fermech/csv.hpp"
#include "fermech/errors.hpp"
#include "fermech/label.hpp"

namespace fermech::data {

namespace {

std::vector<std::pair<std::string, int>> load_label_rows(const std::filesystem::path& path) {
    csv::Reader reader(path);
    if (reader.header().size() < 2 || reader.header()[0] != "id" ||
        reader.header()[1] != "label") {
        throw DataError(path.string() + ": bad header, expected id,label");
    }
    std::vector<std::pair<std::string, int>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() < 2) {
            throw DataError(path.string() + ": row " + std::to_string(reader.row()) +
                            ": expected id,label");
        }
        int label;
        try {
            label = parse_label(fields[1]);
        } catch (const DomainError& e) {
            throw DataError(path.string() + ": row " + std::to_string(reader.row()) + ": " +
                            e.what());
        }
        rows.emplace_back(fields[0], label);
    }
    return rows;
}

Dataset load_features_with_labels(const std::filesystem::path& features_csv,
                                  const std::filesystem::path& labels_csv) {
    csv::Reader reader(features_csv);
    const auto& header = reader.header();
    if (header.size() < 2 || header[0] != "id") {
        throw DataError(features_csv.string() + ": bad header, expected id,f0,...");
    }
    const std::size_t d = header.size() - 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (header[k + 1] != "f" + std::to_string(k)) {
            throw DataError(features_csv.string() + ": bad header column '" + header[k + 1] +
                            "', expected f" + std::to_string(k));
        }
    }

    std::map<std::string, int> labels;
    for (auto& [id, label] : load_label_rows(labels_csv)) {
        if (!labels.emplace(id, label).second) {
            throw DataError(labels_csv.string() + ": duplicate id '" + id + "'");
        }
    }

    Dataset ds;
    ds.dim = d;
    std::set<std::string> seen;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() != d + 1) {
            throw DataError(features_csv.string() + ": row " + std::to_string(reader.row()) +
                            ": expected " + std::to_string(d + 1) + " fields, found " +
                            std::to_string(fields.size()));
        }
        Sample s;
        s.id = fields[0];
        if (!seen.insert(s.id).second) {
            throw DataError(features_csv.string() + ": row " + std::to_string(reader.row()) +
                            ": duplicate id '" + s.id + "'");
        }
        std::vector<double> values(d);
        for (std::size_t k = 0; k < d; ++k) {
            values[k] = csv::parse_double(fields[k + 1], features_csv, reader.row());
        }
        s.payload = Tensor::vec(std::move(values));
        auto it = labels.find(s.id);
        if (it == labels.end()) {
            throw DataError(labels_csv.string() + ": no label for sample '" + s.id + "'");
        }
        s.label = it->second;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Tensor bilinear_resize(const Tensor& img, std::size_t out_h, std::size_t out_w) {
    const std::size_t in_h = img.dim(0), in_w = img.dim(1), c = img.dim(2);
    Tensor out({out_h, out_w, c});
    for (std::size_t y = 0; y < out_h; ++y) {
        double sy = (static_cast<double>(y) + 0.5) * static_cast<double>(in_h) /
                        static_cast<double>(out_h) -
                    0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(in_h - 1));
        const std::size_t y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            double sx = (static_cast<double>(x) + 0.5) * static_cast<double>(in_w) /
                            static_cast<double>(out_w) -
                        0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(in_w - 1));
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double top = img(y0, x0, ch) * (1.0 - fx) + img(y0, x1, ch) * fx;
                const double bot = img(y1, x0, ch) * (1.0 - fx) + img(y1, x1, ch) * fx;
                out(y, x, ch) = top * (1.0 - fy) + bot * fy;
            }
        }
    }
    return out;
}

Tensor horizontal_flip(const Tensor& img) {
    Tensor out(img.shape());
    const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) out(y, x, ch) = img(y, w - 1 - x, ch);
    return out;
}

Tensor gaussian_blur(const Tensor& img, double sigma) {
    if (sigma < 1e-3) return img;  // kernel degenerates to a delta
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * (k / sigma) * (k / sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
    const auto clamp_idx = [](long v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(n) - 1));
    };
    // horizontal pass, then vertical; replicate edges
    Tensor tmp(img.shape());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    acc += kernel[static_cast<std::size_t>(k + radius)] *
                           img(y, clamp_idx(static_cast<long>(x) + k, w), ch);
                }
                tmp(y, x, ch) = acc;
            }
    Tensor out(img.shape());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    acc += kernel[static_cast<std::size_t>(k + radius)] *
                           tmp(clamp_idx(static_cast<long>(y) + k, h), x, ch);
                }
                out(y, x, ch) = acc;
            }
    return out;
}

// Cholesky tolerant of semi-definite input (zero pivots allowed when the
// remaining column is also zero). DomainError otherwise.
Tensor cholesky(const Tensor& a, int class_label) {
    const std::size_t n = a.dim(0);
    if (a.rank() != 2 || a.dim(1) != n) {
        throw ShapeError("cholesky: covariance must be square, got " + a.shape_str());
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a(i, i)));
    const double tol = std::max(1e-12 * max_diag, 1e-300);

    Tensor l({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -tol) {
            throw DomainError("covariance for class " +
                              std::string(label_name(class_label)) +
                              " is not positive semi-definite");
        }
        if (d <= tol) {
            for (std::size_t i = j + 1; i < n; ++i) {
                double v = a(i, j);
                for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
                if (std::fabs(v) > std::sqrt(tol) * std::max(1.0, max_diag)) {
                    throw DomainError("covariance for class " +
                                      std::string(label_name(class_label)) +
                                      " is not positive semi-definite");
                }
            }
            continue;  // zero column
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return l;
}

}  // namespace

Tensor resize_image(const Tensor& img, std::size_t out_h, std::size_t out_w) {
    if (img.rank() != 3) throw ShapeError("resize_image: need h x w x c, got " + img.shape_str());
    if (out_h == 0 || out_w == 0) throw DomainError("resize_image: target dims must be positive");
    return bilinear_resize(img, out_h, out_w);
}

std::array<std::size_t, 6> Dataset::class_counts() const {
    std::array<std::size_t, 6> counts{};
    for (const Sample& s : samples) {
        require_label(s.label, "Dataset::class_counts");
        ++counts[static_cast<std::size_t>(s.label)];
    }
    return counts;
}

Dataset load_dataset(const std::filesystem::path& features_csv,
                     const std::filesystem::path& labels_csv) {
    Dataset ds = load_features_with_labels(features_csv, labels_csv);
    ds.kind = Kind::vector_features;
    return ds;
}

Dataset load_image_dataset(const std::filesystem::path& features_csv,
                           const std::filesystem::path& labels_csv, std::size_t h,
                           std::size_t w, std::size_t c) {
    Dataset ds = load_features_with_labels(features_csv, labels_csv);
    if (ds.dim != h * w * c) {
        throw DataError(features_csv.string() + ": " + std::to_string(ds.dim) +
                        " values per row do not fill a " + std::to_string(h) + "x" +
                        std::to_string(w) + "x" + std::to_string(c) + " image");
    }
    ds.kind = Kind::image;
    ds.image_h = h;
    ds.image_w = w;
    ds.image_c = c;
    for (Sample& s : ds.samples) s.payload = reshaped(s.payload, {h, w, c});
    return ds;
}

void save_features(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open file for writing: " + path.string());
    os << "id";
    for (std::size_t k = 0; k < ds.dim; ++k) os << ",f" << k;
    os << "\n";
    for (const Sample& s : ds.samples) {
        os << s.id;
        for (std::size_t k = 0; k < s.payload.size(); ++k) {
            os << "," << csv::format_double(s.payload[k]);
        }
        os << "\n";
    }
}

void save_labels(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open file for writing: " + path.string());
    os << "id,label\n";
    for (const Sample& s : ds.samples) os << s.id << "," << label_name(s.label) << "\n";
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, int>>& preds,
                      const std::vector<bool>* changed) {
    if (changed && changed->size() != preds.size()) {
        throw DomainError("save_predictions: changed flags do not match prediction count");
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot open file for writing: " + path.string());
    os << (changed ? "id,label,changed\n" : "id,label\n");
    for (std::size_t i = 0; i < preds.size(); ++i) {
        os << preds[i].first << "," << label_name(preds[i].second);
        if (changed) os << "," << ((*changed)[i] ? 1 : 0);
        os << "\n";
    }
}

std::vector<std::pair<std::string, int>> load_predictions(const std::filesystem::path& path) {
    return load_label_rows(path);
}

Dataset oversample(const Dataset& ds, Rng& rng) {
    const auto counts = ds.class_counts();
    std::size_t majority = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            throw ConfigError("oversample: class " + std::string(label_name(k)) +
                              " has no samples");
        }
        majority = std::max(majority, counts[static_cast<std::size_t>(k)]);
    }

    std::array<std::vector<std::size_t>, 6> by_class;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
    }

    Dataset out = ds;
    for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t add = counts[k]; add < majority; ++add) {
            const std::size_t pick = by_class[k][rng.index(by_class[k].size())];
            out.samples.push_back(ds.samples[pick]);
        }
    }
    rng.shuffle(out.samples);
    return out;
}

void AugmentConfig::validate() const {
    for (double p : {flip_prob, crop_prob, blur_prob}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("augment probabilities must lie in [0, 1]");
    }
    if (!(crop_ratio > 0.0 && crop_ratio <= 1.0)) {
        throw ConfigError("augment.crop_ratio must lie in (0, 1]");
    }
    if (!(blur_sigma_min >= 0.0 && blur_sigma_max >= blur_sigma_min)) {
        throw ConfigError("augment blur sigma range is invalid");
    }
}

Sample augment(const Sample& s, Rng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    if (s.payload.rank() != 3) {
        static bool warned = false;
        if (!warned) {
            warn("augment: vector payloads are passed through unchanged");
            warned = true;
        }
        return s;
    }
    Sample out = s;
    if (rng.bernoulli(cfg.flip_prob)) {
        out.payload = horizontal_flip(out.payload);
    }
    if (rng.bernoulli(cfg.crop_prob)) {
        const std::size_t h = out.payload.dim(0), w = out.payload.dim(1);
        const std::size_t ch = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(cfg.crop_ratio * static_cast<double>(h))));
        const std::size_t cw = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(cfg.crop_ratio * static_cast<double>(w))));
        const std::size_t y0 = ch < h ? rng.index(h - ch + 1) : 0;
        const std::size_t x0 = cw < w ? rng.index(w - cw + 1) : 0;
        Tensor crop({ch, cw, out.payload.dim(2)});
        for (std::size_t y = 0; y < ch; ++y)
            for (std::size_t x = 0; x < cw; ++x)
                for (std::size_t cc = 0; cc < out.payload.dim(2); ++cc)
                    crop(y, x, cc) = out.payload(y0 + y, x0 + x, cc);
        out.payload = bilinear_resize(crop, h, w);
    }
    if (rng.bernoulli(cfg.blur_prob)) {
        const double sigma = rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max);
        out.payload = gaussian_blur(out.payload, sigma);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor>> load_features(
    const std::filesystem::path& features_csv) {
    csv::Reader reader(features_csv);
    const auto& header = reader.header();
    if (header.size() < 2 || header[0] != "id") {
        throw DataError(features_csv.string() + ": bad header, expected id,f0,...");
    }
    const std::size_t d = header.size() - 1;
    std::vector<std::pair<std::string, Tensor>> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() != d + 1) {
            throw DataError(features_csv.string() + ": row " + std::to_string(reader.row()) +
                            ": expected " + std::to_string(d + 1) + " fields, found " +
                            std::to_string(fields.size()));
        }
        std::vector<double> values(d);
        for (std::size_t k = 0; k < d; ++k) {
            values[k] = csv::parse_double(fields[k + 1], features_csv, reader.row());
        }
        out.emplace_back(fields[0], Tensor::vec(std::move(values)));
    }
    return out;
}

Dataset gen_synthetic(const std::array<ClassGaussian, 6>& spec, std::size_t n_per_class,
                      std::uint64_t seed, const std::string& id_prefix) {
    if (n_per_class == 0) throw DomainError("gen_synthetic: n_per_class must be >= 1");
    const std::size_t d = spec[0].mean.size();
    if (d == 0) throw DomainError("gen_synthetic: empty class mean");

    std::array<Tensor, 6> chol;
    for (int k = 0; k < kNumClasses; ++k) {
        const auto& cg = spec[static_cast<std::size_t>(k)];
        if (cg.mean.size() != d) {
            throw ShapeError("gen_synthetic: class " + std::string(label_name(k)) +
                             " mean has length " + std::to_string(cg.mean.size()) +
                             ", expected " + std::to_string(d));
        }
        if (cg.cov.rank() != 2 || cg.cov.dim(0) != d || cg.cov.dim(1) != d) {
            throw ShapeError("gen_synthetic: class " + std::string(label_name(k)) +
                             " covariance " + cg.cov.shape_str() + " is not " +
                             std::to_string(d) + "x" + std::to_string(d));
        }
        chol[static_cast<std::size_t>(k)] = cholesky(cg.cov, k);
    }

    Rng rng(seed);
    Dataset ds;
    ds.kind = Kind::vector_features;
    ds.dim = d;
    for (int k = 0; k < kNumClasses; ++k) {
        const auto& cg = spec[static_cast<std::size_t>(k)];
        const Tensor& l = chol[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Tensor z({d});
            for (std::size_t j = 0; j < d; ++j) z[j] = rng.normal();
            Tensor x = cg.mean;
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c <= r; ++c) acc += l(r, c) * z[c];
                x[r] += acc;
            }
            Sample s;
            std::string cls(label_name(k));
            for (char& ch : cls) ch = static_cast<char>(std::tolower(ch));
            s.id = id_prefix + cls + "_" + std::to_string(i);
            s.payload = std::move(x);
            s.label = k;
            ds.samples.push_back(std::move(s));
        }
    }
    rng.shuffle(ds.samples);
    return ds;
}

}  // namespace fermech::data
