#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wordshift/align.hpp"
#include "wordshift/common.hpp"
#include "wordshift/rng.hpp"
#include "wordshift/space.hpp"

namespace wordshift {

struct NeighborReport {
    std::string word;
    std::vector<std::string> top_a;  // first n neighbors in A minus the intersection
    std::vector<std::string> top_b;
    int intersection_size_at_k = 0;
};

// Table-style interpretation aid: the first n neighbors of w in each
// space after removing members of the cross-space k-NN intersection.
inline NeighborReport neighbor_report(const EmbeddingSpace& a, const EmbeddingSpace& b,
                                      std::string_view w, int n = 10, int k = 1000) {
    if (n < 1) throw std::invalid_argument("neighbor_report: n must be >= 1");
    NeighborSet na = top_k_neighbors(a, w, k);
    NeighborSet nb = top_k_neighbors(b, w, k);

    NeighborReport rep;
    rep.word = std::string(w);
    auto fill = [&](const NeighborSet& own, const NeighborSet& other,
                    std::vector<std::string>& out) {
        for (const auto& [word, cos] : own.ordered) {
            if (other.as_set.count(word)) continue;
            out.push_back(word);
            if (out.size() == static_cast<size_t>(n)) break;
        }
    };
    fill(na, nb, rep.top_a);
    fill(nb, na, rep.top_b);
    rep.intersection_size_at_k = neighbor_overlap(na, nb);
    return rep;
}

inline void save_neighbor_report(const NeighborReport& rep, const std::string& path) {
    nlohmann::ordered_json j;
    j["word"] = rep.word;
    j["intersection_size"] = rep.intersection_size_at_k;
    j["top_a"] = rep.top_a;
    j["top_b"] = rep.top_b;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << '\n';
}

enum class PointOrigin : uint8_t { AOnly, BOnly, Shared, Target };

inline const char* origin_name(PointOrigin o) {
    switch (o) {
        case PointOrigin::AOnly: return "A-only";
        case PointOrigin::BOnly: return "B-only";
        case PointOrigin::Shared: return "shared";
        case PointOrigin::Target: return "target";
    }
    return "?";
}

struct ProjectedPoint {
    std::string word;
    double x = 0.0, y = 0.0;
    PointOrigin origin = PointOrigin::Shared;
};

struct Projection2D {
    std::vector<ProjectedPoint> points;
    std::string space_tag;  // which space's geometry was projected
};

// Labels the union of each space's top-n neighbor sets for a word by
// where each neighbor came from. Words missing from the projection space
//(`proj`) are dropped with a warning since they have no vector there.
inline std::vector<std::pair<std::string, PointOrigin>> label_neighbor_union(
    const EmbeddingSpace& a, const EmbeddingSpace& b, const EmbeddingSpace& proj,
    std::string_view w, int n = 50) {
    NeighborSet na = top_k_neighbors(a, w, n);
    NeighborSet nb = top_k_neighbors(b, w, n);
    std::vector<std::pair<std::string, PointOrigin>> labeled;
    for (const auto& [word, cos] : na.ordered)
        labeled.emplace_back(word, nb.as_set.count(word) ? PointOrigin::Shared
                                                         : PointOrigin::AOnly);
    for (const auto& [word, cos] : nb.ordered)
        if (!na.as_set.count(word)) labeled.emplace_back(word, PointOrigin::BOnly);
    std::erase_if(labeled, [&](const auto& p) {
        if (p.first == w) return true;
        if (!proj.vocab.contains(p.first)) {
            warn("neighbor '" + p.first + "' is not in the projection space; skipped");
            return true;
        }
        return false;
    });
    return labeled;
}

namespace detail {

struct TsneParams {
    int iters = 1000;
    int exaggeration_iters = 250;
    double exaggeration = 12.0;
    double lr = 200.0;
    double momentum_start = 0.5;
    double momentum_final = 0.8;
    int momentum_switch = 250;
    double perplexity_cap = 30.0;
};

inline std::vector<double> pairwise_sqdist(const std::vector<std::vector<double>>& x) {
    const size_t n = x.size();
    std::vector<double> d2(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (size_t t = 0; t < x[i].size(); ++t) {
                const double dd = x[i][t] - x[j][t];
                s += dd * dd;
            }
            d2[i * n + j] = s;
            d2[j * n + i] = s;
        }
    return d2;
}

// Row-wise conditional probabilities with a per-point bandwidth found by
// binary search on the target entropy log(perplexity).
inline std::vector<double> tsne_input_probs(const std::vector<double>& d2, size_t n,
                                            double perplexity) {
    std::vector<double> p(n * n, 0.0);
    const double target_h = std::log(perplexity);
    for (size_t i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = -1e300, beta_hi = 1e300;
        for (int iter = 0; iter < 200; ++iter) {
            double sum = 0.0, dot = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double e = std::exp(-beta * d2[i * n + j]);
                p[i * n + j] = e;
                sum += e;
                dot += e * d2[i * n + j];
            }
            const double h = sum > 0.0 ? std::log(sum) + beta * dot / sum : 0.0;
            const double diff = h - target_h;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = beta_hi >= 1e300 ? beta * 2.0 : (beta + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = beta_lo <= -1e300 ? beta / 2.0 : (beta + beta_lo) / 2.0;
            }
        }
        double sum = 0.0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) sum += p[i * n + j];
        if (sum > 0.0)
            for (size_t j = 0; j < n; ++j)
                if (j != i) p[i * n + j] /= sum;
    }
    // symmetrize
    std::vector<double> sym(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            sym[i * n + j] = (p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n));
            sym[i * n + j] = std::max(sym[i * n + j], 1e-12);
        }
    return sym;
}

// Exact O(n^2) t-SNE; deterministic for a fixed seed.
inline std::vector<std::array<double, 2>> tsne_exact(
    const std::vector<std::vector<double>>& x, uint64_t seed, const TsneParams& prm) {
    const size_t n = x.size();
    const double perplexity =
        std::min(prm.perplexity_cap, (static_cast<double>(n) - 1.0) / 3.0);
    std::vector<double> d2 = pairwise_sqdist(x);
    std::vector<double> p = tsne_input_probs(d2, n, perplexity);

    for (double& v : p) v *= prm.exaggeration;

    Rng rng(seed);
    std::vector<std::array<double, 2>> y(n), dy(n), uy(n), gains(n);
    for (size_t i = 0; i < n; ++i) {
        y[i] = {rng.next_gaussian() * 1e-4, rng.next_gaussian() * 1e-4};
        uy[i] = {0.0, 0.0};
        gains[i] = {1.0, 1.0};
    }

    std::vector<double> num(n * n, 0.0);
    for (int iter = 0; iter < prm.iters; ++iter) {
        if (iter == prm.exaggeration_iters)
            for (double& v : p) v /= prm.exaggeration;
        const double momentum =
            iter < prm.momentum_switch ? prm.momentum_start : prm.momentum_final;

        double sum_q = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                const double dx = y[i][0] - y[j][0];
                const double dyv = y[i][1] - y[j][1];
                const double q = 1.0 / (1.0 + dx * dx + dyv * dyv);
                num[i * n + j] = q;
                num[j * n + i] = q;
                sum_q += 2.0 * q;
            }

        for (size_t i = 0; i < n; ++i) {
            dy[i] = {0.0, 0.0};
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double q = num[i * n + j];
                const double mult = (p[i * n + j] - q / sum_q) * q;
                dy[i][0] += mult * (y[i][0] - y[j][0]);
                dy[i][1] += mult * (y[i][1] - y[j][1]);
            }
        }

        for (size_t i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) {
                gains[i][c] = (dy[i][c] > 0.0) != (uy[i][c] > 0.0) ? gains[i][c] + 0.2
                                                                   : gains[i][c] * 0.8;
                gains[i][c] = std::max(gains[i][c], 0.01);
                uy[i][c] = momentum * uy[i][c] - prm.lr * gains[i][c] * dy[i][c];
                y[i][c] += uy[i][c];
            }

        double mx = 0.0, my = 0.0;
        for (size_t i = 0; i < n; ++i) {
            mx += y[i][0];
            my += y[i][1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            y[i][0] -= mx;
            y[i][1] -= my;
        }
    }
    return y;
}

// PCA via the Gram matrix: cheap for the < 10 points this path serves.
inline std::vector<std::array<double, 2>> pca_top2(
    const std::vector<std::vector<double>>& x) {
    const size_t n = x.size();
    const size_t d = x[0].size();
    std::vector<std::vector<double>> c = x;
    for (size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (size_t i = 0; i < n; ++i) mean += c[i][j];
        mean /= static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) c[i][j] -= mean;
    }
    Matd gram(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (size_t t = 0; t < d; ++t) s += c[i][t] * c[j][t];
            gram(i, j) = s;
            gram(j, i) = s;
        }
    SvdResult svd = svd_small(gram);
    std::vector<std::array<double, 2>> y(n);
    const double s0 = svd.sigma.size() > 0 ? std::sqrt(std::max(svd.sigma[0], 0.0)) : 0.0;
    const double s1 = svd.sigma.size() > 1 ? std::sqrt(std::max(svd.sigma[1], 0.0)) : 0.0;
    for (size_t i = 0; i < n; ++i) {
        y[i][0] = svd.u(i, 0) * s0;
        y[i][1] = svd.sigma.size() > 1 ? svd.u(i, 1) * s1 : 0.0;
    }
    return y;
}

}  // namespace detail

// Projects the target word and a labeled neighbor set into 2-D using the
// given space's geometry: exact t-SNE for >= 10 points, top-2 principal
// components below that. Deterministic for a fixed seed.
inline Projection2D project_neighbors_2d(
    const EmbeddingSpace& sp, std::string_view w,
    const std::vector<std::pair<std::string, PointOrigin>>& others, uint64_t seed,
    std::string space_tag = "") {
    if (!sp.vocab.contains(w)) throw std::invalid_argument("unknown word: " + std::string(w));

    std::vector<std::pair<std::string, PointOrigin>> pts;
    pts.emplace_back(std::string(w), PointOrigin::Target);
    for (const auto& [word, origin] : others) {
        if (word == w) continue;
        if (!sp.vocab.contains(word))
            throw std::invalid_argument("unknown word: " + word);
        pts.emplace_back(word, origin);
    }
    if (pts.size() < 3)
        throw std::invalid_argument("projection needs at least 3 points, got " +
                                    std::to_string(pts.size()));

    std::vector<std::vector<double>> x(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        auto r = sp.row(static_cast<size_t>(sp.vocab.id_of(pts[i].first)));
        x[i].assign(r.begin(), r.end());
    }

    std::vector<std::array<double, 2>> y;
    if (pts.size() < 10)
        y = detail::pca_top2(x);
    else
        y = detail::tsne_exact(x, seed, detail::TsneParams{});

    Projection2D proj;
    proj.space_tag = std::move(space_tag);
    proj.points.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        proj.points[i].word = pts[i].first;
        proj.points[i].origin = pts[i].second;
        proj.points[i].x = y[i][0];
        proj.points[i].y = y[i][1];
        if (!std::isfinite(y[i][0]) || !std::isfinite(y[i][1]))
            throw std::runtime_error("projection produced non-finite coordinates");
    }
    return proj;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline const char* origin_color(PointOrigin o) {
    switch (o) {
        case PointOrigin::AOnly: return "#17becf";   // cyan
        case PointOrigin::BOnly: return "#9467bd";   // violet
        case PointOrigin::Shared: return "#ff7f0e";  // orange
        case PointOrigin::Target: return "#d62728";  // red
    }
    return "#000000";
}

}  // namespace detail

// Standalone SVG scatter of a projection, colored by origin, every point
// labeled. Byte-deterministic for a given projection.
inline void emit_svg(const Projection2D& p, const std::string& path) {
    if (p.points.empty()) throw std::invalid_argument("emit_svg: empty projection");
    int targets = 0;
    for (const auto& pt : p.points) targets += pt.origin == PointOrigin::Target ? 1 : 0;
    if (targets != 1)
        throw std::invalid_argument("emit_svg: projection must contain exactly one target");

    const double width = 900.0, height = 700.0, margin = 60.0;
    double min_x = p.points[0].x, max_x = p.points[0].x;
    double min_y = p.points[0].y, max_y = p.points[0].y;
    for (const auto& pt : p.points) {
        min_x = std::min(min_x, pt.x);
        max_x = std::max(max_x, pt.x);
        min_y = std::min(min_y, pt.y);
        max_y = std::max(max_y, pt.y);
    }
    const double span_x = std::max(max_x - min_x, 1e-9);
    const double span_y = std::max(max_y - min_y, 1e-9);

    auto sx = [&](double x) { return margin + (x - min_x) / span_x * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - min_y) / span_y * (height - 2 * margin); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    char buf[128];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  width, height, width, height);
    out << buf;
    if (!p.space_tag.empty())
        out << "<text x=\"10\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\">"
            << detail::xml_escape(p.space_tag) << "</text>\n";
    for (const auto& pt : p.points) {
        const double cx = sx(pt.x), cy = sy(pt.y);
        const bool target = pt.origin == PointOrigin::Target;
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%d\" fill=\"%s\"%s/>\n", cx, cy,
                      target ? 7 : 4, detail::origin_color(pt.origin),
                      target ? " stroke=\"#000000\" stroke-width=\"1.5\"" : "");
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"%d\" "
                      "font-family=\"sans-serif\">",
                      cx + 6.0, cy - 4.0, target ? 13 : 10);
        out << buf << detail::xml_escape(pt.word) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write error on svg: " + path);
}

// Companion TSV of projected coordinates.
inline void save_projection_tsv(const Projection2D& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write projection: " + path);
    char buf[64];
    for (const auto& pt : p.points) {
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", pt.x, pt.y);
        out << pt.word << '\t' << buf << '\t' << origin_name(pt.origin) << '\n';
    }
}

}  // namespace wordshift
