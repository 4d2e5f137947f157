#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wordshift/common.hpp"
#include "wordshift/detect.hpp"

namespace wordshift {

struct Matd {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matd() = default;
    Matd(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return a[i * cols + j]; }

    static Matd identity(size_t n) {
        Matd m(n, n);
        for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Matd matmul(const Matd& x, const Matd& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matd z(x.rows, y.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (size_t j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
        }
    return z;
}

inline Matd transpose(const Matd& x) {
    Matd t(x.cols, x.rows);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
    return t;
}

inline double frobenius_norm(const Matd& x) {
    double s = 0.0;
    for (double v : x.a) s += v * v;
    return std::sqrt(s);
}

struct SvdResult {
    Matd u;                     // d x d, orthogonal
    std::vector<double> sigma;  // non-negative, descending
    Matd v;                     // d x d, orthogonal; M = U diag(sigma) V^T
};

// One-sided Jacobi SVD for small square matrices: rotate column pairs of a
// working copy until all pairs are mutually orthogonal; the rotations
// accumulate into V, column norms become the singular values and the
// normalized columns become U.
inline SvdResult svd_small(const Matd& m, double tol = 1e-10, int max_sweeps = 100,
                           size_t dim_cap = 1024) {
    if (m.rows != m.cols) throw std::invalid_argument("svd_small expects a square matrix");
    const size_t d = m.rows;
    if (d == 0) throw std::invalid_argument("svd_small: empty matrix");
    if (d > dim_cap)
        throw std::invalid_argument("svd_small: dimension exceeds cap of " +
                                    std::to_string(dim_cap));
    for (double x : m.a)
        if (!std::isfinite(x)) throw std::invalid_argument("svd_small: non-finite input");

    Matd w = m;  // columns get orthogonalized in place
    Matd v = Matd::identity(d);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (size_t p = 0; p + 1 < d; ++p) {
            for (size_t q = p + 1; q < d; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (size_t i = 0; i < d; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (size_t i = 0; i < d; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (size_t i = 0; i < d; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    SvdResult r;
    r.sigma.resize(d);
    std::vector<size_t> order(d);
    for (size_t j = 0; j < d; ++j) {
        double n2 = 0.0;
        for (size_t i = 0; i < d; ++i) n2 += w(i, j) * w(i, j);
        r.sigma[j] = std::sqrt(n2);
        order[j] = j;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return r.sigma[x] > r.sigma[y]; });

    Matd u(d, d), vs(d, d);
    std::vector<double> sig(d);
    double sig_max = 0.0;
    for (size_t j = 0; j < d; ++j) sig_max = std::max(sig_max, r.sigma[order[j]]);
    const double tiny = sig_max > 0.0 ? sig_max * 1e-14 : 0.0;

    size_t filled = 0;
    for (size_t j = 0; j < d; ++j) {
        const size_t src = order[j];
        sig[j] = r.sigma[src];
        for (size_t i = 0; i < d; ++i) vs(i, j) = v(i, src);
        if (sig[j] > tiny && sig[j] > 0.0) {
            for (size_t i = 0; i < d; ++i) u(i, j) = w(i, src) / sig[j];
            ++filled;
        }
    }
    // complete U to an orthonormal basis for (near-)zero singular values
    for (size_t j = filled; j < d; ++j) {
        for (size_t cand = 0; cand < d; ++cand) {
            std::vector<double> e(d, 0.0);
            e[cand] = 1.0;
            for (size_t prev = 0; prev < j; ++prev) {
                double dot = 0.0;
                for (size_t i = 0; i < d; ++i) dot += e[i] * u(i, prev);
                for (size_t i = 0; i < d; ++i) e[i] -= dot * u(i, prev);
            }
            double n2 = 0.0;
            for (size_t i = 0; i < d; ++i) n2 += e[i] * e[i];
            if (n2 > 1e-8) {
                const double inv = 1.0 / std::sqrt(n2);
                for (size_t i = 0; i < d; ++i) u(i, j) = e[i] * inv;
                break;
            }
        }
    }

    r.u = std::move(u);
    r.v = std::move(vs);
    r.sigma = std::move(sig);
    return r;
}

struct OrthogonalMap {
    Matd w;  // d x d

    double orthogonality_error() const {
        Matd wtw = matmul(transpose(w), w);
        double worst = 0.0;
        for (size_t i = 0; i < wtw.rows; ++i)
            for (size_t j = 0; j < wtw.cols; ++j)
                worst = std::max(worst, std::abs(wtw(i, j) - (i == j ? 1.0 : 0.0)));
        return worst;
    }

    // LU with partial pivoting; only ever applied to small d x d maps
    double determinant() const {
        Matd lu = w;
        const size_t n = lu.rows;
        double det = 1.0;
        for (size_t col = 0; col < n; ++col) {
            size_t pivot = col;
            for (size_t i = col + 1; i < n; ++i)
                if (std::abs(lu(i, col)) > std::abs(lu(pivot, col))) pivot = i;
            if (lu(pivot, col) == 0.0) return 0.0;
            if (pivot != col) {
                for (size_t j = 0; j < n; ++j) std::swap(lu(pivot, j), lu(col, j));
                det = -det;
            }
            det *= lu(col, col);
            for (size_t i = col + 1; i < n; ++i) {
                const double f = lu(i, col) / lu(col, col);
                for (size_t j = col; j < n; ++j) lu(i, j) -= f * lu(col, j);
            }
        }
        return det;
    }
};

struct AlignmentProblem {
    Matd x;  // n x d, rows = shared-word vectors in space A
    Matd y;  // n x d, same words in space B
    bool unit_normalize = true;
    bool mean_center = false;
};

struct ProcrustesFit {
    OrthogonalMap map;
    double residual;  // ||X W - Y||_F after preprocessing
};

namespace detail {

inline void preprocess_rows(Matd& m, bool mean_center, bool unit_normalize) {
    if (mean_center) {
        std::vector<double> mean(m.cols, 0.0);
        for (size_t i = 0; i < m.rows; ++i)
            for (size_t j = 0; j < m.cols; ++j) mean[j] += m(i, j);
        for (size_t j = 0; j < m.cols; ++j) mean[j] /= static_cast<double>(m.rows);
        for (size_t i = 0; i < m.rows; ++i)
            for (size_t j = 0; j < m.cols; ++j) m(i, j) -= mean[j];
    }
    if (unit_normalize) {
        for (size_t i = 0; i < m.rows; ++i) {
            double n2 = 0.0;
            for (size_t j = 0; j < m.cols; ++j) n2 += m(i, j) * m(i, j);
            if (n2 == 0.0)
                throw std::invalid_argument(
                    "procrustes_fit: all-zero row after preprocessing");
            const double inv = 1.0 / std::sqrt(n2);
            for (size_t j = 0; j < m.cols; ++j) m(i, j) *= inv;
        }
    } else {
        for (size_t i = 0; i < m.rows; ++i) {
            double n2 = 0.0;
            for (size_t j = 0; j < m.cols; ++j) n2 += m(i, j) * m(i, j);
            if (n2 == 0.0)
                throw std::invalid_argument(
                    "procrustes_fit: all-zero row after preprocessing");
        }
    }
}

}  // namespace detail

// Closed-form orthogonal Procrustes: W = U V^T for X^T Y = U S V^T,
// minimizing ||X W - Y||_F over orthogonal W.
inline ProcrustesFit procrustes_fit(const AlignmentProblem& p) {
    if (p.x.rows != p.y.rows || p.x.cols != p.y.cols)
        throw std::invalid_argument("procrustes_fit: X and Y shapes differ");
    if (p.x.rows == 0 || p.x.cols == 0)
        throw std::invalid_argument("procrustes_fit: empty problem");
    if (p.x.rows < p.x.cols)
        warn("procrustes fit with fewer rows (" + std::to_string(p.x.rows) +
             ") than dimensions (" + std::to_string(p.x.cols) + ")");

    Matd x = p.x, y = p.y;
    detail::preprocess_rows(x, p.mean_center, p.unit_normalize);
    detail::preprocess_rows(y, p.mean_center, p.unit_normalize);

    Matd m = matmul(transpose(x), y);  // d x d cross-covariance
    SvdResult svd = svd_small(m);
    const double sig_total = svd.sigma.empty() ? 0.0 : svd.sigma[0];
    if (sig_total <= 0.0 || !std::isfinite(sig_total))
        throw std::runtime_error("procrustes_fit: degenerate rank-0 cross-covariance");

    ProcrustesFit fit;
    fit.map.w = matmul(svd.u, transpose(svd.v));

    Matd xw = matmul(x, fit.map.w);
    double res = 0.0;
    for (size_t i = 0; i < xw.rows; ++i)
        for (size_t j = 0; j < xw.cols; ++j) {
            const double dd = xw(i, j) - y(i, j);
            res += dd * dd;
        }
    fit.residual = std::sqrt(res);
    return fit;
}

struct AlignConfig {
    bool unit_normalize = true;
    bool mean_center = false;
};

namespace detail {

inline Matd rows_for_words(const EmbeddingSpace& sp, const std::vector<std::string>& words) {
    Matd m(words.size(), static_cast<size_t>(sp.dim));
    for (size_t i = 0; i < words.size(); ++i) {
        auto r = sp.row(static_cast<size_t>(sp.vocab.id_of(words[i])));
        for (size_t j = 0; j < r.size(); ++j) m(i, j) = r[j];
    }
    return m;
}

}  // namespace detail

// AlignCos baseline: fit orthogonal Procrustes on all shared eligible
// words, then rank by cosine distance between each word's mapped vector
// and its vector in the other space.
inline RankedList aligncos_rank(const EmbeddingSpace& a, const EmbeddingSpace& b,
                                const DetectorConfig& cfg,
                                const AlignConfig& align_cfg = {}) {
    cfg.validate();
    const std::vector<std::string> shared = shared_eligible_words(a, b, cfg);

    AlignmentProblem prob;
    prob.x = detail::rows_for_words(a, shared);
    prob.y = detail::rows_for_words(b, shared);
    prob.unit_normalize = align_cfg.unit_normalize;
    prob.mean_center = align_cfg.mean_center;
    ProcrustesFit fit = procrustes_fit(prob);

    const size_t d = static_cast<size_t>(a.dim);
    RankedList rl;
    rl.method_tag = MethodTag::aligncos;
    rl.entries.resize(shared.size());
    std::vector<double> mapped(d);
    for (size_t i = 0; i < shared.size(); ++i) {
        auto xr = a.row(static_cast<size_t>(a.vocab.id_of(shared[i])));
        auto yr = b.row(static_cast<size_t>(b.vocab.id_of(shared[i])));
        double nx = 0.0, ny = 0.0, dot = 0.0;
        for (size_t j = 0; j < d; ++j) {
            double m = 0.0;
            for (size_t t = 0; t < d; ++t) m += xr[t] * fit.map.w(t, j);
            mapped[j] = m;
            nx += m * m;
            ny += static_cast<double>(yr[j]) * yr[j];
            dot += m * yr[j];
        }
        rl.entries[i].word = shared[i];
        rl.entries[i].score = 1.0 - dot / std::sqrt(nx * ny);
    }
    detail::sort_and_rank(rl.entries, detail::min_cross_freqs(a, b, shared));

    rl.provenance["method"] = "aligncos";
    rl.provenance["min_count"] = std::to_string(cfg.min_count);
    rl.provenance["drop_quantile"] = format_double(cfg.drop_quantile);
    rl.provenance["stopword_top_n"] = std::to_string(cfg.stopword_top_n);
    rl.provenance["unit_normalize"] = align_cfg.unit_normalize ? "true" : "false";
    rl.provenance["mean_center"] = align_cfg.mean_center ? "true" : "false";
    rl.provenance["procrustes_residual"] = format_double(fit.residual);
    return rl;
}

// Audit dump of the fitted map: d x d whitespace-separated text matrix.
inline void save_orthogonal_map(const OrthogonalMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write map: " + path);
    for (size_t i = 0; i < map.w.rows; ++i) {
        for (size_t j = 0; j < map.w.cols; ++j) {
            if (j) out << ' ';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", map.w(i, j));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace wordshift
