#include "pcx/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <utility>

#include "pcx/errors.hpp"

namespace pcx {

const char* to_string(PoolingKind kind) {
    switch (kind) {
        case PoolingKind::Max: return "max";
        case PoolingKind::Average: return "average";
        case PoolingKind::Median: return "median";
        case PoolingKind::Sum: return "sum";
    }
    throw precondition_error("unknown pooling kind");
}

PoolingKind pooling_from_string(const std::string& name) {
    for (PoolingKind k : kAllPoolings)
        if (name == to_string(k)) return k;
    throw precondition_error("unknown pooling kind '" + name +
                             "' (expected max|average|median|sum)");
}

namespace kernels {

namespace {
std::atomic<bool> g_parallel{true};

// below these sizes the fork/join overhead dominates
constexpr std::size_t kMatmulParCutoff = 1u << 16;  // m*k*n
constexpr std::size_t kScanParCutoff = 1u << 14;    // ns*nd
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

// ---------------------------------------------------------------------------
// matmul family. Each output row is produced by exactly one thread with the
// same accumulation order as the serial kernel, so results are bit-identical.

namespace {
inline void matmul_row(const double* ai, const double* b, double* ci,
                       std::size_t k, std::size_t n) {
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
        const double av = ai[p];
        const double* bp = b + p * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
}

inline void matmul_nt_row(const double* ai, const double* b, double* ci,
                          std::size_t k, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* bj = b + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
        ci[j] = acc;
    }
}

inline void matmul_tn_row(const double* a, const double* b, double* cp,
                          std::size_t p, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(cp, cp + n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double av = a[i * k + p];
        const double* bi = b + i * n;
        for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
}
}  // namespace

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a + i * k, b, c + i * n, k, n);
}

void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
        matmul_row(a + i * k, b, c + i * n, k, n);
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (parallel_enabled() && m * k * n >= kMatmulParCutoff && m > 1)
        matmul_parallel(a, b, c, m, k, n);
    else
        matmul_serial(a, b, c, m, k, n);
}

void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_nt_row(a + i * k, b, c + i * n, k, n);
}

void matmul_nt_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
        matmul_nt_row(a + i * k, b, c + i * n, k, n);
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (parallel_enabled() && m * k * n >= kMatmulParCutoff && m > 1)
        matmul_nt_parallel(a, b, c, m, k, n);
    else
        matmul_nt_serial(a, b, c, m, k, n);
}

void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) matmul_tn_row(a, b, c + p * n, p, m, k, n);
}

void matmul_tn_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(k); ++p)
        matmul_tn_row(a, b, c + p * n, static_cast<std::size_t>(p), m, k, n);
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (parallel_enabled() && m * k * n >= kMatmulParCutoff && k > 1)
        matmul_tn_parallel(a, b, c, m, k, n);
    else
        matmul_tn_serial(a, b, c, m, k, n);
}

// ---------------------------------------------------------------------------
// pooling

namespace {

// median middle rows of column ch within the group, ordered by (value, row)
inline void median_rows(const double* x, std::size_t g, std::size_t c, std::size_t ch,
                        std::vector<std::pair<double, std::uint32_t>>& scratch,
                        std::uint32_t& r1, std::uint32_t& r2, double& value) {
    scratch.clear();
    for (std::size_t r = 0; r < g; ++r)
        scratch.emplace_back(x[r * c + ch], static_cast<std::uint32_t>(r));
    const std::size_t hi = g / 2;
    std::nth_element(scratch.begin(), scratch.begin() + hi, scratch.end());
    const auto upper = scratch[hi];
    if (g % 2 == 1) {
        r1 = r2 = upper.second;
        value = upper.first;
        return;
    }
    std::nth_element(scratch.begin(), scratch.begin() + (hi - 1), scratch.begin() + hi);
    const auto lower = scratch[hi - 1];
    r1 = lower.second;
    r2 = upper.second;
    value = 0.5 * (lower.first + upper.first);
}

inline void pool_group(const double* x, std::size_t bi, std::size_t g, std::size_t c,
                       PoolingKind kind, double* out, PoolAux* aux,
                       std::vector<std::pair<double, std::uint32_t>>& scratch) {
    const double* base = x + bi * g * c;
    double* o = out + bi * c;
    switch (kind) {
        case PoolingKind::Max: {
            for (std::size_t ch = 0; ch < c; ++ch) {
                double best = base[ch];
                std::uint32_t arg = 0;
                for (std::size_t r = 1; r < g; ++r) {
                    const double v = base[r * c + ch];
                    if (v > best) {  // strict: ties keep the lowest row
                        best = v;
                        arg = static_cast<std::uint32_t>(r);
                    }
                }
                o[ch] = best;
                if (aux) aux->row1[bi * c + ch] = static_cast<std::uint32_t>(bi * g) + arg;
            }
            break;
        }
        case PoolingKind::Average:
        case PoolingKind::Sum: {
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (std::size_t r = 0; r < g; ++r) acc += base[r * c + ch];
                o[ch] = (kind == PoolingKind::Average) ? acc / static_cast<double>(g) : acc;
            }
            break;
        }
        case PoolingKind::Median: {
            for (std::size_t ch = 0; ch < c; ++ch) {
                std::uint32_t r1 = 0, r2 = 0;
                double v = 0.0;
                median_rows(base, g, c, ch, scratch, r1, r2, v);
                o[ch] = v;
                if (aux) {
                    aux->row1[bi * c + ch] = static_cast<std::uint32_t>(bi * g) + r1;
                    aux->row2[bi * c + ch] = static_cast<std::uint32_t>(bi * g) + r2;
                }
            }
            break;
        }
    }
}

}  // namespace

void pool_rows_serial(const double* x, std::size_t b, std::size_t g, std::size_t c,
                      PoolingKind kind, double* out, PoolAux* aux) {
    if (aux) {
        aux->row1.assign(b * c, 0);
        aux->even_median = (kind == PoolingKind::Median && g % 2 == 0);
        if (kind == PoolingKind::Median) aux->row2.assign(b * c, 0);
    }
    std::vector<std::pair<double, std::uint32_t>> scratch;
    for (std::size_t bi = 0; bi < b; ++bi) pool_group(x, bi, g, c, kind, out, aux, scratch);
}

void pool_rows_parallel(const double* x, std::size_t b, std::size_t g, std::size_t c,
                        PoolingKind kind, double* out, PoolAux* aux) {
    if (aux) {
        aux->row1.assign(b * c, 0);
        aux->even_median = (kind == PoolingKind::Median && g % 2 == 0);
        if (kind == PoolingKind::Median) aux->row2.assign(b * c, 0);
    }
#pragma omp parallel
    {
        std::vector<std::pair<double, std::uint32_t>> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(b); ++bi)
            pool_group(x, static_cast<std::size_t>(bi), g, c, kind, out, aux, scratch);
    }
}

void pool_rows(const double* x, std::size_t b, std::size_t g, std::size_t c,
               PoolingKind kind, double* out, PoolAux* aux) {
    if (parallel_enabled() && b > 1 && b * g * c >= kScanParCutoff)
        pool_rows_parallel(x, b, g, c, kind, out, aux);
    else
        pool_rows_serial(x, b, g, c, kind, out, aux);
}

void pool_rows_backward(const double* dout, std::size_t b, std::size_t g, std::size_t c,
                        PoolingKind kind, const PoolAux& aux, double* dx) {
    switch (kind) {
        case PoolingKind::Max: {
            for (std::size_t i = 0; i < b * c; ++i)
                dx[static_cast<std::size_t>(aux.row1[i]) * c + i % c] += dout[i];
            break;
        }
        case PoolingKind::Average: {
            const double w = 1.0 / static_cast<double>(g);
            for (std::size_t bi = 0; bi < b; ++bi)
                for (std::size_t r = 0; r < g; ++r)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        dx[(bi * g + r) * c + ch] += w * dout[bi * c + ch];
            break;
        }
        case PoolingKind::Sum: {
            for (std::size_t bi = 0; bi < b; ++bi)
                for (std::size_t r = 0; r < g; ++r)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        dx[(bi * g + r) * c + ch] += dout[bi * c + ch];
            break;
        }
        case PoolingKind::Median: {
            const double w = aux.even_median ? 0.5 : 1.0;
            for (std::size_t i = 0; i < b * c; ++i) {
                dx[static_cast<std::size_t>(aux.row1[i]) * c + i % c] += w * dout[i];
                if (aux.even_median)
                    dx[static_cast<std::size_t>(aux.row2[i]) * c + i % c] += w * dout[i];
            }
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// point-set scans

namespace {
inline double min_dist_one(const double* s, const double* dst, std::size_t nd) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nd; ++j) {
        const double dx = s[0] - dst[3 * j];
        const double dy = s[1] - dst[3 * j + 1];
        const double dz = s[2] - dst[3 * j + 2];
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < best) best = d2;
    }
    return std::sqrt(best);
}

inline double knn_mean_one(const double* pts, std::size_t n, std::size_t k, std::size_t i,
                           std::vector<double>& heap) {
    // keep the k smallest squared distances in a max-heap
    heap.clear();
    const double* p = pts + 3 * i;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = p[0] - pts[3 * j];
        const double dy = p[1] - pts[3 * j + 1];
        const double dz = p[2] - pts[3 * j + 2];
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (heap.size() < k) {
            heap.push_back(d2);
            std::push_heap(heap.begin(), heap.end());
        } else if (d2 < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = d2;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    // accumulate in ascending order so the sum is independent of heap layout
    std::sort(heap.begin(), heap.end());
    double acc = 0.0;
    for (double d2 : heap) acc += std::sqrt(d2);
    return acc / static_cast<double>(heap.size());
}
}  // namespace

void min_dist_scan_serial(const double* src, std::size_t ns,
                          const double* dst, std::size_t nd, double* out) {
    for (std::size_t i = 0; i < ns; ++i) out[i] = min_dist_one(src + 3 * i, dst, nd);
}

void min_dist_scan_parallel(const double* src, std::size_t ns,
                            const double* dst, std::size_t nd, double* out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ns); ++i)
        out[i] = min_dist_one(src + 3 * i, dst, nd);
}

void min_dist_scan(const double* src, std::size_t ns,
                   const double* dst, std::size_t nd, double* out) {
    if (parallel_enabled() && ns > 1 && ns * nd >= kScanParCutoff)
        min_dist_scan_parallel(src, ns, dst, nd, out);
    else
        min_dist_scan_serial(src, ns, dst, nd, out);
}

void knn_mean_dist_serial(const double* pts, std::size_t n, std::size_t k, double* out) {
    if (n <= k) throw precondition_error("knn_mean_dist: need n > k");
    std::vector<double> heap;
    heap.reserve(k);
    for (std::size_t i = 0; i < n; ++i) out[i] = knn_mean_one(pts, n, k, i, heap);
}

void knn_mean_dist_parallel(const double* pts, std::size_t n, std::size_t k, double* out) {
    if (n <= k) throw precondition_error("knn_mean_dist: need n > k");
#pragma omp parallel
    {
        std::vector<double> heap;
        heap.reserve(k);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            out[i] = knn_mean_one(pts, n, k, static_cast<std::size_t>(i), heap);
    }
}

void knn_mean_dist(const double* pts, std::size_t n, std::size_t k, double* out) {
    if (parallel_enabled() && n * n >= kScanParCutoff)
        knn_mean_dist_parallel(pts, n, k, out);
    else
        knn_mean_dist_serial(pts, n, k, out);
}

}  // namespace kernels
}  // namespace pcx
