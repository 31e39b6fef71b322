#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pcx {

// Symmetric reduction over the point axis.
enum class PoolingKind { Max, Average, Median, Sum };

const char* to_string(PoolingKind kind);
PoolingKind pooling_from_string(const std::string& name);
inline constexpr PoolingKind kAllPoolings[] = {PoolingKind::Max, PoolingKind::Average,
                                               PoolingKind::Median, PoolingKind::Sum};

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant that partitions work by output element, so both produce
// bit-identical results for any thread count; tests assert exact equality
// and bench/ compares their throughput. The unsuffixed entry points dispatch
// on problem size and the global parallel switch.
namespace kernels {

bool parallel_enabled();
void set_parallel(bool on);

// c[m,n] = a[m,k] @ b[k,n]
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// c[m,n] = a[m,k] @ b[n,k]^T
void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
void matmul_nt_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// c[k,n] = a[m,k]^T @ b[m,n]
void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
void matmul_tn_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// Grouped reduction over the point axis: x is [b*g, c] (g contiguous rows per
// group), out is [b, c]. aux records gradient routing for max/median.
struct PoolAux {
    std::vector<std::uint32_t> row1;  // winning absolute row per (group, channel)
    std::vector<std::uint32_t> row2;  // second middle row (median, even g)
    bool even_median = false;
};

void pool_rows_serial(const double* x, std::size_t b, std::size_t g, std::size_t c,
                      PoolingKind kind, double* out, PoolAux* aux);
void pool_rows_parallel(const double* x, std::size_t b, std::size_t g, std::size_t c,
                        PoolingKind kind, double* out, PoolAux* aux);
void pool_rows(const double* x, std::size_t b, std::size_t g, std::size_t c,
               PoolingKind kind, double* out, PoolAux* aux);

// Scatters dout [b, c] back onto dx [b*g, c] (accumulating) per pooling rule:
// max -> winning row, average -> 1/g each, sum -> 1 each, median -> middle
// row(s) with weight 1 or 0.5/0.5.
void pool_rows_backward(const double* dout, std::size_t b, std::size_t g, std::size_t c,
                        PoolingKind kind, const PoolAux& aux, double* dx);

// out[i] = min_j ||src_i - dst_j||_2 over 3-D points (dst scanned in index order)
void min_dist_scan_serial(const double* src, std::size_t ns,
                          const double* dst, std::size_t nd, double* out);
void min_dist_scan_parallel(const double* src, std::size_t ns,
                            const double* dst, std::size_t nd, double* out);
void min_dist_scan(const double* src, std::size_t ns,
                   const double* dst, std::size_t nd, double* out);

// out[i] = mean distance from point i to its k nearest neighbours (3-D points)
void knn_mean_dist_serial(const double* pts, std::size_t n, std::size_t k, double* out);
void knn_mean_dist_parallel(const double* pts, std::size_t n, std::size_t k, double* out);
void knn_mean_dist(const double* pts, std::size_t n, std::size_t k, double* out);

}  // namespace kernels
}  // namespace pcx
