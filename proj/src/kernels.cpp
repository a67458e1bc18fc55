#include "autodsm/kernels.hpp"

#include <cmath>

#include "autodsm/retrieval.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace autodsm::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void cosine_scores_serial(std::span<const double> matrix, std::size_t dim,
                          std::span<const double> row_norms,
                          std::span<const double> query, std::span<double> out) {
  const double qn = norm(query);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = dot(matrix.subspan(r * dim, dim), query) / (row_norms[r] * qn);
  }
}

void cosine_scores_parallel(std::span<const double> matrix, std::size_t dim,
                            std::span<const double> row_norms,
                            std::span<const double> query, std::span<double> out) {
  const double qn = norm(query);
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    out[row] = dot(matrix.subspan(row * dim, dim), query) / (row_norms[row] * qn);
  }
}

void offline_embed_rows_serial(std::span<const std::string> texts, std::size_t dim,
                               std::span<double> out) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    retrieval::offline_embed_into(texts[i], out.subspan(i * dim, dim));
  }
}

void offline_embed_rows_parallel(std::span<const std::string> texts, std::size_t dim,
                                 std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    retrieval::offline_embed_into(texts[row], out.subspan(row * dim, dim));
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace autodsm::kernels
