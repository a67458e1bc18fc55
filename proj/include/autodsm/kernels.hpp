#pragma once

// Data-parallel inner loops of the retrieval path. Every kernel has a serial
// reference twin with identical per-element arithmetic; tests require the two
// to agree bit for bit and the benchmark compares their throughput.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace autodsm::kernels {

/// Sequential dot product. Both kernels below use this so scores do not
/// depend on the thread count.
double dot(std::span<const double> a, std::span<const double> b);

double norm(std::span<const double> a);

/// out[r] = dot(row r, query) / (row_norms[r] * query_norm), rows stored
/// row-major in `matrix` with `dim` columns.
void cosine_scores_serial(std::span<const double> matrix, std::size_t dim,
                          std::span<const double> row_norms,
                          std::span<const double> query, std::span<double> out);

void cosine_scores_parallel(std::span<const double> matrix, std::size_t dim,
                            std::span<const double> row_norms,
                            std::span<const double> query, std::span<double> out);

/// Writes offline_embed(texts[i], dim) into row i of `out` (texts.size() x dim).
void offline_embed_rows_serial(std::span<const std::string> texts, std::size_t dim,
                               std::span<double> out);

void offline_embed_rows_parallel(std::span<const std::string> texts, std::size_t dim,
                                 std::span<double> out);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace autodsm::kernels
