// Serial vs OpenMP throughput for the retrieval kernels.
//
//   bench_kernels [rows] [dim] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "autodsm/kernels.hpp"

namespace {

template <typename F>
double best_ms(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

std::string random_text(std::mt19937_64& rng, std::size_t len) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz     ,.";
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string s(len, ' ');
  for (auto& c : s) c = kAlphabet[pick(rng)];
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t rows = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const std::size_t dim = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 1536;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 5;

  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss;
  std::vector<double> matrix(rows * dim);
  for (auto& v : matrix) v = gauss(rng);
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    norms[r] = autodsm::kernels::norm(std::span<const double>(matrix).subspan(r * dim, dim));
  }
  std::vector<double> query(dim);
  for (auto& v : query) v = gauss(rng);

  std::vector<double> serial(rows), parallel(rows);
  const double t_serial = best_ms(repeats, [&] {
    autodsm::kernels::cosine_scores_serial(matrix, dim, norms, query, serial);
  });
  const double t_parallel = best_ms(repeats, [&] {
    autodsm::kernels::cosine_scores_parallel(matrix, dim, norms, query, parallel);
  });
  const bool scores_equal = serial == parallel;

  const std::size_t docs = std::max<std::size_t>(rows / 10, 1);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < docs; ++i) texts.push_back(random_text(rng, 1000));
  const std::size_t edim = 256;
  std::vector<double> e_serial(docs * edim), e_parallel(docs * edim);
  const double t_embed_serial = best_ms(repeats, [&] {
    autodsm::kernels::offline_embed_rows_serial(texts, edim, e_serial);
  });
  const double t_embed_parallel = best_ms(repeats, [&] {
    autodsm::kernels::offline_embed_rows_parallel(texts, edim, e_parallel);
  });
  const bool embed_equal = e_serial == e_parallel;

  std::printf("threads: %d\n", autodsm::kernels::max_threads());
  std::printf("%-28s %12s %12s %9s %s\n", "kernel", "serial ms", "openmp ms", "speedup", "equal");
  std::printf("%-28s %12.3f %12.3f %9.2f %s\n", "cosine_scores", t_serial, t_parallel,
              t_serial / t_parallel, scores_equal ? "yes" : "NO");
  std::printf("%-28s %12.3f %12.3f %9.2f %s\n", "offline_embed_rows", t_embed_serial,
              t_embed_parallel, t_embed_serial / t_embed_parallel, embed_equal ? "yes" : "NO");
  return scores_equal && embed_equal ? 0 : 1;
}
