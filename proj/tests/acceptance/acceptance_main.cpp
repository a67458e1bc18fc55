// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <spdlog/spdlog.h>
#include <string>

#include "autodsm/cli.hpp"
#include "autodsm/corpus.hpp"
#include "autodsm/dsm.hpp"
#include "autodsm/metrics.hpp"
#include "autodsm/oracle.hpp"
#include "autodsm/qa.hpp"
#include "autodsm/retrieval.hpp"
#include "autodsm/utf8.hpp"
#include "oracles.hpp"
#include "rule_backend.hpp"
#include "count_fixtures.hpp"

namespace fs = std::filesystem;
using namespace autodsm;
using dsm::Dsm;
using dsm::LinkLabel;

namespace {

const fs::path kData = AUTODSM_TEST_DATA_DIR;

// Thrown by check() with the first failed expectation.
struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

template <class A, class B>
void check_eq(const A& got, const B& want, const std::string& what) {
  if (!(got == want)) {
    std::ostringstream s;
    s << what << ": got " << got << ", want " << want;
    throw Failure{s.str()};
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "autodsm_acceptance";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

// ---- criteria ----

void count_profiles() {
  struct Row {
    const char* label;
    std::size_t n, links, mutual, unknowns;
    const char* correctness;
    const char* completeness;
  };
  const Row rows[] = {{"n=11", 11, 11, 3, 12, "54.5", "89.1"},
                      {"n=13", 13, 46, 19, 1, "82.6", "99.4"},
                      {"n=4", 4, 5, 1, 0, "40.0", "100.0"}};
  for (const auto& row : rows) {
    const auto r = metrics::report(testing::make_count_fixture(row.n, row.links, row.mutual, row.unknowns));
    check_eq(r.links_found, row.links, std::string(row.label) + " links");
    check_eq(metrics::format(r.correctness_pct), std::string(row.correctness), std::string(row.label) + " correctness");
    check_eq(metrics::format(r.completeness_pct), std::string(row.completeness), std::string(row.label) + " completeness");
  }
}

void reference_comparison() {
  const auto fx = testing::comparison_fixture_22();
  const auto r = metrics::report(fx.generated, &fx.reference);
  check_eq(r.links_found, 57u, "links");
  check_eq(r.symmetrical_links, 36u, "symmetrical links");
  check_eq(metrics::format(r.correctness_pct), std::string("63.2"), "correctness");
  check_eq(r.useful_entries, 430u, "useful entries");
  check_eq(metrics::format(r.completeness_pct), std::string("93.1"), "completeness");
  check_eq(*r.identical_entries, 357u, "identical entries");
  check_eq(metrics::format(r.identical_pct), std::string("77.3"), "identical");
  for (std::size_t i = 0; i < 22; ++i)
    for (std::size_t j = 0; j < 22; ++j)
      check(fx.reference.get(i, j) != LinkLabel::Unknown, "reference is binary");

  const auto self = metrics::report(fx.reference, &fx.reference);
  check_eq(self.links_found, 64u, "reference links");
  check_eq(self.symmetrical_links, 64u, "reference symmetrical links");
  // Every denominator is non-zero here, so nothing renders as undefined.
  check_eq(metrics::format(self.correctness_pct), std::string("100.0"), "reference correctness");
  check_eq(metrics::format(self.completeness_pct), std::string("100.0"), "reference completeness");
  check_eq(metrics::format(self.identical_pct), std::string("100.0"), "reference identical");
  check(metrics::format_table(self).find("---") == std::string::npos, "reference table has no ---");
}

void entries_identity() {
  const std::pair<std::size_t, std::size_t> cases[] = {{4, 12}, {11, 110}, {13, 156}, {15, 210}, {22, 462}};
  for (auto [n, want] : cases) {
    check_eq(metrics::entries_to_fill(n), want, "n=" + std::to_string(n));
    check_eq(metrics::report(Dsm(testing::numbered_headings(n))).entries_to_fill, want, "report n=" + std::to_string(n));
  }
}

struct ScriptedRun {
  std::string csv;
  std::size_t calls;
};

ScriptedRun scripted_engine_run(std::size_t max_in_flight, const std::string& name) {
  cli::CliConfig cfg;
  cfg.inputs = {kData / "engine_corpus.txt"};
  cfg.product = "diesel engine";
  cfg.linkage_type = "mechanically";
  cfg.backend = "scripted";
  cfg.embedder = "offline";
  cfg.max_in_flight = max_in_flight;
  cfg.output = scratch(name);
  auto counting = std::make_shared<oracle::CountingBackend>(
      std::make_shared<oracle::ScriptedBackend>(oracle::ScriptedBackend::load(kData / "engine_script.txt")));
  std::ostringstream out, err;
  const int code = cli::run_generate(cfg, out, err, counting);
  check_eq(code, 0, "generate exit code (" + err.str() + ")");
  return {slurp(cfg.output), counting->calls()};
}

void scripted_golden() {
  check(slurp(kData / "engine_corpus.txt").size() >= 8000, "fixture corpus is about 10 KB");
  const auto r = scripted_engine_run(4, "golden.csv");
  check_eq(r.calls, 13u, "completion calls");
  check(r.csv == slurp(kData / "engine_golden.csv"), "CSV differs from golden file:\n" + r.csv);
}

void determinism() {
  const auto a = scripted_engine_run(1, "det_a.csv");
  const auto b = scripted_engine_run(8, "det_b.csv");
  check(a.csv == b.csv, "outputs differ between max_in_flight 1 and 8");
  check_eq(b.calls, 13u, "completion calls at max_in_flight 8");
}

void splitter_property() {
  std::mt19937_64 rng(20240601);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t size = std::uniform_int_distribution<std::size_t>(1, 80)(rng);
    const std::size_t overlap = std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 500)(rng);
    const auto text = testing::random_text(rng, len);
    const auto u32 = utf8::decode(text);
    const auto chunks = corpus::split(corpus::Document{"d", text}, corpus::SplitConfig{size, overlap});
    const auto ref = testing::reference_spans(len, size, overlap);
    const std::string ctx = " (len=" + std::to_string(len) + " size=" + std::to_string(size) +
                            " overlap=" + std::to_string(overlap) + ")";
    check_eq(chunks.size(), ref.size(), "chunk count" + ctx);
    std::vector<bool> covered(len, false);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto body = utf8::decode(chunks[i].text);
      check_eq(chunks[i].start_offset, ref[i].first, "start" + ctx);
      check_eq(chunks[i].start_offset + body.size(), ref[i].second, "end" + ctx);
      check(body == u32.substr(chunks[i].start_offset, body.size()), "chunk text is a slice" + ctx);
      for (std::size_t k = ref[i].first; k < ref[i].second; ++k) covered[k] = true;
      if (i + 1 < chunks.size()) {
        check(body.size() == size, "non-final chunk is full" + ctx);
        check(body.substr(size - overlap) == utf8::decode(chunks[i + 1].text).substr(0, overlap), "overlap law" + ctx);
      }
    }
    for (bool c : covered) check(c, "coverage" + ctx);
  }
}

void retrieval_oracle() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::map<std::string, retrieval::EmbeddingVector> table;
    std::vector<corpus::Chunk> chunks;
    std::vector<retrieval::EmbeddingVector> vs;
    for (std::size_t i = 0; i < n; ++i) {
      retrieval::EmbeddingVector v(16);
      if (i > 0 && rng() % 3 == 0) {
        v = vs[rng() % vs.size()];  // forced tie
      } else {
        for (auto& x : v) x = g(rng);
      }
      const auto text = "t" + std::to_string(i);
      table[text] = v;
      vs.push_back(v);
      chunks.push_back({std::string(1, static_cast<char>('a' + rng() % 3)), rng() % 1000 * 64 + i, text, 0});
    }
    retrieval::EmbeddingVector q(16);
    for (auto& x : q) x = g(rng);
    table["query"] = q;
    testing::TableEmbedder e(16, table);
    const auto index = retrieval::build_index(chunks, e);
    const auto got = retrieval::top_k(index, "query", k, e);
    const auto want = testing::brute_force_rank(vs, chunks, q, k);
    check_eq(got.size(), want.size(), "result size, iteration " + std::to_string(iter));
    for (std::size_t i = 0; i < got.size(); ++i) {
      check(got[i] == chunks[want[i]], "rank " + std::to_string(i) + ", iteration " + std::to_string(iter));
    }
  }
}

void csv_round_trip() {
  std::mt19937_64 rng(4242);
  const std::vector<std::string> pieces{"Shelves, or drawers", "Door \"seal\"", "Compressor", "a,\"b\",c",
                                        "Fan", "\"", ",", "Lamp"};
  static constexpr LinkLabel kLabels[] = {LinkLabel::Link, LinkLabel::NoLink, LinkLabel::Unknown};
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<std::string> h;
    for (std::size_t i = 0; i < n; ++i) h.push_back(pieces[rng() % pieces.size()] + " " + std::to_string(i));
    Dsm d(h);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) d.set(i, j, kLabels[rng() % 3]);
    check(dsm::read_csv(dsm::write_csv(d)) == d, "round trip, iteration " + std::to_string(iter));
  }
}

void classifier_table() {
  const std::pair<const char*, LinkLabel> cases[] = {
      {"Yes", LinkLabel::Link},          {"yes.", LinkLabel::Link},
      {"Yes, they are", LinkLabel::Link}, {"No", LinkLabel::NoLink},
      {"NO.", LinkLabel::NoLink},        {"I don't know", LinkLabel::Unknown},
      {"I do not know", LinkLabel::Unknown}, {"As an AI model\xE2\x80\xA6", LinkLabel::Unknown},
      {"", LinkLabel::Unknown}};
  for (const auto& [answer, want] : cases) {
    const auto got = qa::classify_link_answer(answer);
    check(got == want, std::string("answer '") + answer + "' -> " + std::string(dsm::to_string(got)));
  }
}

void headings_override() {
  const auto file = kData / "expert_headings.txt";
  std::vector<std::string> lines;
  {
    std::ifstream in(file);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  check_eq(lines.size(), 22u, "override lines");

  cli::CliConfig cfg;
  cfg.inputs = {kData / "engine_corpus.txt"};
  cfg.product = "refrigerator";
  cfg.backend = "scripted";
  cfg.embedder = "offline";
  cfg.headings_override = file;
  cfg.output = scratch("override.csv");
  auto backend = std::make_shared<testing::RuleBackend>([](const std::string& p) {
    return testing::is_elements_prompt(p) ? std::string("[\"Wrong\"]") : std::string("No");
  });
  std::ostringstream out, err;
  check_eq(cli::run_generate(cfg, out, err, backend), 0, "generate exit code (" + err.str() + ")");
  std::size_t element_calls = 0;
  for (const auto& p : backend->prompts()) element_calls += testing::is_elements_prompt(p);
  check_eq(element_calls, 0u, "element-question calls");
  check_eq(backend->calls(), 22u * 21u, "pairwise calls");
  check(dsm::read_csv_file(cfg.output).headings() == lines, "output headings equal the file lines");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<void()> body;
  };
  const Criterion criteria[] = {
      {"AC1 metric arithmetic, count profiles", 1, count_profiles},
      {"AC2 metric arithmetic, 22-component reference comparison", 1, reference_comparison},
      {"AC3 entries-to-fill identity", 1, entries_identity},
      {"AC4 end-to-end scripted run vs golden", 5, scripted_golden},
      {"AC5 schedule independence", 10, determinism},
      {"AC6 splitter property suite", 5, splitter_property},
      {"AC7 retrieval oracle equivalence", 5, retrieval_oracle},
      {"AC8 CSV round-trip property", 5, csv_round_trip},
      {"AC9 answer-classifier table", 1, classifier_table},
      {"AC10 headings-override protocol", 5, headings_override},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body();
    } catch (const Failure& f) {
      detail = f.what;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (detail.empty() && secs >= c.limit_seconds) {
      detail = "took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_seconds) + " s";
    }
    const bool ok = detail.empty();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << " (" << static_cast<long>(secs * 1000) << " ms)";
    if (!ok) std::cout << ": " << detail;
    std::cout << '\n';
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
