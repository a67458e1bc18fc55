#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "autodsm/dsm.hpp"

namespace autodsm::metrics {

/// A percentage held in exact tenths, rounded half away from zero.
struct Percent {
  std::int64_t tenths = 0;

  /// 100 * numerator / denominator to one decimal; nullopt when the
  /// denominator is zero.
  static std::optional<Percent> of(std::size_t numerator, std::size_t denominator);

  double value() const { return static_cast<double>(tenths) / 10.0; }
  std::string str() const;  // "54.5"
  friend bool operator==(Percent, Percent) = default;
};

/// "54.5", or "---" when undefined.
std::string format(const std::optional<Percent>& p);

struct Correctness {
  std::size_t symmetrical_links = 0;
  std::optional<Percent> pct;
};

struct Completeness {
  std::size_t useful_entries = 0;
  std::optional<Percent> pct;
};

struct Agreement {
  std::size_t identical_entries = 0;
  std::optional<Percent> pct;
};

struct MetricsReport {
  std::size_t n = 0;
  std::size_t entries_to_fill = 0;
  std::size_t links_found = 0;
  std::size_t symmetrical_links = 0;
  std::optional<Percent> correctness_pct;
  std::size_t useful_entries = 0;
  std::optional<Percent> completeness_pct;
  std::optional<std::size_t> identical_entries;
  std::optional<Percent> identical_pct;
};

/// n^2 - n, the number of off-diagonal cells.
std::size_t entries_to_fill(std::size_t n);

/// Off-diagonal Link entries.
std::size_t count_links(const dsm::Dsm& d);

/// Directed Link entries whose transpose is also Link, as a share of all links.
Correctness correctness(const dsm::Dsm& d);

/// Off-diagonal entries labelled Link or NoLink, as a share of n^2 - n.
Completeness completeness(const dsm::Dsm& d);

/// Off-diagonal positions with equal labels. Headings must match (after
/// trimming) position by position; throws DsmError naming the first
/// differing position otherwise.
Agreement compare(const dsm::Dsm& generated, const dsm::Dsm& reference);

MetricsReport report(const dsm::Dsm& d, const dsm::Dsm* reference = nullptr);

/// Aligned, human-readable table.
std::string format_table(const MetricsReport& r);

/// One `key: value` line per field; undefined percentages are "---", and
/// comparison fields are omitted without a reference.
std::string format_key_values(const MetricsReport& r);

}  // namespace autodsm::metrics
