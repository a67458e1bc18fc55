#include "autodsm/metrics.hpp"

#include <fmt/format.h>

namespace autodsm::metrics {

using dsm::LinkLabel;

std::optional<Percent> Percent::of(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return std::nullopt;
  // round(1000 * num / den) with halves going up; all operands are non-negative.
  const auto num = static_cast<std::uint64_t>(numerator);
  const auto den = static_cast<std::uint64_t>(denominator);
  const auto tenths = (2000 * num + den) / (2 * den);
  return Percent{static_cast<std::int64_t>(tenths)};
}

std::string Percent::str() const {
  return fmt::format("{}.{}", tenths / 10, tenths % 10);
}

std::string format(const std::optional<Percent>& p) { return p ? p->str() : "---"; }

std::size_t entries_to_fill(std::size_t n) { return n * n - n; }

std::size_t count_links(const dsm::Dsm& d) {
  std::size_t links = 0;
  const auto n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d.get(i, j) == LinkLabel::Link) ++links;
  return links;
}

Correctness correctness(const dsm::Dsm& d) {
  std::size_t sym = 0;
  const auto n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d.get(i, j) == LinkLabel::Link && d.get(j, i) == LinkLabel::Link) ++sym;
  return {sym, Percent::of(sym, count_links(d))};
}

Completeness completeness(const dsm::Dsm& d) {
  std::size_t useful = 0;
  const auto n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d.get(i, j) != LinkLabel::Unknown) ++useful;
  return {useful, Percent::of(useful, entries_to_fill(n))};
}

Agreement compare(const dsm::Dsm& generated, const dsm::Dsm& reference) {
  if (generated.size() != reference.size()) {
    throw dsm::DsmError(fmt::format("size mismatch: generated DSM has {} headings, reference has {}",
                                    generated.size(), reference.size()));
  }
  const auto n = reference.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = dsm::trim(generated.headings()[i]);
    const auto r = dsm::trim(reference.headings()[i]);
    if (g != r) {
      throw dsm::DsmError(fmt::format(
          "heading mismatch at position {}: generated '{}' vs reference '{}'", i, g, r));
    }
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && generated.get(i, j) == reference.get(i, j)) ++same;
  return {same, Percent::of(same, entries_to_fill(n))};
}

MetricsReport report(const dsm::Dsm& d, const dsm::Dsm* reference) {
  MetricsReport r;
  r.n = d.size();
  r.entries_to_fill = entries_to_fill(r.n);
  r.links_found = count_links(d);
  const auto c = correctness(d);
  r.symmetrical_links = c.symmetrical_links;
  r.correctness_pct = c.pct;
  const auto k = completeness(d);
  r.useful_entries = k.useful_entries;
  r.completeness_pct = k.pct;
  if (reference != nullptr) {
    const auto a = compare(d, *reference);
    r.identical_entries = a.identical_entries;
    r.identical_pct = a.pct;
  }
  return r;
}

std::string format_table(const MetricsReport& r) {
  std::string out;
  auto row = [&](std::string_view label, std::string value) {
    out += fmt::format("{:<42}{:>16}\n", label, value);
  };
  auto with_pct = [](std::size_t count, const std::optional<Percent>& p) {
    return fmt::format("{} ({}{})", count, format(p), p ? "%" : "");
  };
  row("Components found", std::to_string(r.n));
  row("DSM entries to be filled", std::to_string(r.entries_to_fill));
  row("Links found", std::to_string(r.links_found));
  row("Symmetrical links found (Correctness)", with_pct(r.symmetrical_links, r.correctness_pct));
  row("Entries with a useful label (Completeness)", with_pct(r.useful_entries, r.completeness_pct));
  if (r.identical_entries) {
    row("Identical DSM entries as reference", with_pct(*r.identical_entries, r.identical_pct));
  }
  return out;
}

std::string format_key_values(const MetricsReport& r) {
  std::string out;
  out += fmt::format("components: {}\n", r.n);
  out += fmt::format("entries_to_fill: {}\n", r.entries_to_fill);
  out += fmt::format("links_found: {}\n", r.links_found);
  out += fmt::format("symmetrical_links: {}\n", r.symmetrical_links);
  out += fmt::format("correctness_pct: {}\n", format(r.correctness_pct));
  out += fmt::format("useful_entries: {}\n", r.useful_entries);
  out += fmt::format("completeness_pct: {}\n", format(r.completeness_pct));
  if (r.identical_entries) {
    out += fmt::format("identical_entries: {}\n", *r.identical_entries);
    out += fmt::format("identical_pct: {}\n", format(r.identical_pct));
  }
  return out;
}

}  // namespace autodsm::metrics
