#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autodsm/error.hpp"

namespace autodsm::dsm {

/// Entry label. The underlying values are the CSV cell encoding.
enum class LinkLabel : std::uint8_t { NoLink = 0, Link = 1, Unknown = 5 };

char to_char(LinkLabel label);
std::optional<LinkLabel> label_from_cell(std::string_view cell);
std::string_view to_string(LinkLabel label);

class DsmError : public Error {
 public:
  using Error::Error;
};

/// Square matrix of LinkLabel over ordered, unique headings. The diagonal is
/// always Link; off-diagonal entries start out Unknown.
class Dsm {
 public:
  /// Throws DsmError for an empty list, an empty (after trimming) heading, or
  /// headings that coincide after trimming.
  explicit Dsm(std::vector<std::string> headings);

  std::size_t size() const { return headings_.size(); }
  const std::vector<std::string>& headings() const { return headings_; }

  LinkLabel get(std::size_t row, std::size_t col) const;
  /// Rejects out-of-range indices and diagonal writes.
  void set(std::size_t row, std::size_t col, LinkLabel label);

  /// Row-major copy of all entries.
  const std::vector<LinkLabel>& entries() const { return entries_; }

  std::map<std::string, std::string>& provenance() { return provenance_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }

  Dsm transposed() const;

  /// Headings and entries; provenance is metadata and does not take part.
  friend bool operator==(const Dsm& a, const Dsm& b) {
    return a.headings_ == b.headings_ && a.entries_ == b.entries_;
  }

 private:
  void check_index(std::size_t row, std::size_t col) const;

  std::vector<std::string> headings_;
  std::vector<LinkLabel> entries_;
  std::map<std::string, std::string> provenance_;
};

/// Canonical CSV: header row is an empty cell then the headings; each body
/// row is the heading then N cells of 1/0/5. Comma separated, "\n" line
/// endings, RFC 4180 quoting for headings that need it.
std::string write_csv(const Dsm& dsm);

/// Inverse of write_csv. Accepts "\r\n" line endings and empty or non-"1"
/// diagonal cells (coerced to Link with a warning). Throws DsmError for
/// non-square input, mismatched row headings, or unknown cell tokens.
Dsm read_csv(std::string_view bytes);

Dsm read_csv_file(const std::string& path);
void write_csv_file(const Dsm& dsm, const std::string& path);

std::string trim(std::string_view s);

}  // namespace autodsm::dsm
