#include "autodsm/dsm.hpp"

#include <fstream>
#include <set>
#include <spdlog/spdlog.h>
#include <sstream>

namespace autodsm::dsm {
namespace {

std::string cell_ref(std::size_t row, std::size_t col) {
  return "(row " + std::to_string(row) + ", col " + std::to_string(col) + ")";
}

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

// RFC 4180 records. A trailing newline does not start a new record.
std::vector<std::vector<std::string>> parse_records(std::string_view in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < in.size() && in[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) {
          throw DsmError("CSV line " + std::to_string(line) + ": stray quote in unquoted field");
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < in.size() && in[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DsmError("CSV ends inside a quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

char to_char(LinkLabel label) {
  switch (label) {
    case LinkLabel::Link: return '1';
    case LinkLabel::NoLink: return '0';
    case LinkLabel::Unknown: return '5';
  }
  return '5';
}

std::optional<LinkLabel> label_from_cell(std::string_view cell) {
  if (cell == "1") return LinkLabel::Link;
  if (cell == "0") return LinkLabel::NoLink;
  if (cell == "5") return LinkLabel::Unknown;
  return std::nullopt;
}

std::string_view to_string(LinkLabel label) {
  switch (label) {
    case LinkLabel::Link: return "Link";
    case LinkLabel::NoLink: return "NoLink";
    case LinkLabel::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Dsm::Dsm(std::vector<std::string> headings) : headings_(std::move(headings)) {
  if (headings_.empty()) throw DsmError("a DSM needs at least one heading");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < headings_.size(); ++i) {
    auto t = trim(headings_[i]);
    if (t.empty()) throw DsmError("heading " + std::to_string(i) + " is empty");
    if (!seen.insert(t).second) throw DsmError("duplicate heading: " + t);
  }
  const auto n = headings_.size();
  entries_.assign(n * n, LinkLabel::Unknown);
  for (std::size_t i = 0; i < n; ++i) entries_[i * n + i] = LinkLabel::Link;
}

void Dsm::check_index(std::size_t row, std::size_t col) const {
  if (row >= size() || col >= size()) {
    throw DsmError("entry " + cell_ref(row, col) + " out of range for a " +
                   std::to_string(size()) + "x" + std::to_string(size()) + " DSM");
  }
}

LinkLabel Dsm::get(std::size_t row, std::size_t col) const {
  check_index(row, col);
  return entries_[row * size() + col];
}

void Dsm::set(std::size_t row, std::size_t col, LinkLabel label) {
  check_index(row, col);
  if (row == col) throw DsmError("diagonal entry " + cell_ref(row, col) + " is fixed to 1");
  entries_[row * size() + col] = label;
}

Dsm Dsm::transposed() const {
  Dsm t(headings_);
  const auto n = size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t.entries_[j * n + i] = entries_[i * n + j];
  t.provenance_ = provenance_;
  return t;
}

std::string write_csv(const Dsm& dsm) {
  const auto n = dsm.size();
  std::string out;
  for (const auto& h : dsm.headings()) {
    out.push_back(',');
    append_field(out, h);
  }
  out.push_back('\n');
  for (std::size_t i = 0; i < n; ++i) {
    append_field(out, dsm.headings()[i]);
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back(',');
      out.push_back(to_char(dsm.entries()[i * n + j]));
    }
    out.push_back('\n');
  }
  return out;
}

Dsm read_csv(std::string_view bytes) {
  auto records = parse_records(bytes);
  while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) {
    records.pop_back();
  }
  if (records.empty()) throw DsmError("CSV is empty");
  const auto& header = records.front();
  if (header.size() < 2) throw DsmError("CSV header has no column headings");
  std::vector<std::string> headings(header.begin() + 1, header.end());
  const auto n = headings.size();
  const auto body_rows = records.size() - 1;
  if (body_rows != n) {
    throw DsmError("DSM is not square: " + std::to_string(body_rows) + " rows x " +
                   std::to_string(n) + " columns");
  }

  Dsm dsm(headings);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    if (rec.size() != n + 1) {
      throw DsmError("DSM is not square: row " + std::to_string(i) + " has " +
                     std::to_string(rec.size() - 1) + " cells, expected " + std::to_string(n));
    }
    if (trim(rec[0]) != trim(headings[i])) {
      throw DsmError("row heading " + std::to_string(i) + " '" + rec[0] +
                     "' does not match column heading '" + headings[i] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto cell = trim(rec[j + 1]);
      if (i == j) {
        if (cell != "1") {
          spdlog::warn("diagonal cell {} is '{}'; treating it as 1", cell_ref(i, j), cell);
        }
        continue;
      }
      const auto label = label_from_cell(cell);
      if (!label) {
        throw DsmError("unknown cell token '" + cell + "' at " + cell_ref(i, j));
      }
      dsm.set(i, j, *label);
    }
  }
  return dsm;
}

Dsm read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open DSM file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return read_csv(ss.str());
  } catch (const DsmError& e) {
    throw DsmError(path + ": " + e.what());
  }
}

void write_csv_file(const Dsm& dsm, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write DSM file: " + path);
  out << write_csv(dsm);
  if (!out) throw IoError("failed writing DSM file: " + path);
}

}  // namespace autodsm::dsm
