#include "autodsm/qa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <spdlog/spdlog.h>
#include <thread>

#include "autodsm/utf8.hpp"

namespace autodsm::qa {
namespace {

using dsm::LinkLabel;

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Lowercased answer without surrounding whitespace, emphasis, quotes or
// trailing punctuation. Curly apostrophes become ASCII.
std::string normalize_answer(std::string_view answer) {
  std::string s(answer);
  replace_all(s, "\xE2\x80\x99", "'");  // U+2019
  replace_all(s, "\xE2\x80\xA6", "");   // U+2026 ellipsis
  static constexpr std::string_view kEdge = " \t\r\n*_\"`";
  static constexpr std::string_view kTrailing = " \t\r\n*_\"`.,!?;:";
  const auto b = s.find_first_not_of(kEdge);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(kTrailing);
  if (e == std::string::npos || e < b) return {};
  s = s.substr(b, e - b + 1);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_dont_know(std::string_view normalized) {
  return normalized.starts_with("i don't know") || normalized.starts_with("i do not know") ||
         normalized.starts_with("i dont know");
}

std::string_view first_word(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && std::isalpha(static_cast<unsigned char>(s[n]))) ++n;
  return s.substr(0, n);
}

// "no" followed by one of these is a statement about missing knowledge, not
// a negative answer.
constexpr std::string_view kNoKnowledge[] = {"no idea",    "no information", "no way",
                                             "no context", "no mention",     "no data",
                                             "no answer",  "no clear"};

struct ParsedList {
  std::vector<std::string> items;
  bool quoted = false;
  std::size_t end = 0;
};

// Parses "[item, 'item', \"item\"]" starting at the '[' at `open`.
std::optional<ParsedList> parse_bracketed(std::string_view s, std::size_t open) {
  ParsedList out;
  std::size_t i = open + 1;
  auto skip_ws = [&] {
    while (i < s.size() && is_space(s[i])) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= s.size()) return std::nullopt;
    if (s[i] == ']') break;
    std::string item;
    if (s[i] == '\'' || s[i] == '"') {
      const char quote = s[i++];
      bool closed = false;
      while (i < s.size()) {
        const char c = s[i++];
        if (c == '\\' && i < s.size()) {
          item.push_back(s[i++]);
        } else if (c == quote) {
          closed = true;
          break;
        } else {
          item.push_back(c);
        }
      }
      if (!closed) return std::nullopt;
      out.quoted = true;
    } else {
      while (i < s.size() && s[i] != ',' && s[i] != ']') {
        if (s[i] == '[' || s[i] == '\n') return std::nullopt;
        item.push_back(s[i++]);
      }
    }
    item = dsm::trim(item);
    if (!item.empty()) out.items.push_back(std::move(item));
    skip_ws();
    if (i >= s.size()) return std::nullopt;
    if (s[i] == ',') {
      ++i;
      continue;
    }
    if (s[i] != ']') return std::nullopt;
    break;
  }
  out.end = i;
  if (out.items.empty()) return std::nullopt;
  return out;
}

std::vector<std::string> parse_bullets(std::string_view answer) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos < answer.size()) {
    auto eol = answer.find('\n', pos);
    if (eol == std::string_view::npos) eol = answer.size();
    std::string line = dsm::trim(answer.substr(pos, eol - pos));
    pos = eol + 1;

    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    std::string item;
    if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
      item = line.substr(digits + 1);
    } else if (line.starts_with("- ") || line.starts_with("* ")) {
      item = line.substr(2);
    } else if (line.starts_with("\xE2\x80\xA2")) {  // bullet
      item = line.substr(3);
    } else {
      continue;
    }
    item = dsm::trim(item);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> unique_headings(std::vector<std::string> headings) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (auto& h : headings) {
    if (seen.insert(dsm::trim(h)).second) {
      out.push_back(std::move(h));
    } else {
      spdlog::warn("dropping repeated component '{}' from the elements answer", h);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Direct ? "direct" : "retrieval"; }

Mode parse_mode(std::string_view s) {
  if (s == "retrieval") return Mode::Retrieval;
  if (s == "direct") return Mode::Direct;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected retrieval or direct)");
}

std::string render_elements_prompt(const ProductQuery& q) {
  if (q.product.empty()) throw ConfigError("product must not be empty");
  std::string out(kElementsTemplate);
  replace_all(out, "{product}", q.product);
  return out;
}

std::string render_link_prompt(std::string_view a, std::string_view b,
                               std::string_view linkage_type) {
  if (a.empty() || b.empty()) throw ConfigError("element names must not be empty");
  if (a == b) throw ConfigError("the diagonal is never queried: '" + std::string(a) + "'");
  std::string out(kLinkTemplate);
  replace_all(out, "{Element A}", a);
  replace_all(out, "{Element B}", b);
  if (linkage_type.empty()) {
    replace_all(out, " {linkage-type}", "");
  } else {
    replace_all(out, "{linkage-type}", linkage_type);
  }
  return out;
}

std::string compose_stuffed_prompt(std::span<const std::string> chunk_texts,
                                   std::string_view question, std::size_t budget,
                                   std::size_t* dropped) {
  auto compose = [&](std::size_t count) {
    std::string out(kContextHeader);
    out += "\n\n";
    for (std::size_t i = 0; i < count; ++i) {
      out += chunk_texts[i];
      out += "\n\n";
    }
    out += question;
    return out;
  };
  std::size_t keep = chunk_texts.size();
  std::string prompt = compose(keep);
  while (keep > 0 && utf8::length(prompt) > budget) prompt = compose(--keep);
  if (dropped != nullptr) *dropped = chunk_texts.size() - keep;
  return prompt;
}

oracle::CompletionRequest build_request(std::string_view question, const RunConfig& cfg,
                                        const retrieval::VectorIndex* index,
                                        const retrieval::Embedder* embedder) {
  oracle::CompletionRequest req;
  req.model_id = cfg.model_id;
  req.temperature = cfg.temperature;
  if (cfg.mode == Mode::Direct) {
    req.user_text = std::string(question);
    return req;
  }
  if (index == nullptr || embedder == nullptr) {
    throw ConfigError("retrieval mode needs a vector index and an embedder");
  }
  if (index->empty()) throw retrieval::EmbeddingError("cannot retrieve from an empty index");
  std::vector<std::string> texts;
  for (const auto& c : retrieval::top_k(*index, question, cfg.top_k, *embedder)) {
    texts.push_back(c.text);
  }
  std::size_t dropped = 0;
  req.user_text = compose_stuffed_prompt(texts, question, cfg.context_budget, &dropped);
  if (dropped > 0) {
    spdlog::warn("context budget of {} characters exceeded; dropped {} of {} retrieved chunks",
                 cfg.context_budget, dropped, texts.size());
  }
  return req;
}

oracle::CompletionAnswer ask(std::string_view question, const RunConfig& cfg,
                             const retrieval::VectorIndex* index, oracle::ChatBackend& backend,
                             const retrieval::Embedder* embedder) {
  return backend.complete(build_request(question, cfg, index, embedder));
}

ElementList parse_element_list(std::string_view answer) {
  const auto normalized = normalize_answer(answer);
  if (normalized == "i don't know" || normalized == "i do not know" ||
      normalized == "i dont know") {
    return {{}, true};
  }

  std::optional<ParsedList> last_quoted;
  std::optional<ParsedList> last_bare;
  for (std::size_t pos = answer.find('['); pos != std::string_view::npos;) {
    if (auto parsed = parse_bracketed(answer, pos)) {
      const auto next = parsed->end + 1;
      (parsed->quoted ? last_quoted : last_bare) = std::move(parsed);
      pos = answer.find('[', next);
    } else {
      pos = answer.find('[', pos + 1);
    }
  }
  if (last_quoted) return {std::move(last_quoted->items), false};
  if (last_bare) return {std::move(last_bare->items), false};

  auto bullets = parse_bullets(answer);
  if (!bullets.empty()) return {std::move(bullets), false};
  throw ParseError("could not find a component list in the answer:\n" + std::string(answer));
}

Classification classify_link_answer_detailed(std::string_view answer) {
  const auto s = normalize_answer(answer);
  if (is_dont_know(s)) return {LinkLabel::Unknown, true};
  const auto word = first_word(s);
  if (word == "yes") return {LinkLabel::Link, true};
  if (word == "no") {
    const bool about_knowledge = std::any_of(std::begin(kNoKnowledge), std::end(kNoKnowledge),
                                             [&](std::string_view p) { return s.starts_with(p); });
    if (!about_knowledge) return {LinkLabel::NoLink, true};
  }
  return {LinkLabel::Unknown, false};
}

LinkLabel classify_link_answer(std::string_view answer) {
  return classify_link_answer_detailed(answer).label;
}

GenerationResult generate_dsm(const retrieval::VectorIndex* index, const ProductQuery& q,
                              const RunConfig& cfg, oracle::ChatBackend& backend,
                              const retrieval::Embedder* embedder,
                              const std::optional<std::vector<std::string>>& headings_override) {
  if (cfg.mode == Mode::Retrieval && (index == nullptr || embedder == nullptr)) {
    throw ConfigError("retrieval mode needs a vector index and an embedder");
  }
  if (cfg.max_in_flight == 0) throw ConfigError("max_in_flight must be positive");
  if (cfg.top_k == 0) throw ConfigError("top_k must be positive");

  std::optional<std::string> elements_answer;
  std::vector<std::string> headings;
  if (headings_override) {
    headings = *headings_override;
  } else {
    const auto ans = ask(render_elements_prompt(q), cfg, index, backend, embedder);
    elements_answer = ans.text;
    auto parsed = parse_element_list(ans.text);
    headings = unique_headings(std::move(parsed.headings));
  }
  if (headings.empty()) throw Error("no components identified");

  GenerationResult result{dsm::Dsm(headings), elements_answer, {}, 0, 0};
  auto& prov = result.dsm.provenance();
  prov["product"] = q.product;
  prov["linkage_type"] = q.linkage_type;
  prov["mode"] = to_string(cfg.mode);
  prov["model_id"] = cfg.model_id;
  prov["backend"] = backend.id();
  prov["headings_source"] = headings_override ? "override" : "model";
  prov["orientation"] = "row=Element A, column=Element B";
  if (cfg.mode == Mode::Retrieval) {
    std::vector<std::string> ids;
    for (const auto& c : index->chunks()) {
      if (std::find(ids.begin(), ids.end(), c.source_id) == ids.end()) ids.push_back(c.source_id);
    }
    std::string joined;
    for (const auto& id : ids) joined += (joined.empty() ? "" : ";") + id;
    prov["corpus"] = joined;
  }

  const std::size_t n = headings.size();
  auto& slots = result.pairs;
  slots.resize(n * n - n);
  for (std::size_t i = 0, s = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) {
        slots[s].row = i;
        slots[s].col = j;
        ++s;
      }

  std::vector<std::size_t> order(slots.size());
  std::iota(order.begin(), order.end(), 0);
  if (cfg.pair_order_seed) {
    std::mt19937_64 rng(*cfg.pair_order_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const auto k = next.fetch_add(1);
      if (k >= order.size()) return;
      auto& slot = slots[order[k]];
      try {
        const auto prompt = render_link_prompt(headings[slot.row], headings[slot.col], q.linkage_type);
        auto ans = ask(prompt, cfg, index, backend, embedder);
        const auto c = classify_link_answer_detailed(ans.text);
        if (!c.conforming) {
          spdlog::warn("non-conforming answer for ({}, {}): {}", headings[slot.row],
                       headings[slot.col], ans.text);
        }
        slot.answer = std::move(ans.text);
        slot.label = c.label;
        slot.conforming = c.conforming;
        slot.cached = ans.cached;
        slot.answered = true;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  const auto workers = std::min(cfg.max_in_flight, slots.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  for (const auto& slot : slots) {
    if (!slot.answered) continue;
    result.dsm.set(slot.row, slot.col, slot.label);
    ++result.pair_queries;
    if (!slot.conforming) ++result.nonconforming;
  }

  if (first_error) {
    std::string what = "pairwise generation aborted";
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      what += std::string(": ") + e.what();
    }
    throw GenerationAborted(what, std::move(result));
  }
  return result;
}

}  // namespace autodsm::qa
