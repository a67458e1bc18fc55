#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autodsm/corpus.hpp"
#include "autodsm/dsm.hpp"
#include "autodsm/oracle.hpp"
#include "autodsm/retrieval.hpp"

namespace autodsm::qa {

// The two questions and the header of the retrieval prompt. Substitution is
// literal: "{product}" appears twice and grammar is left as is.
inline constexpr std::string_view kElementsTemplate =
    "Identify the main {product} components that make up a {product}. Output the answer as a "
    "list and a python list. Do not output anything else. If you don't know the answer, "
    "strictly state I don't know instead of making up an answer.";

inline constexpr std::string_view kLinkTemplate =
    "Are {Element A} and {Element B} {linkage-type} linked? State Yes or No. If you don't know "
    "the answer, strictly state I don't know instead of making up an answer.";

inline constexpr std::string_view kContextHeader =
    "Use the following pieces of context to answer the question. If you don't know the answer, "
    "say I don't know.";

struct ProductQuery {
  std::string product;
  std::string linkage_type;  // may be empty: any kind of link
};

enum class Mode { Retrieval, Direct };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view s);

struct RunConfig {
  std::size_t top_k = 4;
  Mode mode = Mode::Retrieval;
  corpus::SplitConfig split;
  std::string model_id = oracle::kDefaultModel;
  double temperature = 0.0;
  // Concurrent pairwise questions.
  std::size_t max_in_flight = 4;
  // Upper bound on the stuffed prompt, in characters.
  std::size_t context_budget = 12000;
  // Shuffles the order pairwise questions are issued in; the assembled DSM
  // does not depend on it.
  std::optional<std::uint64_t> pair_order_seed;
};

std::string render_elements_prompt(const ProductQuery& q);

/// Throws ConfigError when a or b is empty or a == b. An empty linkage type
/// leaves a single space: "Are A and B linked? ...".
std::string render_link_prompt(std::string_view a, std::string_view b,
                               std::string_view linkage_type);

/// Header, retrieved chunk texts and question separated by blank lines.
/// Chunks are dropped from the end (lowest ranked first) until the prompt
/// fits `budget` characters; `dropped` receives how many were removed.
std::string compose_stuffed_prompt(std::span<const std::string> chunk_texts,
                                   std::string_view question, std::size_t budget,
                                   std::size_t* dropped = nullptr);

/// Retrieval mode needs `index` and `embedder`; direct mode sends the bare
/// question and ignores both.
oracle::CompletionAnswer ask(std::string_view question, const RunConfig& cfg,
                             const retrieval::VectorIndex* index, oracle::ChatBackend& backend,
                             const retrieval::Embedder* embedder);

/// The request ask() would send, without sending it.
oracle::CompletionRequest build_request(std::string_view question, const RunConfig& cfg,
                                        const retrieval::VectorIndex* index,
                                        const retrieval::Embedder* embedder);

struct ElementList {
  std::vector<std::string> headings;
  bool unknown = false;  // the model answered "I don't know"
};

/// Takes the last bracketed list in the answer (quoted or bare items); falls
/// back to "1." / "-" bullet lines. Throws ParseError when neither exists
/// and the answer is not "I don't know".
ElementList parse_element_list(std::string_view answer);

struct Classification {
  dsm::LinkLabel label;
  bool conforming;  // false when the answer fit none of Yes / No / I don't know
};

Classification classify_link_answer_detailed(std::string_view answer);

/// Total: Yes -> Link, No -> NoLink, everything else -> Unknown.
dsm::LinkLabel classify_link_answer(std::string_view answer);

struct PairAnswer {
  std::size_t row = 0;
  std::size_t col = 0;
  std::string answer;
  dsm::LinkLabel label = dsm::LinkLabel::Unknown;
  bool conforming = true;
  bool cached = false;
  bool answered = false;
};

struct GenerationResult {
  dsm::Dsm dsm;
  std::optional<std::string> elements_answer;  // absent with a headings override
  std::vector<PairAnswer> pairs;               // row-major over off-diagonal cells
  std::size_t nonconforming = 0;
  std::size_t pair_queries = 0;
};

/// Thrown when a pairwise question fails after headings were known. Carries
/// everything answered so far.
class GenerationAborted : public Error {
 public:
  GenerationAborted(const std::string& what, GenerationResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const GenerationResult& partial() const { return partial_; }

 private:
  GenerationResult partial_;
};

/// Builds a DSM: headings from the elements question (or `headings_override`
/// verbatim), then one pairwise question per ordered off-diagonal pair. The
/// answer to "Are {A} and {B} linked?" lands at (row A, column B).
GenerationResult generate_dsm(const retrieval::VectorIndex* index, const ProductQuery& q,
                              const RunConfig& cfg, oracle::ChatBackend& backend,
                              const retrieval::Embedder* embedder,
                              const std::optional<std::vector<std::string>>& headings_override =
                                  std::nullopt);

}  // namespace autodsm::qa
