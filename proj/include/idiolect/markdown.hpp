#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "idiolect/corpus.hpp"

namespace idiolect {

// Per-response tallies of the six markdown formatting elements.
struct MarkdownCounts {
  int64_t bold = 0;
  int64_t italic = 0;
  int64_t header = 0;
  int64_t enumeration = 0;
  int64_t bullet = 0;
  int64_t code_block = 0;

  bool operator==(const MarkdownCounts&) const = default;
};

enum class MarkdownElement { bold, italic, header, enumeration, bullet, code_block };

std::string to_string(MarkdownElement e);
MarkdownElement markdown_element_from_string(std::string_view s);

// Counting rules (line-anchored, fence-aware):
//   bold         **...** or __...__ spans; ***...*** counts bold and italic
//   italic       single *...* or _..._ spans whose delimiters are not part
//                of a bold marker
//   header       1-6 '#' plus a space, at most 3 leading spaces
//   enumeration  digits followed by '.' or ')' plus a space; leading
//                indentation allowed (nested lists count)
//   bullet       '-', '*', or '+' plus a space; leading indentation allowed
//   code_block   a pair of ``` fences counts once; an unclosed fence counts
//                as one block extending to the end
// Lines inside a fenced block contribute nothing else; inline code spans
// (single backticks) are ignored. Unclosed bold/italic delimiters count 0.
MarkdownCounts count_elements(std::string_view text);

int64_t count_for(const MarkdownCounts& counts, MarkdownElement e);

// Empirical distribution of per-response element counts for one label.
// Densities sum to 1.
std::map<int64_t, double> element_histogram(const Corpus& corpus,
                                            const std::string& label,
                                            MarkdownElement element);

}  // namespace idiolect
