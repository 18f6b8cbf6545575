#pragma once

// Line-level markdown scanner shared by the element counter and the
// skeleton transform. Both need the same answers (which bytes are markers,
// which are text) so the grammar lives in one place.
//
// Scope notes, kept deliberately small:
//   - emphasis delimiters pair within a single line
//   - fences are lines whose first non-space run is >= 3 backticks; while a
//     fence is open, any such line closes it (no length matching)
//   - '_' does not open or close emphasis mid-word, so identifiers like
//     snake_case are left alone; '*' has no such restriction
//   - inline code spans mask their contents from emphasis pairing

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace idiolect::detail {

enum class LeadKind { none, header, bullet, enumeration };

struct LineLead {
  LeadKind kind = LeadKind::none;
  size_t end = 0;  // bytes covered: indentation, marker, and its space
};

// Recognizes the line-anchored block markers. Headers allow at most three
// leading spaces; list markers allow any indentation (nested lists count).
LineLead scan_lead(std::string_view line);

struct FenceLine {
  bool is_fence = false;
  size_t ticks_end = 0;  // offset past the backtick run
};

FenceLine scan_fence(std::string_view line);

struct EmphasisMarker {
  size_t begin = 0;
  size_t end = 0;      // [begin, end) bytes of the delimiter run
  bool opens = false;  // true for the pair's opening run
};

struct InlineScan {
  int64_t bold = 0;
  int64_t italic = 0;
  // Paired emphasis delimiter spans, sorted by position. Unpaired
  // delimiters and inline code are plain text and do not appear.
  std::vector<EmphasisMarker> markers;
};

// Scans line[from..) for inline code spans and emphasis. A matched pair of
// delimiter runs of length m yields m/2 bold spans plus one italic when m
// is odd, so ***x*** counts one of each.
InlineScan scan_inline(std::string_view line, size_t from);

}  // namespace idiolect::detail
