#include "idiolect/markdown.hpp"

#include <algorithm>
#include <cctype>

#include "idiolect/errors.hpp"
#include "markdown_scan.hpp"

namespace idiolect {

std::string to_string(MarkdownElement e) {
  switch (e) {
    case MarkdownElement::bold: return "bold";
    case MarkdownElement::italic: return "italic";
    case MarkdownElement::header: return "header";
    case MarkdownElement::enumeration: return "enumeration";
    case MarkdownElement::bullet: return "bullet";
    case MarkdownElement::code_block: return "code_block";
  }
  throw ValidationError("invalid markdown element");
}

MarkdownElement markdown_element_from_string(std::string_view s) {
  if (s == "bold") return MarkdownElement::bold;
  if (s == "italic") return MarkdownElement::italic;
  if (s == "header") return MarkdownElement::header;
  if (s == "enumeration") return MarkdownElement::enumeration;
  if (s == "bullet") return MarkdownElement::bullet;
  if (s == "code_block") return MarkdownElement::code_block;
  throw ValidationError("unknown markdown element \"" + std::string(s) + "\"");
}

namespace detail {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t'; }
bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

LineLead scan_lead(std::string_view line) {
  size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  const size_t indent = i;

  if (i < line.size() && line[i] == '#') {
    size_t hashes = 0;
    while (i + hashes < line.size() && line[i + hashes] == '#') ++hashes;
    bool spaces_ok = indent <= 3 && line.find_first_not_of(' ') == indent;
    if (spaces_ok && hashes <= 6 && i + hashes < line.size() && line[i + hashes] == ' ')
      return {LeadKind::header, i + hashes + 1};
    return {};
  }

  if (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '+')) {
    if (i + 1 < line.size() && line[i + 1] == ' ') return {LeadKind::bullet, i + 2};
    return {};
  }

  if (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    size_t j = i;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
    if (j < line.size() && (line[j] == '.' || line[j] == ')') && j + 1 < line.size() &&
        line[j + 1] == ' ')
      return {LeadKind::enumeration, j + 2};
  }
  return {};
}

FenceLine scan_fence(std::string_view line) {
  size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  size_t ticks = 0;
  while (i + ticks < line.size() && line[i + ticks] == '`') ++ticks;
  if (ticks >= 3) return {true, i + ticks};
  return {};
}

namespace {

struct DelimRun {
  char ch = 0;
  size_t begin = 0;
  size_t end = 0;  // one past the last delimiter still unconsumed
  bool can_open = false;
  bool can_close = false;
};

void record_pair(InlineScan& out, size_t m) {
  out.bold += static_cast<int64_t>(m / 2);
  out.italic += static_cast<int64_t>(m % 2);
}

}  // namespace

InlineScan scan_inline(std::string_view line, size_t from) {
  InlineScan out;

  // Inline code: a backtick run is closed by the next run of the same
  // length. Anything inside is masked; an unmatched run is literal text.
  std::vector<char> masked(line.size(), 0);
  for (size_t i = from; i < line.size();) {
    if (line[i] != '`') {
      ++i;
      continue;
    }
    size_t n = 0;
    while (i + n < line.size() && line[i + n] == '`') ++n;
    size_t close = std::string_view::npos;
    for (size_t j = i + n; j + n <= line.size();) {
      if (line[j] != '`') {
        ++j;
        continue;
      }
      size_t k = 0;
      while (j + k < line.size() && line[j + k] == '`') ++k;
      if (k == n) {
        close = j;
        break;
      }
      j += k;
    }
    if (close == std::string_view::npos) {
      i += n;
      continue;
    }
    for (size_t j = i; j < close + n; ++j) masked[j] = 1;
    i = close + n;
  }

  std::vector<DelimRun> stack;
  for (size_t i = from; i < line.size();) {
    if (masked[i] || (line[i] != '*' && line[i] != '_')) {
      ++i;
      continue;
    }
    const char ch = line[i];
    size_t n = 0;
    while (i + n < line.size() && line[i + n] == ch && !masked[i + n]) ++n;

    DelimRun run{ch, i, i + n, false, false};
    const bool prev_exists = i > from;
    const bool next_exists = i + n < line.size();
    const char prev = prev_exists ? line[i - 1] : ' ';
    const char next = next_exists ? line[i + n] : ' ';
    run.can_open = next_exists && !is_space(next);
    run.can_close = prev_exists && !is_space(prev);
    if (ch == '_') {
      // No intraword emphasis for underscores.
      if (prev_exists && is_word_char(prev)) run.can_open = false;
      if (next_exists && is_word_char(next)) run.can_close = false;
    }

    if (run.can_close) {
      while (run.begin < run.end) {
        auto opener = std::find_if(stack.rbegin(), stack.rend(),
                                   [&](const DelimRun& r) { return r.ch == ch; });
        if (opener == stack.rend()) break;
        // Runs between the opener and this closer can no longer match.
        stack.erase(opener.base(), stack.end());
        DelimRun& open = stack.back();
        const size_t m = std::min(open.end - open.begin, run.end - run.begin);
        record_pair(out, m);
        out.markers.push_back({open.end - m, open.end, true});
        out.markers.push_back({run.begin, run.begin + m, false});
        open.end -= m;
        run.begin += m;
        if (open.begin == open.end) stack.pop_back();
      }
    }
    if (run.begin < run.end && run.can_open) stack.push_back(run);
    i += n;
  }

  std::sort(out.markers.begin(), out.markers.end(),
            [](const EmphasisMarker& a, const EmphasisMarker& b) { return a.begin < b.begin; });
  return out;
}

}  // namespace detail

MarkdownCounts count_elements(std::string_view text) {
  MarkdownCounts counts;
  bool in_fence = false;

  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto fence = detail::scan_fence(line);
    if (fence.is_fence) {
      if (!in_fence) ++counts.code_block;
      in_fence = !in_fence;
    } else if (!in_fence) {
      auto lead = detail::scan_lead(line);
      switch (lead.kind) {
        case detail::LeadKind::header: ++counts.header; break;
        case detail::LeadKind::bullet: ++counts.bullet; break;
        case detail::LeadKind::enumeration: ++counts.enumeration; break;
        case detail::LeadKind::none: break;
      }
      auto inl = detail::scan_inline(line, lead.end);
      counts.bold += inl.bold;
      counts.italic += inl.italic;
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return counts;
}

int64_t count_for(const MarkdownCounts& counts, MarkdownElement e) {
  switch (e) {
    case MarkdownElement::bold: return counts.bold;
    case MarkdownElement::italic: return counts.italic;
    case MarkdownElement::header: return counts.header;
    case MarkdownElement::enumeration: return counts.enumeration;
    case MarkdownElement::bullet: return counts.bullet;
    case MarkdownElement::code_block: return counts.code_block;
  }
  throw ValidationError("invalid markdown element");
}

std::map<int64_t, double> element_histogram(const Corpus& corpus, const std::string& label,
                                            MarkdownElement element) {
  auto docs = corpus.with_label(label);
  if (docs.empty())
    throw ValidationError("label \"" + label + "\" has no documents in this corpus");

  std::map<int64_t, double> hist;
  for (const Document* doc : docs) ++hist[count_for(count_elements(doc->response), element)];
  for (auto& [count, density] : hist) density /= static_cast<double>(docs.size());
  return hist;
}

}  // namespace idiolect
