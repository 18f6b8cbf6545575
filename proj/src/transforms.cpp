#include "idiolect/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "idiolect/errors.hpp"
#include "idiolect/rng.hpp"
#include "markdown_scan.hpp"

namespace idiolect {

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::remove_special: return "remove-special";
    case TransformKind::shuffle_words: return "shuffle-words";
    case TransformKind::shuffle_letters: return "shuffle-letters";
    case TransformKind::truncate_tokens: return "truncate-tokens";
    case TransformKind::markdown_skeleton: return "markdown-skeleton";
  }
  throw ValidationError("invalid transform kind");
}

TransformKind transform_kind_from_string(std::string_view s) {
  if (s == "remove-special") return TransformKind::remove_special;
  if (s == "shuffle-words") return TransformKind::shuffle_words;
  if (s == "shuffle-letters") return TransformKind::shuffle_letters;
  if (s == "truncate-tokens") return TransformKind::truncate_tokens;
  if (s == "markdown-skeleton") return TransformKind::markdown_skeleton;
  throw ValidationError("unknown transform kind \"" + std::string(s) + "\"");
}

void TransformSpec::validate() const {
  const bool is_shuffle =
      kind == TransformKind::shuffle_words || kind == TransformKind::shuffle_letters;
  if (is_shuffle && !seed)
    throw ValidationError(to_string(kind) + " requires a seed");
  if (!is_shuffle && seed)
    throw ValidationError(to_string(kind) + " does not take a seed");
  if (kind == TransformKind::truncate_tokens) {
    if (!token_count || *token_count < 1)
      throw ValidationError("truncate-tokens requires a token count >= 1");
  } else if (token_count) {
    throw ValidationError(to_string(kind) + " does not take a token count");
  }
}

namespace {

bool is_word_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::string remove_special_characters(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string word;
  auto flush = [&] {
    // Apostrophes survive only between word characters, so trim the rest.
    size_t lo = 0, hi = word.size();
    while (lo < hi && word[lo] == '\'') ++lo;
    while (hi > lo && word[hi - 1] == '\'') --hi;
    if (hi > lo) {
      if (!out.empty()) out += ' ';
      out.append(word, lo, hi - lo);
    }
    word.clear();
  };
  for (char c : text) {
    if (is_word_byte(c) || c == '\'')
      word += c;
    else
      flush();
  }
  flush();
  return out;
}

std::string shuffle_words(std::string_view text, uint64_t seed) {
  auto words = whitespace_tokens(text);
  Rng rng(seed);
  rng.shuffle(words);
  return join_words(words);
}

std::string shuffle_letters(std::string_view text, uint64_t seed) {
  auto words = whitespace_tokens(text);
  std::string pool;
  for (const auto& w : words)
    for (char c : w)
      if (is_ascii_letter(c)) pool += c;

  Rng rng(seed);
  rng.shuffle(pool);

  // Redeal the permuted pool into the original pattern; non-letter bytes
  // (digits, apostrophes) stay where they were.
  size_t next = 0;
  std::vector<std::string> redealt;
  redealt.reserve(words.size());
  for (const auto& w : words) {
    std::string r = w;
    for (char& c : r)
      if (is_ascii_letter(c)) c = pool[next++];
    redealt.push_back(std::move(r));
  }
  return join_words(redealt);
}

std::string truncate_tokens(std::string_view text, size_t k) {
  if (k < 1) throw ValidationError("truncate-tokens requires a token count >= 1");
  auto tokens = whitespace_tokens(text);
  if (tokens.size() > k) tokens.resize(k);
  return join_words(tokens);
}

namespace {

std::string skeleton_line(std::string_view line, bool& in_fence) {
  std::string out;

  auto fence = detail::scan_fence(line);
  if (fence.is_fence) {
    in_fence = !in_fence;
    out.assign(line.substr(0, fence.ticks_end));
    std::string_view info = line.substr(fence.ticks_end);
    size_t text_at = info.find_first_not_of(" \t");
    if (text_at != std::string_view::npos) {
      if (text_at > 0) out += ' ';
      out += "xxx";
    }
    return out;
  }
  if (in_fence) {
    if (line.find_first_not_of(" \t") != std::string_view::npos) out = "xxx";
    return out;
  }

  auto lead = detail::scan_lead(line);
  out.assign(line.substr(0, lead.end));
  auto inl = detail::scan_inline(line, lead.end);

  // Walk the remainder as alternating text gaps and emphasis markers. A
  // maximal text run becomes one "xxx"; whitespace at a run boundary keeps
  // a single space so atoms stay separated. A text run abutting the OUTER
  // face of an underscore pair (before its opener, after its closer) also
  // gets a space: the replacement letters would otherwise put the
  // underscore in intraword position, where it no longer parses as
  // emphasis when the skeleton is scanned again. Inner faces stay glued so
  // the delimiters keep their content.
  bool gap_pending = false;
  const bool lead_present = lead.kind != detail::LeadKind::none;
  bool first_atom = true;
  bool after_underscore_close = false;
  auto emit = [&](std::string_view atom, bool keep_apart) {
    if ((gap_pending && !(first_atom && lead_present)) || (keep_apart && !first_atom))
      out += ' ';
    out += atom;
    gap_pending = false;
    first_atom = false;
  };

  size_t marker_idx = 0;
  size_t i = lead.end;
  while (i < line.size()) {
    if (marker_idx < inl.markers.size() && inl.markers[marker_idx].begin == i) {
      const auto& marker = inl.markers[marker_idx++];
      const bool underscore = line[marker.begin] == '_';
      emit(line.substr(marker.begin, marker.end - marker.begin),
           underscore && marker.opens);
      after_underscore_close = underscore && !marker.opens;
      i = marker.end;
      continue;
    }
    if (line[i] == ' ' || line[i] == '\t') {
      if (!first_atom || lead_present) gap_pending = true;
      ++i;
      continue;
    }
    // Text run: everything up to the next marker, whitespace included when
    // it does not touch a marker boundary.
    size_t end = (marker_idx < inl.markers.size()) ? inl.markers[marker_idx].begin : line.size();
    size_t run_end = i;
    size_t last_text = i;
    while (run_end < end) {
      if (line[run_end] != ' ' && line[run_end] != '\t') last_text = run_end;
      ++run_end;
    }
    emit("xxx", after_underscore_close);
    after_underscore_close = false;
    if (last_text + 1 < run_end) gap_pending = true;
    i = run_end;
  }
  return out;
}

}  // namespace

std::string markdown_skeleton(std::string_view text) {
  std::string out;
  bool in_fence = false;
  size_t pos = 0;
  bool first = true;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!first) out += '\n';
    out += skeleton_line(line, in_fence);
    first = false;

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return out;
}

namespace {

std::string transform_response(const TransformSpec& spec, const Document& doc,
                               uint64_t stream_seed) {
  switch (spec.kind) {
    case TransformKind::remove_special: return remove_special_characters(doc.response);
    case TransformKind::shuffle_words: return shuffle_words(doc.response, stream_seed);
    case TransformKind::shuffle_letters: return shuffle_letters(doc.response, stream_seed);
    case TransformKind::truncate_tokens: return truncate_tokens(doc.response, *spec.token_count);
    case TransformKind::markdown_skeleton: return markdown_skeleton(doc.response);
  }
  throw ValidationError("invalid transform kind");
}

}  // namespace

Corpus apply_transform(const TransformSpec& spec, const Corpus& corpus) {
  spec.validate();
  std::vector<Document> out;
  out.reserve(corpus.size());
  for (const Document& doc : corpus.documents()) {
    Document copy = doc;
    try {
      // One stream per document keyed by (seed, id): corpus order and any
      // parallel fan-out cannot change per-document results.
      uint64_t stream_seed = spec.seed ? derive_seed(*spec.seed, doc.id) : 0;
      copy.response = transform_response(spec, doc, stream_seed);
    } catch (const std::exception& e) {
      throw ValidationError("transform failed for document \"" + doc.id + "\": " + e.what());
    }
    copy.meta["transform"] = to_string(spec.kind);
    out.push_back(std::move(copy));
  }
  return Corpus(std::move(out));
}

}  // namespace idiolect
